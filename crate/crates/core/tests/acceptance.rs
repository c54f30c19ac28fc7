//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mackeylab::catmod::{ext, resolve, CatModule, FreeModule, SkeletonCategory};
use mackeylab::group::{named, FiniteGroup, GroupSpec, Perm, SubgroupId};
use mackeylab::gset::{homogeneous_map, pullback_general, pullback_homogeneous, GSet};
use mackeylab::linalg::{AbelianGroup, Int};
use mackeylab::span::{oracle, MackeyCategory, MackeySkeleton, Obj};
use mackeylab::system::{Axiom, MackeySystem, SystemSpec};
use mackeylab::tower::{ClosedThread, Tower, TowerMackey};
use mackeylab::transfer::{is_isomorphism, Transfer};
use mackeylab::Limits;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn full(g: FiniteGroup) -> Arc<MackeySystem> {
    Arc::new(MackeySystem::full(Arc::new(g)))
}

fn skeleton(sys: Arc<MackeySystem>) -> Arc<MackeySkeleton> {
    Arc::new(MackeySkeleton::new(Arc::new(MackeyCategory::new(sys))).unwrap())
}

fn c2_trivial_family() -> Arc<MackeySystem> {
    let g = Arc::new(named::cyclic(2));
    Arc::new(MackeySystem::with_family(g.clone(), &[g.trivial_subgroup()]).unwrap())
}

/// Free module on one or two random objects, or its quotient by one random element.
fn random_module(cat: &Arc<SkeletonCategory>, rng: &mut ChaCha8Rng) -> Arc<CatModule> {
    let n = cat.num_objects();
    let gens: Vec<usize> = (0..rng.gen_range(1..=2))
        .map(|_| rng.gen_range(0..n))
        .collect();
    let f = FreeModule::new(cat.clone(), gens).unwrap();
    if rng.gen_bool(0.3) {
        return f.module.clone();
    }
    let x = rng.gen_range(0..n);
    let g = f.module.num_gens(x);
    if g == 0 {
        return f.module.clone();
    }
    let v: Vec<Int> = (0..g).map(|_| rng.gen_range(-3..=3)).collect();
    let sub = FreeModule::new(cat.clone(), vec![x]).unwrap();
    let phi = sub.map_to(f.module.clone(), &[v]).unwrap();
    let (c, _) = phi.cokernel().unwrap();
    Arc::new(c.simplify().0)
}

// ---------- independent oracles ----------

/// Subgroups as sets of permutation images, by closing every pair of elements.
fn brute_subgroups(g: &FiniteGroup) -> BTreeSet<BTreeSet<Vec<u32>>> {
    let elems: Vec<Perm> = g.elements().to_vec();
    let close = |gens: &[&Perm]| -> BTreeSet<Vec<u32>> {
        let id = Perm::identity(g.degree());
        let mut set: BTreeSet<Vec<u32>> = BTreeSet::from([id.images().to_vec()]);
        let mut frontier = vec![id];
        while let Some(p) = frontier.pop() {
            for q in gens {
                let r = p.compose(q);
                if set.insert(r.images().to_vec()) {
                    frontier.push(r);
                }
            }
        }
        set
    };
    let mut out = BTreeSet::new();
    for a in &elems {
        for b in &elems {
            out.insert(close(&[a, b]));
        }
    }
    out
}

fn brute_class_count(g: &FiniteGroup) -> usize {
    let subs = brute_subgroups(g);
    let elems: Vec<Perm> = g.elements().to_vec();
    let mut seen: BTreeSet<BTreeSet<Vec<u32>>> = BTreeSet::new();
    let mut classes = 0;
    for s in &subs {
        if seen.contains(s) {
            continue;
        }
        classes += 1;
        for x in &elems {
            let xi = x.inverse();
            let conj: BTreeSet<Vec<u32>> = s
                .iter()
                .map(|p| {
                    xi.compose(&Perm::from_images(p.clone()).unwrap())
                        .compose(x)
                        .images()
                        .to_vec()
                })
                .collect();
            seen.insert(conj);
        }
    }
    classes
}

fn brute_cyclic_count(g: &FiniteGroup) -> usize {
    let mut subs: BTreeSet<BTreeSet<Vec<u32>>> = BTreeSet::new();
    for x in g.elements() {
        let mut set = BTreeSet::new();
        let mut p = Perm::identity(g.degree());
        loop {
            if !set.insert(p.images().to_vec()) {
                break;
            }
            p = p.compose(x);
        }
        subs.insert(set);
    }
    subs.len()
}

/// `Ext^k_{ZC2}(Z, Z_ε)` from the periodic resolution `ZC2 <-(1-t)- ZC2 <-(1+t)- ZC2 <-(1-t)- ...`.
fn periodic_ext(k: usize, eps: Int) -> AbelianGroup {
    // Hom(ZC2, Z_ε) = Z; 1 - t acts as 1 - ε and 1 + t as 1 + ε.
    let d = |i: usize| -> Int {
        if i.is_multiple_of(2) {
            1 - eps
        } else {
            1 + eps
        }
    };
    let outgoing = d(k);
    let incoming = if k == 0 { 0 } else { d(k - 1) };
    if outgoing != 0 {
        return AbelianGroup::zero();
    }
    AbelianGroup::cyclic(incoming.unsigned_abs() as Int)
}

// ---------- criteria ----------

fn stabilizer_classes(g: &FiniteGroup, x: &GSet) -> Vec<SubgroupId> {
    let mut v: Vec<SubgroupId> = x.orbits().iter().map(|o| g.rep_of(o.stabilizer)).collect();
    v.sort();
    v
}

fn criterion_1() -> Outcome {
    for g in [
        named::symmetric3(),
        named::dihedral8(),
        named::quaternion8(),
        named::alternating4(),
    ] {
        let g = Arc::new(g);
        let reps = g.class_reps();
        let spaces: BTreeMap<SubgroupId, Arc<GSet>> = g
            .subgroups()
            .iter()
            .map(|s| (s.id, Arc::new(GSet::homogeneous(g.clone(), s.id))))
            .collect();
        let mut pairs = 0usize;
        for &k in &reps {
            for s1 in g.subgroups() {
                for s2 in g.subgroups() {
                    let (h1, h2) = (s1.id, s2.id);
                    for &i in &g.fixed_cosets(h1, k) {
                        let a = g.cosets(k).reps[i];
                        let f = ok(homogeneous_map(&spaces[&h1], &spaces[&k], a))?;
                        for &j in &g.fixed_cosets(h2, k) {
                            let b = g.cosets(k).reps[j];
                            let f2 = ok(homogeneous_map(&spaces[&h2], &spaces[&k], b))?;
                            let fast = ok(pullback_homogeneous(&f, &f2))?;
                            let slow = ok(pullback_general(&f, &f2))?;
                            ensure!(
                                stabilizer_classes(&g, &fast.object)
                                    == stabilizer_classes(&g, &slow.object),
                                "{}: pullback of G/{} -> G/{} <- G/{} differs",
                                g.name(),
                                h1,
                                k,
                                h2
                            );
                            pairs += 1;
                        }
                    }
                }
            }
        }
        println!("    {}: {pairs} cospans", g.name());
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    for g in [named::cyclic(2), named::cyclic(4), named::symmetric3()] {
        let cat = MackeyCategory::new(full(g));
        let grp = cat.group().clone();
        let targets: Vec<Obj> = grp
            .subgroups()
            .iter()
            .map(|s| Obj::Orbit(s.id))
            .chain([Obj::Terminal])
            .collect();
        for s in grp.subgroups() {
            for &y in &targets {
                let basis = ok(cat.hom_basis(s.id, y))?;
                let classes = oracle::span_classes(&cat, s.id, y);
                ensure!(
                    basis.len() == classes.len(),
                    "{}: [G/{}, {}] rank {} vs {}",
                    grp.name(),
                    s.id,
                    y,
                    basis.len(),
                    classes.len()
                );
                for sp in &basis.spans {
                    ensure!(
                        classes.iter().filter(|c| c.contains(sp)).count() == 1,
                        "basis span {} not in exactly one class",
                        sp.text()
                    );
                }
            }
        }
        let one = grp.trivial_subgroup();
        let whole = grp.whole();
        if grp.order() == 2 {
            let r = ok(cat.hom_basis(one, Obj::Orbit(one)))?.len();
            ensure!(r == 2, "C2: rank [G/1, G/1] = {r}");
        }
        if grp.order() == 6 {
            let r = ok(cat.hom_basis(whole, Obj::Orbit(whole)))?.len();
            ensure!(r == 4, "S3: rank [G/G, G/G] = {r}");
        }
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    for (g, expected) in [
        (named::symmetric3(), 4),
        (named::dihedral8(), 8),
        (named::alternating4(), 5),
    ] {
        let brute = brute_class_count(&g);
        ensure!(
            brute == expected,
            "{}: oracle finds {brute} classes",
            g.name()
        );
        let cat = MackeyCategory::new(full(g));
        let grp = cat.group().clone();
        let v = ok(cat.burnside_eval(grp.whole()))?;
        ensure!(
            v.rank() == brute,
            "{}: B(G/G) has rank {}, expected {brute}",
            grp.name(),
            v.rank()
        );
        // basis labelled by one subgroup per conjugacy class
        let mut classes: Vec<usize> = v.labels.iter().map(|&l| grp.class_of(l)).collect();
        classes.sort();
        classes.dedup();
        ensure!(
            classes.len() == brute,
            "{}: labels do not cover each class once",
            grp.name()
        );
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let l = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for g in [named::cyclic(2), named::symmetric3()] {
        let name = g.name().to_string();
        let mk = skeleton(full(g));
        let b = Arc::new(ok(mk.burnside())?);
        for i in 0..6 {
            let m = random_module(&mk.skeleton, &mut rng);
            for k in [1, 2] {
                let e = ok(ext(b.clone(), &m, k, &l))?.group;
                ensure!(e.is_zero(), "{name}: Ext^{k}(B, M_{i}) = {e}");
            }
        }
    }
    let mk = skeleton(c2_trivial_family());
    let b = Arc::new(ok(mk.burnside())?);
    let res = ok(resolve(b.clone(), 2, &l))?;
    let omega = res.syzygies[0].0.clone();
    // the first syzygy of Z over ZC2 is the sign representation
    ensure!(
        omega.value(0) == AbelianGroup::free(1),
        "first syzygy has value {}",
        omega.value(0)
    );
    let e1 = ok(ext(b.clone(), &omega, 1, &l))?.group;
    ensure!(
        e1 == periodic_ext(1, -1),
        "Ext^1(B, syzygy) = {e1}, oracle {}",
        periodic_ext(1, -1)
    );
    ensure!(e1 == AbelianGroup::cyclic(2), "Ext^1(B, syzygy) = {e1}");
    let e2 = ok(ext(b.clone(), &b, 2, &l))?.group;
    ensure!(
        e2 == periodic_ext(2, 1),
        "Ext^2(B, B) = {e2}, oracle {}",
        periodic_ext(2, 1)
    );
    ensure!(e2 == AbelianGroup::cyclic(2), "Ext^2(B, B) = {e2}");
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in [named::cyclic(2), named::cyclic(4), named::symmetric3()] {
        let name = g.name().to_string();
        let t = ok(Transfer::new(full(g)))?;
        ok(t.check_functoriality())?;
        let z = Arc::new(t.orbit.constant_module());
        let coend = ok(t.induce_coend(&z))?;
        for x in 0..t.orbit.objects.len() {
            let closed = ok(t.induce_closed_form(&z, x))?;
            ensure!(
                coend.module.value(x) == closed,
                "{name}: coend and closed form differ at object {x}"
            );
        }
        let ind = ok(t.induce(&z))?;
        let b = Arc::new(ok(t.mackey.burnside())?);
        let cmp = ok(t.burnside_comparison(&ind, b.clone()))?;
        ensure!(
            ok(is_isomorphism(&cmp))?,
            "{name}: induce(Z) -> B is not an isomorphism"
        );
        ensure!(ind.module.values() == b.values(), "{name}: values differ");
        let mut pairs = 0;
        for _ in 0..10 {
            let tm = random_module(&t.orbit.skeleton, &mut rng);
            let m = random_module(&t.mackey.skeleton, &mut rng);
            let coend = ok(t.induce_coend(&tm))?;
            for x in 0..t.orbit.objects.len() {
                let closed = ok(t.induce_closed_form(&tm, x))?;
                ensure!(
                    coend.module.value(x) == closed,
                    "{name}: coend and closed form differ on a random module"
                );
            }
            let r = ok(t.adjunction_check(&tm, &m))?;
            ensure!(r.holds(), "{name}: adjunction fails: {r:?}");
            pairs += 1;
        }
        println!("    {name}: {pairs} adjunction pairs");
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    let l = Limits::default();
    let t = ok(Transfer::new(full(named::symmetric3())))?;
    let z = Arc::new(t.orbit.constant_module());
    let res = ok(resolve(z.clone(), 3, &l))?;
    let ind = ok(t.induce_resolution(&res))?;
    let steps = ok(ind.exact_steps(res.terminated))?;
    ensure!(
        steps.iter().all(|&b| b),
        "induced resolution not exact: {steps:?}"
    );
    let b = Arc::new(ok(t.mackey.burnside())?);
    ensure!(
        ind.augmentation.target.values() == b.values(),
        "augmentation does not land in B"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut tests: Vec<(Arc<MackeySystem>, Arc<CatModule>)> =
        vec![(t.orbit.system.clone(), b.clone())];
    for _ in 0..5 {
        tests.push((
            t.orbit.system.clone(),
            random_module(&t.mackey.skeleton, &mut rng),
        ));
    }
    for _ in 0..3 {
        let tm = random_module(&t.orbit.skeleton, &mut rng);
        tests.push((t.orbit.system.clone(), ok(t.induce(&tm))?.module));
    }
    let mut checks = 0;
    for (_, m) in &tests {
        for k in 0..=2 {
            let lhs = ok(ext(b.clone(), m, k, &l))?.group;
            let rhs = ok(ext(z.clone(), &ok(t.restrict(m))?, k, &l))?.group;
            ensure!(lhs == rhs, "S3 degree {k}: {lhs} vs {rhs}");
            checks += 1;
        }
    }
    // a family where both sides carry torsion
    let t2 = ok(Transfer::new(c2_trivial_family()))?;
    let b2 = Arc::new(ok(t2.mackey.burnside())?);
    let z2 = Arc::new(t2.orbit.constant_module());
    let mut mods = vec![b2.clone()];
    for _ in 0..3 {
        mods.push(random_module(&t2.mackey.skeleton, &mut rng));
    }
    for m in &mods {
        for k in 0..=2 {
            let lhs = ok(ext(b2.clone(), m, k, &l))?.group;
            let rhs = ok(ext(z2.clone(), &ok(t2.restrict(m))?, k, &l))?.group;
            ensure!(
                lhs == rhs,
                "C2 with family {{1}} degree {k}: {lhs} vs {rhs}"
            );
            checks += 1;
        }
    }
    println!("    {checks} Ext comparisons");
    Ok(())
}

fn criterion_7() -> Outcome {
    let l = Limits::default();
    let depth = 4;
    let tower = Arc::new(ok(Tower::two_adic(depth, &l))?);
    let tm = TowerMackey::new(tower.clone());
    for n in 0..=depth {
        let g = tower.level(n).map_err(|e| e.to_string())?.clone();
        let ids: Vec<SubgroupId> = g.subgroups().iter().map(|s| s.id).collect();
        let targets: Vec<Obj> = ids
            .iter()
            .map(|&i| Obj::Orbit(i))
            .chain([Obj::Terminal])
            .collect();
        for &u in &ids {
            for &v in ids.iter().filter(|&&v| g.is_subgroup_of(v, u)) {
                for &w in ids.iter().filter(|&&w| g.is_subgroup_of(w, v)) {
                    for &y in &targets {
                        let two = ok(tm.connecting_map(n, w, v, y))?
                            .mul(&ok(tm.connecting_map(n, v, u, y))?);
                        ensure!(
                            two == ok(tm.connecting_map(n, w, u, y))?,
                            "level {n}: composite law fails for {w} <= {v} <= {u}"
                        );
                    }
                }
            }
        }
    }
    let r = ok(tm.colim_burnside(&ClosedThread::trivial(&tower), depth))?;
    for n in 0..=depth {
        let g = tower.level(n).map_err(|e| e.to_string())?;
        let oracle = brute_cyclic_count(g);
        ensure!(
            r.ranks[n] == n + 1 && oracle == n + 1,
            "level {n}: rank {} oracle {oracle}",
            r.ranks[n]
        );
    }
    let res = ok(tm.resolve_burnside(depth, 2, &l))?;
    for thread in [ClosedThread::trivial(&tower), ClosedThread::whole(&tower)] {
        let ev = ok(tm.evaluate_resolution_at_thread(&res, &thread, depth))?;
        ensure!(
            ev.levels.len() == depth + 1,
            "evaluated {} levels",
            ev.levels.len()
        );
        ensure!(ev.all_exact(), "not exact: {ev:?}");
        ensure!(
            ev.levels.iter().all(|lv| lv.commutes),
            "restriction does not commute with the resolution"
        );
    }
    Ok(())
}

fn read<T: serde::de::DeserializeOwned>(path: PathBuf) -> T {
    serde_json::from_str(
        &std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display())),
    )
    .unwrap()
}

fn criterion_8() -> Outcome {
    let l = Limits::default();
    let mut groups = 0;
    for entry in ok(std::fs::read_dir(corpus().join("groups")))? {
        let path = ok(entry)?.path();
        let spec: GroupSpec = read(path.clone());
        let g = Arc::new(ok(FiniteGroup::from_spec(&spec, &l))?);
        let rep = MackeySystem::full(g).validate();
        ensure!(
            rep.passed(),
            "{}: full system rejected: {:?}",
            path.display(),
            rep.violation
        );
        groups += 1;
    }
    ensure!(groups >= 6, "only {groups} corpus groups");
    let s3 = Arc::new(named::symmetric3());
    for (file, axiom) in [
        ("s3-bad-ii.json", Axiom::II),
        ("s3-bad-iii.json", Axiom::III),
        ("s3-bad-iv.json", Axiom::IV),
    ] {
        let spec: SystemSpec = read(corpus().join("systems").join(file));
        let sys = ok(MackeySystem::from_spec(s3.clone(), &spec))?;
        let rep = sys.validate();
        let v = rep.violation.ok_or(format!("{file} accepted"))?;
        ensure!(
            v.axiom == axiom,
            "{file}: reported {} instead of {axiom}",
            v.axiom
        );
        let w = &v.witness;
        // the witness must exhibit the failure
        match axiom {
            Axiom::II => {
                let (u, vv) = (w.u.ok_or("no U")?, w.v.ok_or("no V")?);
                ensure!(
                    sys.is_open_in(u, w.h) && sys.is_open_in(vv, u) && !sys.is_open_in(vv, w.h),
                    "{file}: witness does not violate transitivity"
                );
            }
            Axiom::III => {
                let (u, g) = (w.u.ok_or("no U")?, w.g.ok_or("no g")?);
                let hg = s3.conjugate(w.h, g);
                ensure!(
                    sys.is_open_in(u, w.h) && !sys.is_open_in(s3.conjugate(u, g), hg),
                    "{file}: witness does not violate conjugation"
                );
            }
            _ => {
                let (u, vv) = (w.u.ok_or("no U")?, w.v.ok_or("no V")?);
                let i = s3.intersection(u, vv);
                ensure!(
                    sys.is_open_in(u, w.h)
                        && sys.is_open_in(vv, w.h)
                        && !(sys.is_open_in(i, u) && sys.is_open_in(i, w.h)),
                    "{file}: witness does not violate intersection"
                );
            }
        }
    }
    Ok(())
}

fn cli_runs() -> Vec<Vec<String>> {
    let c = corpus();
    let p = |rel: &str| c.join(rel).to_string_lossy().into_owned();
    let s3 = p("groups/s3.json");
    let c2 = p("groups/c2.json");
    let raw: Vec<Vec<String>> = vec![
        vec!["--group".into(), s3.clone(), "validate".into()],
        vec![
            "--group".into(),
            s3.clone(),
            "--system".into(),
            p("systems/s3-bad-iii.json"),
            "validate".into(),
        ],
        vec!["--group".into(), p("groups/a4.json"), "lattice".into()],
        vec!["--group".into(), p("groups/d4.json"), "marks".into()],
        vec![
            "--group".into(),
            c2.clone(),
            "hom".into(),
            "--from".into(),
            "G/G".into(),
            "--to".into(),
            "G/G".into(),
        ],
        vec![
            "--group".into(),
            s3.clone(),
            "compose".into(),
            "--first".into(),
            "[G/1 <-(1,0)- -(1,0)-> G/5]".into(),
            "--second".into(),
            "[G/5 <-(0,0)- -(0,0)-> G/1]".into(),
        ],
        vec!["--group".into(), p("groups/q8.json"), "burnside".into()],
        vec![
            "--group".into(),
            c2.clone(),
            "--system".into(),
            p("systems/c2-trivial-family.json"),
            "resolve".into(),
            "--depth".into(),
            "3".into(),
        ],
        vec![
            "--group".into(),
            s3.clone(),
            "resolve".into(),
            "--category".into(),
            "orbit".into(),
        ],
        vec![
            "--group".into(),
            c2.clone(),
            "--system".into(),
            p("systems/c2-trivial-family.json"),
            "ext".into(),
            "--depth".into(),
            "2".into(),
        ],
        vec![
            "--group".into(),
            c2.clone(),
            "--system".into(),
            p("systems/c2-trivial-family.json"),
            "bredon-ext".into(),
        ],
        vec![
            "--group".into(),
            c2.clone(),
            "ind".into(),
            "--module".into(),
            p("modules/c2-res-burnside.json"),
        ],
        vec!["--group".into(), s3.clone(), "res".into()],
        vec!["--group".into(), p("groups/c4.json"), "adjoint".into()],
        vec![
            "tower-colim".into(),
            "--tower".into(),
            p("towers/two-adic-4.json"),
            "--thread".into(),
            p("threads/index-two.json"),
            "--depth".into(),
            "4".into(),
        ],
        vec![
            "tower-eval".into(),
            "--tower".into(),
            p("towers/two-adic-4.json"),
            "--depth".into(),
            "2".into(),
        ],
        vec![
            "--group".into(),
            s3.clone(),
            "compare-dims".into(),
            "--depth".into(),
            "2".into(),
        ],
    ];
    raw.into_iter()
        .map(|mut a| {
            a.push("--json".into());
            a
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_mackeylab");
    let runs = cli_runs();
    let mut commands = BTreeSet::new();
    for args in &runs {
        let a = ok(Command::new(bin).args(args).output())?;
        let b = ok(Command::new(bin).args(args).output())?;
        ensure!(
            a.status.code() == b.status.code(),
            "{args:?}: exit codes differ"
        );
        ensure!(
            a.stdout == b.stdout && a.stderr == b.stderr,
            "{args:?}: output differs"
        );
        let code = a.status.code();
        ensure!(
            code == Some(0) || code == Some(2),
            "{args:?}: exit {code:?}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        let text = if code == Some(0) {
            &a.stdout
        } else {
            &a.stderr
        };
        ensure!(!text.is_empty(), "{args:?}: no output");
        let _: serde_json::Value = ok(serde_json::from_slice(text))?;
        commands.insert(
            args.iter()
                .find(|s| {
                    !s.starts_with('-')
                        && !s.contains('/')
                        && !s.contains('.')
                        && s.parse::<u32>().is_err()
                })
                .cloned(),
        );
    }
    ensure!(
        commands.len() == 15,
        "covered {} subcommands",
        commands.len()
    );
    Ok(())
}

struct Criterion {
    number: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            number: 1,
            name: "pullback formula",
            limit: Some(Duration::from_secs(60)),
            run: criterion_1,
        },
        Criterion {
            number: 2,
            name: "span bases",
            limit: Some(Duration::from_secs(60)),
            run: criterion_2,
        },
        Criterion {
            number: 3,
            name: "Burnside values",
            limit: None,
            run: criterion_3,
        },
        Criterion {
            number: 4,
            name: "representability and projectivity",
            limit: None,
            run: criterion_4,
        },
        Criterion {
            number: 5,
            name: "induction identities",
            limit: None,
            run: criterion_5,
        },
        Criterion {
            number: 6,
            name: "induced resolutions and Ext comparison",
            limit: None,
            run: criterion_6,
        },
        Criterion {
            number: 7,
            name: "tower behavior",
            limit: Some(Duration::from_secs(120)),
            run: criterion_7,
        },
        Criterion {
            number: 8,
            name: "Mackey-system validator",
            limit: None,
            run: criterion_8,
        },
        Criterion {
            number: 9,
            name: "CLI determinism",
            limit: None,
            run: criterion_9,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(()), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.1?}, limit {limit:?}"))
            }
            (r, _) => r,
        };
        match &result {
            Ok(()) => println!(
                "PASS criterion {} ({}) in {:.2?}",
                c.number, c.name, elapsed
            ),
            Err(e) => {
                println!(
                    "FAIL criterion {} ({}) in {:.2?}: {e}",
                    c.number, c.name, elapsed
                );
                failed.push(c.number);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
