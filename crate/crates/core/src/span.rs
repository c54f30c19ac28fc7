//! The Mackey category: basic spans `G/H ← G/L → G/K`, hom bases,
//! composition through pullbacks and the Burnside functor.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::catmod::{CatModule, FreeModule, SkeletonCategory};
use crate::error::{invalid, Error, Result};
use crate::group::{Elem, FiniteGroup, SubgroupId};
use crate::gset::pullback_summands;
use crate::linalg::{Int, Matrix};
use crate::system::MackeySystem;

/// An object of the Mackey category: a homogeneous space `G/H`, or the terminal object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Obj {
    Orbit(SubgroupId),
    Terminal,
}

impl fmt::Display for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obj::Orbit(h) => write!(f, "G/{}", h.0),
            Obj::Terminal => f.write_str("•"),
        }
    }
}

impl std::str::FromStr for Obj {
    type Err = Error;

    /// Accepts `G/<id>`, `•`, `*` and `pt`. `G/G` and `G/1` need a group and are handled by callers.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "•" | "*" | "pt" | "terminal") {
            return Ok(Obj::Terminal);
        }
        s.strip_prefix("G/")
            .and_then(|r| r.parse().ok())
            .map(|id| Obj::Orbit(SubgroupId(id)))
            .ok_or_else(|| invalid(format!("cannot parse object {s:?}")))
    }
}

/// `[G/H ←a– G/L –b→ G/K]`: the legs are `gL ↦ gaH` and `gL ↦ gbK`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasicSpan {
    pub source: SubgroupId,
    pub target: Obj,
    pub middle: SubgroupId,
    pub left: Elem,
    pub right: Elem,
}

impl BasicSpan {
    pub fn text(&self) -> String {
        let (l, a, b) = (self.middle.0, self.left, self.right);
        match self.target {
            Obj::Orbit(k) => format!("[G/{} <-({l},{a})- -({l},{b})-> G/{}]", self.source.0, k.0),
            Obj::Terminal => format!("[G/{} <-({l},{a})- -({l})-> •]", self.source.0),
        }
    }

    /// Parses the notation produced by [`BasicSpan::text`].
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || invalid(format!("cannot parse span {s:?}"));
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (lhs, rhs) = inner.split_once("- -").ok_or_else(bad)?;
        let (src, left) = lhs.split_once("<-").ok_or_else(bad)?;
        let (right, tgt) = rhs.split_once("->").ok_or_else(bad)?;
        let source = match src.trim().parse::<Obj>()? {
            Obj::Orbit(h) => h,
            Obj::Terminal => return Err(bad()),
        };
        let target: Obj = tgt.trim().parse()?;
        let nums = |t: &str| -> Result<Vec<usize>> {
            t.trim()
                .trim_start_matches('(')
                .trim_end_matches(')')
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        let l = nums(left)?;
        let r = nums(right)?;
        if l.len() != 2 || r.is_empty() || r[0] != l[0] {
            return Err(bad());
        }
        let right = match (target, r.len()) {
            (Obj::Terminal, 1) => 0,
            (Obj::Orbit(_), 2) => r[1],
            _ => return Err(bad()),
        };
        Ok(BasicSpan {
            source,
            target,
            middle: SubgroupId(l[0]),
            left: l[1],
            right,
        })
    }
}

/// The canonical basis of `[G/H, Y]`.
#[derive(Debug)]
pub struct HomBasis {
    pub source: SubgroupId,
    pub target: Obj,
    pub spans: Vec<BasicSpan>,
    lookup: HashMap<(usize, usize, usize), usize>,
}

impl HomBasis {
    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }
}

/// An integer combination of basis spans of `[source, target]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MackeyHom {
    pub source: SubgroupId,
    pub target: Obj,
    pub coeffs: BTreeMap<usize, Int>,
}

impl MackeyHom {
    pub fn zero(source: SubgroupId, target: Obj) -> Self {
        MackeyHom {
            source,
            target,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(source: SubgroupId, target: Obj, i: usize) -> Self {
        let mut h = Self::zero(source, target);
        h.coeffs.insert(i, 1);
        h
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, i: usize, c: Int) {
        let e = self.coeffs.entry(i).or_insert(0);
        *e = e.checked_add(c).expect("integer overflow");
        if *e == 0 {
            self.coeffs.remove(&i);
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Int> {
        let mut v = vec![0; len];
        for (&i, &c) in &self.coeffs {
            v[i] = c;
        }
        v
    }

    pub fn from_dense(source: SubgroupId, target: Obj, v: &[Int]) -> Self {
        let mut h = Self::zero(source, target);
        for (i, &c) in v.iter().enumerate() {
            if c != 0 {
                h.coeffs.insert(i, c);
            }
        }
        h
    }
}

/// A labelled basis of `B(G/H)`: one subgroup `L ≤ H` per `H`-class in `𝔒(H)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurnsideValue {
    pub subgroup: SubgroupId,
    pub labels: Vec<SubgroupId>,
}

impl BurnsideValue {
    pub fn rank(&self) -> usize {
        self.labels.len()
    }
}

type CompKey = (SubgroupId, SubgroupId, Obj);
/// Sparse structure constants of composition, indexed `[i][j]`.
pub type CompositionTable = Vec<Vec<Vec<(usize, Int)>>>;

/// The Mackey category of a Mackey system, with memoized hom bases.
pub struct MackeyCategory {
    system: Arc<MackeySystem>,
    homs: Mutex<HashMap<(SubgroupId, Obj), Arc<HomBasis>>>,
    tensors: Mutex<HashMap<CompKey, Arc<CompositionTable>>>,
}

impl fmt::Debug for MackeyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MackeyCategory")
            .field("system", &self.system)
            .finish()
    }
}

impl MackeyCategory {
    pub fn new(system: Arc<MackeySystem>) -> Self {
        MackeyCategory {
            system,
            homs: Mutex::new(HashMap::new()),
            tensors: Mutex::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &Arc<MackeySystem> {
        &self.system
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.system.group()
    }

    fn check_obj(&self, x: Obj) -> Result<()> {
        if let Obj::Orbit(h) = x {
            self.group().check_id(h)?;
            if !self.system.in_family(h) {
                return Err(Error::StabilizerNotInFamily(h.0));
            }
        }
        Ok(())
    }

    /// Whether the leg `G/L → G/H`, `gL ↦ gaH`, is a morphism of the system.
    pub fn leg_ok(&self, l: SubgroupId, a: Elem, h: SubgroupId) -> bool {
        let g = self.group();
        let la = g.conjugate(l, a);
        g.is_subgroup_of(la, h) && self.system.is_open_in(la, h)
    }

    fn right_leg_ok(&self, l: SubgroupId, b: Elem, y: Obj) -> bool {
        match y {
            Obj::Orbit(k) => self.leg_ok(l, b, k),
            Obj::Terminal => {
                !self.system.contains_g() || self.system.is_open_in(l, self.group().whole())
            }
        }
    }

    /// Whether `(L, a, b)` is a span `G/H ← G/L → Y` with both legs system morphisms.
    pub fn is_admissible(&self, h: SubgroupId, y: Obj, l: SubgroupId, a: Elem, b: Elem) -> bool {
        self.system.in_family(l) && self.leg_ok(l, a, h) && self.right_leg_ok(l, b, y)
    }

    /// Canonical basis of `[G/H, Y]`.
    pub fn hom_basis(&self, h: SubgroupId, y: Obj) -> Result<Arc<HomBasis>> {
        self.check_obj(Obj::Orbit(h))?;
        self.check_obj(y)?;
        if let Some(b) = self.homs.lock().unwrap().get(&(h, y)) {
            return Ok(b.clone());
        }
        let basis = Arc::new(self.build_basis(h, y));
        self.homs.lock().unwrap().insert((h, y), basis.clone());
        Ok(basis)
    }

    fn build_basis(&self, h: SubgroupId, y: Obj) -> HomBasis {
        let g = self.group();
        let hs = g.cosets(h);
        let mut spans = Vec::new();
        let mut lookup = HashMap::new();
        for l in self.system.family_reps() {
            let class = g.class_of(l);
            let lefts: Vec<usize> = g
                .fixed_cosets(l, h)
                .into_iter()
                .filter(|&i| self.leg_ok(l, hs.reps[i], h))
                .collect();
            let (rights, kreps): (Vec<usize>, Option<&crate::group::CosetSpace>) = match y {
                Obj::Orbit(k) => {
                    let ks = g.cosets(k);
                    let r = g
                        .fixed_cosets(l, k)
                        .into_iter()
                        .filter(|&j| self.leg_ok(l, ks.reps[j], k))
                        .collect();
                    (r, Some(ks))
                }
                Obj::Terminal => (
                    if self.right_leg_ok(l, g.identity(), y) {
                        vec![0]
                    } else {
                        Vec::new()
                    },
                    None,
                ),
            };
            if lefts.is_empty() || rights.is_empty() {
                continue;
            }
            let normalizer = &g.subgroup(g.normalizer(l)).elements;
            for &i in &lefts {
                for &j in &rights {
                    if lookup.contains_key(&(class, i, j)) {
                        continue;
                    }
                    let idx = spans.len();
                    let b = kreps.map_or(g.identity(), |ks| ks.reps[j]);
                    spans.push(BasicSpan {
                        source: h,
                        target: y,
                        middle: l,
                        left: hs.reps[i],
                        right: b,
                    });
                    for &n in normalizer {
                        let ni = hs.coset_of(g.mul(n, hs.reps[i]));
                        let nj = kreps.map_or(0, |ks| ks.coset_of(g.mul(n, ks.reps[j])));
                        lookup.insert((class, ni, nj), idx);
                    }
                }
            }
        }
        HomBasis {
            source: h,
            target: y,
            spans,
            lookup,
        }
    }

    /// Position in `basis` of the class of the admissible span `(L, a, b)`.
    pub fn index_of(&self, basis: &HomBasis, l: SubgroupId, a: Elem, b: Elem) -> Result<usize> {
        let g = self.group();
        let sub = g.subgroup(l);
        let cinv = g.inv(sub.to_rep);
        let i = g.cosets(basis.source).coset_of(g.mul(cinv, a));
        let j = match basis.target {
            Obj::Orbit(k) => g.cosets(k).coset_of(g.mul(cinv, b)),
            Obj::Terminal => 0,
        };
        basis
            .lookup
            .get(&(sub.class, i, j))
            .copied()
            .ok_or_else(|| {
                Error::Invariant(format!(
                    "span ({l},{a},{b}) from G/{} to {} is not admissible",
                    basis.source.0, basis.target
                ))
            })
    }

    /// Decides equivalence by searching for `c` with `L^c = L'`, `c·a' ∈ aH` and `c·b' ∈ bK`.
    pub fn span_equivalent(&self, s1: &BasicSpan, s2: &BasicSpan) -> bool {
        if s1.source != s2.source || s1.target != s2.target {
            return false;
        }
        let g = self.group();
        let hs = g.cosets(s1.source);
        (0..g.order()).any(|c| {
            g.conjugate(s1.middle, c) == s2.middle
                && hs.coset_of(g.mul(c, s2.left)) == hs.coset_of(s1.left)
                && match s1.target {
                    Obj::Orbit(k) => {
                        let ks = g.cosets(k);
                        ks.coset_of(g.mul(c, s2.right)) == ks.coset_of(s1.right)
                    }
                    Obj::Terminal => true,
                }
        })
    }

    pub fn identity(&self, h: SubgroupId) -> Result<MackeyHom> {
        let basis = self.hom_basis(h, Obj::Orbit(h))?;
        let e = self.group().identity();
        Ok(MackeyHom::basis(
            h,
            Obj::Orbit(h),
            self.index_of(&basis, h, e, e)?,
        ))
    }

    /// Basic span `[G/H ←a– G/L –b→ Y]` as a hom, checking admissibility.
    pub fn span_hom(
        &self,
        h: SubgroupId,
        y: Obj,
        l: SubgroupId,
        a: Elem,
        b: Elem,
    ) -> Result<MackeyHom> {
        let basis = self.hom_basis(h, y)?;
        self.group().check_id(l)?;
        if !self.is_admissible(h, y, l, a, b) {
            return Err(invalid(format!(
                "span ({l},{a},{b}) from G/{} to {y} is not admissible",
                h.0
            )));
        }
        Ok(MackeyHom::basis(h, y, self.index_of(&basis, l, a, b)?))
    }

    /// `g ∘ f` for basis spans `f ∈ [G/H, G/K]` and `g ∈ [G/K, Y]`, as sparse coefficients.
    fn compose_spans(
        &self,
        f: &BasicSpan,
        g_: &BasicSpan,
        out: &HomBasis,
    ) -> Result<Vec<(usize, Int)>> {
        let grp = self.group();
        let Obj::Orbit(k) = f.target else {
            return Err(Error::ObjectMismatch(
                "cannot compose out of the terminal object".into(),
            ));
        };
        let summands = pullback_summands(grp, f.middle, f.right, g_.middle, g_.left, k)?;
        let mut acc: BTreeMap<usize, Int> = BTreeMap::new();
        for m in summands {
            let left = grp.mul(m.left_elem, f.left);
            let right = grp.mul(m.right_elem, g_.right);
            let idx = self.index_of(out, m.stabilizer, left, right)?;
            *acc.entry(idx).or_insert(0) += 1;
        }
        Ok(acc.into_iter().collect())
    }

    /// Structure constants: `table[i][j]` is `g_j ∘ f_i` for bases of `[G/H, G/K]` and `[G/K, Y]`.
    pub fn composition_table(
        &self,
        h: SubgroupId,
        k: SubgroupId,
        y: Obj,
    ) -> Result<Arc<CompositionTable>> {
        if let Some(t) = self.tensors.lock().unwrap().get(&(h, k, y)) {
            return Ok(t.clone());
        }
        let hk = self.hom_basis(h, Obj::Orbit(k))?;
        let ky = self.hom_basis(k, y)?;
        let hy = self.hom_basis(h, y)?;
        let mut table = Vec::with_capacity(hk.len());
        for f in &hk.spans {
            let mut row = Vec::with_capacity(ky.len());
            for g_ in &ky.spans {
                row.push(self.compose_spans(f, g_, &hy)?);
            }
            table.push(row);
        }
        let table = Arc::new(table);
        self.tensors
            .lock()
            .unwrap()
            .insert((h, k, y), table.clone());
        Ok(table)
    }

    /// `g ∘ f`, extended bilinearly.
    pub fn compose(&self, g_: &MackeyHom, f: &MackeyHom) -> Result<MackeyHom> {
        let Obj::Orbit(k) = f.target else {
            return Err(Error::ObjectMismatch(
                "cannot compose out of the terminal object".into(),
            ));
        };
        if g_.source != k {
            return Err(Error::ObjectMismatch(format!(
                "composing a hom out of G/{} after one into G/{}",
                g_.source.0, k.0
            )));
        }
        let table = self.composition_table(f.source, k, g_.target)?;
        let mut out = MackeyHom::zero(f.source, g_.target);
        for (&i, &a) in &f.coeffs {
            for (&j, &b) in &g_.coeffs {
                let ab = a.checked_mul(b).expect("integer overflow");
                for &(t, c) in &table[i][j] {
                    out.add_term(t, ab.checked_mul(c).expect("integer overflow"));
                }
            }
        }
        Ok(out)
    }

    /// `B(G/H)` with its basis labelled by subgroups `L ≤ H`.
    pub fn burnside_eval(&self, h: SubgroupId) -> Result<BurnsideValue> {
        let basis = self.hom_basis(h, Obj::Terminal)?;
        let g = self.group();
        Ok(BurnsideValue {
            subgroup: h,
            labels: basis
                .spans
                .iter()
                .map(|s| g.conjugate(s.middle, s.left))
                .collect(),
        })
    }

    /// Matrix of `X(f): [G/K, Y] → [G/H, Y]`, `x ↦ x ∘ f`, for `f` the `i`-th basis span of `[G/H, G/K]`.
    /// Column `j` holds the coordinates of `e_j ∘ f`.
    pub fn precompose_matrix(
        &self,
        h: SubgroupId,
        k: SubgroupId,
        i: usize,
        y: Obj,
    ) -> Result<Matrix> {
        let table = self.composition_table(h, k, y)?;
        let rows = self.hom_basis(h, y)?.len();
        let cols = self.hom_basis(k, y)?.len();
        let mut m = Matrix::zeros(rows, cols);
        for (j, terms) in table[i].iter().enumerate() {
            for &(t, c) in terms {
                m[(t, j)] += c;
            }
        }
        Ok(m)
    }

    /// The basic span `[G/V ← G/V → G/U]` for `V ≤ U` (restriction along the inclusion).
    pub fn restriction_span(&self, v: SubgroupId, u: SubgroupId) -> Result<MackeyHom> {
        let e = self.group().identity();
        self.span_hom(v, Obj::Orbit(u), v, e, e)
    }

    /// The basic span `[G/U ← G/V → G/V]` for `V ≤ U` (transfer along the inclusion).
    pub fn transfer_span(&self, v: SubgroupId, u: SubgroupId) -> Result<MackeyHom> {
        let e = self.group().identity();
        self.span_hom(u, Obj::Orbit(v), v, e, e)
    }
}

/// The Mackey category restricted to one object per conjugacy class of the family.
#[derive(Debug, Clone)]
pub struct MackeySkeleton {
    pub category: Arc<MackeyCategory>,
    pub skeleton: Arc<SkeletonCategory>,
    pub objects: Vec<SubgroupId>,
}

impl MackeySkeleton {
    pub fn new(category: Arc<MackeyCategory>) -> Result<Self> {
        let objects = category.system().family_reps();
        let labels = objects.iter().map(|h| Obj::Orbit(*h).to_string()).collect();
        let mut morphisms = Vec::with_capacity(objects.len());
        let mut identities = Vec::with_capacity(objects.len());
        for &x in &objects {
            let mut row = Vec::with_capacity(objects.len());
            for &y in &objects {
                let basis = category.hom_basis(x, Obj::Orbit(y))?;
                row.push(basis.spans.iter().map(|s| s.text()).collect());
            }
            morphisms.push(row);
            identities.push(
                *category
                    .identity(x)?
                    .coeffs
                    .keys()
                    .next()
                    .expect("identity span"),
            );
        }
        let skeleton =
            SkeletonCategory::new(
                format!("mackey({})", category.group().name()),
                labels,
                morphisms,
                identities,
                |x, y, z| {
                    Ok((*category.composition_table(
                        objects[x],
                        objects[y],
                        Obj::Orbit(objects[z]),
                    )?)
                    .clone())
                },
            )?;
        Ok(MackeySkeleton {
            category,
            skeleton: Arc::new(skeleton),
            objects,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.category.group()
    }

    /// Skeleton index of the class of `h`.
    pub fn object_of(&self, h: SubgroupId) -> Result<usize> {
        let g = self.group();
        g.check_id(h)?;
        let rep = g.rep_of(h);
        self.objects
            .iter()
            .position(|&o| o == rep)
            .ok_or(Error::StabilizerNotInFamily(h.0))
    }

    /// The represented module `[-, Y]`; for `Y = •` this is the Burnside functor.
    pub fn represented(&self, y: Obj) -> Result<CatModule> {
        let n = self.objects.len();
        let mut gens = Vec::with_capacity(n);
        for &x in &self.objects {
            gens.push(self.category.hom_basis(x, y)?.len());
        }
        let mut actions = Vec::with_capacity(n);
        for (xi, &x) in self.objects.iter().enumerate() {
            let mut ax = Vec::with_capacity(n);
            for (zi, &z) in self.objects.iter().enumerate() {
                let mut axz = Vec::with_capacity(self.skeleton.hom_dim(xi, zi));
                for f in 0..self.skeleton.hom_dim(xi, zi) {
                    axz.push(self.category.precompose_matrix(x, z, f, y)?);
                }
                ax.push(axz);
            }
            actions.push(ax);
        }
        let relations = gens.iter().map(|&g| Matrix::zeros(0, g)).collect();
        CatModule::new(self.skeleton.clone(), gens, relations, actions)
    }

    /// The restriction span `[G/V ← G/V → G/U]` for `V ≤ U`, transported to the class
    /// representatives, as a combination of basis morphisms of the skeleton.
    pub fn skeleton_span(&self, v: SubgroupId, u: SubgroupId) -> Result<Vec<(usize, Int)>> {
        let g = self.group();
        if !g.is_subgroup_of(v, u) {
            return Err(Error::NotSubgroup(format!("{v} is not contained in {u}")));
        }
        let (v0, u0) = (g.rep_of(v), g.rep_of(u));
        let b = g.mul(g.inv(g.subgroup(v).to_rep), g.subgroup(u).to_rep);
        let hom = self
            .category
            .span_hom(v0, Obj::Orbit(u0), v0, g.identity(), b)?;
        Ok(hom.coeffs.into_iter().collect())
    }

    pub fn burnside(&self) -> Result<CatModule> {
        self.represented(Obj::Terminal)
    }

    pub fn free(&self, generators: Vec<usize>) -> Result<FreeModule> {
        FreeModule::new(self.skeleton.clone(), generators)
    }
}

/// Brute-force reference computations.
pub mod oracle {
    use super::*;
    use crate::gset::{homogeneous_map, pullback_general, GSet};

    /// All admissible triples `(L, a, b)` with `L ∈ 𝔠`, grouped by brute-force equivalence.
    pub fn span_classes(cat: &MackeyCategory, h: SubgroupId, y: Obj) -> Vec<Vec<BasicSpan>> {
        let g = cat.group();
        let mut classes: Vec<Vec<BasicSpan>> = Vec::new();
        let rights: Vec<Elem> = match y {
            Obj::Orbit(_) => (0..g.order()).collect(),
            Obj::Terminal => vec![g.identity()],
        };
        for l in g.subgroups() {
            for a in 0..g.order() {
                for &b in &rights {
                    if !cat.is_admissible(h, y, l.id, a, b) {
                        continue;
                    }
                    let s = BasicSpan {
                        source: h,
                        target: y,
                        middle: l.id,
                        left: a,
                        right: b,
                    };
                    match classes.iter_mut().find(|c| cat.span_equivalent(&c[0], &s)) {
                        Some(c) => c.push(s),
                        None => classes.push(vec![s]),
                    }
                }
            }
        }
        classes
    }

    /// Composite computed from a set-theoretic pullback and orbit decomposition.
    pub fn compose_by_pullback(cat: &MackeyCategory, f: &BasicSpan, g_: &BasicSpan) -> MackeyHom {
        let grp = cat.group().clone();
        let Obj::Orbit(k) = f.target else {
            unreachable!()
        };
        let xk = Arc::new(GSet::homogeneous(grp.clone(), k));
        let xl = Arc::new(GSet::homogeneous(grp.clone(), f.middle));
        let xs = Arc::new(GSet::homogeneous(grp.clone(), g_.middle));
        let beta = homogeneous_map(&xl, &xk, f.right).unwrap();
        let gamma = homogeneous_map(&xs, &xk, g_.left).unwrap();
        let pb = pullback_general(&beta, &gamma).unwrap();
        let hs = grp.cosets(f.source);
        let out = cat.hom_basis(f.source, g_.target).unwrap();
        let mut hom = MackeyHom::zero(f.source, g_.target);
        for orbit in pb.object.orbits() {
            let p = orbit.representative;
            let lpt = pb.to_left.apply(p);
            let spt = pb.to_right.apply(p);
            let a = grp.mul(grp.cosets(f.middle).reps[lpt], f.left);
            let a = hs.reps[hs.coset_of(a)];
            let b = grp.mul(grp.cosets(g_.middle).reps[spt], g_.right);
            hom.add_term(cat.index_of(&out, orbit.stabilizer, a, b).unwrap(), 1);
        }
        hom
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::compose_by_pullback;
    use super::*;
    use crate::group::named;

    fn cat_of(g: FiniteGroup) -> MackeyCategory {
        MackeyCategory::new(Arc::new(MackeySystem::full(Arc::new(g))))
    }

    fn by_order(g: &FiniteGroup, n: usize) -> SubgroupId {
        g.subgroups().iter().find(|s| s.order() == n).unwrap().id
    }

    #[test]
    fn c2_equivalences() {
        let cat = cat_of(named::cyclic(2));
        let one = cat.group().trivial_subgroup();
        let span = |a, b| BasicSpan {
            source: one,
            target: Obj::Orbit(one),
            middle: one,
            left: a,
            right: b,
        };
        assert!(cat.span_equivalent(&span(0, 1), &span(0, 1)));
        assert!(cat.span_equivalent(&span(0, 1), &span(1, 0)));
        assert!(!cat.span_equivalent(&span(0, 0), &span(0, 1)));
        assert_eq!(cat.hom_basis(one, Obj::Orbit(one)).unwrap().len(), 2);
    }

    #[test]
    fn basis_counts_match_enumeration() {
        for g in [named::cyclic(2), named::cyclic(4), named::symmetric3()] {
            let cat = cat_of(g);
            let g = cat.group().clone();
            let mut objs: Vec<Obj> = g.subgroups().iter().map(|s| Obj::Orbit(s.id)).collect();
            objs.push(Obj::Terminal);
            for h in g.subgroups() {
                for &y in &objs {
                    let basis = cat.hom_basis(h.id, y).unwrap();
                    let classes = oracle::span_classes(&cat, h.id, y);
                    assert_eq!(
                        basis.len(),
                        classes.len(),
                        "[G/{}, {y}] over {}",
                        h.id,
                        g.name()
                    );
                    for class in &classes {
                        let idx: Vec<usize> = class
                            .iter()
                            .map(|s| cat.index_of(&basis, s.middle, s.left, s.right).unwrap())
                            .collect();
                        assert!(idx.iter().all(|&i| i == idx[0]));
                    }
                }
            }
        }
    }

    #[test]
    fn s3_endomorphisms_of_point() {
        let cat = cat_of(named::symmetric3());
        let w = cat.group().whole();
        assert_eq!(cat.hom_basis(w, Obj::Orbit(w)).unwrap().len(), 4);
        assert_eq!(cat.burnside_eval(w).unwrap().rank(), 4);
    }

    #[test]
    fn burnside_ranks() {
        for (g, n) in [
            (named::symmetric3(), 4),
            (named::dihedral8(), 8),
            (named::alternating4(), 5),
        ] {
            let cat = cat_of(g);
            let w = cat.group().whole();
            assert_eq!(cat.burnside_eval(w).unwrap().rank(), n);
        }
    }

    #[test]
    fn burnside_with_small_family() {
        let g = Arc::new(named::cyclic(2));
        let one = g.trivial_subgroup();
        let sys = MackeySystem::with_family(g.clone(), &[one]).unwrap();
        let cat = MackeyCategory::new(Arc::new(sys));
        assert_eq!(cat.burnside_eval(one).unwrap().rank(), 1);
        let only_top = MackeySystem::from_assignment(
            g.clone(),
            &[one, g.whole()],
            &[(one, vec![one]), (g.whole(), vec![g.whole()])]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let cat = MackeyCategory::new(Arc::new(only_top));
        assert_eq!(cat.burnside_eval(g.whole()).unwrap().rank(), 1);
    }

    #[test]
    fn c2_transfer_restriction_square() {
        let cat = cat_of(named::cyclic(2));
        let g = cat.group().clone();
        let (one, w) = (g.trivial_subgroup(), g.whole());
        let f = cat.span_hom(w, Obj::Orbit(w), one, 0, 0).unwrap();
        let ff = cat.compose(&f, &f).unwrap();
        let mut twice = MackeyHom::zero(w, Obj::Orbit(w));
        twice.add_term(*f.coeffs.keys().next().unwrap(), 2);
        assert_eq!(ff, twice);
        let z = MackeyHom::zero(w, Obj::Orbit(w));
        assert!(cat.compose(&z, &f).unwrap().is_zero());
    }

    #[test]
    fn identities_are_units() {
        let cat = cat_of(named::symmetric3());
        let g = cat.group().clone();
        for h in g.subgroups() {
            for k in g.subgroups() {
                let basis = cat.hom_basis(h.id, Obj::Orbit(k.id)).unwrap();
                for i in 0..basis.len() {
                    let f = MackeyHom::basis(h.id, Obj::Orbit(k.id), i);
                    assert_eq!(cat.compose(&cat.identity(k.id).unwrap(), &f).unwrap(), f);
                    assert_eq!(cat.compose(&f, &cat.identity(h.id).unwrap()).unwrap(), f);
                }
            }
        }
    }

    #[test]
    fn mismatched_composition() {
        let cat = cat_of(named::symmetric3());
        let g = cat.group().clone();
        let c2 = by_order(&g, 2);
        let f = cat.identity(c2).unwrap();
        let h = cat.identity(g.whole()).unwrap();
        assert!(matches!(cat.compose(&h, &f), Err(Error::ObjectMismatch(_))));
    }

    #[test]
    fn associativity_exhaustive() {
        for g in [named::cyclic(4), named::symmetric3()] {
            let cat = cat_of(g);
            let g = cat.group().clone();
            let ids: Vec<SubgroupId> = g.subgroups().iter().map(|s| s.id).collect();
            for &a in &ids {
                for &b in &ids {
                    let ab = cat.hom_basis(a, Obj::Orbit(b)).unwrap().len();
                    for &c in &ids {
                        let bc = cat.hom_basis(b, Obj::Orbit(c)).unwrap().len();
                        for &d in &ids {
                            let cd = cat.hom_basis(c, Obj::Orbit(d)).unwrap().len();
                            for i in 0..ab {
                                let f = MackeyHom::basis(a, Obj::Orbit(b), i);
                                for j in 0..bc {
                                    let g1 = MackeyHom::basis(b, Obj::Orbit(c), j);
                                    let gf = cat.compose(&g1, &f).unwrap();
                                    for k in 0..cd {
                                        let h1 = MackeyHom::basis(c, Obj::Orbit(d), k);
                                        let lhs = cat.compose(&h1, &gf).unwrap();
                                        let rhs = cat
                                            .compose(&cat.compose(&h1, &g1).unwrap(), &f)
                                            .unwrap();
                                        assert_eq!(lhs, rhs);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn composition_matches_general_pullback() {
        for g in [named::symmetric3(), named::dihedral8()] {
            let cat = cat_of(g);
            let g = cat.group().clone();
            let ids: Vec<SubgroupId> = g.subgroups().iter().map(|s| s.id).collect();
            for &a in &ids {
                for &b in &ids {
                    let hab = cat.hom_basis(a, Obj::Orbit(b)).unwrap();
                    for y in ids.iter().map(|&c| Obj::Orbit(c)).chain([Obj::Terminal]) {
                        let hby = cat.hom_basis(b, y).unwrap();
                        for (i, f) in hab.spans.iter().enumerate() {
                            for (j, g1) in hby.spans.iter().enumerate() {
                                let fast = cat
                                    .compose(
                                        &MackeyHom::basis(b, y, j),
                                        &MackeyHom::basis(a, Obj::Orbit(b), i),
                                    )
                                    .unwrap();
                                assert_eq!(fast, compose_by_pullback(&cat, f, g1));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn terminal_agrees_with_point_when_g_in_family() {
        let cat = cat_of(named::symmetric3());
        let g = cat.group().clone();
        for h in g.subgroups() {
            let t = cat.hom_basis(h.id, Obj::Terminal).unwrap();
            let p = cat.hom_basis(h.id, Obj::Orbit(g.whole())).unwrap();
            assert_eq!(t.len(), p.len());
            for (x, y) in t.spans.iter().zip(&p.spans) {
                assert_eq!((x.middle, x.left), (y.middle, y.left));
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let cat = cat_of(named::symmetric3());
        let g = cat.group().clone();
        for h in g.subgroups() {
            for y in [
                Obj::Orbit(g.whole()),
                Obj::Terminal,
                Obj::Orbit(g.trivial_subgroup()),
            ] {
                for s in &cat.hom_basis(h.id, y).unwrap().spans {
                    assert_eq!(&BasicSpan::parse(&s.text()).unwrap(), s);
                }
            }
        }
        assert!(BasicSpan::parse("[G/1 <- G/2]").is_err());
    }

    #[test]
    fn skeleton_and_burnside_module() {
        for g in [named::cyclic(2), named::symmetric3()] {
            let cat = Arc::new(cat_of(g));
            let sk = MackeySkeleton::new(cat.clone()).unwrap();
            sk.skeleton.check_axioms().unwrap();
            let b = sk.burnside().unwrap();
            b.validate().unwrap();
            let top = sk.object_of(cat.group().whole()).unwrap();
            let rep = sk.represented(Obj::Orbit(cat.group().whole())).unwrap();
            assert_eq!(rep.to_spec().values, b.to_spec().values);
            assert_eq!(rep.to_spec().actions, b.to_spec().actions);
            let free = sk.free(vec![top]).unwrap();
            assert_eq!(free.module.to_spec().actions, b.to_spec().actions);
        }
    }

    #[test]
    fn c2_free_module_on_point() {
        let cat = Arc::new(cat_of(named::cyclic(2)));
        let sk = MackeySkeleton::new(cat.clone()).unwrap();
        let top = sk.object_of(cat.group().whole()).unwrap();
        let free = sk.free(vec![top]).unwrap();
        assert_eq!(free.module.num_gens(top), 2);
        let one = sk.object_of(cat.group().trivial_subgroup()).unwrap();
        assert_eq!(
            cat.hom_basis(cat.group().whole(), Obj::Orbit(cat.group().whole()))
                .unwrap()
                .len(),
            2
        );
        assert_eq!(free.module.num_gens(one), 1);
    }

    #[test]
    fn hom_additive_over_disjoint_unions() {
        // [A ⊔ B, X] counted directly: classes of spans G/L → A ⊔ B, G/L → X.
        let cat = cat_of(named::symmetric3());
        let g = cat.group().clone();
        let ids: Vec<SubgroupId> = g.subgroups().iter().map(|s| s.id).collect();
        for &a in &ids {
            for &b in &ids {
                for &x in &ids {
                    let mut direct = 0;
                    for l in g.class_reps() {
                        let n = &g.subgroup(g.normalizer(l)).elements;
                        let mut pts: Vec<(usize, usize, usize)> = Vec::new();
                        for (tag, h) in [(0, a), (1, b)] {
                            for i in g.fixed_cosets(l, h) {
                                for j in g.fixed_cosets(l, x) {
                                    pts.push((tag, i, j));
                                }
                            }
                        }
                        let mut seen = std::collections::HashSet::new();
                        for &(tag, i, j) in &pts {
                            if seen.contains(&(tag, i, j)) {
                                continue;
                            }
                            direct += 1;
                            let h = if tag == 0 { a } else { b };
                            for &c in n {
                                let ci = g.cosets(h).coset_of(g.mul(c, g.cosets(h).reps[i]));
                                let cj = g.cosets(x).coset_of(g.mul(c, g.cosets(x).reps[j]));
                                seen.insert((tag, ci, cj));
                            }
                        }
                    }
                    let sum = cat.hom_basis(a, Obj::Orbit(x)).unwrap().len()
                        + cat.hom_basis(b, Obj::Orbit(x)).unwrap().len();
                    assert_eq!(direct, sum);
                }
            }
        }
    }

    #[test]
    fn restriction_transfer_spans() {
        let cat = cat_of(named::cyclic(4));
        let g = cat.group().clone();
        let c2 = by_order(&g, 2);
        let r = cat.restriction_span(c2, g.whole()).unwrap();
        let t = cat.transfer_span(c2, g.whole()).unwrap();
        let tr = cat.compose(&t, &r).unwrap();
        assert_eq!(tr.coeffs.values().sum::<Int>(), 2);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn d4_composition_matches_pullback(h in 0usize..10, k in 0usize..10, l in 0usize..11, i in 0usize..64, j in 0usize..64) {
            let cat = cat_of(named::dihedral8());
            let g = cat.group().clone();
            let n = g.num_subgroups();
            let (h, k) = (SubgroupId(h % n), SubgroupId(k % n));
            let z = if l % (n + 1) == n { Obj::Terminal } else { Obj::Orbit(SubgroupId(l % (n + 1))) };
            let first = cat.hom_basis(h, Obj::Orbit(k)).unwrap();
            let second = cat.hom_basis(k, z).unwrap();
            proptest::prop_assume!(!first.is_empty() && !second.is_empty());
            let (f, s2) = (first.spans[i % first.len()], second.spans[j % second.len()]);
            let fh = cat.span_hom(f.source, f.target, f.middle, f.left, f.right).unwrap();
            let sh = cat.span_hom(s2.source, s2.target, s2.middle, s2.left, s2.right).unwrap();
            proptest::prop_assert_eq!(cat.compose(&sh, &fh).unwrap(), compose_by_pullback(&cat, &f, &s2));
        }
    }
}
