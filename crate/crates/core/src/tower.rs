//! Inverse systems of finite groups as finite models of profinite groups.
//!
//! Level `n+1` maps onto level `n`. An open subgroup visible at level `n` is
//! the preimage of a subgroup of `levels[n]`; a closed subgroup is a thread of
//! compatible subgroups, one per level.
//!
//! Colimits over the open subgroups containing a thread use only the
//! preimages visible at some level. This assumes the level kernels form a
//! neighborhood basis of the identity, which holds for every tower built here.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catmod::{resolve, ModuleMap, Resolution};
use crate::config::Limits;
use crate::error::{invalid, invariant, Error, Result};
use crate::group::{named, Elem, FiniteGroup, GroupSpec, Perm, SubgroupId};
use crate::linalg::{Int, Lattice, Matrix};
use crate::span::{MackeyCategory, MackeySkeleton, Obj};
use crate::system::MackeySystem;

/// JSON form: groups by generators, projections by the images of the generators of the finer level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub levels: Vec<GroupSpec>,
    pub projections: Vec<Vec<Vec<u32>>>,
}

#[derive(Clone, Debug)]
pub struct Tower {
    levels: Vec<Arc<FiniteGroup>>,
    /// `projections[n][g]` is the image in level `n` of element `g` of level `n+1`.
    projections: Vec<Vec<Elem>>,
}

impl Tower {
    /// `images[n]` lists, for each generator of `levels[n+1]`, its image in `levels[n]`.
    pub fn new(levels: Vec<Arc<FiniteGroup>>, images: &[Vec<Elem>]) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("a tower needs at least one level"));
        }
        if images.len() != levels.len() - 1 {
            return Err(invalid(
                "one projection per pair of consecutive levels is required",
            ));
        }
        let projections = images
            .iter()
            .enumerate()
            .map(|(n, im)| {
                extend_homomorphism(&levels[n + 1], &levels[n], im).map_err(|e| match e {
                    Error::Invalid(m) => invalid(format!("projection {} -> {n}: {m}", n + 1)),
                    e => e,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Tower {
            levels,
            projections,
        })
    }

    pub fn from_spec(spec: &TowerSpec, limits: &Limits) -> Result<Self> {
        if spec.levels.len() > limits.max_tower_depth + 1 {
            return Err(Error::BoundExceeded {
                what: "tower depth",
                value: spec.levels.len() - 1,
                limit: limits.max_tower_depth,
            });
        }
        let levels: Vec<Arc<FiniteGroup>> = spec
            .levels
            .iter()
            .map(|g| FiniteGroup::from_spec(g, limits).map(Arc::new))
            .collect::<Result<_>>()?;
        if spec.projections.len() + 1 != levels.len() {
            return Err(invalid(
                "one projection per pair of consecutive levels is required",
            ));
        }
        let mut images = Vec::with_capacity(spec.projections.len());
        for (n, im) in spec.projections.iter().enumerate() {
            let g = &levels[n];
            let elems = im
                .iter()
                .map(|p| {
                    let perm = Perm::from_images(p.clone())?;
                    g.elem_of(&perm).ok_or_else(|| {
                        invalid(format!("projection image {p:?} is not in level {n}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            images.push(elems);
        }
        Self::new(levels, &images)
    }

    pub fn spec(&self) -> TowerSpec {
        TowerSpec {
            levels: self.levels.iter().map(|g| g.spec()).collect(),
            projections: (0..self.depth())
                .map(|n| {
                    self.levels[n + 1]
                        .generator_elems()
                        .iter()
                        .map(|&s| {
                            self.levels[n]
                                .perm(self.projections[n][s])
                                .images()
                                .to_vec()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `C1 ← C2 ← C4 ← … ← C_{2^depth}`.
    pub fn two_adic(depth: usize, limits: &Limits) -> Result<Self> {
        if depth > limits.max_tower_depth {
            return Err(Error::BoundExceeded {
                what: "tower depth",
                value: depth,
                limit: limits.max_tower_depth,
            });
        }
        let levels: Vec<Arc<FiniteGroup>> = (0..=depth)
            .map(|n| Arc::new(named::cyclic(1 << n)))
            .collect();
        let images = (0..depth)
            .map(|n| {
                let coarse = &levels[n];
                let gen = coarse
                    .generator_elems()
                    .first()
                    .copied()
                    .unwrap_or(coarse.identity());
                vec![gen]
            })
            .collect::<Vec<_>>();
        Self::new(levels, &images)
    }

    /// Every level equal to `group`, with identity projections.
    pub fn constant(group: Arc<FiniteGroup>, depth: usize) -> Result<Self> {
        let images = vec![group.generator_elems().to_vec(); depth];
        Self::new(vec![group; depth + 1], &images)
    }

    /// Index of the finest level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        if n > self.depth() {
            return Err(Error::DepthExceeded {
                requested: n,
                available: self.levels.len(),
            });
        }
        Ok(())
    }

    pub fn level(&self, n: usize) -> Result<&Arc<FiniteGroup>> {
        self.check_level(n)?;
        Ok(&self.levels[n])
    }

    pub fn levels(&self) -> &[Arc<FiniteGroup>] {
        &self.levels
    }

    /// Image in level `n` of an element of level `n+1`.
    pub fn project(&self, n: usize, g: Elem) -> Elem {
        self.projections[n][g]
    }

    /// Some preimage in level `n+1` of an element of level `n`.
    pub fn lift(&self, n: usize, g: Elem) -> Elem {
        self.projections[n]
            .iter()
            .position(|&x| x == g)
            .expect("projection is surjective")
    }

    /// Image in level `n` of a subgroup of level `n+1`.
    pub fn image(&self, n: usize, h: SubgroupId) -> SubgroupId {
        let coarse = &self.levels[n];
        let imgs: Vec<Elem> = self.levels[n + 1]
            .subgroup(h)
            .elements
            .iter()
            .map(|&g| self.project(n, g))
            .collect();
        coarse.generated_by(&imgs)
    }

    /// Preimage in level `n+1` of a subgroup of level `n`.
    pub fn preimage(&self, n: usize, h: SubgroupId) -> SubgroupId {
        let coarse = &self.levels[n];
        let fine = &self.levels[n + 1];
        let elems: Vec<Elem> = (0..fine.order())
            .filter(|&g| coarse.subgroup(h).contains(self.project(n, g)))
            .collect();
        fine.subgroup_with_elements(&elems)
            .expect("preimage of a subgroup is a subgroup")
    }
}

/// Extends generator images to a homomorphism along the Cayley graph, checking consistency and surjectivity.
fn extend_homomorphism(
    source: &FiniteGroup,
    target: &FiniteGroup,
    images: &[Elem],
) -> Result<Vec<Elem>> {
    let gens = source.generator_elems();
    if images.len() != gens.len() {
        return Err(invalid(format!(
            "{} generator images given for {} generators",
            images.len(),
            gens.len()
        )));
    }
    if images.iter().any(|&x| x >= target.order()) {
        return Err(invalid("generator image out of range"));
    }
    let mut map: Vec<Option<Elem>> = vec![None; source.order()];
    map[source.identity()] = Some(target.identity());
    let mut queue = VecDeque::from([source.identity()]);
    while let Some(g) = queue.pop_front() {
        let fg = map[g].expect("visited");
        for (&s, &fs) in gens.iter().zip(images) {
            let gs = source.mul(g, s);
            let want = target.mul(fg, fs);
            match map[gs] {
                Some(x) if x != want => {
                    return Err(invalid("generator images do not define a homomorphism"))
                }
                Some(_) => {}
                None => {
                    map[gs] = Some(want);
                    queue.push_back(gs);
                }
            }
        }
    }
    let map: Vec<Elem> = map
        .into_iter()
        .map(|x| x.expect("generators generate"))
        .collect();
    let mut hit = vec![false; target.order()];
    for &x in &map {
        hit[x] = true;
    }
    if hit.iter().any(|&h| !h) {
        return Err(invalid("projection is not surjective"));
    }
    Ok(map)
}

/// JSON form of a thread: one subgroup id per level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadSpec {
    pub groups: Vec<SubgroupId>,
}

/// A closed subgroup, given by its images at every level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedThread {
    pub groups: Vec<SubgroupId>,
}

impl ClosedThread {
    pub fn new(tower: &Tower, groups: Vec<SubgroupId>) -> Result<Self> {
        if groups.len() != tower.levels.len() {
            return Err(invalid(format!(
                "thread has {} subgroups for {} levels",
                groups.len(),
                tower.levels.len()
            )));
        }
        for (n, &h) in groups.iter().enumerate() {
            tower.levels[n].check_id(h)?;
        }
        for n in 0..tower.depth() {
            if tower.image(n, groups[n + 1]) != groups[n] {
                return Err(invalid(format!(
                    "thread is not compatible between levels {n} and {}",
                    n + 1
                )));
            }
        }
        Ok(ClosedThread { groups })
    }

    pub fn from_spec(tower: &Tower, spec: &ThreadSpec) -> Result<Self> {
        Self::new(tower, spec.groups.clone())
    }

    pub fn spec(&self) -> ThreadSpec {
        ThreadSpec {
            groups: self.groups.clone(),
        }
    }

    pub fn trivial(tower: &Tower) -> Self {
        ClosedThread {
            groups: tower.levels.iter().map(|g| g.trivial_subgroup()).collect(),
        }
    }

    pub fn whole(tower: &Tower) -> Self {
        ClosedThread {
            groups: tower.levels.iter().map(|g| g.whole()).collect(),
        }
    }
}

/// Subgroups of `levels[n]` containing the thread, largest first.
pub fn open_neighborhoods(
    tower: &Tower,
    thread: &ClosedThread,
    n: usize,
) -> Result<Vec<SubgroupId>> {
    let g = tower.level(n)?;
    let k = thread.groups[n];
    let mut out: Vec<SubgroupId> = g
        .subgroups()
        .iter()
        .map(|s| s.id)
        .filter(|&u| g.is_subgroup_of(k, u))
        .collect();
    out.sort_by_key(|&u| (std::cmp::Reverse(g.subgroup(u).order()), u));
    Ok(out)
}

/// One neighborhood in a level's directed segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodValue {
    pub subgroup: SubgroupId,
    pub order: usize,
    pub rank: usize,
}

/// Restriction `B(G/U) → B(G/V)` for a covering pair `V < U` of neighborhoods.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentMap {
    pub from: SubgroupId,
    pub to: SubgroupId,
    pub matrix: Vec<Vec<Int>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSegment {
    pub level: usize,
    pub group: String,
    pub neighborhoods: Vec<NeighborhoodValue>,
    pub maps: Vec<SegmentMap>,
}

/// The directed system of Burnside values along a thread.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColimReport {
    pub thread: Vec<SubgroupId>,
    /// Rank of `B(G_n/G_n)`, the coarsest neighborhood, at each level.
    pub ranks: Vec<usize>,
    /// Inflation `B(G_n/G_n) → B(G_{n+1}/G_{n+1})` between consecutive levels.
    pub level_maps: Vec<Vec<Vec<Int>>>,
    /// Whether each level map is an isomorphism.
    pub level_map_isos: Vec<bool>,
    /// First level from which two consecutive level maps are isomorphisms.
    pub stabilized_at: Option<usize>,
    pub segments: Vec<LevelSegment>,
}

/// Exactness of a resolution of `B` evaluated along a thread at one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelExactness {
    pub level: usize,
    pub steps: usize,
    /// Ranks of `F_k(G/K_n), …, F_0(G/K_n), B(G/K_n)`, the colimit of the level's segment.
    pub ranks_at_thread: Vec<usize>,
    /// Exact at every neighborhood and every computed step.
    pub exact: bool,
    /// Differentials commute with the segment's restriction maps.
    pub commutes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub thread: Vec<SubgroupId>,
    pub levels: Vec<LevelExactness>,
}

impl EvaluationReport {
    pub fn all_exact(&self) -> bool {
        self.levels.iter().all(|l| l.exact && l.commutes)
    }
}

/// A tower with the full Mackey category of every level.
#[derive(Debug, Clone)]
pub struct TowerMackey {
    pub tower: Arc<Tower>,
    categories: Vec<Arc<MackeyCategory>>,
}

impl TowerMackey {
    pub fn new(tower: Arc<Tower>) -> Self {
        let categories = tower
            .levels
            .iter()
            .map(|g| Arc::new(MackeyCategory::new(Arc::new(MackeySystem::full(g.clone())))))
            .collect();
        TowerMackey { tower, categories }
    }

    pub fn category(&self, n: usize) -> Result<&Arc<MackeyCategory>> {
        self.tower.check_level(n)?;
        Ok(&self.categories[n])
    }

    /// `[G/U, L] → [G/V, L]` at level `n` for `V ≤ U`: precomposition with the span
    /// `[G/V ← G/V → G/U]`, i.e. pulling back the left leg along `G/V → G/U`.
    pub fn connecting_map(&self, n: usize, v: SubgroupId, u: SubgroupId, l: Obj) -> Result<Matrix> {
        let cat = self.category(n)?;
        let g = cat.group();
        g.check_id(v)?;
        g.check_id(u)?;
        if !g.is_subgroup_of(v, u) {
            return Err(Error::NotSubgroup(format!("{v} is not contained in {u}")));
        }
        let res = cat.restriction_span(v, u)?;
        let from = cat.hom_basis(u, l)?;
        let to = cat.hom_basis(v, l)?;
        let mut m = Matrix::zeros(to.len(), from.len());
        for j in 0..from.len() {
            let comp = cat.compose(&crate::span::MackeyHom::basis(u, l, j), &res)?;
            for (&i, &c) in &comp.coeffs {
                m[(i, j)] = c;
            }
        }
        Ok(m)
    }

    /// `[G_n/U, L] → [G_{n+1}/π⁻¹U, π⁻¹L]`, pulling every orbit back along the projection.
    pub fn inflation_map(&self, n: usize, u: SubgroupId, l: Obj) -> Result<Matrix> {
        self.tower.check_level(n + 1)?;
        let t = &self.tower;
        let (coarse, fine) = (&self.categories[n], &self.categories[n + 1]);
        let from = coarse.hom_basis(u, l)?;
        let lift_obj = match l {
            Obj::Orbit(k) => Obj::Orbit(t.preimage(n, k)),
            Obj::Terminal => Obj::Terminal,
        };
        let to = fine.hom_basis(t.preimage(n, u), lift_obj)?;
        let mut m = Matrix::zeros(to.len(), from.len());
        for (j, s) in from.spans.iter().enumerate() {
            let b = match l {
                Obj::Orbit(_) => t.lift(n, s.right),
                Obj::Terminal => fine.group().identity(),
            };
            let i = fine.index_of(&to, t.preimage(n, s.middle), t.lift(n, s.left), b)?;
            m[(i, j)] += 1;
        }
        Ok(m)
    }

    /// Burnside values along `thread` through level `depth`.
    pub fn colim_burnside(&self, thread: &ClosedThread, depth: usize) -> Result<ColimReport> {
        self.tower.check_level(depth)?;
        let mut segments = Vec::with_capacity(depth + 1);
        let mut ranks = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let cat = &self.categories[n];
            let g = cat.group();
            let nbhds = open_neighborhoods(&self.tower, thread, n)?;
            let mut values = Vec::with_capacity(nbhds.len());
            for &u in &nbhds {
                values.push(NeighborhoodValue {
                    subgroup: u,
                    order: g.subgroup(u).order(),
                    rank: cat.hom_basis(u, Obj::Terminal)?.len(),
                });
            }
            let mut maps = Vec::new();
            for &u in &nbhds {
                for &v in &nbhds {
                    if v != u && g.is_subgroup_of(v, u) && covers(g, &nbhds, v, u) {
                        maps.push(SegmentMap {
                            from: u,
                            to: v,
                            matrix: self.connecting_map(n, v, u, Obj::Terminal)?.to_rows(),
                        });
                    }
                }
            }
            ranks.push(cat.hom_basis(g.whole(), Obj::Terminal)?.len());
            segments.push(LevelSegment {
                level: n,
                group: g.name().to_string(),
                neighborhoods: values,
                maps,
            });
        }
        let mut level_maps = Vec::with_capacity(depth);
        let mut level_map_isos = Vec::with_capacity(depth);
        for n in 0..depth {
            let m = self.inflation_map(n, self.categories[n].group().whole(), Obj::Terminal)?;
            level_map_isos.push(is_unimodular(&m));
            level_maps.push(m.to_rows());
        }
        let stabilized_at =
            (0..depth.saturating_sub(1)).find(|&n| level_map_isos[n] && level_map_isos[n + 1]);
        Ok(ColimReport {
            thread: thread.groups.clone(),
            ranks,
            level_maps,
            level_map_isos,
            stabilized_at,
            segments,
        })
    }

    /// Resolutions of `B` over every level through `depth`, `steps` differentials each.
    pub fn resolve_burnside(
        &self,
        depth: usize,
        steps: usize,
        limits: &Limits,
    ) -> Result<Vec<Resolution>> {
        self.tower.check_level(depth)?;
        (0..=depth)
            .map(|n| {
                let sk = MackeySkeleton::new(self.categories[n].clone())?;
                resolve(Arc::new(sk.burnside()?), steps, limits)
            })
            .collect()
    }

    /// Evaluates each level's resolution at the neighborhoods of the thread.
    pub fn evaluate_resolution_at_thread(
        &self,
        resolutions: &[Resolution],
        thread: &ClosedThread,
        depth: usize,
    ) -> Result<EvaluationReport> {
        self.tower.check_level(depth)?;
        if resolutions.len() <= depth {
            return Err(Error::IncompatibleResolution(format!(
                "{} resolutions given for {} levels",
                resolutions.len(),
                depth + 1
            )));
        }
        let mut levels = Vec::with_capacity(depth + 1);
        for (n, res) in resolutions.iter().enumerate().take(depth + 1) {
            let cat = &self.categories[n];
            let g = cat.group();
            let sk = MackeySkeleton::new(cat.clone())?;
            let skel = res.module.category();
            if skel.object_labels() != sk.skeleton.object_labels()
                || skel.num_objects() != sk.objects.len()
            {
                return Err(Error::IncompatibleResolution(format!(
                    "resolution {n} is not over level {n}"
                )));
            }
            for x in 0..skel.num_objects() {
                for y in 0..skel.num_objects() {
                    if skel.hom_dim(x, y) != sk.skeleton.hom_dim(x, y) {
                        return Err(Error::IncompatibleResolution(format!(
                            "resolution {n} is not over level {n}"
                        )));
                    }
                }
            }
            let b = sk.burnside()?;
            if res.module.to_spec().values != b.to_spec().values
                || res.module.to_spec().actions != b.to_spec().actions
            {
                return Err(Error::IncompatibleResolution(format!(
                    "resolution {n} does not resolve B"
                )));
            }
            let nbhds = open_neighborhoods(&self.tower, thread, n)?;
            let objs: Vec<usize> = nbhds
                .iter()
                .map(|&u| sk.object_of(u))
                .collect::<Result<_>>()?;
            // the chain F_k → … → F_0 → B → 0 as maps, lowest first
            let mut chain: Vec<&ModuleMap> = vec![&res.augmentation];
            chain.extend(res.differentials.iter());
            let mut exact = true;
            for &x in &objs {
                exact &= Lattice::spanned_by(
                    &res.augmentation.components[x].hstack(&res.module.relations(x).transpose()),
                )
                .is_full();
                for k in 1..chain.len() {
                    exact &= exact_at_object(chain[k], chain[k - 1], x)?;
                }
                if let Some(t) = res.terminated {
                    let (kk, _) = chain[t].kernel()?;
                    exact &= kk.value(x).is_zero();
                }
            }
            let mut commutes = true;
            for (a, &u) in nbhds.iter().enumerate() {
                for (b_, &v) in nbhds.iter().enumerate() {
                    if a == b_ || !g.is_subgroup_of(v, u) {
                        continue;
                    }
                    let (xu, xv) = (objs[a], objs[b_]);
                    let r = sk.skeleton_span(v, u)?;
                    for d in &chain {
                        let lhs = d.components[xv].mul(&d.source.action_of(xv, xu, &r));
                        let rhs = d.target.action_of(xv, xu, &r).mul(&d.components[xu]);
                        commutes &= d.target.columns_zero_at(xv, &lhs.sub(&rhs));
                    }
                }
            }
            let kx = sk.object_of(thread.groups[n])?;
            let mut ranks_at_thread: Vec<usize> = res
                .frees
                .iter()
                .rev()
                .map(|f| f.module.num_gens(kx))
                .collect();
            ranks_at_thread.push(res.module.num_gens(kx));
            levels.push(LevelExactness {
                level: n,
                steps: res.differentials.len(),
                ranks_at_thread,
                exact,
                commutes,
            });
        }
        Ok(EvaluationReport {
            thread: thread.groups.clone(),
            levels,
        })
    }
}

/// Whether `A → B → C` is exact at `B(x)`.
fn exact_at_object(incoming: &ModuleMap, outgoing: &ModuleMap, x: usize) -> Result<bool> {
    let b = &outgoing.source;
    let c = &outgoing.target;
    if incoming.target.gens() != b.gens() {
        return Err(invariant("maps in the chain are not composable"));
    }
    let stacked = outgoing.components[x].hstack(&c.relations(x).transpose().scale(-1));
    let k = crate::linalg::kernel(&stacked).select_rows(&(0..b.num_gens(x)).collect::<Vec<_>>());
    let image = Lattice::spanned_by(&incoming.components[x].hstack(&b.relations(x).transpose()));
    let composite = outgoing.components[x].mul(&incoming.components[x]);
    Ok(c.columns_zero_at(x, &composite) && image.coords_matrix(&k).is_some())
}

/// `v < u` with no neighborhood strictly between.
fn covers(g: &FiniteGroup, nbhds: &[SubgroupId], v: SubgroupId, u: SubgroupId) -> bool {
    !nbhds
        .iter()
        .any(|&w| w != u && w != v && g.is_subgroup_of(v, w) && g.is_subgroup_of(w, u))
}

fn is_unimodular(m: &Matrix) -> bool {
    m.rows() == m.cols() && m.determinant().abs() == 1
}
