//! Restriction and induction between orbit-category modules and Mackey modules.
//!
//! `σ` sends the G-map `gH ↦ gaK` to the span `[G/H ←e– G/H –a→ G/K]`, so
//! `res M = M ∘ σ` is again contravariant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bredon::OrbitCategory;
use crate::catmod::{hom_group, CatModule, FreeModule, ModuleMap, Resolution};
use crate::config::Limits;
use crate::error::{invalid, Error, Result};
use crate::linalg::{reduce_presentation, AbelianGroup, Int, Matrix};
use crate::span::{MackeyCategory, MackeySkeleton, Obj};
use crate::system::MackeySystem;

/// The functor `σ` together with both skeletons.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub orbit: Arc<OrbitCategory>,
    pub mackey: Arc<MackeySkeleton>,
    sigma: Vec<Vec<Vec<usize>>>,
    limits: Limits,
}

/// `ind T` with the bookkeeping needed to move between the coend generators
/// `(K, s, j)`, `s ∈ [x, K]`, `j` a generator of `T(K)`, and the reduced presentation.
#[derive(Debug, Clone)]
pub struct Induced {
    pub source: Arc<CatModule>,
    pub module: Arc<CatModule>,
    offsets: Vec<Vec<usize>>,
    unreduced: Vec<usize>,
    projection: Vec<Matrix>,
    section: Vec<Matrix>,
}

impl Induced {
    /// Coordinate of the coend generator `s ⊗ e_j` with `s` in `[x, y]`.
    pub fn coend_position(&self, x: usize, y: usize, s: usize, j: usize) -> usize {
        self.offsets[x][y] + s * self.source.num_gens(y) + j
    }

    /// Number of coend generators at `x` before reduction.
    pub fn coend_rank(&self, x: usize) -> usize {
        self.unreduced[x]
    }

    /// Reduced coordinates of an unreduced vector.
    pub fn project(&self, x: usize, v: &Matrix) -> Matrix {
        self.projection[x].mul(v)
    }
}

/// Outcome of comparing `Hom(ind T, M)` with `Hom(T, res M)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjunctionReport {
    pub induced_side: AbelianGroup,
    pub restricted_side: AbelianGroup,
    /// Both composites of the unit/counit bijections are identities.
    pub round_trip: bool,
}

impl AdjunctionReport {
    pub fn holds(&self) -> bool {
        self.round_trip && self.induced_side == self.restricted_side
    }
}

impl Transfer {
    pub fn new(system: Arc<MackeySystem>) -> Result<Self> {
        let orbit = Arc::new(OrbitCategory::new(system.clone())?);
        let mackey = Arc::new(MackeySkeleton::new(Arc::new(MackeyCategory::new(system)))?);
        Self::from_parts(orbit, mackey)
    }

    /// Fails when some G-map between orbits of the family is not a morphism of the system.
    pub fn from_parts(orbit: Arc<OrbitCategory>, mackey: Arc<MackeySkeleton>) -> Result<Self> {
        if orbit.objects != mackey.objects {
            return Err(Error::ObjectMismatch(
                "orbit and Mackey skeletons differ".into(),
            ));
        }
        let cat = &mackey.category;
        let g = cat.group().clone();
        let e = g.identity();
        let objs = &orbit.objects;
        let mut sigma = Vec::with_capacity(objs.len());
        for (x, &h) in objs.iter().enumerate() {
            let mut sx = Vec::with_capacity(objs.len());
            for (y, &k) in objs.iter().enumerate() {
                let basis = cat.hom_basis(h, Obj::Orbit(k))?;
                let mut sxy = Vec::with_capacity(orbit.skeleton.hom_dim(x, y));
                for f in 0..orbit.skeleton.hom_dim(x, y) {
                    let a = orbit.map_element(x, y, f);
                    if !cat.is_admissible(h, Obj::Orbit(k), h, e, a) {
                        return Err(invalid(format!(
                            "the G-map {} is not a morphism of the system",
                            orbit.skeleton.morphism_label(x, y, f)
                        )));
                    }
                    sxy.push(cat.index_of(&basis, h, e, a)?);
                }
                sx.push(sxy);
            }
            sigma.push(sx);
        }
        Ok(Transfer {
            orbit,
            mackey,
            sigma,
            limits: Limits::default(),
        })
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    fn n(&self) -> usize {
        self.orbit.objects.len()
    }

    /// Index of `σ(f)` in the span basis of `[x, y]`.
    pub fn sigma(&self, x: usize, y: usize, f: usize) -> usize {
        self.sigma[x][y][f]
    }

    /// `σ(g∘f) = σ(g)∘σ(f)` on all composable basis pairs and `σ(id) = id`.
    pub fn check_functoriality(&self) -> Result<()> {
        let (o, m) = (&self.orbit.skeleton, &self.mackey.skeleton);
        let n = self.n();
        for x in 0..n {
            if self.sigma(x, x, o.identity(x)) != m.identity(x) {
                return Err(Error::Invariant(format!(
                    "σ does not preserve the identity of {}",
                    o.object_label(x)
                )));
            }
            for y in 0..n {
                for z in 0..n {
                    for f in 0..o.hom_dim(x, y) {
                        for g in 0..o.hom_dim(y, z) {
                            let want: Vec<(usize, Int)> = o
                                .compose(x, y, z, f, g)
                                .iter()
                                .map(|&(t, c)| (self.sigma(x, z, t), c))
                                .collect();
                            let got = m.compose(x, y, z, self.sigma(x, y, f), self.sigma(y, z, g));
                            if got != want.as_slice() {
                                return Err(Error::Invariant(format!(
                                    "σ is not functorial on {} then {}",
                                    o.morphism_label(x, y, f),
                                    o.morphism_label(y, z, g)
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_mackey(&self, m: &CatModule) -> Result<()> {
        if !Arc::ptr_eq(m.category(), &self.mackey.skeleton) {
            return Err(Error::ObjectMismatch(
                "module is not over the Mackey skeleton".into(),
            ));
        }
        Ok(())
    }

    fn check_orbit(&self, t: &CatModule) -> Result<()> {
        if !Arc::ptr_eq(t.category(), &self.orbit.skeleton) {
            return Err(Error::ObjectMismatch(
                "module is not over the orbit category".into(),
            ));
        }
        Ok(())
    }

    /// `res M = M ∘ σ`.
    pub fn restrict(&self, m: &CatModule) -> Result<CatModule> {
        self.check_mackey(m)?;
        let n = self.n();
        let actions = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        (0..self.orbit.skeleton.hom_dim(x, y))
                            .map(|f| m.action(x, y, self.sigma(x, y, f)).clone())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let relations = (0..n).map(|x| m.relations(x).clone()).collect();
        CatModule::new(
            self.orbit.skeleton.clone(),
            m.gens().to_vec(),
            relations,
            actions,
        )
    }

    /// `res φ` between already restricted modules.
    pub fn restrict_map(
        &self,
        phi: &ModuleMap,
        source: Arc<CatModule>,
        target: Arc<CatModule>,
    ) -> Result<ModuleMap> {
        if source.gens() != phi.source.gens() || target.gens() != phi.target.gens() {
            return Err(Error::ObjectMismatch(
                "restricted modules do not match the map".into(),
            ));
        }
        ModuleMap::new(source, target, phi.components.clone())
    }

    /// `ind T`, computed as the coend and checked against the closed form at every object.
    pub fn induce(&self, t: &Arc<CatModule>) -> Result<Induced> {
        let ind = self.induce_coend(t)?;
        for x in 0..self.n() {
            let closed = self.induce_closed_form(t, x)?;
            if ind.module.value(x) != closed {
                return Err(Error::Invariant(format!(
                    "coend and closed form disagree at {}: {} vs {}",
                    self.orbit.skeleton.object_label(x),
                    ind.module.value(x),
                    closed
                )));
            }
        }
        Ok(ind)
    }

    /// `[-, σ(?)] ⊗ T(?)`: all tensors `s ⊗ m` modulo `a ⊗ T(α)m ~ σ(α)a ⊗ m` and the relations of `T`.
    pub fn induce_coend(&self, t: &Arc<CatModule>) -> Result<Induced> {
        self.check_orbit(t)?;
        let n = self.n();
        let ms = &self.mackey.skeleton;
        let os = &self.orbit.skeleton;
        let mut offsets = Vec::with_capacity(n);
        let mut unreduced = Vec::with_capacity(n);
        for x in 0..n {
            let mut off = Vec::with_capacity(n);
            let mut total = 0;
            for y in 0..n {
                off.push(total);
                total += ms.hom_dim(x, y) * t.num_gens(y);
            }
            offsets.push(off);
            unreduced.push(total);
        }
        let total: usize = unreduced.iter().sum();
        if total > self.limits.max_rank {
            return Err(Error::BoundExceeded {
                what: "induction rank",
                value: total,
                limit: self.limits.max_rank,
            });
        }
        let pos = |x: usize, y: usize, s: usize, j: usize| offsets[x][y] + s * t.num_gens(y) + j;

        let mut projection = Vec::with_capacity(n);
        let mut section = Vec::with_capacity(n);
        let mut orders = Vec::with_capacity(n);
        for x in 0..n {
            let mut rows: Vec<Vec<Int>> = Vec::new();
            for y in 0..n {
                let rel = t.relations(y);
                for s in 0..ms.hom_dim(x, y) {
                    for r in 0..rel.rows() {
                        let mut v = vec![0; unreduced[x]];
                        for (j, &c) in rel.row(r).iter().enumerate() {
                            v[pos(x, y, s, j)] = c;
                        }
                        rows.push(v);
                    }
                }
            }
            // α: y' → y in the orbit category, a ∈ [x, y'].
            for yp in 0..n {
                for y in 0..n {
                    for alpha in 0..os.hom_dim(yp, y) {
                        let act = t.action(yp, y, alpha);
                        let sa = self.sigma(yp, y, alpha);
                        for a in 0..ms.hom_dim(x, yp) {
                            for j in 0..t.num_gens(y) {
                                let mut v = vec![0; unreduced[x]];
                                for i in 0..t.num_gens(yp) {
                                    v[pos(x, yp, a, i)] += act[(i, j)];
                                }
                                for &(u, c) in ms.compose(x, yp, y, a, sa) {
                                    v[pos(x, y, u, j)] -= c;
                                }
                                if v.iter().any(|&c| c != 0) {
                                    rows.push(v);
                                }
                            }
                        }
                    }
                }
            }
            let rel = if rows.is_empty() {
                Matrix::zeros(0, unreduced[x])
            } else {
                Matrix::from_rows(&rows)
            };
            let red = reduce_presentation(unreduced[x], &rel);
            projection.push(red.projection);
            section.push(red.section);
            orders.push(red.orders);
        }

        let gens: Vec<usize> = orders.iter().map(|o| o.len()).collect();
        let relations = orders.iter().map(|o| diagonal_relations(o)).collect();
        let mut actions = Vec::with_capacity(n);
        for x2 in 0..n {
            let mut ax = Vec::with_capacity(n);
            for x in 0..n {
                let mut axx = Vec::with_capacity(ms.hom_dim(x2, x));
                for phi in 0..ms.hom_dim(x2, x) {
                    // s ⊗ m ↦ (s ∘ φ) ⊗ m
                    let mut u = Matrix::zeros(unreduced[x2], unreduced[x]);
                    for y in 0..n {
                        for s in 0..ms.hom_dim(x, y) {
                            for &(r, c) in ms.compose(x2, x, y, phi, s) {
                                for j in 0..t.num_gens(y) {
                                    u[(pos(x2, y, r, j), pos(x, y, s, j))] += c;
                                }
                            }
                        }
                    }
                    axx.push(projection[x2].mul(&u).mul(&section[x]));
                }
                ax.push(axx);
            }
            actions.push(ax);
        }
        let module = CatModule::new(ms.clone(), gens, relations, actions)?;
        Ok(Induced {
            source: t.clone(),
            module: Arc::new(module),
            offsets,
            unreduced,
            projection,
            section,
        })
    }

    /// `⊕_L Z ⊗_{N_H(L)/L} T(G/L)` over `L` open in `H` up to `H`-conjugacy.
    pub fn induce_closed_form(&self, t: &CatModule, x: usize) -> Result<AbelianGroup> {
        self.check_orbit(t)?;
        let g = self.orbit.group().clone();
        let sys = &self.orbit.system;
        let h = self.orbit.objects[x];
        let hs = g.subgroup(h).elements.clone();
        let mut seen: Vec<crate::group::SubgroupId> = Vec::new();
        let mut total = AbelianGroup::zero();
        for l in sys.opens(h).to_vec() {
            if seen.contains(&l) {
                continue;
            }
            for &c in &hs {
                let lc = g.conjugate(l, c);
                if !seen.contains(&lc) {
                    seen.push(lc);
                }
            }
            let y = self.orbit.object_of(l)?;
            let c = g.subgroup(l).to_rep;
            let cinv = g.inv(c);
            let mut cols = t.relations(y).transpose();
            for &nelem in &g.subgroup(g.normalizer_in(l, h)).elements {
                let n0 = g.mul(g.mul(cinv, nelem), c);
                let f = self.orbit.map_index(y, y, n0).ok_or_else(|| {
                    Error::Invariant("normalizer element does not give an automorphism".into())
                })?;
                let act = t.action(y, y, f).sub(&Matrix::identity(t.num_gens(y)));
                cols = cols.hstack(&act);
            }
            total = total.direct_sum(&AbelianGroup::cokernel(&cols));
        }
        Ok(total)
    }

    /// `ind φ` for `φ: T → T'`.
    pub fn induce_map(
        &self,
        phi: &ModuleMap,
        source: &Induced,
        target: &Induced,
    ) -> Result<ModuleMap> {
        let ms = &self.mackey.skeleton;
        let n = self.n();
        let mut components = Vec::with_capacity(n);
        for x in 0..n {
            let mut u = Matrix::zeros(target.unreduced[x], source.unreduced[x]);
            for y in 0..n {
                let c = &phi.components[y];
                for s in 0..ms.hom_dim(x, y) {
                    for j in 0..source.source.num_gens(y) {
                        for i in 0..target.source.num_gens(y) {
                            u[(
                                target.coend_position(x, y, s, i),
                                source.coend_position(x, y, s, j),
                            )] = c[(i, j)];
                        }
                    }
                }
            }
            components.push(target.projection[x].mul(&u).mul(&source.section[x]));
        }
        ModuleMap::new(source.module.clone(), target.module.clone(), components)
    }

    /// `η: T → res ind T`, `m ↦ id ⊗ m`.
    pub fn unit(&self, ind: &Induced) -> Result<ModuleMap> {
        let restricted = Arc::new(self.restrict(&ind.module)?);
        ModuleMap::new(ind.source.clone(), restricted, self.unit_components(ind))
    }

    fn unit_components(&self, ind: &Induced) -> Vec<Matrix> {
        let ms = &self.mackey.skeleton;
        let t = &ind.source;
        (0..self.n())
            .map(|y| {
                let id = ms.identity(y);
                let mut u = Matrix::zeros(ind.unreduced[y], t.num_gens(y));
                for j in 0..t.num_gens(y) {
                    u[(ind.coend_position(y, y, id, j), j)] = 1;
                }
                ind.projection[y].mul(&u)
            })
            .collect()
    }

    /// `ε: ind res M → M`, `s ⊗ m ↦ M(s) m`.
    pub fn counit(&self, ind_res: &Induced, m: Arc<CatModule>) -> Result<ModuleMap> {
        let components = (0..self.n())
            .map(|x| self.evaluate_tensors(ind_res, &m, x, |_, v| v.to_vec()))
            .collect();
        ModuleMap::new(ind_res.module.clone(), m, components)
    }

    /// Component at `x` of `s ⊗ e_j ↦ M(s) g_y(e_j)`, in reduced source coordinates.
    fn evaluate_tensors(
        &self,
        ind: &Induced,
        m: &CatModule,
        x: usize,
        g: impl Fn(usize, &[Int]) -> Vec<Int>,
    ) -> Matrix {
        let ms = &self.mackey.skeleton;
        let t = &ind.source;
        let mut u = Matrix::zeros(m.num_gens(x), ind.unreduced[x]);
        for y in 0..self.n() {
            for j in 0..t.num_gens(y) {
                let mut e = vec![0; t.num_gens(y)];
                e[j] = 1;
                let gy = g(y, &e);
                for s in 0..ms.hom_dim(x, y) {
                    let v = m.action(x, y, s).mul_vec(&gy);
                    let col = ind.coend_position(x, y, s, j);
                    for (r, &c) in v.iter().enumerate() {
                        u[(r, col)] = c;
                    }
                }
            }
        }
        u.mul(&ind.section[x])
    }

    /// `Φ(f) = res f ∘ η`.
    pub fn to_restricted(
        &self,
        f: &ModuleMap,
        ind: &Induced,
        restricted: Arc<CatModule>,
    ) -> Result<ModuleMap> {
        let eta = self.unit_components(ind);
        let components = eta
            .iter()
            .zip(&f.components)
            .map(|(e, c)| c.mul(e))
            .collect();
        ModuleMap::new(ind.source.clone(), restricted, components)
    }

    /// `Ψ(g) = ε ∘ ind g`.
    pub fn to_induced(&self, g: &ModuleMap, ind: &Induced, m: Arc<CatModule>) -> Result<ModuleMap> {
        let components = (0..self.n())
            .map(|x| self.evaluate_tensors(ind, &m, x, |y, v| g.components[y].mul_vec(v)))
            .collect();
        ModuleMap::new(ind.module.clone(), m, components)
    }

    /// Compares `Hom(ind T, M)` with `Hom(T, res M)` through the unit and counit.
    pub fn adjunction_check(
        &self,
        t: &Arc<CatModule>,
        m: &Arc<CatModule>,
    ) -> Result<AdjunctionReport> {
        self.check_mackey(m)?;
        let ind = self.induce(t)?;
        let res = Arc::new(self.restrict(m)?);
        let left = hom_group(ind.module.clone(), m.clone())?;
        let right = hom_group(t.clone(), res.clone())?;
        let mut round_trip = true;
        for f in left.spanning_maps() {
            let phi = self.to_restricted(&f, &ind, res.clone())?;
            phi.check_natural()?;
            let back = self.to_induced(&phi, &ind, m.clone())?;
            round_trip &= back.agrees_with(&f);
        }
        for g in right.spanning_maps() {
            let psi = self.to_induced(&g, &ind, m.clone())?;
            psi.check_natural()?;
            let back = self.to_restricted(&psi, &ind, res.clone())?;
            round_trip &= back.agrees_with(&g);
        }
        Ok(AdjunctionReport {
            induced_side: left.group,
            restricted_side: right.group,
            round_trip,
        })
    }

    /// `ind Z(-) → B`, `s ⊗ 1 ↦ [terminal] ∘ s`.
    pub fn burnside_comparison(
        &self,
        ind_z: &Induced,
        burnside: Arc<CatModule>,
    ) -> Result<ModuleMap> {
        let cat = &self.mackey.category;
        let objs = &self.mackey.objects;
        let e = cat.group().identity();
        let mut components = Vec::with_capacity(self.n());
        for (x, &h) in objs.iter().enumerate() {
            let target = cat.hom_basis(h, Obj::Terminal)?;
            let mut u = Matrix::zeros(target.len(), ind_z.unreduced[x]);
            for (y, &k) in objs.iter().enumerate() {
                let basis = cat.hom_basis(h, Obj::Orbit(k))?;
                for (s, span) in basis.spans.iter().enumerate() {
                    let idx = cat.index_of(&target, span.middle, span.left, e)?;
                    u[(idx, ind_z.coend_position(x, y, s, 0))] += 1;
                }
            }
            components.push(u.mul(&ind_z.section[x]));
        }
        ModuleMap::new(ind_z.module.clone(), burnside, components)
    }

    /// `ind P → F` for a free orbit module `P = ⊕ Z[-, y_i]` and the free Mackey module `F` on the same objects:
    /// `s ⊗ α ↦ σ(α) ∘ s`.
    pub fn free_comparison(
        &self,
        ind: &Induced,
        p: &FreeModule,
        f: &FreeModule,
    ) -> Result<ModuleMap> {
        if p.generators != f.generators {
            return Err(Error::ObjectMismatch(
                "free modules on different objects".into(),
            ));
        }
        let ms = &self.mackey.skeleton;
        let os = &self.orbit.skeleton;
        let n = self.n();
        let mut components = Vec::with_capacity(n);
        for x in 0..n {
            let mut u = Matrix::zeros(f.module.num_gens(x), ind.unreduced[x]);
            for y in 0..n {
                for (i, &k) in p.generators.iter().enumerate() {
                    for alpha in 0..os.hom_dim(y, k) {
                        let j = p.position(y, i, alpha);
                        for s in 0..ms.hom_dim(x, y) {
                            for &(r, c) in ms.compose(x, y, k, s, self.sigma(y, k, alpha)) {
                                u[(f.position(x, i, r), ind.coend_position(x, y, s, j))] += c;
                            }
                        }
                    }
                }
            }
            components.push(u.mul(&ind.section[x]));
        }
        ModuleMap::new(ind.module.clone(), f.module.clone(), components)
    }
}

/// The induced complex `… → ind P_1 → ind P_0 → B → 0` of a resolution of `Z(-)`.
#[derive(Debug, Clone)]
pub struct InducedResolution {
    pub frees: Vec<Induced>,
    pub differentials: Vec<ModuleMap>,
    pub augmentation: ModuleMap,
}

impl InducedResolution {
    /// Exactness at `B` and at every `ind P_k` with a computed incoming differential;
    /// injectivity of the last map when the resolution terminated.
    pub fn exact_steps(&self, terminated: Option<usize>) -> Result<Vec<bool>> {
        let mut out = vec![self.augmentation.is_surjective()];
        for (k, d) in self.differentials.iter().enumerate() {
            let next = if k == 0 {
                &self.augmentation
            } else {
                &self.differentials[k - 1]
            };
            out.push(d.is_exact_before(next)?);
        }
        if let Some(t) = terminated {
            let last = if t == 0 {
                &self.augmentation
            } else {
                &self.differentials[t - 1]
            };
            let (k, _) = last.kernel()?;
            out.push(k.is_zero());
        }
        Ok(out)
    }
}

impl Transfer {
    /// Applies `ind` to a free resolution of `Z(-)`, augmenting through `ind Z(-) ≅ B`.
    pub fn induce_resolution(&self, res: &Resolution) -> Result<InducedResolution> {
        self.check_orbit(&res.module)?;
        let z = Arc::new(self.orbit.constant_module());
        let ind_z = self.induce(&z)?;
        let b = Arc::new(self.mackey.burnside()?);
        let cmp = self.burnside_comparison(&ind_z, b)?;
        let to_z = ModuleMap::new(
            res.augmentation.source.clone(),
            z,
            res.augmentation.components.clone(),
        )?;
        let frees: Vec<Induced> = res
            .frees
            .iter()
            .map(|p| self.induce(&p.module))
            .collect::<Result<_>>()?;
        let augmentation = cmp.compose(&self.induce_map(&to_z, &frees[0], &ind_z)?)?;
        let differentials = res
            .differentials
            .iter()
            .enumerate()
            .map(|(k, d)| self.induce_map(d, &frees[k + 1], &frees[k]))
            .collect::<Result<_>>()?;
        Ok(InducedResolution {
            frees,
            differentials,
            augmentation,
        })
    }
}

fn diagonal_relations(orders: &[Int]) -> Matrix {
    let rows: Vec<Vec<Int>> = orders
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(i, &d)| {
            let mut v = vec![0; orders.len()];
            v[i] = d;
            v
        })
        .collect();
    if rows.is_empty() {
        Matrix::zeros(0, orders.len())
    } else {
        Matrix::from_rows(&rows)
    }
}

/// Whether a module map is an isomorphism at every object.
pub fn is_isomorphism(phi: &ModuleMap) -> Result<bool> {
    phi.check_natural()?;
    if !phi.is_surjective() {
        return Ok(false);
    }
    let (k, _) = phi.kernel()?;
    Ok(k.is_zero())
}
