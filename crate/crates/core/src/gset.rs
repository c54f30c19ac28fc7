//! Finite G-sets, G-maps and pullbacks.
//!
//! A [`GSet`] stores its full action table; points carry a `(tag, index)`
//! label so that maps between disjoint unions keep a stable identity.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{Elem, FiniteGroup, SubgroupId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointLabel {
    pub tag: usize,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub representative: usize,
    pub stabilizer: SubgroupId,
}

#[derive(Clone)]
pub struct GSet {
    group: Arc<FiniteGroup>,
    labels: Vec<PointLabel>,
    action: Vec<u32>,
    orbits: Vec<Orbit>,
    orbit_of: Vec<usize>,
}

impl std::fmt::Debug for GSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GSet")
            .field("points", &self.len())
            .field("orbits", &self.orbits)
            .finish()
    }
}

impl GSet {
    /// The empty G-set (the initial object).
    pub fn empty(group: Arc<FiniteGroup>) -> Self {
        GSet {
            group,
            labels: Vec::new(),
            action: Vec::new(),
            orbits: Vec::new(),
            orbit_of: Vec::new(),
        }
    }

    /// The coset space `G/H` with left translation.
    pub fn homogeneous(group: Arc<FiniteGroup>, h: SubgroupId) -> Self {
        let cs = group.cosets(h).clone();
        let n = cs.len();
        let mut action = vec![0u32; group.order() * n];
        for g in 0..group.order() {
            for (i, &r) in cs.reps.iter().enumerate() {
                action[g * n + i] = cs.coset_of(group.mul(g, r)) as u32;
            }
        }
        GSet {
            labels: (0..n).map(|index| PointLabel { tag: 0, index }).collect(),
            action,
            orbits: vec![Orbit {
                representative: 0,
                stabilizer: h,
            }],
            orbit_of: vec![0; n],
            group,
        }
    }

    /// Builds a G-set from an action function on `n` points and decomposes it into orbits.
    pub fn from_action(
        group: Arc<FiniteGroup>,
        labels: Vec<PointLabel>,
        act: impl Fn(Elem, usize) -> usize,
    ) -> Result<Self> {
        let n = labels.len();
        let mut action = vec![0u32; group.order() * n];
        for g in 0..group.order() {
            for p in 0..n {
                let q = act(g, p);
                if q >= n {
                    return Err(invalid("action leaves the point set"));
                }
                action[g * n + p] = q as u32;
            }
        }
        let mut set = GSet {
            group,
            labels,
            action,
            orbits: Vec::new(),
            orbit_of: Vec::new(),
        };
        set.decompose()?;
        Ok(set)
    }

    fn decompose(&mut self) -> Result<()> {
        let n = self.len();
        let mut orbit_of = vec![usize::MAX; n];
        let mut orbits = Vec::new();
        for p in 0..n {
            if orbit_of[p] != usize::MAX {
                continue;
            }
            let o = orbits.len();
            for g in 0..self.group.order() {
                orbit_of[self.act(g, p)] = o;
            }
            orbits.push(Orbit {
                representative: p,
                stabilizer: self.stabilizer(p)?,
            });
        }
        self.orbits = orbits;
        self.orbit_of = orbit_of;
        Ok(())
    }

    /// Disjoint union; part `i` gets tag `i`.
    pub fn disjoint_union(group: Arc<FiniteGroup>, parts: &[GSet]) -> Result<Self> {
        if parts.iter().any(|p| !Arc::ptr_eq(&p.group, &group)) {
            return Err(invalid("disjoint union of G-sets over different groups"));
        }
        let mut labels = Vec::new();
        let mut offsets = Vec::new();
        for (tag, p) in parts.iter().enumerate() {
            offsets.push(labels.len());
            labels.extend((0..p.len()).map(|index| PointLabel { tag, index }));
        }
        let n = labels.len();
        let mut action = vec![0u32; group.order() * n];
        let mut orbits = Vec::new();
        let mut orbit_of = Vec::with_capacity(n);
        for (tag, p) in parts.iter().enumerate() {
            let off = offsets[tag];
            for g in 0..group.order() {
                for i in 0..p.len() {
                    action[g * n + off + i] = (off + p.act(g, i)) as u32;
                }
            }
            let base = orbits.len();
            orbits.extend(p.orbits.iter().map(|o| Orbit {
                representative: off + o.representative,
                stabilizer: o.stabilizer,
            }));
            orbit_of.extend(p.orbit_of.iter().map(|&o| base + o));
        }
        Ok(GSet {
            group,
            labels,
            action,
            orbits,
            orbit_of,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }

    #[inline]
    pub fn act(&self, g: Elem, p: usize) -> usize {
        self.action[g * self.len() + p] as usize
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn orbit_of(&self, p: usize) -> usize {
        self.orbit_of[p]
    }

    /// Pointwise stabilizer of `p`.
    pub fn stabilizer(&self, p: usize) -> Result<SubgroupId> {
        let elems: Vec<Elem> = (0..self.group.order())
            .filter(|&g| self.act(g, p) == p)
            .collect();
        self.group
            .subgroup_with_elements(&elems)
            .ok_or_else(|| Error::Invariant("stabilizer is not a subgroup".into()))
    }

    /// Checks `e·x = x` and `(gh)·x = g·(h·x)` on every point.
    pub fn check_action(&self) -> bool {
        let g = &self.group;
        (0..self.len()).all(|p| self.act(g.identity(), p) == p)
            && (0..g.order()).all(|a| {
                (0..g.order()).all(|b| {
                    (0..self.len()).all(|p| self.act(g.mul(a, b), p) == self.act(a, self.act(b, p)))
                })
            })
    }

    /// Points fixed by every element of `u`.
    pub fn fixed_points(&self, u: SubgroupId) -> Vec<usize> {
        let elems = &self.group.subgroup(u).elements;
        (0..self.len())
            .filter(|&p| elems.iter().all(|&g| self.act(g, p) == p))
            .collect()
    }

    /// Sorted multiset of stabilizer conjugacy classes, one per orbit.
    /// Two finite G-sets are isomorphic iff these agree.
    pub fn iso_invariant(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .orbits
            .iter()
            .map(|o| self.group.class_of(o.stabilizer))
            .collect();
        v.sort_unstable();
        v
    }
}

#[derive(Clone, Debug)]
pub struct GMap {
    pub source: Arc<GSet>,
    pub target: Arc<GSet>,
    pub mapping: Vec<usize>,
}

impl GMap {
    /// Checks sizes and equivariance `f(g·x) = g·f(x)`.
    pub fn new(source: Arc<GSet>, target: Arc<GSet>, mapping: Vec<usize>) -> Result<Self> {
        if mapping.len() != source.len() || mapping.iter().any(|&y| y >= target.len()) {
            return Err(invalid("map does not match the point sets"));
        }
        if !Arc::ptr_eq(source.group(), target.group()) {
            return Err(invalid("map between G-sets over different groups"));
        }
        let g = source.group();
        for x in 0..source.len() {
            for a in 0..g.order() {
                if mapping[source.act(a, x)] != target.act(a, mapping[x]) {
                    return Err(invalid(format!(
                        "map is not equivariant at point {x}, element {}",
                        g.elem_string(a)
                    )));
                }
            }
        }
        Ok(GMap {
            source,
            target,
            mapping,
        })
    }

    pub fn apply(&self, x: usize) -> usize {
        self.mapping[x]
    }

    pub fn identity(x: Arc<GSet>) -> Self {
        let n = x.len();
        GMap {
            source: x.clone(),
            target: x,
            mapping: (0..n).collect(),
        }
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &GMap) -> Result<GMap> {
        if !Arc::ptr_eq(&other.target, &self.source) {
            return Err(invalid("maps are not composable"));
        }
        Ok(GMap {
            source: other.source.clone(),
            target: self.target.clone(),
            mapping: other.mapping.iter().map(|&y| self.mapping[y]).collect(),
        })
    }
}

/// Coset indices `aK` of `G/K` with `H^a ≤ K`; each gives the map `gH ↦ gaK`.
pub fn homogeneous_map_cosets(group: &FiniteGroup, h: SubgroupId, k: SubgroupId) -> Vec<usize> {
    group.fixed_cosets(h, k)
}

/// The G-map `G/H → G/K`, `gH ↦ g·a·K`, for an element `a` with `H^a ≤ K`.
pub fn homogeneous_map(source: &Arc<GSet>, target: &Arc<GSet>, a: Elem) -> Result<GMap> {
    let g = source.group();
    let (Some(h), Some(k)) = (single_orbit(source), single_orbit(target)) else {
        return Err(invalid(
            "homogeneous map needs homogeneous source and target",
        ));
    };
    if !g.is_subgroup_of(g.conjugate(h, a), k) {
        return Err(Error::NotSubgroup(format!(
            "conjugate of {h} by the element is not in {k}"
        )));
    }
    let hs = g.cosets(h);
    let ks = g.cosets(k);
    let mapping = hs.reps.iter().map(|&r| ks.coset_of(g.mul(r, a))).collect();
    GMap::new(source.clone(), target.clone(), mapping)
}

/// Stabilizer of the base point if `x` was built as a coset space.
fn single_orbit(x: &GSet) -> Option<SubgroupId> {
    match x.orbits() {
        [o] if o.representative == 0 && x.labels().iter().all(|l| l.tag == 0) => Some(o.stabilizer),
        _ => None,
    }
}

/// All G-maps `G/H → G/K`, one per coset `aK` with `H^a ≤ K`.
pub fn maps_between_homogeneous(source: &Arc<GSet>, target: &Arc<GSet>) -> Result<Vec<GMap>> {
    let g = source.group();
    let (Some(h), Some(k)) = (single_orbit(source), single_orbit(target)) else {
        return Err(invalid("expected homogeneous G-sets"));
    };
    let ks = g.cosets(k);
    homogeneous_map_cosets(g, h, k)
        .into_iter()
        .map(|i| homogeneous_map(source, target, ks.reps[i]))
        .collect()
}

/// One summand `G/M` of a pullback of homogeneous spaces, with the elements
/// defining its two projections (`gM ↦ g·left_elem·L` and `gM ↦ g·right_elem·S`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackSummand {
    pub double_coset_rep: Elem,
    pub stabilizer: SubgroupId,
    pub left_elem: Elem,
    pub right_elem: Elem,
}

#[derive(Clone, Debug)]
pub struct Pullback {
    pub object: Arc<GSet>,
    pub to_left: GMap,
    pub to_right: GMap,
}

/// Summands of the pullback of `G/L --a--> G/K <--b-- G/S` (with `L^a, S^b ≤ K`):
/// one `G/(L^a ∩ x·S^b·x⁻¹)` for each double coset `L^a x S^b` in `K`.
pub fn pullback_summands(
    group: &FiniteGroup,
    l: SubgroupId,
    a: Elem,
    s: SubgroupId,
    b: Elem,
    k: SubgroupId,
) -> Result<Vec<PullbackSummand>> {
    let dc = group.double_cosets(l, a, k, s, b)?;
    let ainv = group.inv(a);
    let binv = group.inv(b);
    Ok(dc
        .representatives
        .iter()
        .map(|&x| {
            let xsx = group.conjugate(dc.right, group.inv(x));
            PullbackSummand {
                double_coset_rep: x,
                stabilizer: group.intersection(dc.left, xsx),
                left_elem: ainv,
                right_elem: group.mul(x, binv),
            }
        })
        .collect())
}

/// Pullback of two maps between homogeneous G-sets, via double cosets.
pub fn pullback_homogeneous(f: &GMap, f2: &GMap) -> Result<Pullback> {
    if !Arc::ptr_eq(&f.target, &f2.target) {
        return Err(invalid("pullback needs a common target"));
    }
    let g = f.source.group().clone();
    let (Some(l), Some(s), Some(k)) = (
        single_orbit(&f.source),
        single_orbit(&f2.source),
        single_orbit(&f.target),
    ) else {
        return Err(invalid("expected homogeneous G-sets"));
    };
    let ks = g.cosets(k);
    let a = ks.reps[f.apply(0)];
    let b = ks.reps[f2.apply(0)];
    let summands = pullback_summands(&g, l, a, s, b, k)?;
    let parts: Vec<GSet> = summands
        .iter()
        .map(|m| GSet::homogeneous(g.clone(), m.stabilizer))
        .collect();
    let object = Arc::new(GSet::disjoint_union(g.clone(), &parts)?);
    let ls = g.cosets(l);
    let ss = g.cosets(s);
    let mut left = Vec::with_capacity(object.len());
    let mut right = Vec::with_capacity(object.len());
    for m in &summands {
        for &r in &g.cosets(m.stabilizer).reps {
            left.push(ls.coset_of(g.mul(r, m.left_elem)));
            right.push(ss.coset_of(g.mul(r, m.right_elem)));
        }
    }
    Ok(Pullback {
        to_left: GMap::new(object.clone(), f.source.clone(), left)?,
        to_right: GMap::new(object.clone(), f2.source.clone(), right)?,
        object,
    })
}

/// Set-theoretic pullback `{(x, y) : f(x) = f'(y)}` with the diagonal action.
pub fn pullback_general(f: &GMap, f2: &GMap) -> Result<Pullback> {
    if !Arc::ptr_eq(&f.target, &f2.target) {
        return Err(invalid("pullback needs a common target"));
    }
    let g = f.source.group().clone();
    let mut pairs = Vec::new();
    for x in 0..f.source.len() {
        for y in 0..f2.source.len() {
            if f.apply(x) == f2.apply(y) {
                pairs.push((x, y));
            }
        }
    }
    let pos: std::collections::HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let labels = (0..pairs.len())
        .map(|index| PointLabel { tag: 0, index })
        .collect();
    let (xs, ys) = (f.source.clone(), f2.source.clone());
    let object = Arc::new(GSet::from_action(g, labels, |a, p| {
        let (x, y) = pairs[p];
        pos[&(xs.act(a, x), ys.act(a, y))]
    })?);
    let left = pairs.iter().map(|&(x, _)| x).collect();
    let right = pairs.iter().map(|&(_, y)| y).collect();
    Ok(Pullback {
        to_left: GMap::new(object.clone(), f.source.clone(), left)?,
        to_right: GMap::new(object.clone(), f2.source.clone(), right)?,
        object,
    })
}

/// JSON description of a G-set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GSetSpec {
    Homogeneous { subgroup: SubgroupId },
    DisjointUnion { parts: Vec<GSetSpec> },
}

impl GSetSpec {
    pub fn build(&self, group: &Arc<FiniteGroup>) -> Result<GSet> {
        match self {
            GSetSpec::Homogeneous { subgroup } => {
                group.check_id(*subgroup)?;
                Ok(GSet::homogeneous(group.clone(), *subgroup))
            }
            GSetSpec::DisjointUnion { parts } => {
                let built = parts
                    .iter()
                    .map(|p| p.build(group))
                    .collect::<Result<Vec<_>>>()?;
                GSet::disjoint_union(group.clone(), &built)
            }
        }
    }
}

/// JSON description of a G-map: explicit images of the source points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GMapSpec {
    pub source: GSetSpec,
    pub target: GSetSpec,
    pub images: Vec<usize>,
}

impl GMapSpec {
    pub fn build(&self, group: &Arc<FiniteGroup>) -> Result<GMap> {
        let s = Arc::new(self.source.build(group)?);
        let t = Arc::new(self.target.build(group)?);
        GMap::new(s, t, self.images.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::named;

    fn s3() -> Arc<FiniteGroup> {
        Arc::new(named::symmetric3())
    }

    fn order_sub(g: &FiniteGroup, n: usize) -> SubgroupId {
        g.subgroups().iter().find(|s| s.order() == n).unwrap().id
    }

    #[test]
    fn homogeneous_spaces() {
        let g = s3();
        let pt = GSet::homogeneous(g.clone(), g.whole());
        assert_eq!(pt.len(), 1);
        let x = GSet::homogeneous(g.clone(), order_sub(&g, 2));
        assert_eq!(x.len(), 3);
        assert_eq!(x.orbits().len(), 1);
        assert_eq!(x.stabilizer(0).unwrap(), order_sub(&g, 2));
        assert!(x.check_action());
        let c4 = Arc::new(named::cyclic(4));
        let reg = GSet::homogeneous(c4.clone(), c4.trivial_subgroup());
        assert_eq!(reg.len(), 4);
        assert!((1..4).all(|a| reg.fixed_points(c4.generated_by(&[a])).is_empty()));
    }

    #[test]
    fn map_counts() {
        let g = s3();
        let c2 = order_sub(&g, 2);
        let c3 = order_sub(&g, 3);
        let free = Arc::new(GSet::homogeneous(g.clone(), g.trivial_subgroup()));
        let x2 = Arc::new(GSet::homogeneous(g.clone(), c2));
        let x3 = Arc::new(GSet::homogeneous(g.clone(), c3));
        let pt = Arc::new(GSet::homogeneous(g.clone(), g.whole()));
        assert_eq!(maps_between_homogeneous(&free, &x2).unwrap().len(), 3);
        assert!(maps_between_homogeneous(&x2, &x3).unwrap().is_empty());
        assert_eq!(maps_between_homogeneous(&x2, &pt).unwrap().len(), 1);
    }

    #[test]
    fn fixed_point_examples() {
        let g = s3();
        let c2 = order_sub(&g, 2);
        let c3 = order_sub(&g, 3);
        let x2 = GSet::homogeneous(g.clone(), c2);
        assert_eq!(x2.fixed_points(g.trivial_subgroup()).len(), 3);
        assert_eq!(x2.fixed_points(c2).len(), 1);
        assert!(GSet::homogeneous(g.clone(), c3).fixed_points(c2).is_empty());
    }

    #[test]
    fn hom_count_equals_fixed_points() {
        for g in [
            named::symmetric3(),
            named::dihedral8(),
            named::alternating4(),
        ] {
            let g = Arc::new(g);
            for h in g.subgroups() {
                for k in g.subgroups() {
                    let xh = Arc::new(GSet::homogeneous(g.clone(), h.id));
                    let xk = Arc::new(GSet::homogeneous(g.clone(), k.id));
                    assert_eq!(
                        maps_between_homogeneous(&xh, &xk).unwrap().len(),
                        xk.fixed_points(h.id).len()
                    );
                }
            }
        }
    }

    #[test]
    fn c2_s3_pullback() {
        let g = s3();
        let c2 = order_sub(&g, 2);
        let x = Arc::new(GSet::homogeneous(g.clone(), c2));
        let pt = Arc::new(GSet::homogeneous(g.clone(), g.whole()));
        let q = homogeneous_map(&x, &pt, 0).unwrap();
        let pb = pullback_homogeneous(&q, &q).unwrap();
        assert_eq!(pb.object.len(), 9);
        let orders: Vec<usize> = pb
            .object
            .orbits()
            .iter()
            .map(|o| g.subgroup(o.stabilizer).order())
            .collect();
        let mut sorted = orders.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 2]);
        let brute = pullback_general(&q, &q).unwrap();
        assert_eq!(brute.object.len(), 9);
        assert_eq!(brute.object.iso_invariant(), pb.object.iso_invariant());
    }

    #[test]
    fn identity_pullbacks() {
        let g = s3();
        for h in g.subgroups() {
            let x = Arc::new(GSet::homogeneous(g.clone(), h.id));
            let id = GMap::identity(x.clone());
            let pb = pullback_homogeneous(&id, &id).unwrap();
            assert_eq!(pb.object.iso_invariant(), vec![g.class_of(h.id)]);
            assert_eq!(
                pullback_general(&id, &id).unwrap().object.iso_invariant(),
                pb.object.iso_invariant()
            );
        }
    }

    #[test]
    fn projections_commute() {
        let g = Arc::new(named::dihedral8());
        for l in g.subgroups() {
            for k in g.subgroups() {
                let xl = Arc::new(GSet::homogeneous(g.clone(), l.id));
                let xk = Arc::new(GSet::homogeneous(g.clone(), k.id));
                for f in maps_between_homogeneous(&xl, &xk).unwrap() {
                    let pb = pullback_homogeneous(&f, &f).unwrap();
                    for p in 0..pb.object.len() {
                        assert_eq!(f.apply(pb.to_left.apply(p)), f.apply(pb.to_right.apply(p)));
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_counting() {
        let g = Arc::new(named::alternating4());
        let parts: Vec<GSet> = g
            .subgroups()
            .iter()
            .map(|s| GSet::homogeneous(g.clone(), s.id))
            .collect();
        let u = GSet::disjoint_union(g.clone(), &parts).unwrap();
        let total: usize = u.orbits().iter().map(|o| g.index(o.stabilizer)).sum();
        assert_eq!(total, u.len());
        assert!(GSet::empty(g.clone()).is_empty());
    }

    #[test]
    fn non_equivariant_map_rejected() {
        let g = s3();
        let x = Arc::new(GSet::homogeneous(g.clone(), g.trivial_subgroup()));
        assert!(GMap::new(x.clone(), x.clone(), vec![0, 0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let g = s3();
        let spec = GSetSpec::DisjointUnion {
            parts: vec![
                GSetSpec::Homogeneous {
                    subgroup: SubgroupId(1),
                },
                GSetSpec::Homogeneous {
                    subgroup: g.whole(),
                },
            ],
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<GSetSpec>(&json).unwrap(), spec);
        assert_eq!(spec.build(&g).unwrap().len(), 4);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn pullbacks_agree_on_s4(h in 0usize..30, k in 0usize..30, l in 0usize..30, i in 0usize..24, j in 0usize..24) {
            let g = Arc::new(named::symmetric4());
            let n = g.num_subgroups();
            let (h, k, l) = (SubgroupId(h % n), SubgroupId(k % n), SubgroupId(l % n));
            let (fh, fl) = (g.fixed_cosets(h, k), g.fixed_cosets(l, k));
            proptest::prop_assume!(!fh.is_empty() && !fl.is_empty());
            let reps = &g.cosets(k).reps;
            let (a, b) = (reps[fh[i % fh.len()]], reps[fl[j % fl.len()]]);
            let target = Arc::new(GSet::homogeneous(g.clone(), k));
            let f = homogeneous_map(&Arc::new(GSet::homogeneous(g.clone(), h)), &target, a).unwrap();
            let f2 = homogeneous_map(&Arc::new(GSet::homogeneous(g.clone(), l)), &target, b).unwrap();
            let fast = pullback_homogeneous(&f, &f2).unwrap();
            let slow = pullback_general(&f, &f2).unwrap();
            proptest::prop_assert_eq!(fast.object.len(), slow.object.len());
            proptest::prop_assert_eq!(fast.object.iso_invariant(), slow.object.iso_invariant());
            for x in 0..fast.object.len() {
                proptest::prop_assert_eq!(f.apply(fast.to_left.apply(x)), f2.apply(fast.to_right.apply(x)));
            }
        }
    }
}
