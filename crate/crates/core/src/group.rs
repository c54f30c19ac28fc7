//! Permutation groups with their full subgroup lattice.
//!
//! Elements are stored once, sorted lexicographically as image lists, and
//! referred to by index ([`Elem`]). The identity is always index 0. Subgroups
//! are identified by their position in the lattice, which is ordered by
//! `(order, sorted element list)`; so the trivial subgroup is id 0 and the
//! whole group is the last id.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{invalid, Error, Result};

/// Index of a group element in [`FiniteGroup::elements`].
pub type Elem = usize;

/// A permutation of `{0..n-1}` stored as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            let i = i as usize;
            if i >= n || seen[i] {
                return Err(invalid(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Position of a subgroup in its group's lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubgroupId(pub usize);

impl fmt::Display for SubgroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    pub id: SubgroupId,
    pub elements: Vec<Elem>,
    members: Vec<bool>,
    /// Conjugacy class index (classes are ordered by their least member id).
    pub class: usize,
    /// An element `t` with `self^t = t⁻¹ · self · t` equal to the class representative.
    pub to_rep: Elem,
    pub normalizer: SubgroupId,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: Elem) -> bool {
        self.members[g]
    }
}

/// Left cosets `gH` of a subgroup, indexed by increasing least element.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    pub subgroup: SubgroupId,
    /// Least element of each coset; `reps[0]` is the identity.
    pub reps: Vec<Elem>,
    coset_of: Vec<u32>,
}

impl CosetSpace {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Index of the coset `gH`.
    pub fn coset_of(&self, g: Elem) -> usize {
        self.coset_of[g] as usize
    }
}

/// JSON input format for a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub degree: usize,
    pub generators: Vec<Vec<u32>>,
    #[serde(default)]
    pub name: String,
}

const TABLE_LIMIT: usize = 1024;

pub struct FiniteGroup {
    name: String,
    degree: usize,
    generators: Vec<Perm>,
    generator_elems: Vec<Elem>,
    elements: Vec<Perm>,
    index: HashMap<Perm, Elem>,
    inverses: Vec<Elem>,
    table: Option<Vec<u32>>,
    subgroups: Vec<Subgroup>,
    lookup: HashMap<Vec<Elem>, SubgroupId>,
    classes: Vec<Vec<SubgroupId>>,
    cosets: Vec<OnceLock<CosetSpace>>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("subgroups", &self.subgroups.len())
            .finish()
    }
}

impl FiniteGroup {
    pub fn from_spec(spec: &GroupSpec, limits: &Limits) -> Result<Self> {
        let gens = spec
            .generators
            .iter()
            .map(|g| {
                if g.len() != spec.degree {
                    return Err(invalid(format!(
                        "generator {g:?} has length {} but degree is {}",
                        g.len(),
                        spec.degree
                    )));
                }
                Perm::from_images(g.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&spec.name, spec.degree, gens, limits)
    }

    pub fn spec(&self) -> GroupSpec {
        GroupSpec {
            degree: self.degree,
            generators: self.generators.iter().map(|p| p.0.clone()).collect(),
            name: self.name.clone(),
        }
    }

    pub fn new(name: &str, degree: usize, generators: Vec<Perm>, limits: &Limits) -> Result<Self> {
        if degree == 0 {
            return Err(invalid("degree must be positive"));
        }
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(invalid(format!(
                "generator {g:?} does not have degree {degree}"
            )));
        }

        // element closure
        let id = Perm::identity(degree);
        let mut seen: std::collections::HashSet<Perm> = [id.clone()].into_iter().collect();
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = x.compose(g);
                if seen.insert(y.clone()) {
                    if seen.len() > limits.max_group_order {
                        return Err(Error::BoundExceeded {
                            what: "group order",
                            value: seen.len(),
                            limit: limits.max_group_order,
                        });
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<Perm> = seen.into_iter().collect();
        elements.sort();
        let index: HashMap<Perm, Elem> = elements
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let inverses = elements.iter().map(|p| index[&p.inverse()]).collect();
        let n = elements.len();
        let table = (n <= TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; n * n];
            for a in 0..n {
                for b in 0..n {
                    t[a * n + b] = index[&elements[a].compose(&elements[b])] as u32;
                }
            }
            t
        });
        let generator_elems = generators.iter().map(|g| index[g]).collect();

        let mut group = FiniteGroup {
            name: if name.is_empty() {
                format!("group of order {n}")
            } else {
                name.to_string()
            },
            degree,
            generators,
            generator_elems,
            elements,
            index,
            inverses,
            table,
            subgroups: Vec::new(),
            lookup: HashMap::new(),
            classes: Vec::new(),
            cosets: Vec::new(),
        };
        group.build_lattice(limits)?;
        Ok(group)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn generator_elems(&self) -> &[Elem] {
        &self.generator_elems
    }

    pub fn identity(&self) -> Elem {
        0
    }

    pub fn perm(&self, g: Elem) -> &Perm {
        &self.elements[g]
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn elem_of(&self, p: &Perm) -> Option<Elem> {
        self.index.get(p).copied()
    }

    /// `a · b` (apply `b` first).
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.table {
            Some(t) => t[a * self.elements.len() + b] as usize,
            None => self.index[&self.elements[a].compose(&self.elements[b])],
        }
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inverses[a]
    }

    /// `g⁻¹ · h · g`
    #[inline]
    pub fn conj_elem(&self, h: Elem, g: Elem) -> Elem {
        self.mul(self.inv(g), self.mul(h, g))
    }

    /// Elements of the subgroup generated by `gens`, sorted.
    pub fn closure(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut members = vec![false; self.order()];
        members[0] = true;
        let mut out = vec![0];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for &g in gens {
                let y = self.mul(x, g);
                if !members[y] {
                    members[y] = true;
                    out.push(y);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }

    fn build_lattice(&mut self, limits: &Limits) -> Result<()> {
        let n = self.order();
        let mut found: HashMap<Vec<Elem>, usize> = HashMap::new();
        let mut list: Vec<(Vec<Elem>, Vec<Elem>)> = vec![(vec![0], Vec::new())];
        found.insert(vec![0], 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(idx) = queue.pop_front() {
            let (elems, gens) = list[idx].clone();
            let mut members = vec![false; n];
            for &e in &elems {
                members[e] = true;
            }
            for g in 0..n {
                if members[g] {
                    continue;
                }
                let mut ng = gens.clone();
                ng.push(g);
                let t = self.closure(&ng);
                if !found.contains_key(&t) {
                    if list.len() >= limits.max_lattice {
                        return Err(Error::BoundExceeded {
                            what: "subgroup lattice size",
                            value: list.len() + 1,
                            limit: limits.max_lattice,
                        });
                    }
                    found.insert(t.clone(), list.len());
                    queue.push_back(list.len());
                    list.push((t, ng));
                }
            }
        }

        let mut sets: Vec<Vec<Elem>> = list.into_iter().map(|(e, _)| e).collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        self.lookup = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), SubgroupId(i)))
            .collect();
        let m = sets.len();

        // conjugation by generators, for classes and transporters
        let conj_gen: Vec<Vec<usize>> = sets
            .iter()
            .map(|s| {
                self.generator_elems
                    .iter()
                    .map(|&x| self.lookup[&self.conjugate_set(s, x)].0)
                    .collect()
            })
            .collect();
        let mut class = vec![usize::MAX; m];
        let mut transporter = vec![0; m];
        let mut classes = Vec::new();
        for start in 0..m {
            if class[start] != usize::MAX {
                continue;
            }
            let c = classes.len();
            let mut members = vec![SubgroupId(start)];
            class[start] = c;
            transporter[start] = 0;
            let mut q = VecDeque::from([start]);
            while let Some(h) = q.pop_front() {
                for (gi, &k) in conj_gen[h].iter().enumerate() {
                    if class[k] == usize::MAX {
                        class[k] = c;
                        transporter[k] = self.mul(transporter[h], self.generator_elems[gi]);
                        members.push(SubgroupId(k));
                        q.push_back(k);
                    }
                }
            }
            members.sort();
            classes.push(members);
        }

        let mut subgroups = Vec::with_capacity(m);
        for (i, elems) in sets.iter().enumerate() {
            let mut members = vec![false; n];
            for &e in elems {
                members[e] = true;
            }
            let normal: Vec<Elem> = (0..n)
                .filter(|&g| elems.iter().all(|&h| members[self.conj_elem(h, g)]))
                .collect();
            subgroups.push(Subgroup {
                id: SubgroupId(i),
                elements: elems.clone(),
                members,
                class: class[i],
                to_rep: self.inv(transporter[i]),
                normalizer: self.lookup[&normal],
            });
        }
        self.subgroups = subgroups;
        self.classes = classes;
        self.cosets = (0..m).map(|_| OnceLock::new()).collect();
        Ok(())
    }

    fn conjugate_set(&self, set: &[Elem], g: Elem) -> Vec<Elem> {
        let mut v: Vec<Elem> = set.iter().map(|&h| self.conj_elem(h, g)).collect();
        v.sort_unstable();
        v
    }

    pub fn subgroups(&self) -> &[Subgroup] {
        &self.subgroups
    }

    pub fn num_subgroups(&self) -> usize {
        self.subgroups.len()
    }

    pub fn subgroup(&self, id: SubgroupId) -> &Subgroup {
        &self.subgroups[id.0]
    }

    pub fn check_id(&self, id: SubgroupId) -> Result<SubgroupId> {
        if id.0 < self.subgroups.len() {
            Ok(id)
        } else {
            Err(Error::UnknownSubgroupId(id.0))
        }
    }

    pub fn trivial_subgroup(&self) -> SubgroupId {
        SubgroupId(0)
    }

    pub fn whole(&self) -> SubgroupId {
        SubgroupId(self.subgroups.len() - 1)
    }

    /// Id of the subgroup with exactly these elements, if it is one.
    pub fn subgroup_with_elements(&self, elems: &[Elem]) -> Option<SubgroupId> {
        let mut v = elems.to_vec();
        v.sort_unstable();
        v.dedup();
        self.lookup.get(&v).copied()
    }

    pub fn generated_by(&self, gens: &[Elem]) -> SubgroupId {
        self.lookup[&self.closure(gens)]
    }

    /// `H^g = g⁻¹ H g`
    pub fn conjugate(&self, h: SubgroupId, g: Elem) -> SubgroupId {
        if g == 0 {
            return h;
        }
        self.lookup[&self.conjugate_set(&self.subgroups[h.0].elements, g)]
    }

    pub fn intersection(&self, a: SubgroupId, b: SubgroupId) -> SubgroupId {
        let sb = &self.subgroups[b.0];
        let v: Vec<Elem> = self.subgroups[a.0]
            .elements
            .iter()
            .copied()
            .filter(|&x| sb.contains(x))
            .collect();
        self.lookup[&v]
    }

    pub fn is_subgroup_of(&self, a: SubgroupId, b: SubgroupId) -> bool {
        let sb = &self.subgroups[b.0];
        self.subgroups[a.0].elements.iter().all(|&x| sb.contains(x))
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_members(&self, class: usize) -> &[SubgroupId] {
        &self.classes[class]
    }

    pub fn class_of(&self, h: SubgroupId) -> usize {
        self.subgroups[h.0].class
    }

    pub fn class_rep(&self, class: usize) -> SubgroupId {
        self.classes[class][0]
    }

    /// Conjugacy-class representatives, in class order.
    pub fn class_reps(&self) -> Vec<SubgroupId> {
        self.classes.iter().map(|c| c[0]).collect()
    }

    pub fn rep_of(&self, h: SubgroupId) -> SubgroupId {
        self.class_rep(self.class_of(h))
    }

    pub fn are_conjugate(&self, a: SubgroupId, b: SubgroupId) -> bool {
        self.class_of(a) == self.class_of(b)
    }

    pub fn normalizer(&self, h: SubgroupId) -> SubgroupId {
        self.subgroups[h.0].normalizer
    }

    /// `N_K(H) = N_G(H) ∩ K`
    pub fn normalizer_in(&self, h: SubgroupId, k: SubgroupId) -> SubgroupId {
        self.intersection(self.normalizer(h), k)
    }

    pub fn cosets(&self, h: SubgroupId) -> &CosetSpace {
        self.cosets[h.0].get_or_init(|| {
            let n = self.order();
            let sub = &self.subgroups[h.0];
            let mut coset_of = vec![u32::MAX; n];
            let mut reps = Vec::new();
            for g in 0..n {
                if coset_of[g] == u32::MAX {
                    let idx = reps.len() as u32;
                    reps.push(g);
                    for &x in &sub.elements {
                        coset_of[self.mul(g, x)] = idx;
                    }
                }
            }
            CosetSpace {
                subgroup: h,
                reps,
                coset_of,
            }
        })
    }

    pub fn index(&self, h: SubgroupId) -> usize {
        self.order() / self.subgroups[h.0].order()
    }

    /// Table of marks `|(G/K)^H|` over class representatives (rows `H`, columns `K`).
    pub fn table_of_marks(&self) -> Vec<Vec<usize>> {
        let reps = self.class_reps();
        reps.iter()
            .map(|&h| {
                reps.iter()
                    .map(|&k| self.fixed_cosets(h, k).len())
                    .collect()
            })
            .collect()
    }

    /// Cosets `aK` fixed by `H`, i.e. those with `H^a ≤ K`, as coset indices.
    pub fn fixed_cosets(&self, h: SubgroupId, k: SubgroupId) -> Vec<usize> {
        let cs = self.cosets(k);
        let hs = &self.subgroups[h.0];
        (0..cs.len())
            .filter(|&i| {
                let a = cs.reps[i];
                hs.elements
                    .iter()
                    .all(|&x| cs.coset_of(self.mul(x, a)) == i)
            })
            .collect()
    }

    /// Double cosets `A^g \ K / B^h`.
    pub fn double_cosets(
        &self,
        a: SubgroupId,
        g: Elem,
        k: SubgroupId,
        b: SubgroupId,
        h: Elem,
    ) -> Result<DoubleCosetDecomposition> {
        let left = self.conjugate(a, g);
        let right = self.conjugate(b, h);
        if !self.is_subgroup_of(left, k) {
            return Err(Error::NotSubgroup(format!(
                "conjugate {left} of {a} is not contained in {k}"
            )));
        }
        if !self.is_subgroup_of(right, k) {
            return Err(Error::NotSubgroup(format!(
                "conjugate {right} of {b} is not contained in {k}"
            )));
        }
        let ls = &self.subgroups[left.0].elements;
        let rs = &self.subgroups[right.0].elements;
        let mut seen = vec![false; self.order()];
        let mut representatives = Vec::new();
        let mut sizes = Vec::new();
        for &x in &self.subgroups[k.0].elements {
            if seen[x] {
                continue;
            }
            let mut size = 0;
            for &l in ls {
                let lx = self.mul(l, x);
                for &r in rs {
                    let y = self.mul(lx, r);
                    if !seen[y] {
                        seen[y] = true;
                        size += 1;
                    }
                }
            }
            representatives.push(x);
            sizes.push(size);
        }
        Ok(DoubleCosetDecomposition {
            left,
            right,
            ambient: k,
            representatives,
            sizes,
        })
    }

    /// `N_G(H)/H` as a permutation group on the cosets of `H` in `N_G(H)`.
    pub fn weyl_group(&self, h: SubgroupId) -> Result<FiniteGroup> {
        let n = self.normalizer(h);
        let cs = self.cosets(h);
        let nelems = &self.subgroups[n.0].elements;
        // cosets of H inside N, in increasing order of coset index
        let mut inner: Vec<usize> = nelems.iter().map(|&x| cs.coset_of(x)).collect();
        inner.sort_unstable();
        inner.dedup();
        let pos: HashMap<usize, u32> = inner
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        let as_perm = |x: Elem| {
            Perm(
                inner
                    .iter()
                    .map(|&c| pos[&cs.coset_of(self.mul(x, cs.reps[c]))])
                    .collect(),
            )
        };
        // greedy generating set
        let mut gens: Vec<Elem> = Vec::new();
        let mut span = self.closure(&[]);
        for &x in nelems {
            if span.binary_search(&x).is_err() {
                let mut with_h = gens.clone();
                with_h.push(x);
                gens.push(x);
                let mut all = with_h;
                all.extend(self.subgroups[h.0].elements.iter().copied());
                span = self.closure(&all);
            }
        }
        let perms: Vec<Perm> = gens.into_iter().map(as_perm).collect();
        FiniteGroup::new(
            &format!("N({h})/{h} in {}", self.name),
            inner.len(),
            perms,
            &Limits::default(),
        )
    }

    /// Image-list notation of an element.
    pub fn elem_string(&self, g: Elem) -> String {
        format!("{:?}", self.elements[g])
    }
}

/// `A^g \ K / B^h`: representatives and sizes of the double cosets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleCosetDecomposition {
    pub left: SubgroupId,
    pub right: SubgroupId,
    pub ambient: SubgroupId,
    pub representatives: Vec<Elem>,
    pub sizes: Vec<usize>,
}

/// Small named groups used by tests, examples, and the CLI corpus.
pub mod named {
    use super::*;

    fn cycle(n: usize) -> Perm {
        Perm((0..n as u32).map(|i| (i + 1) % n as u32).collect())
    }

    fn build(name: &str, degree: usize, gens: Vec<Vec<u32>>) -> FiniteGroup {
        let gens = gens
            .into_iter()
            .map(|g| Perm::from_images(g).unwrap())
            .collect();
        FiniteGroup::new(name, degree, gens, &Limits::default()).expect("named group")
    }

    pub fn trivial() -> FiniteGroup {
        FiniteGroup::new("C1", 1, Vec::new(), &Limits::default()).unwrap()
    }

    pub fn cyclic(n: usize) -> FiniteGroup {
        if n == 1 {
            return trivial();
        }
        FiniteGroup::new(&format!("C{n}"), n, vec![cycle(n)], &Limits::default()).unwrap()
    }

    pub fn symmetric3() -> FiniteGroup {
        build("S3", 3, vec![vec![1, 2, 0], vec![1, 0, 2]])
    }

    pub fn dihedral8() -> FiniteGroup {
        build("D4", 4, vec![vec![1, 2, 3, 0], vec![0, 3, 2, 1]])
    }

    pub fn quaternion8() -> FiniteGroup {
        // regular representation of Q8 on {1,i,j,k,-1,-i,-j,-k} = 0..8
        // left multiplication by i and by j
        build(
            "Q8",
            8,
            vec![vec![1, 4, 3, 6, 5, 0, 7, 2], vec![2, 7, 4, 1, 6, 3, 0, 5]],
        )
    }

    pub fn alternating4() -> FiniteGroup {
        build("A4", 4, vec![vec![1, 2, 0, 3], vec![1, 0, 3, 2]])
    }

    pub fn symmetric4() -> FiniteGroup {
        build("S4", 4, vec![vec![1, 2, 3, 0], vec![1, 0, 2, 3]])
    }
}
