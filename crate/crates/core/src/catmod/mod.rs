//! Modules over a finite preadditive category whose hom groups are free abelian.
//!
//! A module assigns a finitely presented abelian group `Z^g / rowspan(R)` to
//! every object and, contravariantly, a `g_x × g_y` matrix to every basis
//! morphism `x → y`.

mod hom;
mod resolution;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{kernel, reduce_presentation, AbelianGroup, Int, Lattice, Matrix};

pub use hom::{
    ext, ext_from_resolution, ext_with, hom_group, pd_bounds, ExtResult, HomGroup, PdBounds,
};
pub use resolution::{resolve, resolve_with, CoverHeuristic, Resolution};

/// `table[i][j]` lists the coordinates of `g_j ∘ f_i` for `f_i ∈ [x,y]`, `g_j ∈ [y,z]`.
pub type CompTable = Vec<Vec<Vec<(usize, Int)>>>;

/// A finite category with free abelian hom groups, given by bases and structure constants.
pub struct SkeletonCategory {
    name: String,
    objects: Vec<String>,
    morphisms: Vec<Vec<Vec<String>>>,
    comp: Vec<Vec<Vec<Arc<CompTable>>>>,
    identities: Vec<usize>,
}

impl fmt::Debug for SkeletonCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SkeletonCategory")
            .field("name", &self.name)
            .field("objects", &self.objects)
            .finish()
    }
}

impl SkeletonCategory {
    /// `compose(x, y, z)` must return the table for `[x,y] × [y,z] → [x,z]`.
    pub fn new(
        name: impl Into<String>,
        objects: Vec<String>,
        morphisms: Vec<Vec<Vec<String>>>,
        identities: Vec<usize>,
        mut compose: impl FnMut(usize, usize, usize) -> Result<CompTable>,
    ) -> Result<Self> {
        let n = objects.len();
        if morphisms.len() != n || morphisms.iter().any(|r| r.len() != n) || identities.len() != n {
            return Err(invalid("category data has inconsistent sizes"));
        }
        let mut comp = Vec::with_capacity(n);
        for x in 0..n {
            let mut cx = Vec::with_capacity(n);
            for y in 0..n {
                let mut cy = Vec::with_capacity(n);
                for z in 0..n {
                    let t = compose(x, y, z)?;
                    if t.len() != morphisms[x][y].len()
                        || t.iter().any(|r| r.len() != morphisms[y][z].len())
                    {
                        return Err(invalid(format!(
                            "composition table ({x},{y},{z}) has the wrong shape"
                        )));
                    }
                    cy.push(Arc::new(t));
                }
                cx.push(cy);
            }
            comp.push(cx);
        }
        Ok(SkeletonCategory {
            name: name.into(),
            objects,
            morphisms,
            comp,
            identities,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn object_label(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn object_labels(&self) -> &[String] {
        &self.objects
    }

    pub fn object_by_label(&self, label: &str) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| o == label)
            .ok_or_else(|| Error::UnknownObject(label.to_string()))
    }

    pub fn hom_dim(&self, x: usize, y: usize) -> usize {
        self.morphisms[x][y].len()
    }

    pub fn morphism_label(&self, x: usize, y: usize, f: usize) -> &str {
        &self.morphisms[x][y][f]
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identities[x]
    }

    /// Coordinates of `g_j ∘ f_i` with `f_i ∈ [x,y]`, `g_j ∈ [y,z]`.
    pub fn compose(&self, x: usize, y: usize, z: usize, i: usize, j: usize) -> &[(usize, Int)] {
        &self.comp[x][y][z][i][j]
    }

    /// Matrix of `Z[-,y](f): Z[z,y] → Z[x,y]` for `f ∈ [x,z]`.
    pub fn precompose_matrix(&self, x: usize, z: usize, f: usize, y: usize) -> Matrix {
        let mut m = Matrix::zeros(self.hom_dim(x, y), self.hom_dim(z, y));
        for (j, terms) in self.comp[x][z][y][f].iter().enumerate() {
            for &(t, c) in terms {
                m[(t, j)] += c;
            }
        }
        m
    }

    /// Checks associativity and the identity laws on basis morphisms.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.num_objects();
        for x in 0..n {
            for y in 0..n {
                for f in 0..self.hom_dim(x, y) {
                    let unit = |v: &[(usize, Int)]| v == [(f, 1)];
                    if !unit(self.compose(x, y, y, f, self.identity(y)))
                        || !unit(self.compose(x, x, y, self.identity(x), f))
                    {
                        return Err(Error::Invariant(format!(
                            "identity law fails at {x}->{y} #{f}"
                        )));
                    }
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        for f in 0..self.hom_dim(x, y) {
                            for g in 0..self.hom_dim(y, z) {
                                for h in 0..self.hom_dim(z, w) {
                                    let mut lhs = BTreeMap::new();
                                    for &(t, c) in self.compose(x, y, z, f, g) {
                                        for &(u, d) in self.compose(x, z, w, t, h) {
                                            *lhs.entry(u).or_insert(0) += c * d;
                                        }
                                    }
                                    let mut rhs = BTreeMap::new();
                                    for &(t, c) in self.compose(y, z, w, g, h) {
                                        for &(u, d) in self.compose(x, y, w, f, t) {
                                            *rhs.entry(u).or_insert(0) += c * d;
                                        }
                                    }
                                    lhs.retain(|_, v| *v != 0);
                                    rhs.retain(|_, v| *v != 0);
                                    if lhs != rhs {
                                        return Err(Error::Invariant(format!(
                                            "associativity fails at {x}->{y}->{z}->{w}"
                                        )));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A contravariant module over a [`SkeletonCategory`].
#[derive(Clone)]
pub struct CatModule {
    cat: Arc<SkeletonCategory>,
    gens: Vec<usize>,
    relations: Vec<Matrix>,
    actions: Vec<Vec<Vec<Matrix>>>,
    rel_lattices: Vec<OnceLock<Lattice>>,
}

impl fmt::Debug for CatModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let values: Vec<String> = (0..self.gens.len())
            .map(|x| self.value(x).to_string())
            .collect();
        f.debug_struct("CatModule")
            .field("values", &values)
            .finish()
    }
}

impl CatModule {
    /// Builds a module, checking shapes only. Call [`CatModule::validate`] for functoriality.
    pub fn new(
        cat: Arc<SkeletonCategory>,
        gens: Vec<usize>,
        relations: Vec<Matrix>,
        actions: Vec<Vec<Vec<Matrix>>>,
    ) -> Result<Self> {
        let n = cat.num_objects();
        if gens.len() != n || relations.len() != n || actions.len() != n {
            return Err(invalid("module data does not match the category"));
        }
        for x in 0..n {
            if relations[x].cols() != gens[x] {
                return Err(invalid(format!(
                    "relations at object {x} have the wrong width"
                )));
            }
            if actions[x].len() != n {
                return Err(invalid("module actions do not match the category"));
            }
            for y in 0..n {
                if actions[x][y].len() != cat.hom_dim(x, y) {
                    return Err(invalid(format!(
                        "wrong number of action matrices for {x}->{y}"
                    )));
                }
                for m in &actions[x][y] {
                    if m.shape() != (gens[x], gens[y]) {
                        return Err(invalid(format!(
                            "action matrix for {x}->{y} has the wrong shape"
                        )));
                    }
                }
            }
        }
        Ok(CatModule {
            rel_lattices: (0..n).map(|_| OnceLock::new()).collect(),
            cat,
            gens,
            relations,
            actions,
        })
    }

    pub fn zero(cat: Arc<SkeletonCategory>) -> Self {
        let n = cat.num_objects();
        let actions = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| vec![Matrix::zeros(0, 0); cat.hom_dim(x, y)])
                    .collect()
            })
            .collect();
        Self::new(cat, vec![0; n], vec![Matrix::zeros(0, 0); n], actions).expect("zero module")
    }

    /// `Z` at every object, every basis morphism acting as the identity.
    pub fn constant(cat: Arc<SkeletonCategory>) -> Self {
        let n = cat.num_objects();
        let actions = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| vec![Matrix::identity(1); cat.hom_dim(x, y)])
                    .collect()
            })
            .collect();
        Self::new(cat, vec![1; n], vec![Matrix::zeros(0, 1); n], actions).expect("constant module")
    }

    pub fn category(&self) -> &Arc<SkeletonCategory> {
        &self.cat
    }

    pub fn num_gens(&self, x: usize) -> usize {
        self.gens[x]
    }

    pub fn gens(&self) -> &[usize] {
        &self.gens
    }

    pub fn relations(&self, x: usize) -> &Matrix {
        &self.relations[x]
    }

    /// `M(f): M(y) → M(x)` for the `f`-th basis morphism `x → y`.
    pub fn action(&self, x: usize, y: usize, f: usize) -> &Matrix {
        &self.actions[x][y][f]
    }

    pub fn has_relations(&self) -> bool {
        self.relations.iter().any(|r| r.rows() > 0 && !r.is_zero())
    }

    /// The abelian group `M(x)`.
    pub fn value(&self, x: usize) -> AbelianGroup {
        AbelianGroup::cokernel(&self.relations[x].transpose())
    }

    pub fn values(&self) -> Vec<AbelianGroup> {
        (0..self.gens.len()).map(|x| self.value(x)).collect()
    }

    pub fn total_gens(&self) -> usize {
        self.gens.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        (0..self.gens.len()).all(|x| self.value(x).is_zero())
    }

    /// The relation lattice of `M(x)` inside `Z^{g_x}`.
    pub fn relation_lattice(&self, x: usize) -> &Lattice {
        self.rel_lattices[x].get_or_init(|| Lattice::spanned_by(&self.relations[x].transpose()))
    }

    /// Whether the vector is zero in `M(x)`.
    pub fn is_zero_at(&self, x: usize, v: &[Int]) -> bool {
        v.iter().all(|&c| c == 0) || self.relation_lattice(x).contains(v)
    }

    /// Whether every column of `m` is zero in `M(x)`.
    pub fn columns_zero_at(&self, x: usize, m: &Matrix) -> bool {
        (0..m.cols()).all(|j| self.is_zero_at(x, &m.column(j)))
    }

    /// `M(Σ c_t h_t) = Σ c_t M(h_t)` for a combination of basis morphisms `x → y`.
    pub fn action_of(&self, x: usize, y: usize, combo: &[(usize, Int)]) -> Matrix {
        let mut m = Matrix::zeros(self.gens[x], self.gens[y]);
        for &(t, c) in combo {
            m.add_scaled(&self.actions[x][y][t], c);
        }
        m
    }

    /// Checks well-definedness on relations, identities and contravariant functoriality.
    pub fn validate(&self) -> Result<()> {
        let cat = &self.cat;
        let n = cat.num_objects();
        for x in 0..n {
            for y in 0..n {
                for f in 0..cat.hom_dim(x, y) {
                    let img = self.actions[x][y][f].mul(&self.relations[y].transpose());
                    if !self.columns_zero_at(x, &img) {
                        return Err(invalid(format!(
                            "action of {} does not preserve relations",
                            cat.morphism_label(x, y, f)
                        )));
                    }
                }
            }
            let id = self.actions[x][x][cat.identity(x)].sub(&Matrix::identity(self.gens[x]));
            if !self.columns_zero_at(x, &id) {
                return Err(invalid(format!(
                    "identity of {} does not act trivially",
                    cat.object_label(x)
                )));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for f in 0..cat.hom_dim(x, y) {
                        for g in 0..cat.hom_dim(y, z) {
                            let lhs = self.action_of(x, z, cat.compose(x, y, z, f, g));
                            let rhs = self.actions[x][y][f].mul(&self.actions[y][z][g]);
                            if !self.columns_zero_at(x, &lhs.sub(&rhs)) {
                                return Err(invalid(format!(
                                    "action is not functorial on {} then {}",
                                    cat.morphism_label(x, y, f),
                                    cat.morphism_label(y, z, g)
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Direct sum, generators of `self` first.
    pub fn direct_sum(&self, other: &CatModule) -> Result<CatModule> {
        if !Arc::ptr_eq(&self.cat, &other.cat) {
            return Err(Error::ObjectMismatch(
                "modules over different categories".into(),
            ));
        }
        let n = self.gens.len();
        let gens = (0..n).map(|x| self.gens[x] + other.gens[x]).collect();
        let relations = (0..n)
            .map(|x| {
                Matrix::block_diagonal(&[self.relations[x].clone(), other.relations[x].clone()])
            })
            .collect();
        let actions = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        (0..self.cat.hom_dim(x, y))
                            .map(|f| {
                                Matrix::block_diagonal(&[
                                    self.actions[x][y][f].clone(),
                                    other.actions[x][y][f].clone(),
                                ])
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CatModule::new(self.cat.clone(), gens, relations, actions)
    }

    /// An isomorphic module with a minimal presentation at every object,
    /// together with the isomorphism `self → simplified`.
    pub fn simplify(&self) -> (CatModule, ModuleMap) {
        let n = self.gens.len();
        let reds: Vec<_> = (0..n)
            .map(|x| reduce_presentation(self.gens[x], &self.relations[x]))
            .collect();
        let gens: Vec<usize> = reds.iter().map(|r| r.orders.len()).collect();
        let relations = reds
            .iter()
            .map(|r| {
                let rows: Vec<Vec<Int>> = r
                    .orders
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d != 0)
                    .map(|(i, &d)| {
                        let mut v = vec![0; r.orders.len()];
                        v[i] = d;
                        v
                    })
                    .collect();
                if rows.is_empty() {
                    Matrix::zeros(0, r.orders.len())
                } else {
                    Matrix::from_rows(&rows)
                }
            })
            .collect();
        let actions = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        (0..self.cat.hom_dim(x, y))
                            .map(|f| {
                                reds[x]
                                    .projection
                                    .mul(&self.actions[x][y][f])
                                    .mul(&reds[y].section)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let simple =
            CatModule::new(self.cat.clone(), gens, relations, actions).expect("simplified module");
        let simple = Arc::new(simple);
        let map = ModuleMap {
            source: Arc::new(self.clone()),
            target: simple.clone(),
            components: reds.iter().map(|r| r.projection.clone()).collect(),
        };
        ((*simple).clone(), map)
    }

    pub fn to_spec(&self) -> ModuleSpec {
        let n = self.gens.len();
        let mut values = BTreeMap::new();
        let mut actions = BTreeMap::new();
        for x in 0..n {
            values.insert(
                x.to_string(),
                ValueSpec {
                    rank: self.gens[x],
                    relations: self.relations[x].to_rows(),
                },
            );
            for y in 0..n {
                for f in 0..self.cat.hom_dim(x, y) {
                    actions.insert(format!("{x}:{y}:{f}"), self.actions[x][y][f].to_rows());
                }
            }
        }
        ModuleSpec {
            category: self.cat.name().to_string(),
            values,
            actions,
        }
    }

    pub fn from_spec(cat: Arc<SkeletonCategory>, spec: &ModuleSpec) -> Result<Self> {
        let n = cat.num_objects();
        let mut gens = vec![0; n];
        let mut relations = vec![Matrix::zeros(0, 0); n];
        for (k, v) in &spec.values {
            let x: usize = k
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad object id {k:?}")))?;
            if x >= n {
                return Err(Error::UnknownObject(k.clone()));
            }
            gens[x] = v.rank;
            relations[x] = rows_to_matrix(&v.relations, v.rank)?;
        }
        for x in 0..n {
            if relations[x].cols() != gens[x] {
                relations[x] = Matrix::zeros(0, gens[x]);
            }
        }
        let mut actions: Vec<Vec<Vec<Matrix>>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| vec![Matrix::zeros(gens[x], gens[y]); cat.hom_dim(x, y)])
                    .collect()
            })
            .collect();
        for (k, rows) in &spec.actions {
            let parts: Vec<usize> = k
                .split(':')
                .map(|p| p.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| invalid(format!("bad morphism id {k:?}")))?;
            let [x, y, f] = parts[..] else {
                return Err(invalid(format!("bad morphism id {k:?}")));
            };
            if x >= n || y >= n || f >= cat.hom_dim(x, y) {
                return Err(Error::UnknownObject(k.clone()));
            }
            let m = rows_to_matrix(rows, gens[y])?;
            if m.rows() != gens[x] {
                return Err(invalid(format!("action {k} has the wrong number of rows")));
            }
            actions[x][y][f] = m;
        }
        let m = CatModule::new(cat, gens, relations, actions)?;
        m.validate()?;
        Ok(m)
    }
}

fn rows_to_matrix(rows: &[Vec<Int>], cols: usize) -> Result<Matrix> {
    if rows.iter().any(|r| r.len() != cols) {
        return Err(invalid("matrix rows have inconsistent lengths"));
    }
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, cols));
    }
    Ok(Matrix::from_rows(rows))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSpec {
    pub rank: usize,
    #[serde(default)]
    pub relations: Vec<Vec<Int>>,
}

/// JSON form: `values` keyed by object index, `actions` keyed by `"x:y:f"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    #[serde(default)]
    pub category: String,
    pub values: BTreeMap<String, ValueSpec>,
    #[serde(default)]
    pub actions: BTreeMap<String, Vec<Vec<Int>>>,
}

/// A natural transformation; `components[x]` maps `source(x) → target(x)`.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub source: Arc<CatModule>,
    pub target: Arc<CatModule>,
    pub components: Vec<Matrix>,
}

impl ModuleMap {
    pub fn new(
        source: Arc<CatModule>,
        target: Arc<CatModule>,
        components: Vec<Matrix>,
    ) -> Result<Self> {
        if !Arc::ptr_eq(source.category(), target.category()) {
            return Err(Error::ObjectMismatch(
                "map between modules over different categories".into(),
            ));
        }
        for (x, c) in components.iter().enumerate() {
            if c.shape() != (target.num_gens(x), source.num_gens(x)) {
                return Err(invalid(format!(
                    "component at object {x} has the wrong shape"
                )));
            }
        }
        if components.len() != source.gens().len() {
            return Err(invalid("wrong number of components"));
        }
        Ok(ModuleMap {
            source,
            target,
            components,
        })
    }

    /// Checks that components respect relations and commute with every basis morphism.
    pub fn check_natural(&self) -> Result<()> {
        let cat = self.source.category().clone();
        let n = cat.num_objects();
        for x in 0..n {
            let img = self.components[x].mul(&self.source.relations(x).transpose());
            if !self.target.columns_zero_at(x, &img) {
                return Err(Error::NotNatural(format!(
                    "component at {} does not preserve relations",
                    cat.object_label(x)
                )));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for f in 0..cat.hom_dim(x, y) {
                    let lhs = self.components[x].mul(self.source.action(x, y, f));
                    let rhs = self.target.action(x, y, f).mul(&self.components[y]);
                    if !self.target.columns_zero_at(x, &lhs.sub(&rhs)) {
                        return Err(Error::NotNatural(format!(
                            "square for {} does not commute",
                            cat.morphism_label(x, y, f)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn identity(m: Arc<CatModule>) -> Self {
        let components = m.gens().iter().map(|&g| Matrix::identity(g)).collect();
        ModuleMap {
            source: m.clone(),
            target: m,
            components,
        }
    }

    pub fn zero(source: Arc<CatModule>, target: Arc<CatModule>) -> Self {
        let components = (0..source.gens().len())
            .map(|x| Matrix::zeros(target.num_gens(x), source.num_gens(x)))
            .collect();
        ModuleMap {
            source,
            target,
            components,
        }
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &ModuleMap) -> Result<ModuleMap> {
        if other.target.gens() != self.source.gens() {
            return Err(Error::ObjectMismatch(
                "module maps are not composable".into(),
            ));
        }
        Ok(ModuleMap {
            source: other.source.clone(),
            target: self.target.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.mul(b))
                .collect(),
        })
    }

    /// Whether every component is zero modulo the target relations.
    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(x, c)| self.target.columns_zero_at(x, c))
    }

    /// Whether `self` and `other` agree modulo the target relations.
    pub fn agrees_with(&self, other: &ModuleMap) -> bool {
        self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .enumerate()
                .all(|(x, (a, b))| {
                    a.shape() == b.shape() && self.target.columns_zero_at(x, &a.sub(b))
                })
    }

    /// The kernel as a module with its inclusion.
    pub fn kernel(&self) -> Result<(CatModule, ModuleMap)> {
        self.check_natural()?;
        let cat = self.source.category().clone();
        let n = cat.num_objects();
        let mut lattices = Vec::with_capacity(n);
        for x in 0..n {
            let gs = self.source.num_gens(x);
            let rel_t = self.target.relations(x).transpose();
            let stacked = self.components[x].hstack(&rel_t.scale(-1));
            let k = kernel(&stacked);
            let proj = k.select_rows(&(0..gs).collect::<Vec<_>>());
            lattices.push(Lattice::spanned_by(&proj));
        }
        let gens: Vec<usize> = lattices.iter().map(|l| l.rank()).collect();
        let mut relations = Vec::with_capacity(n);
        for x in 0..n {
            let rel = self.source.relations(x).transpose();
            let coords = lattices[x]
                .coords_matrix(&rel)
                .ok_or_else(|| Error::Invariant("source relations escape the kernel".into()))?;
            relations.push(coords.transpose());
        }
        let mut actions = Vec::with_capacity(n);
        for x in 0..n {
            let mut ax = Vec::with_capacity(n);
            for y in 0..n {
                let mut axy = Vec::with_capacity(cat.hom_dim(x, y));
                for f in 0..cat.hom_dim(x, y) {
                    let img = self.source.action(x, y, f).mul(lattices[y].basis());
                    let c = lattices[x].coords_matrix(&img).ok_or_else(|| {
                        Error::NotNatural("kernel is not closed under the action".into())
                    })?;
                    axy.push(c);
                }
                ax.push(axy);
            }
            actions.push(ax);
        }
        let k = Arc::new(CatModule::new(cat, gens, relations, actions)?);
        let inclusion = ModuleMap {
            source: k.clone(),
            target: self.source.clone(),
            components: lattices.iter().map(|l| l.basis().clone()).collect(),
        };
        Ok(((*k).clone(), inclusion))
    }

    /// The cokernel as a module with its projection.
    pub fn cokernel(&self) -> Result<(CatModule, ModuleMap)> {
        self.check_natural()?;
        let n = self.source.gens().len();
        let relations = (0..n)
            .map(|x| {
                self.target
                    .relations(x)
                    .vstack(&self.components[x].transpose())
            })
            .collect();
        let actions = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        (0..self.target.category().hom_dim(x, y))
                            .map(|f| self.target.action(x, y, f).clone())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let c = Arc::new(CatModule::new(
            self.target.category().clone(),
            self.target.gens().to_vec(),
            relations,
            actions,
        )?);
        let proj = ModuleMap {
            source: self.target.clone(),
            target: c.clone(),
            components: self
                .target
                .gens()
                .iter()
                .map(|&g| Matrix::identity(g))
                .collect(),
        };
        Ok(((*c).clone(), proj))
    }

    /// Whether `A --self--> B --next--> C` is exact at `B` at every object.
    pub fn is_exact_before(&self, next: &ModuleMap) -> Result<bool> {
        if !next.compose(self)?.is_zero() {
            return Ok(false);
        }
        Ok((0..self.components.len()).all(|x| {
            let gb = self.target.num_gens(x);
            let stacked =
                next.components[x].hstack(&next.target.relations(x).transpose().scale(-1));
            let k = kernel(&stacked).select_rows(&(0..gb).collect::<Vec<_>>());
            let image = Lattice::spanned_by(
                &self.components[x].hstack(&self.target.relations(x).transpose()),
            );
            image.coords_matrix(&k).is_some()
        }))
    }

    /// Whether `source → target` is surjective at every object.
    pub fn is_surjective(&self) -> bool {
        (0..self.components.len()).all(|x| {
            let gens = self.components[x].hstack(&self.target.relations(x).transpose());
            Lattice::spanned_by(&gens).is_full()
        })
    }
}

/// A free module `⊕_i Z[-, y_i]`; the value at `x` is the concatenation of the bases of `[x, y_i]`.
#[derive(Clone, Debug)]
pub struct FreeModule {
    pub generators: Vec<usize>,
    pub module: Arc<CatModule>,
    offsets: Vec<Vec<usize>>,
}

impl FreeModule {
    pub fn new(cat: Arc<SkeletonCategory>, generators: Vec<usize>) -> Result<Self> {
        let n = cat.num_objects();
        if let Some(&bad) = generators.iter().find(|&&y| y >= n) {
            return Err(Error::UnknownObject(bad.to_string()));
        }
        let mut offsets = Vec::with_capacity(n);
        let mut gens = Vec::with_capacity(n);
        for x in 0..n {
            let mut off = Vec::with_capacity(generators.len());
            let mut total = 0;
            for &y in &generators {
                off.push(total);
                total += cat.hom_dim(x, y);
            }
            offsets.push(off);
            gens.push(total);
        }
        let mut actions = Vec::with_capacity(n);
        for x in 0..n {
            let mut ax = Vec::with_capacity(n);
            for z in 0..n {
                let mut axz = Vec::with_capacity(cat.hom_dim(x, z));
                for f in 0..cat.hom_dim(x, z) {
                    let blocks: Vec<Matrix> = generators
                        .iter()
                        .map(|&y| cat.precompose_matrix(x, z, f, y))
                        .collect();
                    axz.push(block_diag_rect(&blocks, gens[x], gens[z]));
                }
                ax.push(axz);
            }
            actions.push(ax);
        }
        let relations = gens.iter().map(|&g| Matrix::zeros(0, g)).collect();
        let module = CatModule::new(cat, gens, relations, actions)?;
        Ok(FreeModule {
            generators,
            module: Arc::new(module),
            offsets,
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Coordinate of the basis morphism `h ∈ [x, y_i]` in the value at `x`.
    pub fn position(&self, x: usize, i: usize, h: usize) -> usize {
        self.offsets[x][i] + h
    }

    /// Position of the `i`-th generator (the identity of `y_i`) in the value at `y_i`.
    pub fn generator_position(&self, i: usize) -> usize {
        let y = self.generators[i];
        self.position(y, i, self.module.category().identity(y))
    }

    /// The unique map sending generator `i` to `images[i] ∈ M(y_i)`.
    pub fn map_to(&self, target: Arc<CatModule>, images: &[Vec<Int>]) -> Result<ModuleMap> {
        let cat = self.module.category().clone();
        if images.len() != self.generators.len() {
            return Err(invalid("one image per generator is required"));
        }
        for (i, &y) in self.generators.iter().enumerate() {
            if images[i].len() != target.num_gens(y) {
                return Err(invalid(format!(
                    "image of generator {i} has the wrong length"
                )));
            }
        }
        let n = cat.num_objects();
        let components = (0..n)
            .map(|x| {
                let mut c = Matrix::zeros(target.num_gens(x), self.module.num_gens(x));
                for (i, &y) in self.generators.iter().enumerate() {
                    for h in 0..cat.hom_dim(x, y) {
                        let v = target.action(x, y, h).mul_vec(&images[i]);
                        let col = self.position(x, i, h);
                        for (r, &e) in v.iter().enumerate() {
                            c[(r, col)] = e;
                        }
                    }
                }
                c
            })
            .collect();
        ModuleMap::new(self.module.clone(), target, components)
    }
}

/// Block-diagonal assembly where blocks may have zero rows or columns.
fn block_diag_rect(blocks: &[Matrix], rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        m.set_block(r, c, b);
        r += b.rows();
        c += b.cols();
    }
    m
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// The group algebra of `C_n` as a one-object category; morphism `i` is `t^i`.
    pub fn cyclic_group_category(n: usize) -> Arc<SkeletonCategory> {
        Arc::new(
            SkeletonCategory::new(
                format!("Z[C{n}]"),
                vec!["*".into()],
                vec![vec![(0..n).map(|i| format!("t^{i}")).collect()]],
                vec![0],
                |_, _, _| {
                    Ok((0..n)
                        .map(|i| (0..n).map(|j| vec![((i + j) % n, 1)]).collect())
                        .collect())
                },
            )
            .unwrap(),
        )
    }

    /// The one-object module `Z` on which the generator acts by `sign`.
    pub fn sign_module(cat: Arc<SkeletonCategory>, sign: Int) -> CatModule {
        let n = cat.hom_dim(0, 0);
        let actions = vec![vec![(0..n)
            .map(|i| Matrix::from_rows(&[vec![if i % 2 == 0 { 1 } else { sign }]]))
            .collect()]];
        CatModule::new(cat, vec![1], vec![Matrix::zeros(0, 1)], actions).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn cyclic_category_axioms() {
        cyclic_group_category(3).check_axioms().unwrap();
    }

    #[test]
    fn free_module_values() {
        let cat = cyclic_group_category(2);
        let f = FreeModule::new(cat.clone(), vec![0, 0]).unwrap();
        assert_eq!(f.module.value(0), AbelianGroup::free(4));
        f.module.validate().unwrap();
        let z = FreeModule::new(cat.clone(), vec![]).unwrap();
        assert!(z.module.is_zero());
        assert!(FreeModule::new(cat, vec![1]).is_err());
    }

    #[test]
    fn augmentation_kernel() {
        let cat = cyclic_group_category(2);
        let triv = Arc::new(CatModule::constant(cat.clone()));
        let f = FreeModule::new(cat, vec![0]).unwrap();
        let aug = f.map_to(triv, &[vec![1]]).unwrap();
        assert!(aug.is_surjective());
        let (k, inc) = aug.kernel().unwrap();
        assert_eq!(k.value(0), AbelianGroup::free(1));
        k.validate().unwrap();
        inc.check_natural().unwrap();
        assert_eq!(k.action(0, 0, 1), &Matrix::from_rows(&[vec![-1]]));
    }

    #[test]
    fn kernels_of_identity_and_zero() {
        let cat = cyclic_group_category(2);
        let m = Arc::new(
            FreeModule::new(cat, vec![0])
                .unwrap()
                .module
                .as_ref()
                .clone(),
        );
        let (k, _) = ModuleMap::identity(m.clone()).kernel().unwrap();
        assert!(k.is_zero());
        let (k, _) = ModuleMap::zero(m.clone(), m.clone()).kernel().unwrap();
        assert_eq!(k.values(), m.values());
    }

    #[test]
    fn non_natural_map_detected() {
        let cat = cyclic_group_category(2);
        let triv = Arc::new(CatModule::constant(cat.clone()));
        let sign = Arc::new(sign_module(cat, -1));
        let m = ModuleMap::new(triv, sign, vec![Matrix::identity(1)]).unwrap();
        assert!(matches!(m.check_natural(), Err(Error::NotNatural(_))));
    }

    #[test]
    fn cokernel_and_simplify() {
        let cat = cyclic_group_category(2);
        let triv = Arc::new(CatModule::constant(cat.clone()));
        let two = ModuleMap::new(
            triv.clone(),
            triv.clone(),
            vec![Matrix::from_rows(&[vec![2]])],
        )
        .unwrap();
        let (c, _) = two.cokernel().unwrap();
        assert_eq!(c.value(0), AbelianGroup::cyclic(2));
        c.validate().unwrap();
        let (s, iso) = c.simplify();
        assert_eq!(s.value(0), AbelianGroup::cyclic(2));
        iso.check_natural().unwrap();
    }

    #[test]
    fn spec_round_trip() {
        let cat = cyclic_group_category(2);
        let m = sign_module(cat.clone(), -1)
            .direct_sum(&CatModule::constant(cat.clone()))
            .unwrap();
        let spec = m.to_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back = CatModule::from_spec(cat, &serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.to_spec(), spec);
    }

    #[test]
    fn invalid_module_rejected() {
        let cat = cyclic_group_category(2);
        let bad = CatModule::new(
            cat,
            vec![1],
            vec![Matrix::zeros(0, 1)],
            vec![vec![vec![
                Matrix::identity(1),
                Matrix::from_rows(&[vec![2]]),
            ]]],
        )
        .unwrap();
        assert!(bad.validate().is_err());
    }
}
