//! Hom groups, Ext through Hom complexes, and projective-dimension bounds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::resolution::{resolve_with, CoverHeuristic, Resolution};
use super::{CatModule, ModuleMap};
use crate::config::Limits;
use crate::error::{invalid, Error, Result};
use crate::linalg::{kernel, subquotient, AbelianGroup, Int, Lattice, Matrix};

/// `Hom(M, N)` as `Z / B`, where `Z` is the lattice of natural, well-defined
/// component tuples and `B` those whose columns vanish in `N`.
#[derive(Clone, Debug)]
pub struct HomGroup {
    pub source: Arc<CatModule>,
    pub target: Arc<CatModule>,
    pub group: AbelianGroup,
    cycles: Lattice,
    boundaries: Matrix,
    offsets: Vec<usize>,
}

impl HomGroup {
    fn shape(&self, x: usize) -> (usize, usize) {
        (self.target.num_gens(x), self.source.num_gens(x))
    }

    pub fn dimension(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Flattens a map into the ambient coordinate space.
    pub fn to_vector(&self, m: &ModuleMap) -> Vec<Int> {
        let mut v = Vec::with_capacity(self.dimension());
        for c in &m.components {
            for i in 0..c.rows() {
                v.extend_from_slice(c.row(i));
            }
        }
        v
    }

    pub fn to_map(&self, v: &[Int]) -> ModuleMap {
        let components = (0..self.offsets.len() - 1)
            .map(|x| {
                let (r, c) = self.shape(x);
                Matrix::from_data(r, c, v[self.offsets[x]..self.offsets[x + 1]].to_vec())
                    .expect("shape")
            })
            .collect();
        ModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            components,
        }
    }

    /// Maps spanning `Hom(M, N)`, one per basis vector of the cycle lattice.
    pub fn spanning_maps(&self) -> Vec<ModuleMap> {
        let b = self.cycles.basis();
        (0..b.cols()).map(|j| self.to_map(&b.column(j))).collect()
    }

    /// Whether the map represents zero in `Hom(M, N)`.
    pub fn is_zero(&self, m: &ModuleMap) -> bool {
        m.is_zero()
    }

    /// Whether the flattened vector is a natural, well-defined map.
    pub fn contains(&self, v: &[Int]) -> bool {
        self.cycles.contains(v)
    }

    pub fn boundaries(&self) -> &Matrix {
        &self.boundaries
    }
}

/// `Hom(M, N)` computed from naturality and well-definedness constraints.
pub fn hom_group(source: Arc<CatModule>, target: Arc<CatModule>) -> Result<HomGroup> {
    if !Arc::ptr_eq(source.category(), target.category()) {
        return Err(Error::ObjectMismatch(
            "modules over different categories".into(),
        ));
    }
    let cat = source.category().clone();
    let n = cat.num_objects();
    let mut offsets = vec![0];
    for x in 0..n {
        offsets.push(offsets[x] + target.num_gens(x) * source.num_gens(x));
    }
    let dim = offsets[n];
    // Each constraint block is a linear image of the variables that must land in rel N(x).
    let mut blocks: Vec<(usize, Matrix)> = Vec::new();
    for x in 0..n {
        let (gn, gm) = (target.num_gens(x), source.num_gens(x));
        for y in 0..n {
            let gmy = source.num_gens(y);
            for f in 0..cat.hom_dim(x, y) {
                // φ_x M(f) − N(f) φ_y, column j, entry i
                let mf = source.action(x, y, f);
                let nf = target.action(x, y, f);
                let gny = target.num_gens(y);
                let mut a = Matrix::zeros(gn * gmy, dim);
                for j in 0..gmy {
                    for i in 0..gn {
                        let row = j * gn + i;
                        for k in 0..gm {
                            let c = mf[(k, j)];
                            if c != 0 {
                                a[(row, offsets[x] + i * gm + k)] += c;
                            }
                        }
                        for k in 0..gny {
                            let c = nf[(i, k)];
                            if c != 0 {
                                a[(row, offsets[y] + k * gmy + j)] -= c;
                            }
                        }
                    }
                }
                if gn * gmy > 0 {
                    blocks.push((x, a));
                }
            }
        }
        let rels = source.relations(x);
        if rels.rows() > 0 && gn > 0 {
            let mut a = Matrix::zeros(gn * rels.rows(), dim);
            for r in 0..rels.rows() {
                for i in 0..gn {
                    for k in 0..gm {
                        let c = rels[(r, k)];
                        if c != 0 {
                            a[(r * gn + i, offsets[x] + i * gm + k)] += c;
                        }
                    }
                }
            }
            blocks.push((x, a));
        }
    }
    let constraint_rows: usize = blocks.iter().map(|(_, a)| a.rows()).sum();
    let mut a = Matrix::zeros(constraint_rows, dim);
    let mut rel_cols: Vec<Vec<Int>> = Vec::new();
    let mut r0 = 0;
    for (x, block) in &blocks {
        a.set_block(r0, 0, block);
        let gn = target.num_gens(*x);
        let rels = target.relations(*x);
        for seg in 0..block.rows() / gn.max(1) {
            for rr in 0..rels.rows() {
                let mut col = vec![0; constraint_rows];
                for i in 0..gn {
                    col[r0 + seg * gn + i] = rels[(rr, i)];
                }
                rel_cols.push(col);
            }
        }
        r0 += block.rows();
    }
    let cycles = if rel_cols.is_empty() {
        Lattice::spanned_by(&kernel(&a))
    } else {
        let rel = Matrix::from_columns(constraint_rows, &rel_cols);
        let k = kernel(&a.hstack(&rel.scale(-1)));
        Lattice::spanned_by(&k.select_rows(&(0..dim).collect::<Vec<_>>()))
    };
    let mut bcols: Vec<Vec<Int>> = Vec::new();
    for x in 0..n {
        let (gn, gm) = (target.num_gens(x), source.num_gens(x));
        let rels = target.relations(x);
        for rr in 0..rels.rows() {
            for j in 0..gm {
                let mut col = vec![0; dim];
                for i in 0..gn {
                    col[offsets[x] + i * gm + j] = rels[(rr, i)];
                }
                bcols.push(col);
            }
        }
    }
    let boundaries = Matrix::from_columns(dim, &bcols);
    let group = subquotient(cycles.basis(), &boundaries)
        .ok_or_else(|| Error::Invariant("null maps are not natural".into()))?;
    Ok(HomGroup {
        source,
        target,
        group,
        cycles,
        boundaries,
        offsets,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtResult {
    pub degree: usize,
    pub group: AbelianGroup,
}

/// The cochain complex `Hom(P_*, N)` in Yoneda form: `C^k = ⊕_i N(y_i)` over the generators of `P_k`.
struct HomComplex<'a> {
    res: &'a Resolution,
    target: &'a CatModule,
}

impl HomComplex<'_> {
    fn dim(&self, k: usize) -> usize {
        self.res.free(k).map_or(0, |p| {
            p.generators.iter().map(|&y| self.target.num_gens(y)).sum()
        })
    }

    /// Relation columns of `C^k`.
    fn relations(&self, k: usize) -> Matrix {
        let dim = self.dim(k);
        let mut cols = Vec::new();
        if let Some(p) = self.res.free(k) {
            let mut off = 0;
            for &y in &p.generators {
                let rels = self.target.relations(y);
                for r in 0..rels.rows() {
                    let mut col = vec![0; dim];
                    col[off..off + rels.cols()].copy_from_slice(rels.row(r));
                    cols.push(col);
                }
                off += self.target.num_gens(y);
            }
        }
        Matrix::from_columns(dim, &cols)
    }

    /// `d^k: C^k → C^{k+1}` induced by `d_{k+1}: P_{k+1} → P_k`.
    fn differential(&self, k: usize) -> Matrix {
        let (rows, cols) = (self.dim(k + 1), self.dim(k));
        let mut m = Matrix::zeros(rows, cols);
        let (Some(pk), Some(pk1), Some(d)) = (
            self.res.free(k),
            self.res.free(k + 1),
            self.res.differentials.get(k),
        ) else {
            return m;
        };
        let cat = self.target.category();
        let mut col_off = Vec::with_capacity(pk.generators.len());
        let mut off = 0;
        for &y in &pk.generators {
            col_off.push(off);
            off += self.target.num_gens(y);
        }
        let mut row = 0;
        for (j, &z) in pk1.generators.iter().enumerate() {
            let image = d.components[z].column(pk1.generator_position(j));
            for (i, &y) in pk.generators.iter().enumerate() {
                for h in 0..cat.hom_dim(z, y) {
                    let c = image[pk.position(z, i, h)];
                    if c != 0 {
                        m.add_block(row, col_off[i], self.target.action(z, y, h), c);
                    }
                }
            }
            row += self.target.num_gens(z);
        }
        m
    }

    fn cohomology(&self, k: usize) -> Result<AbelianGroup> {
        let dim = self.dim(k);
        if dim == 0 {
            return Ok(AbelianGroup::zero());
        }
        let dk = self.differential(k);
        let rel_next = self.relations(k + 1);
        let cycles = if rel_next.cols() == 0 {
            kernel(&dk)
        } else {
            let kk = kernel(&dk.hstack(&rel_next.scale(-1)));
            kk.select_rows(&(0..dim).collect::<Vec<_>>())
        };
        let mut bounds = self.relations(k);
        if k > 0 {
            bounds = bounds.hstack(&self.differential(k - 1));
        }
        subquotient(&cycles, &bounds)
            .ok_or_else(|| Error::Invariant("Hom complex is not a complex".into()))
    }
}

/// `Ext^k(M, N)` from an existing resolution of `M` (which must reach step `k + 1` or have terminated).
pub fn ext_from_resolution(res: &Resolution, target: &CatModule, k: usize) -> Result<ExtResult> {
    if !Arc::ptr_eq(res.module.category(), target.category()) {
        return Err(Error::ObjectMismatch(
            "modules over different categories".into(),
        ));
    }
    let long_enough = res.terminated.is_some_and(|t| t <= k) || res.len() > k + 1;
    if !long_enough {
        return Err(invalid(format!(
            "resolution has {} steps; Ext^{k} needs {}",
            res.len(),
            k + 2
        )));
    }
    let cx = HomComplex { res, target };
    Ok(ExtResult {
        degree: k,
        group: cx.cohomology(k)?,
    })
}

/// `Ext^k(M, N)` with the default cover heuristic.
pub fn ext(m: Arc<CatModule>, n: &CatModule, k: usize, limits: &Limits) -> Result<ExtResult> {
    ext_with(m, n, k, limits, CoverHeuristic::default())
}

pub fn ext_with(
    m: Arc<CatModule>,
    n: &CatModule,
    k: usize,
    limits: &Limits,
    heuristic: CoverHeuristic,
) -> Result<ExtResult> {
    let res = resolve_with(m, k + 1, limits, heuristic)?;
    ext_from_resolution(&res, n, k)
}

/// Certified bounds on the projective dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdBounds {
    /// Largest `k` with a nonzero `Ext^k(M, Ω^k M)` found.
    pub lower: usize,
    /// Length of a terminating resolution, if one was found.
    pub upper: Option<usize>,
    pub depth: usize,
}

impl PdBounds {
    pub fn is_exact(&self) -> bool {
        self.upper == Some(self.lower)
    }
}

impl std::fmt::Display for PdBounds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.upper {
            Some(u) if u == self.lower => write!(f, "pd = {u}"),
            Some(u) => write!(f, "{} ≤ pd ≤ {u}", self.lower),
            None => write!(
                f,
                "pd ≥ {} (no terminating resolution within depth {})",
                self.lower, self.depth
            ),
        }
    }
}

pub fn pd_bounds(m: Arc<CatModule>, depth: usize, limits: &Limits) -> Result<PdBounds> {
    let res = resolve_with(m, depth + 1, limits, CoverHeuristic::default())?;
    let upper = res.terminated;
    let top = upper.unwrap_or(depth).min(depth);
    let mut lower = 0;
    for k in 1..=top {
        let omega = &res.syzygies[k - 1].0;
        if !ext_from_resolution(&res, omega, k)?.group.is_zero() {
            lower = k;
        }
    }
    Ok(PdBounds {
        lower,
        upper,
        depth,
    })
}
