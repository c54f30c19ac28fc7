//! Free resolutions by greedy free covers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CatModule, FreeModule, ModuleMap};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::linalg::{elementary_divisors, Int, Lattice, Matrix};

/// How generators of a free cover are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverHeuristic {
    /// The standard basis vector, over all objects, leaving the smallest total
    /// cokernel; ties go to objects of larger value rank, then lower index.
    #[default]
    Greedy,
    /// Objects by index; the first standard basis vector not yet covered.
    FirstBasis,
}

/// `... → P_1 → P_0 → M → 0`, with the kernels computed along the way.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub module: Arc<CatModule>,
    pub frees: Vec<FreeModule>,
    /// `differentials[k-1]` is `d_k: P_k → P_{k-1}`.
    pub differentials: Vec<ModuleMap>,
    pub augmentation: ModuleMap,
    /// `syzygies[k]` is the kernel of `P_k → P_{k-1}` (of the augmentation for `k = 0`) with its inclusion.
    pub syzygies: Vec<(Arc<CatModule>, ModuleMap)>,
    /// The step whose kernel vanished, if any: a certificate that `pd ≤ step`.
    pub terminated: Option<usize>,
}

impl Resolution {
    /// Number of free modules computed.
    pub fn len(&self) -> usize {
        self.frees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frees.is_empty()
    }

    /// `P_k`, or `None` past the end of a terminated resolution.
    pub fn free(&self, k: usize) -> Option<&FreeModule> {
        self.frees.get(k)
    }

    /// Generator objects of each free module.
    pub fn generator_objects(&self) -> Vec<Vec<usize>> {
        self.frees.iter().map(|f| f.generators.clone()).collect()
    }

    /// `d ∘ d = 0`, surjectivity of the augmentation and exactness at every computed step.
    pub fn verify(&self) -> Result<()> {
        if !self.augmentation.is_surjective() {
            return Err(Error::Invariant("augmentation is not surjective".into()));
        }
        for (k, d) in self.differentials.iter().enumerate() {
            let prev = if k == 0 {
                self.augmentation.compose(d)?
            } else {
                self.differentials[k - 1].compose(d)?
            };
            if !prev.is_zero() {
                return Err(Error::Invariant(format!(
                    "d∘d is not zero at step {}",
                    k + 1
                )));
            }
        }
        let n = self.module.category().num_objects();
        for k in 0..self.frees.len() {
            let (_, inc) = &self.syzygies[k];
            for x in 0..n {
                let kernel = &inc.components[x];
                let image = match self.differentials.get(k) {
                    Some(d) => d.components[x].clone(),
                    None => {
                        if self.terminated == Some(k) {
                            Matrix::zeros(kernel.rows(), 0)
                        } else {
                            continue;
                        }
                    }
                };
                if !same_lattice(kernel, &image) {
                    return Err(Error::Invariant(format!(
                        "not exact at step {k}, object {x}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Whether two sets of columns span the same lattice.
pub(crate) fn same_lattice(a: &Matrix, b: &Matrix) -> bool {
    if a.rows() != b.rows() {
        return false;
    }
    let la = Lattice::spanned_by(a);
    let lb = Lattice::spanned_by(b);
    la.rank() == lb.rank()
        && la.coords_matrix(lb.basis()).is_some()
        && lb.coords_matrix(la.basis()).is_some()
}

/// Number of cyclic summands of `Z^n / span(columns)`.
fn cokernel_size(cols: &Matrix) -> usize {
    cols.rows()
        - elementary_divisors(cols)
            .iter()
            .filter(|&&d| d == 1)
            .count()
}

/// A free module mapping onto `target`, generated by standard basis vectors.
pub(crate) fn free_cover(
    target: &Arc<CatModule>,
    heuristic: CoverHeuristic,
    limits: &Limits,
) -> Result<(FreeModule, ModuleMap)> {
    let cat = target.category().clone();
    let n = cat.num_objects();
    // columns spanning image + relations at each object
    let mut spans: Vec<Matrix> = (0..n).map(|x| target.relations(x).transpose()).collect();
    let mut generators: Vec<usize> = Vec::new();
    let mut images: Vec<Vec<Int>> = Vec::new();

    let order: Vec<usize> = match heuristic {
        CoverHeuristic::Greedy => {
            let mut o: Vec<usize> = (0..n).collect();
            let rank = |x: usize| {
                let v = target.value(x);
                v.free_rank + v.torsion.len()
            };
            o.sort_by_key(|&x| (std::cmp::Reverse(rank(x)), x));
            o
        }
        CoverHeuristic::FirstBasis => (0..n).collect(),
    };

    let generated = |y: usize, v: &[Int], x: usize| -> Matrix {
        let cols: Vec<Vec<Int>> = (0..cat.hom_dim(x, y))
            .map(|h| target.action(x, y, h).mul_vec(v))
            .collect();
        Matrix::from_columns(target.num_gens(x), &cols)
    };

    let uncovered = |spans: &[Matrix], x: usize| -> Vec<usize> {
        let g = target.num_gens(x);
        let lat = Lattice::spanned_by(&spans[x]);
        if lat.is_full() {
            return Vec::new();
        }
        (0..g)
            .filter(|&k| {
                let mut e = vec![0; g];
                e[k] = 1;
                !lat.contains(&e)
            })
            .collect()
    };

    loop {
        let pick = match heuristic {
            CoverHeuristic::FirstBasis => order
                .iter()
                .find_map(|&x| uncovered(&spans, x).first().map(|&k| (x, k))),
            CoverHeuristic::Greedy => {
                let mut best: Option<(usize, usize, usize)> = None;
                for &x in &order {
                    let g = target.num_gens(x);
                    for k in uncovered(&spans, x) {
                        let mut e = vec![0; g];
                        e[k] = 1;
                        let size: usize = (0..n)
                            .map(|z| cokernel_size(&spans[z].hstack(&generated(x, &e, z))))
                            .sum();
                        if best.is_none_or(|b| size < b.0) {
                            best = Some((size, x, k));
                        }
                    }
                }
                best.map(|(_, x, k)| (x, k))
            }
        };
        let Some((x, k)) = pick else { break };
        let mut e = vec![0; target.num_gens(x)];
        e[k] = 1;
        for (z, span) in spans.iter_mut().enumerate() {
            *span = span.hstack(&generated(x, &e, z));
        }
        generators.push(x);
        images.push(e);
    }

    let free = FreeModule::new(cat, generators)?;
    let total = free.module.total_gens();
    if total > limits.max_rank {
        return Err(Error::BoundExceeded {
            what: "resolution rank",
            value: total,
            limit: limits.max_rank,
        });
    }
    let map = free.map_to(target.clone(), &images)?;
    Ok((free, map))
}

/// Resolves `module` through step `steps` with the default heuristic.
pub fn resolve(module: Arc<CatModule>, steps: usize, limits: &Limits) -> Result<Resolution> {
    resolve_with(module, steps, limits, CoverHeuristic::default())
}

pub fn resolve_with(
    module: Arc<CatModule>,
    steps: usize,
    limits: &Limits,
    heuristic: CoverHeuristic,
) -> Result<Resolution> {
    let (p0, aug) = free_cover(&module, heuristic, limits)?;
    let (k0, inc0) = aug.kernel()?;
    let k0 = Arc::new(k0);
    let mut res = Resolution {
        module,
        frees: vec![p0],
        differentials: Vec::new(),
        augmentation: aug,
        syzygies: vec![(k0.clone(), inc0)],
        terminated: None,
    };
    if k0.is_zero() {
        res.terminated = Some(0);
        return Ok(res);
    }
    for k in 1..=steps {
        let (prev_kernel, prev_inc) = res.syzygies[k - 1].clone();
        let (pk, cover) = free_cover(&prev_kernel, heuristic, limits)?;
        let d = prev_inc.compose(&cover)?;
        let d = ModuleMap::new(
            pk.module.clone(),
            res.frees[k - 1].module.clone(),
            d.components,
        )?;
        let (kk, inc_in_cover) = cover.kernel()?;
        let kk = Arc::new(kk);
        let inc = ModuleMap::new(kk.clone(), pk.module.clone(), inc_in_cover.components)?;
        res.frees.push(pk);
        res.differentials.push(d);
        res.syzygies.push((kk.clone(), inc));
        if kk.is_zero() {
            res.terminated = Some(k);
            break;
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::*;
    use crate::linalg::AbelianGroup;

    #[test]
    fn periodic_resolution_over_c2() {
        let cat = cyclic_group_category(2);
        let triv = Arc::new(CatModule::constant(cat));
        let res = resolve(triv, 4, &Limits::default()).unwrap();
        assert_eq!(res.terminated, None);
        assert_eq!(res.len(), 5);
        for f in &res.frees {
            assert_eq!(f.rank(), 1);
        }
        res.verify().unwrap();
        for (k, _) in &res.syzygies {
            assert_eq!(k.value(0), AbelianGroup::free(1));
        }
    }

    #[test]
    fn free_modules_terminate_immediately() {
        let cat = cyclic_group_category(3);
        let f = FreeModule::new(cat, vec![0, 0]).unwrap();
        let res = resolve(f.module.clone(), 3, &Limits::default()).unwrap();
        assert_eq!(res.terminated, Some(0));
        assert_eq!(res.frees[0].rank(), 2);
        res.verify().unwrap();
    }

    #[test]
    fn zero_module() {
        let cat = cyclic_group_category(2);
        let res = resolve(Arc::new(CatModule::zero(cat)), 2, &Limits::default()).unwrap();
        assert_eq!(res.terminated, Some(0));
        assert_eq!(res.frees[0].rank(), 0);
    }

    #[test]
    fn torsion_module_resolves() {
        let cat = cyclic_group_category(2);
        let triv = Arc::new(CatModule::constant(cat));
        let two = ModuleMap::new(
            triv.clone(),
            triv.clone(),
            vec![Matrix::from_rows(&[vec![2]])],
        )
        .unwrap();
        let (c, _) = two.cokernel().unwrap();
        for h in [CoverHeuristic::Greedy, CoverHeuristic::FirstBasis] {
            let res = resolve_with(Arc::new(c.clone()), 3, &Limits::default(), h).unwrap();
            res.verify().unwrap();
        }
    }

    #[test]
    fn rank_bound() {
        let cat = cyclic_group_category(2);
        let triv = Arc::new(CatModule::constant(cat));
        let limits = Limits {
            max_rank: 1,
            ..Limits::default()
        };
        assert!(matches!(
            resolve(triv, 2, &limits),
            Err(Error::BoundExceeded { .. })
        ));
    }
}
