//! The orbit category of a family and modules over it.

use std::sync::Arc;

use crate::catmod::{ext, CatModule, ExtResult, FreeModule, SkeletonCategory};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup, SubgroupId};
use crate::linalg::Matrix;
use crate::system::MackeySystem;

/// `O_C G` on one representative per conjugacy class of the family.
///
/// The basis of `[G/H, G/K]` is the list of cosets `aK` fixed by `H`; the
/// corresponding map is `gH ↦ gaK`.
#[derive(Debug, Clone)]
pub struct OrbitCategory {
    pub system: Arc<MackeySystem>,
    pub skeleton: Arc<SkeletonCategory>,
    pub objects: Vec<SubgroupId>,
    maps: Vec<Vec<Vec<usize>>>,
}

impl OrbitCategory {
    pub fn new(system: Arc<MackeySystem>) -> Result<Self> {
        let g = system.group().clone();
        let objects = system.family_reps();
        let maps: Vec<Vec<Vec<usize>>> = objects
            .iter()
            .map(|&h| objects.iter().map(|&k| g.fixed_cosets(h, k)).collect())
            .collect();
        let labels = objects.iter().map(|h| format!("G/{}", h.0)).collect();
        let morphisms = objects
            .iter()
            .enumerate()
            .map(|(x, &h)| {
                objects
                    .iter()
                    .enumerate()
                    .map(|(y, &k)| {
                        maps[x][y]
                            .iter()
                            .map(|&i| {
                                format!(
                                    "G/{} -> G/{} : gH -> g{}K",
                                    h.0,
                                    k.0,
                                    g.elem_string(g.cosets(k).reps[i])
                                )
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let identities = (0..objects.len())
            .map(|x| {
                maps[x][x]
                    .iter()
                    .position(|&i| i == 0)
                    .expect("identity coset")
            })
            .collect();
        let skeleton = SkeletonCategory::new(
            format!("orbit({})", g.name()),
            labels,
            morphisms,
            identities,
            |x, y, z| {
                let zs = g.cosets(objects[z]);
                Ok(maps[x][y]
                    .iter()
                    .map(|&i| {
                        let a = g.cosets(objects[y]).reps[i];
                        maps[y][z]
                            .iter()
                            .map(|&j| {
                                let c = zs.coset_of(g.mul(a, zs.reps[j]));
                                let pos = maps[x][z]
                                    .iter()
                                    .position(|&t| t == c)
                                    .expect("composite is a G-map");
                                vec![(pos, 1)]
                            })
                            .collect()
                    })
                    .collect())
            },
        )?;
        Ok(OrbitCategory {
            system,
            skeleton: Arc::new(skeleton),
            objects,
            maps,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.system.group()
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

    /// Coset indices of the basis of `[x, y]`.
    pub fn map_cosets(&self, x: usize, y: usize) -> &[usize] {
        &self.maps[x][y]
    }

    /// Element `a` of the `f`-th basis map `gH ↦ gaK` of `[x, y]`.
    pub fn map_element(&self, x: usize, y: usize, f: usize) -> Elem {
        self.group().cosets(self.objects[y]).reps[self.maps[x][y][f]]
    }

    /// Index of the map `gH ↦ gaK` in the basis of `[x, y]`, if `a` defines one.
    pub fn map_index(&self, x: usize, y: usize, a: Elem) -> Option<usize> {
        let c = self.group().cosets(self.objects[y]).coset_of(a);
        self.maps[x][y].iter().position(|&t| t == c)
    }

    /// `Z(-)`: `Z` everywhere, every map acting as the identity.
    pub fn constant_module(&self) -> CatModule {
        CatModule::constant(self.skeleton.clone())
    }

    /// `P_K = Z[-, G/K]`.
    pub fn projective_block(&self, k: SubgroupId) -> Result<FreeModule> {
        let y = self.object_of(k)?;
        FreeModule::new(self.skeleton.clone(), vec![y])
    }

    pub fn free(&self, generators: Vec<usize>) -> Result<FreeModule> {
        FreeModule::new(self.skeleton.clone(), generators)
    }

    /// `Ext^k(M, N)` over the orbit category.
    pub fn ext(
        &self,
        m: Arc<CatModule>,
        n: &CatModule,
        k: usize,
        limits: &Limits,
    ) -> Result<ExtResult> {
        ext(m, n, k, limits)
    }

    /// `H^k(G; N) = Ext^k(Z(-), N)`.
    pub fn cohomology(&self, n: &CatModule, k: usize, limits: &Limits) -> Result<ExtResult> {
        ext(Arc::new(self.constant_module()), n, k, limits)
    }

    /// Whether every action matrix of `m` at `(x, x)` is a permutation matrix.
    pub fn acts_by_permutations(&self, m: &CatModule, x: usize) -> bool {
        (0..self.skeleton.hom_dim(x, x)).all(|f| is_permutation(m.action(x, x, f)))
    }
}

fn is_permutation(m: &Matrix) -> bool {
    if m.rows() != m.cols() {
        return false;
    }
    let n = m.rows();
    let mut seen = vec![false; n];
    for i in 0..n {
        let row = m.row(i);
        if row.iter().any(|&v| v != 0 && v != 1) || row.iter().filter(|&&v| v == 1).count() != 1 {
            return false;
        }
        let j = row.iter().position(|&v| v == 1).unwrap();
        if seen[j] {
            return false;
        }
        seen[j] = true;
    }
    true
}
