use serde::{Deserialize, Serialize};

/// Resource bounds. Every enumeration that can blow up checks one of these
/// and fails with `Error::BoundExceeded` instead of truncating.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_group_order: usize,
    pub max_lattice: usize,
    /// Largest total rank (summed over objects) of a module built during a resolution or induction.
    pub max_rank: usize,
    pub max_tower_depth: usize,
}

pub const DEFAULT_MAX_GROUP_ORDER: usize = 10_000;
pub const DEFAULT_MAX_LATTICE: usize = 1_000;
pub const DEFAULT_MAX_RANK: usize = 5_000;
pub const DEFAULT_TOWER_DEPTH: usize = 6;

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_group_order: DEFAULT_MAX_GROUP_ORDER,
            max_lattice: DEFAULT_MAX_LATTICE,
            max_rank: DEFAULT_MAX_RANK,
            max_tower_depth: DEFAULT_TOWER_DEPTH,
        }
    }
}

impl Limits {
    /// Defaults, with `MACKEYLAB_MAX_LATTICE` overriding the lattice bound.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(v) = std::env::var("MACKEYLAB_MAX_LATTICE")
            .ok()
            .and_then(|s| s.trim().parse().ok())
        {
            limits.max_lattice = v;
        }
        limits
    }
}
