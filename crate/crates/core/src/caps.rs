//! Process-wide size caps.
//!
//! Every exhaustive loop and every dense construction checks its size against
//! these limits before allocating. The defaults keep all computations at desk
//! scale; the CLI may replace them once at startup.

use std::sync::RwLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Caps {
    /// Largest degree `p` for which `S_p` may be enumerated.
    pub perm_degree: usize,
    /// Largest degree for exact Weingarten tables.
    pub wg_degree: usize,
    /// Largest ground set for partial-permutation enumeration.
    pub partial_perm_r: usize,
    /// Largest side of a dense operator.
    pub operator_dim: usize,
    /// Largest length of a dense state vector.
    pub state_dim: usize,
    /// Largest `r` for the left-multiplication matrix.
    pub diagram_r: usize,
    /// Largest `p * r` for the moment-formula enumeration.
    pub moment_pr: usize,
    /// Largest `n * k` for isometry sampling.
    pub channel_nk: usize,
    /// Largest `k * r` for the Cayley-graph BFS.
    pub bfs_degree: usize,
    /// Largest number of index tuples in a generalized trace.
    pub trace_terms: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            perm_degree: 10,
            wg_degree: 6,
            partial_perm_r: 5,
            operator_dim: 4096,
            state_dim: 20_000,
            diagram_r: 3,
            moment_pr: 4,
            channel_nk: 512,
            bfs_degree: 8,
            trace_terms: 10_000_000,
        }
    }
}

static CURRENT: RwLock<Option<Caps>> = RwLock::new(None);

/// The caps currently in force.
pub fn current() -> Caps {
    CURRENT.read().unwrap().unwrap_or_default()
}

/// Replace the process-wide caps.
pub fn install(caps: Caps) {
    *CURRENT.write().unwrap() = Some(caps);
}

pub(crate) fn check(what: &'static str, value: u128, cap: usize) -> Result<()> {
    if value > cap as u128 {
        Err(Error::CapExceeded {
            what,
            value,
            cap: cap as u128,
        })
    } else {
        Ok(())
    }
}
