//! Symmetric-group combinatorics, Weingarten calculus and random conjugate
//! channel pairs.

pub mod bounds;
pub mod caps;
pub mod channels;
pub mod diagram;
pub mod error;
pub mod limit;
pub mod partial_perm;
pub mod stats;
pub mod symgroup;
pub mod tensor;
pub mod weingarten;

pub use caps::Caps;
pub use error::{Error, Result};
pub use partial_perm::PartialPermutation;
pub use symgroup::{CycleType, Permutation};
pub use tensor::{DenseOperator, Leg, PureState, Side, C64};
pub use weingarten::{mobius, wg_asymptotic, wg_exact, WeingartenTable};
