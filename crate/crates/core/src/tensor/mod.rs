//! Dense operators and states on labeled tensor products of `C^n`.

pub mod constructions;
pub mod operator;
pub mod state;
pub mod trace;

pub use constructions::{
    bell_operator, c_matrix, q_operator, r_operator, r_operator_factored, t_operator, tensor_permutation, z_alpha,
};
pub use operator::{decode, encode, plain_labels, top_bottom_labels, DenseOperator, Leg, OperatorJson, Side, C64};
pub use state::PureState;
pub use trace::{entropy_of_spectrum, generalized_trace, von_neumann_entropy, LogBase};
