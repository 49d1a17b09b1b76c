//! Minimum-error discrimination of qubit states.
//!
//! The guessing probability of an ensemble `{q_x, ρ_x}` equals
//! `min_k max_x (q_x + |k − q_x·v_x|)` over the Bloch part `k` of the dual
//! operator `K = (k0·I + k·σ)/2`. The [`discriminator`] turns the minimizer into
//! an optimal POVM plus a KKT certificate that can be re-checked independently
//! with the [`oracles`].

pub mod ball;
pub mod cli;
pub mod bloch;
mod config;
pub mod discriminator;
pub mod ensemble;
pub mod error;
pub mod oracles;

pub use ball::{min_enclosing_ball, offset_minimax, support_weights, BallMethod, BallSolution, PointSet};
pub use bloch::{
    born_probability, min_eig, trace_norm, weighted_difference, BlochVector, HermitianOp, Povm,
    PovmElement, QubitState,
};
pub use config::{SolverOptions, Tolerances};
pub use ensemble::Ensemble;
pub use error::{Error, Result};
pub use discriminator::{
    complementary_states, equivalence_class_check, helstrom, kkt_verify, optimal_povm, primal_value, solve,
    ComplementaryState, DualCertificate, EquivalenceReport, KktResiduals, Solution, SolverPath,
};
