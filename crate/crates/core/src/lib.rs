//! Source-node message passing for bond percolation and the Ising model on
//! sparse networks, with Monte Carlo references and a benchmarking harness.

// NaN-rejecting `!(x > 0.0)` checks and index loops over paired buffers.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod graph;
pub mod harness;
pub mod ising;
pub mod montecarlo;
pub mod netgen;
pub mod percolation;
pub mod rng;
pub mod solver;

pub use error::{Error, ErrorClass, Result};
pub use graph::{load_edge_list, preprocess, select_source, stats, Graph, GraphStats, SourcePolicy};
pub use ising::{
    beta_from_p, ising_mfa_susceptibility, ising_susceptibility, p_from_beta, solve_ising,
    solve_ising_mfa, IsingSolution, Temperature,
};
pub use percolation::{
    percolation_mfa_susceptibility, percolation_susceptibility, solve_percolation,
    solve_percolation_mfa, Approximation, PercSolution,
};
pub use rng::Seed;
pub use solver::{Convergence, Init, MessageField, Schedule, SolverOptions};
pub use montecarlo::{
    enumerate_ising, enumerate_percolation, mc_ising, mc_percolation, IsingMcOptions, McStats, Observable,
};
