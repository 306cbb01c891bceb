//! Monte Carlo samplers and exact enumerators used as ground truth.

pub mod exact;
pub mod ising;
pub mod percolation;
pub mod stats;

pub use exact::{enumerate_ising, enumerate_percolation, ExactIsing, ExactPercolation};
pub use ising::{mc_ising, mc_ising_run, IsingMcOptions, IsingMcRun};
pub use percolation::{bfs_labels, mc_percolation, UnionFind};
pub use stats::{Estimate, McStats, Observable};
