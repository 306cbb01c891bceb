//! Shared fixed-point machinery: message storage, options and diagnostics.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;

/// One real value per directed edge, indexed by [`Graph`](crate::Graph) slot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageField(Vec<f64>);

impl MessageField {
    pub fn filled(len: usize, value: f64) -> Self {
        MessageField(vec![value; len])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        MessageField(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl Index<usize> for MessageField {
    type Output = f64;

    fn index(&self, d: usize) -> &f64 {
        &self.0[d]
    }
}

impl IndexMut<usize> for MessageField {
    fn index_mut(&mut self, d: usize) -> &mut f64 {
        &mut self.0[d]
    }
}

/// Starting point for the message iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Ordered state: percolation messages 1, Ising messages `tanh(beta)`.
    Ones,
    Zeros,
    /// Independent uniform draws on the same range as `Ones`.
    UniformRandom(Seed),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Every message is recomputed from the previous sweep's values.
    Synchronous,
    /// Gauss–Seidel in directed-edge slot order.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop once the max-abs change of a sweep is at or below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight kept on the old value: `new = (1 - damping) * update + damping * old`.
    pub damping: f64,
    pub init: Init,
    pub schedule: Schedule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-12,
            max_iterations: 1_000_000,
            damping: 0.0,
            init: Init::Ones,
            schedule: Schedule::Sequential,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub(crate) fn relax(&self, old: f64, update: f64) -> f64 {
        if self.damping == 0.0 {
            update
        } else {
            (1.0 - self.damping) * update + self.damping * old
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub iterations: usize,
    pub max_residual: f64,
    pub converged: bool,
}

/// Drive `sweep` until its residual drops to the tolerance.
pub(crate) fn iterate(opts: &SolverOptions, mut sweep: impl FnMut() -> f64) -> Convergence {
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        residual = sweep();
        if residual <= opts.tolerance {
            return Convergence {
                iterations: it,
                max_residual: residual,
                converged: true,
            };
        }
    }
    Convergence {
        iterations: opts.max_iterations,
        max_residual: residual,
        converged: false,
    }
}

/// Values above this are treated as a divergent linear-response iteration.
pub(crate) const BLOWUP: f64 = 1e100;

/// Outcome of a linear susceptibility iteration.
pub(crate) struct LinearOutcome {
    pub convergence: Convergence,
    pub diverged: bool,
}

/// Iterate a nonnegative linear fixed point `x <- A x + b` from zero.
///
/// The iteration is declared divergent when any value exceeds [`BLOWUP`] or
/// turns non-finite, or when, past the `transient` sweeps, the residual has
/// failed to shrink for `stall` consecutive sweeps (spectral radius >= 1).
pub(crate) fn iterate_linear(
    opts: &SolverOptions,
    transient: usize,
    mut sweep: impl FnMut() -> (f64, f64),
) -> LinearOutcome {
    const STALL: usize = 200;
    let mut residual = f64::INFINITY;
    let mut previous = f64::INFINITY;
    let mut rising = 0usize;
    for it in 1..=opts.max_iterations {
        let (r, max_value) = sweep();
        residual = r;
        if !max_value.is_finite() || max_value > BLOWUP || !residual.is_finite() {
            return LinearOutcome {
                convergence: Convergence {
                    iterations: it,
                    max_residual: residual,
                    converged: false,
                },
                diverged: true,
            };
        }
        if residual <= opts.tolerance * max_value.max(1.0) {
            return LinearOutcome {
                convergence: Convergence {
                    iterations: it,
                    max_residual: residual,
                    converged: true,
                },
                diverged: false,
            };
        }
        if it > transient && residual >= previous {
            rising += 1;
            if rising >= STALL {
                return LinearOutcome {
                    convergence: Convergence {
                        iterations: it,
                        max_residual: residual,
                        converged: false,
                    },
                    diverged: true,
                };
            }
        } else {
            rising = 0;
        }
        previous = residual;
    }
    LinearOutcome {
        convergence: Convergence {
            iterations: opts.max_iterations,
            max_residual: residual,
            converged: false,
        },
        diverged: false,
    }
}
