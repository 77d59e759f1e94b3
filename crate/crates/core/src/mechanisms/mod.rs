//! The three edge-DP community recovery mechanisms.

mod perturbation;
mod power;
mod subsample;

pub use perturbation::{perturb_and_cluster, randomized_response, RRConfig};
pub use power::{
    noisy_power_iteration, private_power_with_init, NoisyPowerState, PowerInit, Sensitivity,
};
pub use subsample::{subsampling_stability, Aggregator, SubsampleConfig, DEFAULT_MAX_SUBGRAPHS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabelVector;

/// `(epsilon, delta)` plus the Gaussian composition length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
    iterations: u32,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64, iterations: u32) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        if iterations == 0 {
            return Err(Error::invalid("iteration count must be >= 1"));
        }
        Ok(Self {
            epsilon,
            delta,
            iterations,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }
}

/// Mechanism-specific diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeMeta {
    RandomizedResponse {
        mu: f64,
        flipped: usize,
        solver_iterations: usize,
        converged: bool,
    },
    Subsample {
        q_s: f64,
        m: usize,
        /// Noise-free stability score. Kept for tests; never exported.
        d_hat: f64,
        d_tilde: f64,
        threshold: f64,
        aggregator: Aggregator,
        distinct_labelings: usize,
        unconverged_solves: usize,
    },
    NoisyPower {
        iterations: usize,
        /// Per-step sensitivity multiplier `||y_{t-1}||_inf + 1/n` (or `1 + 1/n`).
        multipliers: Vec<f64>,
        sensitivity: Sensitivity,
        init: PowerInit,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismOutcome {
    pub labels: LabelVector,
    /// Set when the mechanism abstained; `labels` are then uniform noise.
    pub bottom: bool,
    /// Flip probability, Laplace scale, or Gaussian sigma, by mechanism.
    pub noise_scale: f64,
    /// `(epsilon, delta)` the output satisfies, when known.
    pub guarantee: Option<(f64, f64)>,
    pub meta: OutcomeMeta,
}
