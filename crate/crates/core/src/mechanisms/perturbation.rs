use rand::Rng as _;

use super::{MechanismOutcome, OutcomeMeta};
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectral::{spectral_clustering, SolverConfig};

/// Warner's randomized response on edge slots: flip probability
/// `mu = 1 / (e^eps + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RRConfig {
    epsilon: f64,
    mu: f64,
}

impl RRConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(Self {
            epsilon,
            mu: 1.0 / (epsilon.exp() + 1.0),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

fn flip_slots(a: &AdjacencyMatrix, mu: f64, seed: u64) -> (AdjacencyMatrix, usize) {
    let n = a.n();
    let mut rng = rng_from_seed(seed);
    let mut out = a.clone();
    let mut flipped = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < mu {
                out.set(i, j, !a.has_edge(i, j));
                flipped += 1;
            }
        }
    }
    (out, flipped)
}

/// Releases `A + E`: every slot `i < j` is flipped independently with
/// probability `mu`. Satisfies eps-edge DP.
pub fn randomized_response(a: &AdjacencyMatrix, eps: f64, seed: u64) -> Result<AdjacencyMatrix> {
    let cfg = RRConfig::new(eps)?;
    Ok(flip_slots(a, cfg.mu(), seed).0)
}

/// Randomized response followed by non-private spectral clustering.
pub fn perturb_and_cluster(
    a: &AdjacencyMatrix,
    eps: f64,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<MechanismOutcome> {
    let rr = RRConfig::new(eps)?;
    let (noisy, flipped) = flip_slots(a, rr.mu(), derive_seed(seed, 0));
    let clustering = spectral_clustering(&noisy, &cfg.with_seed(derive_seed(seed, 1)))?;
    Ok(MechanismOutcome {
        labels: clustering.labels,
        bottom: false,
        noise_scale: rr.mu(),
        guarantee: Some((eps, 0.0)),
        meta: OutcomeMeta::RandomizedResponse {
            mu: rr.mu(),
            flipped,
            solver_iterations: clustering.eigen.iterations,
            converged: clustering.converged,
        },
    })
}
