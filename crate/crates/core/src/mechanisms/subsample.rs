use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{MechanismOutcome, OutcomeMeta};
use crate::accounting::laplace_draw;
use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, LabelVector};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectral::{spectral_clustering, SolverConfig};

pub const DEFAULT_MAX_SUBGRAPHS: u64 = 1_000_000;

/// How the released labeling is formed from the subgraph labelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    /// Most frequent labeling vector (after the global-flip canonicalization).
    #[default]
    Mode,
    /// Per-node majority over the canonicalized labelings.
    Majority,
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode" => Ok(Aggregator::Mode),
            "majority" => Ok(Aggregator::Majority),
            other => Err(Error::invalid(format!(
                "unknown aggregator `{other}` (expected `mode` or `majority`)"
            ))),
        }
    }
}

impl std::fmt::Display for Aggregator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Aggregator::Mode => "mode",
            Aggregator::Majority => "majority",
        })
    }
}

/// Parameters of the stability mechanism, all derived from `(n, eps, delta)`.
/// Logs are natural.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleConfig {
    n: usize,
    epsilon: f64,
    delta: f64,
    q_s: f64,
    m: usize,
    aggregator: Aggregator,
}

impl SubsampleConfig {
    /// Fails with a resource error when `m` would exceed `max_subgraphs`.
    pub fn new(n: usize, epsilon: f64, delta: f64, max_subgraphs: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("subsampling needs n >= 2"));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be finite and > 0, got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
        }
        let nf = n as f64;
        let q_s = (epsilon / (32.0 * nf.ln())).min(1.0);
        let m = ((nf / delta).ln() / (q_s * q_s)).ceil();
        if m > max_subgraphs as f64 {
            return Err(Error::Resource(format!(
                "subsampling at n = {n}, eps = {epsilon}, delta = {delta} needs m = {m:.0} \
                 subgraphs (cap {max_subgraphs}); use a larger eps or raise the cap"
            )));
        }
        Ok(Self {
            n,
            epsilon,
            delta,
            q_s,
            m: m as usize,
            aggregator: Aggregator::Mode,
        })
    }

    pub fn with_aggregator(mut self, aggregator: Aggregator) -> Self {
        self.aggregator = aggregator;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn q_s(&self) -> f64 {
        self.q_s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn laplace_scale(&self) -> f64 {
        1.0 / self.epsilon
    }

    pub fn threshold(&self) -> f64 {
        (1.0 / self.delta).ln() / self.epsilon
    }

    pub fn aggregator(&self) -> Aggregator {
        self.aggregator
    }
}

fn pack(labels: &LabelVector) -> Vec<u64> {
    let mut bits = vec![0u64; labels.len().div_ceil(64)];
    for (i, &l) in labels.as_slice().iter().enumerate() {
        if l > 0 {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

fn unpack(bits: &[u64], n: usize) -> LabelVector {
    let v = (0..n)
        .map(|i| if bits[i / 64] >> (i % 64) & 1 == 1 { 1 } else { -1 })
        .collect();
    LabelVector::new(v).expect("unpacked labels are +-1")
}

/// Sample-and-aggregate over `m` edge-subsampled graphs, released only when a
/// Laplace-noised stability score clears `ln(1/delta)/eps`. Otherwise the
/// output is bottom with uniform labels. Guarantee `(2 eps, delta)`.
pub fn subsampling_stability(
    a: &AdjacencyMatrix,
    config: &SubsampleConfig,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<MechanismOutcome> {
    let n = a.n();
    if n != config.n() {
        return Err(Error::invalid(format!(
            "config built for n = {}, graph has {n} nodes",
            config.n()
        )));
    }
    let edges: Vec<(usize, usize)> = a.edges().collect();
    let q_s = config.q_s();
    let m = config.m();

    let mut histogram: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut node_votes = vec![0i64; n];
    let mut unconverged = 0;
    for k in 0..m {
        let sub_seed = derive_seed(seed, k as u64);
        let kept = if q_s >= 1.0 {
            edges.clone()
        } else {
            let mut rng = rng_from_seed(derive_seed(sub_seed, 0));
            edges
                .iter()
                .copied()
                .filter(|_| rng.random::<f64>() < q_s)
                .collect()
        };
        let sub = AdjacencyMatrix::from_edges(n, kept)?;
        let clustering = spectral_clustering(&sub, &cfg.with_seed(derive_seed(sub_seed, 1)))?;
        if !clustering.converged {
            unconverged += 1;
        }
        let labels = clustering.labels.canonical();
        for (v, &l) in node_votes.iter_mut().zip(labels.as_slice()) {
            *v += l as i64;
        }
        *histogram.entry(pack(&labels)).or_insert(0) += 1;
    }

    // Ties broken by the packed vector so the result does not depend on
    // hash order.
    let mut ranked: Vec<(&Vec<u64>, usize)> = histogram.iter().map(|(k, &c)| (k, c)).collect();
    ranked.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    let count1 = ranked.first().map_or(0, |r| r.1);
    let count2 = ranked.get(1).map_or(0, |r| r.1);

    let d_hat = (count1 as f64 - count2 as f64) / (4.0 * m as f64 * q_s) - 1.0;
    let mut noise_rng = rng_from_seed(derive_seed(seed, u64::MAX));
    let d_tilde = d_hat + laplace_draw(config.laplace_scale(), &mut noise_rng);
    let threshold = config.threshold();
    let bottom = !(d_tilde > threshold);

    let labels = if bottom {
        let v = (0..n)
            .map(|_| if noise_rng.random::<bool>() { 1 } else { -1 })
            .collect();
        LabelVector::new(v)?
    } else {
        match config.aggregator() {
            Aggregator::Mode => unpack(ranked[0].0, n),
            // Ties go to +1, matching the canonical first coordinate.
            Aggregator::Majority => {
                LabelVector::new(node_votes.iter().map(|&v| if v >= 0 { 1 } else { -1 }).collect())?
            }
        }
    };

    Ok(MechanismOutcome {
        labels,
        bottom,
        noise_scale: config.laplace_scale(),
        guarantee: Some((2.0 * config.epsilon(), config.delta())),
        meta: OutcomeMeta::Subsample {
            q_s,
            m,
            d_hat,
            d_tilde,
            threshold,
            aggregator: config.aggregator(),
            distinct_labelings: histogram.len(),
            unconverged_solves: unconverged,
        },
    })
}
