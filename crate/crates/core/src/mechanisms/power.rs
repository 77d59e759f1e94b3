use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{MechanismOutcome, OutcomeMeta, PrivacyBudget};
use crate::accounting::sigma_for_budget;
use crate::error::{Error, Result};
use crate::graph::{centered_adjacency, AdjacencyMatrix, CenteredAdjacency};
use crate::linalg::{norm2, norm_inf, SymMatrix};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::spectral::{accept_unconverged, dominant_eigenpair, labels_from_vector, SolverConfig};

/// How the per-step noise multiplier is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sensitivity {
    /// `||y_{t-1}||_inf + 1/n`, from the current iterate.
    #[default]
    Adaptive,
    /// `1 + 1/n`, valid for every unit iterate.
    WorstCase,
    /// `sqrt(2) ||y_{t-1}||_inf + 2/n`. A single edge moves `B y` by at most
    /// `sqrt(y_i^2 + y_j^2)` plus the centering shift, so this covers every
    /// unit iterate; the adaptive multiplier can fall short when two
    /// coordinates carry most of the mass.
    Rigorous,
}

impl Sensitivity {
    pub fn multiplier(self, y: &[f64]) -> f64 {
        let n = y.len() as f64;
        match self {
            Sensitivity::Adaptive => norm_inf(y) + 1.0 / n,
            Sensitivity::WorstCase => 1.0 + 1.0 / n,
            Sensitivity::Rigorous => std::f64::consts::SQRT_2 * norm_inf(y) + 2.0 / n,
        }
    }
}

/// Where the starting vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerInit {
    Random,
    Provided,
    Private,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyPowerState {
    y: Vec<f64>,
    t: usize,
    sigma: f64,
    trace: Vec<f64>,
}

impl NoisyPowerState {
    pub fn new(y0: &[f64], sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        let norm = norm2(y0);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("initial vector must be finite and nonzero"));
        }
        Ok(Self {
            y: y0.iter().map(|v| v / norm).collect(),
            t: 0,
            sigma,
            trace: Vec::new(),
        })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Per-step multipliers applied so far.
    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    /// `x = B y + z`, `y <- x / ||x||`. No noise is drawn when `sigma = 0`.
    pub fn step(&mut self, b: &SymMatrix, sensitivity: Sensitivity, rng: &mut Rng) -> Result<()> {
        if b.n() != self.y.len() {
            return Err(Error::invalid("matrix and iterate sizes differ"));
        }
        let mult = sensitivity.multiplier(&self.y);
        let mut x = b.matvec(&self.y);
        if self.sigma > 0.0 {
            let scale = mult * self.sigma;
            for xi in x.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *xi += scale * z;
            }
        }
        let norm = norm2(&x);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate(format!(
                "power iterate vanished at step {}",
                self.t + 1
            )));
        }
        for (yi, xi) in self.y.iter_mut().zip(&x) {
            *yi = xi / norm;
        }
        self.t += 1;
        self.trace.push(mult);
        Ok(())
    }
}

fn run(
    b: &CenteredAdjacency,
    sigma: f64,
    iterations: u32,
    sensitivity: Sensitivity,
    seed: u64,
    init: Option<&[f64]>,
) -> Result<(NoisyPowerState, PowerInit)> {
    if iterations == 0 {
        return Err(Error::invalid("noisy power iteration needs N >= 1"));
    }
    let n = b.n();
    if n < 2 {
        return Err(Error::invalid("noisy power iteration needs n >= 2"));
    }
    let (mut state, source) = match init {
        Some(y0) => {
            if y0.len() != n {
                return Err(Error::invalid(format!(
                    "init has length {}, graph has {n} nodes",
                    y0.len()
                )));
            }
            (NoisyPowerState::new(y0, sigma)?, PowerInit::Provided)
        }
        None => {
            let mut rng = rng_from_seed(derive_seed(seed, 0));
            let y0: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            (NoisyPowerState::new(&y0, sigma)?, PowerInit::Random)
        }
    };
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    for _ in 0..iterations {
        state.step(b.matrix(), sensitivity, &mut rng)?;
    }
    Ok((state, source))
}

fn outcome(state: NoisyPowerState, sensitivity: Sensitivity, init: PowerInit, guarantee: Option<(f64, f64)>) -> Result<MechanismOutcome> {
    Ok(MechanismOutcome {
        labels: labels_from_vector(&state.y)?,
        bottom: false,
        noise_scale: state.sigma,
        guarantee,
        meta: OutcomeMeta::NoisyPower {
            iterations: state.t,
            multipliers: state.trace,
            sensitivity,
            init,
        },
    })
}

/// Noisy power method on the centered adjacency matrix with base noise
/// scale `sigma`. `sigma = 0` runs the plain power method.
pub fn noisy_power_iteration(
    a: &AdjacencyMatrix,
    sigma: f64,
    iterations: u32,
    sensitivity: Sensitivity,
    seed: u64,
    init: Option<&[f64]>,
) -> Result<MechanismOutcome> {
    let b = centered_adjacency(a);
    let (state, source) = run(&b, sigma, iterations, sensitivity, seed, init)?;
    outcome(state, sensitivity, source, None)
}

/// Releases `A + G` once to pick a starting vector, then runs the noisy
/// power method. The budget covers `N + 1` Gaussian releases at one shared
/// sigma.
pub fn private_power_with_init(
    a: &AdjacencyMatrix,
    budget: &PrivacyBudget,
    sensitivity: Sensitivity,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<MechanismOutcome> {
    let n = a.n();
    if n < 2 {
        return Err(Error::invalid("private power iteration needs n >= 2"));
    }
    let steps = budget.iterations().checked_add(1).ok_or_else(|| Error::invalid("too many iterations"))?;
    let sigma = sigma_for_budget(budget.epsilon(), budget.delta(), steps)?;

    let mut noisy = a.to_sym_matrix();
    let mut rng = rng_from_seed(derive_seed(seed, 2));
    for i in 0..n {
        for j in i..n {
            let g: f64 = StandardNormal.sample(&mut rng);
            noisy.set_sym(i, j, noisy.get(i, j) + sigma * g);
        }
    }
    let centered = CenteredAdjacency::from_matrix(&noisy);
    let (init, _) = accept_unconverged(dominant_eigenpair(
        centered.matrix(),
        &cfg.with_seed(derive_seed(seed, 3)),
    ))?;

    let b = centered_adjacency(a);
    let (state, _) = run(
        &b,
        sigma,
        budget.iterations(),
        sensitivity,
        derive_seed(seed, 4),
        Some(&init.pair.vector),
    )?;
    outcome(
        state,
        sensitivity,
        PowerInit::Private,
        Some((budget.epsilon(), budget.delta())),
    )
}
