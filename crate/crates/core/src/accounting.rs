//! Noise calibration for the Gaussian and Laplace mechanisms.
//!
//! The N-fold composition of Gaussian mechanisms with sensitivity 1 and noise
//! ratio `sigma` is dominated by a single Gaussian mechanism with ratio
//! `sigma / sqrt(N)`, whose exact privacy curve is
//!
//! ```text
//! delta(eps) = Phi(-eps s + 1/(2 s)) - e^eps Phi(-eps s - 1/(2 s)),   s = sigma / sqrt(N)
//! ```

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Noise ratio and composition length of an iterated Gaussian mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussAccountParams {
    sigma: f64,
    steps: u32,
}

impl GaussAccountParams {
    pub fn new(sigma: f64, steps: u32) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        if steps == 0 {
            return Err(Error::invalid("composition length must be >= 1"));
        }
        Ok(Self { sigma, steps })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn check_budget(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive and finite, got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Tail-bound calibration `sigma = sqrt(4 N ln(1/delta)) / eps`.
pub fn sigma_basic(eps: f64, delta: f64, steps: u32) -> Result<f64> {
    check_budget(eps, delta)?;
    if steps == 0 {
        return Err(Error::invalid("composition length must be >= 1"));
    }
    Ok((4.0 * f64::from(steps) * (1.0 / delta).ln()).sqrt() / eps)
}

/// Exact `delta(eps)` of the N-fold Gaussian composition, clamped to `[0, 1]`.
pub fn delta_of_epsilon(eps: f64, params: &GaussAccountParams) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be >= 0, got {eps}")));
    }
    let root_n = f64::from(params.steps).sqrt();
    let s = params.sigma;
    let a = -eps * s / root_n;
    let b = root_n / (2.0 * s);
    let lower = normal_cdf(a - b);
    let tail = if lower == 0.0 { 0.0 } else { eps.exp() * lower };
    Ok((normal_cdf(a + b) - tail).clamp(0.0, 1.0))
}

pub const SIGMA_BRACKET: (f64, f64) = (1e-6, 1e8);

/// Smallest `sigma` with `delta_of_epsilon(eps, sigma, N) <= delta`, by
/// bisection in `log sigma` over [`SIGMA_BRACKET`].
pub fn sigma_for_budget(eps: f64, delta: f64, steps: u32) -> Result<f64> {
    check_budget(eps, delta)?;
    let curve = |sigma: f64| -> Result<f64> {
        delta_of_epsilon(eps, &GaussAccountParams::new(sigma, steps)?)
    };
    let (mut lo, mut hi) = SIGMA_BRACKET;
    let (d_lo, d_hi) = (curve(lo)?, curve(hi)?);
    if d_lo < d_hi {
        return Err(Error::Calibration(format!(
            "privacy curve is not decreasing over the bracket ({d_lo} < {d_hi})"
        )));
    }
    if d_hi > delta {
        return Err(Error::Calibration(format!(
            "delta = {delta} needs sigma beyond {hi} at eps = {eps}, N = {steps}"
        )));
    }
    if d_lo <= delta {
        return Ok(lo);
    }
    while hi / lo - 1.0 > 1e-12 {
        let mid = (lo * hi).sqrt();
        if curve(mid)? <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One Laplace(0, scale) draw by inverse CDF.
pub fn laplace_draw(scale: f64, rng: &mut Rng) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r == 0.0 {
            continue;
        }
        let u = r - 0.5;
        return -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln();
    }
}

/// One Laplace(0, scale) draw from a fresh generator seeded with `seed`.
pub fn laplace_sample(scale: f64, seed: u64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::invalid(format!("Laplace scale must be positive, got {scale}")));
    }
    Ok(laplace_draw(scale, &mut rng_from_seed(seed)))
}
