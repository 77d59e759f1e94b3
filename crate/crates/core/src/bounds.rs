//! Closed-form theoretical quantities: the converse sample-size bound,
//! eigenvector distance bounds for each mechanism, separation conditions,
//! spectral-gap bounds and the overlap floors derived from them.
//!
//! All logs are natural. The universal constants of the concentration
//! lemmas have no published values; they default to 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(beta, eta)`-accurate recovery: error rate at most `beta` with
/// probability at least `1 - eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyTarget {
    beta: f64,
    eta: f64,
}

impl AccuracyTarget {
    pub fn new(beta: f64, eta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.125) {
            return Err(Error::invalid(format!("beta must lie in (0, 1/8), got {beta}")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 1), got {eta}")));
        }
        Ok(Self { beta, eta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniversalConstants {
    pub c_laplacian: f64,
    pub c_rr: f64,
    pub c_sub: f64,
    pub c1: f64,
    pub c2: f64,
    /// Constant of the `1/sqrt(m)` term in the subsampling overlap floor.
    pub c_vote: f64,
}

impl Default for UniversalConstants {
    fn default() -> Self {
        Self {
            c_laplacian: 1.0,
            c_rr: 1.0,
            c_sub: 1.0,
            c1: 1.0,
            c2: 1.0,
            c_vote: 1.0,
        }
    }
}

impl UniversalConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c_laplacian, self.c_rr, self.c_sub, self.c1, self.c2, self.c_vote];
        if all.iter().all(|c| *c > 0.0 && c.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(format!("universal constants must be positive: {self:?}")))
        }
    }
}

/// Logarithmic-degree parametrization `p = alpha ln n / n`, `q = beta ln n / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmLogScale {
    alpha: f64,
    beta: f64,
}

impl SbmLogScale {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > beta && beta > 0.0) {
            return Err(Error::invalid(format!(
                "need alpha > beta > 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_probabilities(n: usize, p: f64, q: f64) -> Result<Self> {
        let ln_n = (n as f64).ln();
        if n < 2 {
            return Err(Error::invalid("n must be >= 2"));
        }
        Self::new(p * n as f64 / ln_n, q * n as f64 / ln_n)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Which packing exponent the converse bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PackingExponent {
    /// `A = ln(1/(8 e beta))`, as the packing count in the proof gives.
    #[default]
    Derived,
    /// `A = ln(1/(8 e^beta))`, as the theorem statement prints it.
    Printed,
}

impl PackingExponent {
    pub fn value(self, beta: f64) -> f64 {
        match self {
            PackingExponent::Derived => (1.0 / (8.0 * std::f64::consts::E * beta)).ln(),
            PackingExponent::Printed => (1.0 / (8.0 * beta.exp())).ln(),
        }
    }
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(0.0 <= q && q < p && p <= 1.0) {
        return Err(Error::invalid(format!("need 0 <= q < p <= 1, got p = {p}, q = {q}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("eta must lie in (0, 1), got {eta}")))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!("n must be >= 2, got {n}")))
    }
}

fn rr_mu(eps: f64) -> f64 {
    1.0 / (eps.exp() + 1.0)
}

/// `e^{2 eps} + (1 - e^{2 eps})(p^2 + q^2) - 1`.
pub fn converse_delta(eps: f64, p: f64, q: f64) -> f64 {
    let e2 = (2.0 * eps).exp();
    e2 + (1.0 - e2) * (p * p + q * q) - 1.0
}

/// Smallest `n` at which an eps-edge-DP mechanism can be
/// `(beta, eta)`-accurate: the positive root of
/// `8 beta (1 - 8 beta) Delta n^2 - 2 beta A n - B = 0`.
pub fn converse_min_n(
    target: &AccuracyTarget,
    eps: f64,
    p: f64,
    q: f64,
    packing: PackingExponent,
) -> Result<f64> {
    check_positive("epsilon", eps)?;
    check_pq(p, q)?;
    let beta = target.beta();
    let delta = converse_delta(eps, p, q);
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Infeasible(format!(
            "converse bound undefined: Delta = {delta} at eps = {eps}, p = {p}, q = {q}"
        )));
    }
    let a = packing.value(beta);
    let b = (1.0 / target.eta()).ln();
    let k = 8.0 * beta * (1.0 - 8.0 * beta) * delta;
    Ok((beta * a + (beta * beta * a * a + k * b).sqrt()) / k)
}

/// Both sides of the necessary condition at a given `n`: `(Delta, rhs)`.
pub fn converse_condition(
    target: &AccuracyTarget,
    eps: f64,
    p: f64,
    q: f64,
    n: f64,
    packing: PackingExponent,
) -> (f64, f64) {
    let beta = target.beta();
    let a = packing.value(beta);
    let b = (1.0 / target.eta()).ln();
    let m = n - 8.0 * beta * n;
    (converse_delta(eps, p, q), a / (4.0 * m) + b / (8.0 * beta * n * m))
}

/// Distance between the Fiedler vectors of the true and perturbed Laplacians
/// under randomized response.
pub fn rr_distance_bound(n: usize, p: f64, q: f64, eps: f64, eta: f64) -> Result<f64> {
    check_n(n)?;
    check_pq(p, q)?;
    check_positive("epsilon", eps)?;
    check_eta(eta)?;
    let nf = n as f64;
    let mu = rr_mu(eps);
    let l = (2.0 / eta).ln();
    let inner = q * nf + (8.0 * mu * (1.0 - mu) * nf * l).sqrt() + 4.0 / (3.0 * nf.sqrt()) * l;
    Ok(4.0 * 2f64.sqrt() / (nf * (p - q)) * inner)
}

/// Outcome of the separation check: `margin = lhs - rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub satisfied: bool,
    pub margin: f64,
}

/// `n (p - q) >= C [T + (n / sqrt 2) sqrt(mu (1 - mu)) sqrt(ln(n/eta))]`.
pub fn rr_separation_ok(
    n: usize,
    p: f64,
    q: f64,
    eps: f64,
    eta: f64,
    consts: &UniversalConstants,
) -> Result<Separation> {
    check_n(n)?;
    if !(0.0 <= q && q <= p && p <= 1.0) {
        return Err(Error::invalid(format!("need 0 <= q <= p <= 1, got p = {p}, q = {q}")));
    }
    check_positive("epsilon", eps)?;
    check_eta(eta)?;
    consts.validate()?;
    let nf = n as f64;
    let mu = rr_mu(eps);
    let l = (nf / eta).ln();
    let t = (nf * p * l).sqrt() + l;
    let c = 4.0 * (2.0 * consts.c_laplacian).max(consts.c_rr);
    let rhs = c * (t + nf / 2f64.sqrt() * (mu * (1.0 - mu)).sqrt() * l.sqrt());
    let margin = nf * (p - q) - rhs;
    Ok(Separation {
        satisfied: margin >= 0.0,
        margin,
    })
}

/// Variance proxy used in the subsampling distance bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsampleVariance {
    /// `(16/n) q_s (1 - q_s) |E_inter|`.
    #[default]
    InterEdges,
    /// `(4/n) (q/(p+q)) |E|`.
    UpperBound,
}

pub fn subsample_distance_bound(
    n: usize,
    p: f64,
    q: f64,
    q_s: f64,
    edge_count: usize,
    inter_edge_count: usize,
    eta: f64,
    variance: SubsampleVariance,
) -> Result<f64> {
    check_n(n)?;
    check_pq(p, q)?;
    check_eta(eta)?;
    if !(q_s > 0.0 && q_s <= 1.0) {
        return Err(Error::invalid(format!("q_s must lie in (0, 1], got {q_s}")));
    }
    if inter_edge_count > edge_count {
        return Err(Error::invalid("inter-community edges exceed total edges"));
    }
    let nf = n as f64;
    let e = edge_count as f64;
    let frac = q / (p + q);
    let d = 2.0 * q_s / nf.sqrt() * (frac * e).sqrt();
    let var = match variance {
        SubsampleVariance::InterEdges => 16.0 / nf * q_s * (1.0 - q_s) * inter_edge_count as f64,
        SubsampleVariance::UpperBound => 4.0 / nf * frac * e,
    };
    let summand = 4.0 / nf.sqrt();
    let l = (2.0 / eta).ln();
    Ok(4.0 * 2f64.sqrt() / (nf * (p - q)) * (d + (2.0 * var * l).sqrt() + summand / 3.0 * l))
}

/// `(p - q) n / 3 - 2 c1 sqrt(ln n)`: the spectral gap lower bound of the
/// centered adjacency matrix.
pub fn gap_lower_bound(n: usize, p: f64, q: f64, consts: &UniversalConstants) -> f64 {
    let nf = n as f64;
    (p - q) * nf / 3.0 - 2.0 * consts.c1 * nf.ln().sqrt()
}

/// Distance between the noisy power output and the community direction
/// after `iterations` steps at base noise `sigma`.
pub fn npi_distance_bound(
    n: usize,
    p: f64,
    q: f64,
    sigma: f64,
    iterations: u32,
    eta: f64,
    consts: &UniversalConstants,
) -> Result<f64> {
    check_n(n)?;
    check_pq(p, q)?;
    check_eta(eta)?;
    consts.validate()?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if iterations == 0 {
        return Err(Error::invalid("iteration count must be >= 1"));
    }
    let gap = gap_lower_bound(n, p, q, consts);
    if !(gap > 0.0) {
        return Err(Error::Infeasible(format!(
            "spectral gap bound {gap} is not positive at n = {n}, p = {p}, q = {q}"
        )));
    }
    let nf = n as f64;
    let noise = (nf.sqrt() + (2.0 * (2.0 * iterations as f64 / eta).ln()).sqrt()) * (1.0 + 1.0 / nf);
    Ok(2f64.sqrt() * sigma * noise / gap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGap {
    /// Lower bound on the largest eigenvalue.
    pub lambda1_lower: f64,
    /// Upper bound on every other eigenvalue magnitude.
    pub rest_upper: f64,
    pub success_probability: f64,
    /// `1 / gap_lower_bound`, or infinity when the gap bound is not positive.
    pub gap_reciprocal: f64,
}

pub fn spectral_gap_bound(scale: &SbmLogScale, n: usize, consts: &UniversalConstants) -> Result<SpectralGap> {
    check_n(n)?;
    consts.validate()?;
    let nf = n as f64;
    let ln_n = nf.ln();
    let (a, b) = (scale.alpha(), scale.beta());
    let p = a * ln_n / nf;
    let q = b * ln_n / nf;
    let gap = gap_lower_bound(n, p, q, consts);
    Ok(SpectralGap {
        lambda1_lower: (a - b) / 3.0 * ln_n,
        rest_upper: 2.0 * consts.c1 * ln_n.sqrt(),
        success_probability: 1.0 - 2.0 * nf.powf(-1.0 / (2.0 * (a + b + 1.0))) - consts.c2 * nf.powi(-3),
        gap_reciprocal: if gap > 0.0 { 1.0 / gap } else { f64::INFINITY },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMechanism {
    Rr,
    Subsample,
    Npi,
}

/// Overlap floor implied by an eigenvector distance bound, clamped at 0.
/// `m` is the subgraph count and is required for `Subsample`.
pub fn overlap_lower_bound(
    distance_bound: f64,
    mechanism: BoundMechanism,
    m: Option<usize>,
    consts: &UniversalConstants,
) -> Result<f64> {
    if !(distance_bound >= 0.0) {
        return Err(Error::invalid(format!("distance bound must be >= 0, got {distance_bound}")));
    }
    let floor = match mechanism {
        BoundMechanism::Rr => 1.0 - distance_bound / 8.0,
        BoundMechanism::Subsample => {
            let m = m.filter(|&m| m > 0).ok_or_else(|| {
                Error::invalid("subsampling overlap floor needs a positive subgraph count")
            })?;
            1.0 - distance_bound / 4.0 - consts.c_vote / (m as f64).sqrt()
        }
        BoundMechanism::Npi => 1.0 - distance_bound * distance_bound / 8.0,
    };
    Ok(floor.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converse_equality_at_root() {
        let t = AccuracyTarget::new(0.05, 0.01).unwrap();
        let n = converse_min_n(&t, 1.0, 0.25, 0.0025, PackingExponent::Derived).unwrap();
        let (lhs, rhs) = converse_condition(&t, 1.0, 0.25, 0.0025, n, PackingExponent::Derived);
        assert!(((lhs - rhs) / lhs).abs() < 1e-12);
    }

    #[test]
    fn converse_monotone_in_eps() {
        let t = AccuracyTarget::new(0.05, 0.01).unwrap();
        let vals: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&e| converse_min_n(&t, e, 0.25, 0.0025, PackingExponent::Derived).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn converse_limit_eta_to_one() {
        let beta = 0.01;
        let t = AccuracyTarget::new(beta, 1.0 - 1e-15).unwrap();
        let n = converse_min_n(&t, 1.0, 0.3, 0.1, PackingExponent::Derived).unwrap();
        let a = PackingExponent::Derived.value(beta);
        let limit = a / (4.0 * (1.0 - 8.0 * beta) * converse_delta(1.0, 0.3, 0.1));
        assert!(((n - limit) / limit).abs() < 1e-6);
    }

    #[test]
    fn converse_errors() {
        assert!(AccuracyTarget::new(0.125, 0.1).is_err());
        assert!(AccuracyTarget::new(0.05, 1.0).is_err());
        let t = AccuracyTarget::new(0.05, 0.01).unwrap();
        // p^2 + q^2 = 1 makes Delta = 0.
        assert!(matches!(
            converse_min_n(&t, 1.0, 1.0, 0.0, PackingExponent::Derived),
            Err(Error::Infeasible(_))
        ));
        assert!(converse_min_n(&t, 0.0, 0.3, 0.1, PackingExponent::Derived).is_err());
    }

    #[test]
    fn packing_exponents() {
        let b = 0.05;
        assert!((PackingExponent::Derived.value(b) + (8.0 * std::f64::consts::E * b).ln()).abs() < 1e-15);
        assert!((PackingExponent::Printed.value(b) + 8f64.ln() + b).abs() < 1e-15);
    }

    #[test]
    fn rr_bound_large_eps_limit() {
        let (n, p, q, eta) = (200, 0.2, 0.02, 0.01);
        let nf = n as f64;
        let l = (2.0f64 / eta).ln();
        let limit = 4.0 * 2f64.sqrt() / (nf * (p - q)) * (q * nf + 4.0 / (3.0 * nf.sqrt()) * l);
        let got = rr_distance_bound(n, p, q, 60.0, eta).unwrap();
        assert!(((got - limit) / limit).abs() < 1e-9);
        assert!(rr_distance_bound(n, 0.2, 0.2, 1.0, eta).is_err());
    }

    #[test]
    fn rr_bound_non_increasing_in_eps() {
        let eps = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0];
        for &n in &[100, 200, 800] {
            let v: Vec<f64> = eps
                .iter()
                .map(|&e| rr_distance_bound(n, 0.2, 0.02, e, 0.01).unwrap())
                .collect();
            assert!(v.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn rr_bound_vanishes_for_q_zero() {
        let a = rr_distance_bound(1_000, 0.5, 0.0, 60.0, 0.01).unwrap();
        let b = rr_distance_bound(100_000, 0.5, 0.0, 60.0, 0.01).unwrap();
        assert!(b < a / 100.0);
    }

    #[test]
    fn separation_cases() {
        let c = UniversalConstants::default();
        assert!(rr_separation_ok(1_000_000, 0.9, 0.0, 60.0, 0.01, &c).unwrap().satisfied);
        let s = rr_separation_ok(200, 0.2, 0.2, 1.0, 0.01, &c).unwrap();
        assert!(!s.satisfied && s.margin < 0.0);
    }

    #[test]
    fn subsample_special_cases() {
        let (n, p, eta) = (100, 0.5, 0.01);
        let nf = n as f64;
        let got = subsample_distance_bound(n, p, 0.0, 0.3, 400, 0, eta, SubsampleVariance::InterEdges).unwrap();
        let want = 4.0 * 2f64.sqrt() / (nf * p) * (4.0 / nf.sqrt() / 3.0) * (2.0f64 / eta).ln();
        assert!((got - want).abs() < 1e-15);

        let full = subsample_distance_bound(n, p, 0.1, 1.0, 400, 50, eta, SubsampleVariance::InterEdges).unwrap();
        let d = 2.0 / nf.sqrt() * (0.1 / 0.6 * 400.0f64).sqrt();
        let want = 4.0 * 2f64.sqrt() / (nf * 0.4) * (d + 4.0 / nf.sqrt() / 3.0 * (2.0f64 / eta).ln());
        assert!(((full - want) / want).abs() < 1e-14);
        assert!(subsample_distance_bound(n, p, 0.1, 0.0, 400, 50, eta, SubsampleVariance::InterEdges).is_err());
    }

    #[test]
    fn npi_bound_homogeneous_in_sigma() {
        let c = UniversalConstants::default();
        assert_eq!(npi_distance_bound(400, 0.2, 0.02, 0.0, 8, 0.01, &c).unwrap(), 0.0);
        let one = npi_distance_bound(400, 0.2, 0.02, 1.5, 8, 0.01, &c).unwrap();
        let two = npi_distance_bound(400, 0.2, 0.02, 3.0, 8, 0.01, &c).unwrap();
        assert_eq!(two, 2.0 * one);
        assert!(matches!(
            npi_distance_bound(20, 0.2, 0.02, 1.0, 8, 0.01, &c),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn spectral_gap_example() {
        let c = UniversalConstants::default();
        let s = SbmLogScale::new(7.5, 0.75).unwrap();
        let g = spectral_gap_bound(&s, 200, &c).unwrap();
        assert!((g.lambda1_lower - 2.25 * 200f64.ln()).abs() < 1e-12);
        assert!((g.lambda1_lower - 11.92).abs() < 0.01);
        // Vacuous at this size: n^(1/(2(alpha+beta+1))) < 2.
        assert!(g.success_probability < 0.0);
        let sparse = spectral_gap_bound(&SbmLogScale::new(1.0, 0.5).unwrap(), 1 << 20, &c).unwrap();
        assert!(sparse.success_probability > 0.0 && sparse.success_probability < 1.0);
        let p = 7.5 * 200f64.ln() / 200.0;
        let q = 0.75 * 200f64.ln() / 200.0;
        assert!((g.gap_reciprocal - 1.0 / gap_lower_bound(200, p, q, &c)).abs() < 1e-15);
        assert!(SbmLogScale::new(1.0, 1.0).is_err());
    }

    #[test]
    fn overlap_floors() {
        let c = UniversalConstants::default();
        assert_eq!(overlap_lower_bound(0.0, BoundMechanism::Rr, None, &c).unwrap(), 1.0);
        assert_eq!(overlap_lower_bound(0.0, BoundMechanism::Npi, None, &c).unwrap(), 1.0);
        assert_eq!(overlap_lower_bound(2.0, BoundMechanism::Npi, None, &c).unwrap(), 0.5);
        assert_eq!(overlap_lower_bound(100.0, BoundMechanism::Rr, None, &c).unwrap(), 0.0);
        assert_eq!(overlap_lower_bound(1.0, BoundMechanism::Subsample, Some(4), &c).unwrap(), 0.25);
        assert!(overlap_lower_bound(1.0, BoundMechanism::Subsample, None, &c).is_err());
        assert!(overlap_lower_bound(-1.0, BoundMechanism::Rr, None, &c).is_err());
    }
}
