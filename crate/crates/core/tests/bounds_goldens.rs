use edgedp_spectral::accounting::sigma_for_budget;
use edgedp_spectral::bounds::*;
use edgedp_spectral::rng::rng_from_seed;
use rand::Rng as _;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn target() -> AccuracyTarget {
    AccuracyTarget::new(0.05, 0.01).unwrap()
}

/// Each evaluator at one fixed point, with its 50-digit value.
fn evaluations() -> Vec<(&'static str, f64, f64)> {
    let c = UniversalConstants::default();
    let qs = 1.0 / (32.0 * 200f64.ln());
    let sigma = sigma_for_budget(1.0, 1.0 / 160_000.0, 8).unwrap();
    let gap = spectral_gap_bound(&SbmLogScale::new(7.5, 0.75).unwrap(), 200, &c).unwrap();
    let t = AccuracyTarget::new(0.01, 0.01).unwrap();
    vec![
        ("converse_derived", converse_min_n(&target(), 1.0, 0.25, 0.0025, PackingExponent::Derived).unwrap(), 1.786_932_736_960_805),
        ("converse_printed", converse_min_n(&target(), 1.0, 0.25, 0.0025, PackingExponent::Printed).unwrap(), 1.717_307_673_600_932_8),
        ("converse_small_beta", converse_min_n(&t, 2.0, 0.25, 0.0025, PackingExponent::Derived).unwrap(), 1.120_032_057_987_269_8),
        ("rr_distance", rr_distance_bound(200, 0.2, 0.02, 1.0, 0.01).unwrap(), 7.122_176_825_969_360),
        ("rr_margin", rr_separation_ok(200, 0.2, 0.02, 1.0, 0.01, &c).unwrap().margin, -1_781.169_896_646_921_6),
        ("rr_margin_large_n", rr_separation_ok(100_000, 0.5, 0.01, 8.0, 0.01, &c).unwrap().margin, 107.002_874_758_448_67),
        ("subsample_inter", subsample_distance_bound(200, 0.2, 0.02, qs, 2180, 200, 0.01, SubsampleVariance::InterEdges).unwrap(), 0.237_009_496_152_526_3),
        ("subsample_upper", subsample_distance_bound(200, 0.2, 0.02, qs, 2180, 200, 0.01, SubsampleVariance::UpperBound).unwrap(), 1.098_703_523_765_681_4),
        ("npi_sigma", sigma, 10.847_586_664_814_075),
        ("npi_distance", npi_distance_bound(400, 0.2, 0.02, sigma, 8, 0.01, &c).unwrap(), 19.192_275_064_484_477),
        ("npi_distance_fixed_sigma", npi_distance_bound(400, 0.2, 0.02, 10.0, 8, 0.01, &c).unwrap(), 17.692_668_109_062_236),
        ("gap_lambda1", gap.lambda1_lower, 11.921_214_074_733_083),
        ("gap_rest", gap.rest_upper, 4.603_614_826_002_730),
        ("gap_success", gap.success_probability, -0.501_931_175_607_015_6),
        ("gap_reciprocal", gap.gap_reciprocal, 0.136_656_841_405_124_23),
    ]
}

#[test]
fn evaluators_match_high_precision_goldens() {
    for (name, got, want) in evaluations() {
        assert!(rel(got, want) < 1e-12, "{name}: {got} vs {want}");
    }
}

#[test]
fn evaluators_are_bit_stable() {
    let first: Vec<u64> = evaluations().iter().map(|e| e.1.to_bits()).collect();
    for _ in 0..3 {
        let again: Vec<u64> = evaluations().iter().map(|e| e.1.to_bits()).collect();
        assert_eq!(first, again);
    }
}

#[test]
fn converse_root_is_consistent_on_random_draws() {
    let mut rng = rng_from_seed(17);
    let mut checked = 0;
    while checked < 100 {
        let beta = rng.random_range(0.001..0.04);
        let eta = rng.random_range(0.001..0.5);
        let eps = rng.random_range(0.1..5.0);
        let p = rng.random_range(0.05..1.0);
        let q = rng.random_range(0.0..p);
        let t = AccuracyTarget::new(beta, eta).unwrap();
        let n = match converse_min_n(&t, eps, p, q, PackingExponent::Derived) {
            Ok(n) => n,
            Err(_) => continue,
        };
        let (lhs, rhs) = converse_condition(&t, eps, p, q, n, PackingExponent::Derived);
        assert!(rel(rhs, lhs) < 1e-6, "beta {beta} eta {eta} eps {eps} p {p} q {q}");
        checked += 1;
    }
}

#[test]
fn converse_eta_limit() {
    let t = AccuracyTarget::new(0.01, 1.0 - 1e-15).unwrap();
    let (eps, p, q) = (1.0, 0.25, 0.0025);
    let a = PackingExponent::Derived.value(0.01);
    let delta = converse_delta(eps, p, q);
    let limit = a / (4.0 * (1.0 - 0.08) * delta);
    let n = converse_min_n(&t, eps, p, q, PackingExponent::Derived).unwrap();
    assert!(rel(n, limit) < 1e-6);
}

#[test]
fn rr_distance_non_increasing_in_eps() {
    let vals: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&e| rr_distance_bound(200, 0.2, 0.02, e, 0.01).unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn npi_distance_is_linear_in_sigma() {
    let c = UniversalConstants::default();
    let one = npi_distance_bound(400, 0.2, 0.02, 3.0, 8, 0.01, &c).unwrap();
    let two = npi_distance_bound(400, 0.2, 0.02, 6.0, 8, 0.01, &c).unwrap();
    assert_eq!(two, 2.0 * one);
    assert_eq!(npi_distance_bound(400, 0.2, 0.02, 0.0, 8, 0.01, &c).unwrap(), 0.0);
}

#[test]
fn npi_distance_tracks_corollary_rate() {
    // Bound / (eps^-1 (p - q)^-1 sqrt(ln n / n)) stays within a factor of 4
    // over n = 2^8 .. 2^14 at fixed log-scale alpha, beta.
    let c = UniversalConstants::default();
    let (alpha, beta, eps) = (20.0, 2.0, 1.0);
    let ratios: Vec<f64> = (8..=14)
        .map(|k| {
            let n = 1usize << k;
            let nf = n as f64;
            let (p, q) = (alpha * nf.ln() / nf, beta * nf.ln() / nf);
            let sigma = sigma_for_budget(eps, 1.0 / (nf * nf), 8).unwrap();
            let bound = npi_distance_bound(n, p, q, sigma, 8, 0.01, &c).unwrap();
            bound / ((nf.ln() / nf).sqrt() / (eps * (p - q)))
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo <= 4.0, "{ratios:?}");
}

#[test]
fn npi_distance_vanishes_at_fixed_densities() {
    let c = UniversalConstants::default();
    let vals: Vec<f64> = (8..=14)
        .map(|k| {
            let n = 1usize << k;
            let sigma = sigma_for_budget(1.0, 1.0 / (n as f64).powi(2), 8).unwrap();
            npi_distance_bound(n, 0.2, 0.02, sigma, 8, 0.01, &c).unwrap()
        })
        .collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(vals[vals.len() - 1] < 0.2 * vals[0]);
}

#[test]
fn overlap_floor_examples() {
    let c = UniversalConstants::default();
    assert_eq!(overlap_lower_bound(0.0, BoundMechanism::Rr, None, &c).unwrap(), 1.0);
    assert_eq!(overlap_lower_bound(0.0, BoundMechanism::Npi, None, &c).unwrap(), 1.0);
    assert_eq!(overlap_lower_bound(2.0, BoundMechanism::Npi, None, &c).unwrap(), 0.5);
    assert_eq!(overlap_lower_bound(100.0, BoundMechanism::Rr, None, &c).unwrap(), 0.0);
    assert_eq!(overlap_lower_bound(0.4, BoundMechanism::Subsample, Some(100), &c).unwrap(), 0.8);
    assert!(overlap_lower_bound(0.4, BoundMechanism::Subsample, None, &c).is_err());
}
