//! Shared oracles for the integration tests.
#![allow(dead_code)]

use edgedp_spectral::graph::{centered_adjacency, AdjacencyMatrix};
use edgedp_spectral::linalg::{norm2, norm_inf, SymMatrix};
use edgedp_spectral::rng::Rng;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Fixed panels first so narrow peaks are not skipped.
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            adaptive(f, lo, hi, fa, fm, fb, simpson(lo, hi, fa, fm, fb), tol / panels as f64, 40)
        })
        .sum()
}

/// `delta(eps)` of the N-fold Gaussian mechanism as the integral of the
/// privacy-loss tail: `int_{x*}^inf phi(x - m) - e^eps phi(x) dx` with
/// `m = sqrt(N) / sigma` and `x* = eps / m + m / 2`.
pub fn delta_by_quadrature(eps: f64, sigma: f64, steps: u32) -> f64 {
    let m = f64::from(steps).sqrt() / sigma;
    let start = eps / m + m / 2.0;
    let f = |x: f64| phi(x - m) * -(eps - m * x + m * m / 2.0).exp_m1();
    integrate(&f, start, start.max(m) + 40.0, 1e-15)
}

/// The plain power method written out step by step.
pub fn reference_power(b: &SymMatrix, y0: &[f64], steps: usize) -> Vec<f64> {
    let nrm = norm2(y0);
    let mut y: Vec<f64> = y0.iter().map(|v| v / nrm).collect();
    for _ in 0..steps {
        let x = b.matvec(&y);
        let nrm = norm2(&x);
        y = x.iter().map(|v| v / nrm).collect();
    }
    y
}

pub fn random_unit(n: usize, rng: &mut Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let nrm = norm2(&v);
    v.into_iter().map(|x| x / nrm).collect()
}

pub fn random_graph(n: usize, p: f64, rng: &mut Rng) -> AdjacencyMatrix {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, edges).expect("valid edges")
}

/// `(||B y - B' y||_2, ||y||_inf + 1/n)` for the graph with edge `(i, j)`
/// toggled.
pub fn sensitivity_pair(a: &AdjacencyMatrix, i: usize, j: usize, y: &[f64]) -> (f64, f64) {
    let b = centered_adjacency(a);
    let b2 = centered_adjacency(&a.with_toggled(i, j));
    let diff: Vec<f64> = b.matrix().matvec(y).iter().zip(b2.matrix().matvec(y)).map(|(x, z)| x - z).collect();
    (norm2(&diff), norm_inf(y) + 1.0 / a.n() as f64)
}

/// Random symmetric matrix with entries in `[-1, 1]`.
pub fn random_symmetric(n: usize, rng: &mut Rng) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set_sym(i, j, rng.random_range(-1.0..1.0));
        }
    }
    m
}

/// Distance between unit vectors up to sign.
pub fn sign_free_distance(u: &[f64], v: &[f64]) -> f64 {
    let plus: f64 = u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let minus: f64 = u.iter().zip(v).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
    plus.min(minus)
}

pub struct OracleReport {
    pub values_checked: usize,
    pub vectors_checked: usize,
    pub failures: Vec<String>,
}

/// Compares the iterative solvers against the Jacobi reference on random
/// symmetric matrices and random graph Laplacians with `n <= 6`.
pub fn eigen_oracle(cases: u64) -> OracleReport {
    use edgedp_spectral::graph::laplacian;
    use edgedp_spectral::rng::{derive_seed, rng_from_seed};
    use edgedp_spectral::spectral::{fiedler_vector, jacobi_eigen, top_two_symmetric};
    use edgedp_spectral::SolverConfig;

    let mut report = OracleReport {
        values_checked: 0,
        vectors_checked: 0,
        failures: Vec::new(),
    };
    let cfg = SolverConfig::default();
    for case in 0..cases {
        let mut rng = rng_from_seed(derive_seed(0xe16e, case));
        let n = 2 + (case as usize % 5);
        let m = random_symmetric(n, &mut rng);
        let reference = jacobi_eigen(&m);
        let got = match top_two_symmetric(&m, &cfg.with_seed(case)) {
            Ok(t) => t,
            Err(e) => {
                report.failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        for (k, pair) in [&got.first, &got.second].into_iter().enumerate() {
            let want = &reference[k];
            report.values_checked += 1;
            if (pair.value - want.value).abs() > 1e-8 {
                report.failures.push(format!(
                    "case {case} pair {k}: value {} vs {}",
                    pair.value, want.value
                ));
            }
            let below = reference.get(k + 1).map_or(f64::INFINITY, |r| want.value - r.value);
            let above = if k == 0 { f64::INFINITY } else { reference[k - 1].value - want.value };
            if below.min(above) > 1e-4 {
                report.vectors_checked += 1;
                let d = sign_free_distance(&pair.vector, &want.vector);
                if d > 1e-6 {
                    report.failures.push(format!("case {case} pair {k}: vector distance {d}"));
                }
            }
        }

        // Fiedler pair of a random graph on the same size.
        let g = random_graph(n, 0.6, &mut rng);
        let l = laplacian(&g);
        let reference = jacobi_eigen(l.matrix());
        // Descending order: the last pair is the zero mode of the ones vector.
        let fiedler = &reference[n - 2];
        let zero = &reference[n - 1];
        if zero.value.abs() > 1e-9 || fiedler.value < 1e-6 {
            // Disconnected: the Fiedler space contains a second zero mode.
            continue;
        }
        match fiedler_vector(&l, &cfg.with_seed(case)) {
            Ok(sol) => {
                report.values_checked += 1;
                if (sol.pair.value - fiedler.value).abs() > 1e-8 {
                    report.failures.push(format!(
                        "case {case} fiedler: value {} vs {}",
                        sol.pair.value, fiedler.value
                    ));
                }
                let next = if n >= 3 { reference[n - 3].value } else { f64::INFINITY };
                if next - fiedler.value > 1e-4 {
                    report.vectors_checked += 1;
                    let d = sign_free_distance(&sol.pair.vector, &fiedler.vector);
                    if d > 1e-6 {
                        report.failures.push(format!("case {case} fiedler: vector distance {d}"));
                    }
                }
            }
            Err(e) => report.failures.push(format!("case {case} fiedler: {e}")),
        }
    }
    report
}
