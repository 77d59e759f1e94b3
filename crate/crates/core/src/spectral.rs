//! Symmetric eigensolver, Fiedler-vector extraction, sign labelling and the
//! flip-invariant error metrics.
//!
//! Eigenpairs come from shifted, deflated power iteration. Each sweep
//! advances a small block of vectors (subspace iteration) and re-orthogonalizes
//! it against the deflated directions; a Rayleigh-Ritz step on the block picks
//! out the wanted pair. With a block of one this is the textbook power method;
//! the default block of three keeps near-degenerate spectra from stalling.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{laplacian, AdjacencyMatrix, CenteredAdjacency, LabelVector, Laplacian};
use crate::linalg::{dot, norm2, project_out, project_out_ones, SymMatrix};
use crate::rng::{derive_seed, rng_from_seed};

/// Threshold below which a coordinate is treated as zero when fixing signs.
const SIGN_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

impl EigenPair {
    /// `||M v - value v||_2`.
    pub fn residual(&self, m: &SymMatrix) -> f64 {
        let mv = m.matvec(&self.vector);
        mv.iter()
            .zip(&self.vector)
            .map(|(a, b)| (a - self.value * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Residual tolerance, scaled by `max(1, shift)`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 n + 1000`.
    pub max_iters: Option<usize>,
    /// Vectors advanced per sweep.
    pub block_size: usize,
    /// Seed of the pseudo-random start block.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: None,
            block_size: 3,
            seed: 0x5eed,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(10 * n + 1000)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("solver tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == Some(0) {
            return Err(Error::invalid("solver max_iters must be >= 1"));
        }
        if self.block_size == 0 {
            return Err(Error::invalid("solver block_size must be >= 1"));
        }
        Ok(())
    }
}

/// One solved eigenpair plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensolve {
    pub pair: EigenPair,
    /// Shift applied so that the wanted pair is dominant.
    pub shift: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Another eigenvalue was found within `sqrt(tol)` of the returned one,
    /// so the vector is one representative of a multi-dimensional eigenspace.
    pub degenerate: bool,
}

/// Dominant and second eigenpairs of a centered adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct TopTwo {
    pub first: EigenPair,
    pub second: EigenPair,
    pub shift: f64,
    pub iterations: usize,
    pub residuals: [f64; 2],
    /// `|lambda1 - lambda2| < tol * |lambda1|`.
    pub near_degenerate: bool,
}

/// Flips `v` so its first non-negligible coordinate is positive.
pub fn canonicalize_sign(v: &mut [f64]) {
    if let Some(&x) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if x < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

/// Cyclic Jacobi for the small Rayleigh-Ritz matrices. `h` is row-major
/// `k x k` and is destroyed. Returns eigenvalues and column eigenvectors
/// (`vecs[r * k + c]` is row r of eigenvector c).
fn small_symmetric_eigen(h: &mut [f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut vecs = vec![0.0; k * k];
    for i in 0..k {
        vecs[i * k + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[i * k + j] * h[i * k + j])
            .sum();
        if off < 1e-300 {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = h[p * k + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (h[q * k + q] - h[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let hrp = h[r * k + p];
                    let hrq = h[r * k + q];
                    h[r * k + p] = c * hrp - s * hrq;
                    h[r * k + q] = s * hrp + c * hrq;
                }
                for r in 0..k {
                    let hpr = h[p * k + r];
                    let hqr = h[q * k + r];
                    h[p * k + r] = c * hpr - s * hqr;
                    h[q * k + r] = s * hpr + c * hqr;
                }
                for r in 0..k {
                    let vrp = vecs[r * k + p];
                    let vrq = vecs[r * k + q];
                    vecs[r * k + p] = c * vrp - s * vrq;
                    vecs[r * k + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    ((0..k).map(|i| h[i * k + i]).collect(), vecs)
}

/// Full eigendecomposition by cyclic Jacobi, sorted by decreasing value with
/// canonical signs. Dense `O(n^3)` per sweep: a reference for small matrices.
pub fn jacobi_eigen(m: &SymMatrix) -> Vec<EigenPair> {
    let k = m.n();
    let mut h = m.as_slice().to_vec();
    let (values, vecs) = small_symmetric_eigen(&mut h, k);
    let mut pairs: Vec<EigenPair> = (0..k)
        .map(|c| canonical_pair(values[c], (0..k).map(|r| vecs[r * k + c]).collect()))
        .collect();
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    pairs
}

/// Which end of the spectrum to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Largest,
    Smallest,
}

struct SubspaceResult {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Projects out the constraint directions from `x`.
fn deflate(x: &mut [f64], ones: bool, against: &[&[f64]]) {
    if ones {
        project_out_ones(x);
    }
    for u in against {
        project_out(x, u);
    }
}

/// Orthonormalizes `block` in place (two passes of modified Gram-Schmidt).
/// Vectors that collapse are replaced by fresh random directions.
fn orthonormalize(block: &mut [Vec<f64>], ones: bool, against: &[&[f64]], seed: u64, attempt: &mut u64) {
    let n = block.first().map_or(0, Vec::len);
    for j in 0..block.len() {
        loop {
            for _pass in 0..2 {
                deflate(&mut block[j], ones, against);
                for i in 0..j {
                    let (head, tail) = block.split_at_mut(j);
                    project_out(&mut tail[0], &head[i]);
                }
            }
            let nrm = norm2(&block[j]);
            if nrm > 1e-12 {
                block[j].iter_mut().for_each(|v| *v /= nrm);
                break;
            }
            *attempt += 1;
            assert!(*attempt < 1000, "could not draw a start vector outside the deflated space");
            block[j] = random_vector(n, derive_seed(seed, *attempt));
        }
    }
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Shifted subspace iteration on `m`, restricted to the complement of the
/// deflation directions. Iterates on `shift I + m` (largest end) or
/// `shift I - m` (smallest end); `shift` must make the wanted end dominant.
fn subspace_iteration(
    m: &SymMatrix,
    end: End,
    shift: f64,
    ones: bool,
    against: &[&[f64]],
    wanted: usize,
    cfg: &SolverConfig,
) -> Result<SubspaceResult> {
    let n = m.n();
    let dim = n - usize::from(ones) - against.len();
    if dim < wanted {
        return Err(Error::Degenerate(format!(
            "{n}x{n} matrix has only {dim} free directions, {wanted} requested"
        )));
    }
    let b = cfg.block_size.max(wanted).min(dim);
    let tol = cfg.tol * shift.abs().max(1.0);
    let sign = match end {
        End::Largest => 1.0,
        End::Smallest => -1.0,
    };

    let mut attempt = 0u64;
    let mut block: Vec<Vec<f64>> = (0..b)
        .map(|j| random_vector(n, derive_seed(cfg.seed, 1_000_000 + j as u64)))
        .collect();
    orthonormalize(&mut block, ones, against, cfg.seed, &mut attempt);

    let cap = cfg.iteration_cap(n);
    let mut av: Vec<Vec<f64>> = vec![vec![0.0; n]; b];
    let mut h = vec![0.0; b * b];
    let mut last = None;
    for it in 1..=cap {
        for (x, y) in block.iter().zip(av.iter_mut()) {
            m.matvec_into(x, y);
            deflate(y, ones, against);
        }
        for i in 0..b {
            for j in i..b {
                let v = 0.5 * (dot(&block[i], &av[j]) + dot(&block[j], &av[i]));
                h[i * b + j] = v;
                h[j * b + i] = v;
            }
        }
        let (theta, y) = small_symmetric_eigen(&mut h, b);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| (sign * theta[j]).total_cmp(&(sign * theta[i])));

        // Ritz vectors X = V Y and their images M X = (AV) Y.
        let mut ritz = vec![vec![0.0; n]; b];
        let mut ritz_av = vec![vec![0.0; n]; b];
        for (slot, &c) in order.iter().enumerate() {
            for r in 0..b {
                let w = y[r * b + c];
                if w == 0.0 {
                    continue;
                }
                for (dst, src) in ritz[slot].iter_mut().zip(&block[r]) {
                    *dst += w * src;
                }
                for (dst, src) in ritz_av[slot].iter_mut().zip(&av[r]) {
                    *dst += w * src;
                }
            }
        }
        let values: Vec<f64> = order.iter().map(|&c| theta[c]).collect();
        let residuals: Vec<f64> = (0..wanted)
            .map(|k| {
                ritz_av[k]
                    .iter()
                    .zip(&ritz[k])
                    .map(|(a, x)| (a - values[k] * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let converged = residuals.iter().all(|&r| r <= tol);
        if converged || it == cap {
            last = Some(SubspaceResult {
                values,
                vectors: ritz,
                residuals,
                iterations: it,
                converged,
            });
            break;
        }

        for (x, ax) in ritz.iter_mut().zip(&ritz_av) {
            for (xi, ai) in x.iter_mut().zip(ax) {
                *xi = shift * *xi + sign * ai;
            }
        }
        block = ritz;
        orthonormalize(&mut block, ones, against, cfg.seed, &mut attempt);
    }
    Ok(last.expect("iteration cap is at least one"))
}

fn canonical_pair(value: f64, mut vector: Vec<f64>) -> EigenPair {
    let nrm = norm2(&vector);
    vector.iter_mut().for_each(|v| *v /= nrm);
    canonicalize_sign(&mut vector);
    EigenPair { value, vector }
}

/// `e_k` with the listed unit directions projected out, normalized.
fn canonical_basis_vector(n: usize, k: usize, ones: bool, against: &[&[f64]]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    deflate(&mut v, ones, against);
    let nrm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    canonicalize_sign(&mut v);
    v
}

/// Second-smallest eigenpair of a graph Laplacian.
///
/// Iterates on `c I - L` with `c = 2 max_degree + 1` restricted to the
/// complement of the all-ones vector. The zero matrix has no preferred
/// direction; it yields eigenvalue 0 with `e_1` projected off the ones
/// vector, flagged degenerate.
pub fn fiedler_vector(l: &Laplacian, cfg: &SolverConfig) -> Result<Eigensolve> {
    cfg.validate()?;
    let n = l.n();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "Fiedler vector needs at least 2 nodes, got {n}"
        )));
    }
    let shift = 2.0 * l.max_degree() + 1.0;
    if l.matrix().is_zero() {
        return Ok(Eigensolve {
            pair: EigenPair {
                value: 0.0,
                vector: canonical_basis_vector(n, 0, true, &[]),
            },
            shift,
            iterations: 0,
            residual: 0.0,
            degenerate: true,
        });
    }
    let res = subspace_iteration(l.matrix(), End::Smallest, shift, true, &[], 1, cfg)?;
    let gap_tol = cfg.tol.sqrt() * shift.max(1.0);
    let degenerate = res.values.len() > 1 && (res.values[1] - res.values[0]).abs() <= gap_tol;
    let out = Eigensolve {
        pair: canonical_pair(res.values[0], res.vectors[0].clone()),
        shift,
        iterations: res.iterations,
        residual: res.residuals[0],
        degenerate,
    };
    if res.converged {
        Ok(out)
    } else {
        Err(Error::NoConvergence {
            iterations: res.iterations,
            residual: out.residual,
            best: Box::new(out),
        })
    }
}

/// Two algebraically largest eigenpairs of a centered adjacency.
pub fn top_two_eigenpairs(b: &CenteredAdjacency, cfg: &SolverConfig) -> Result<TopTwo> {
    top_two_symmetric(b.matrix(), cfg)
}

/// Two algebraically largest eigenpairs of any symmetric matrix.
///
/// The dominant pair comes from iterating on `M + s I` with
/// `s = ||M||_inf`; the second from the same iteration with the first
/// eigenvector deflated and re-orthogonalized against at every step.
pub fn top_two_symmetric(m: &SymMatrix, cfg: &SolverConfig) -> Result<TopTwo> {
    cfg.validate()?;
    let n = m.n();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "two eigenpairs need at least 2 nodes, got {n}"
        )));
    }
    let shift = m.inf_norm();
    if shift == 0.0 {
        let first = canonical_basis_vector(n, 0, false, &[]);
        let second = canonical_basis_vector(n, 1, false, &[&first]);
        return Ok(TopTwo {
            first: EigenPair {
                value: 0.0,
                vector: first,
            },
            second: EigenPair {
                value: 0.0,
                vector: second,
            },
            shift,
            iterations: 0,
            residuals: [0.0; 2],
            near_degenerate: true,
        });
    }

    let no_convergence = |res: &SubspaceResult| Error::NoConvergence {
        iterations: res.iterations,
        residual: res.residuals[0],
        best: Box::new(Eigensolve {
            pair: canonical_pair(res.values[0], res.vectors[0].clone()),
            shift,
            iterations: res.iterations,
            residual: res.residuals[0],
            degenerate: false,
        }),
    };

    let dom = subspace_iteration(m, End::Largest, shift, false, &[], 1, cfg)?;
    if !dom.converged {
        return Err(no_convergence(&dom));
    }
    let first = canonical_pair(dom.values[0], dom.vectors[0].clone());
    let deflated = subspace_iteration(
        m,
        End::Largest,
        shift,
        false,
        &[&first.vector],
        1,
        &cfg.with_seed(derive_seed(cfg.seed, 2)),
    )?;
    if !deflated.converged {
        return Err(no_convergence(&deflated));
    }
    let second = canonical_pair(deflated.values[0], deflated.vectors[0].clone());
    let near_degenerate = (first.value - second.value).abs() < cfg.tol * first.value.abs();
    Ok(TopTwo {
        residuals: [dom.residuals[0], deflated.residuals[0]],
        iterations: dom.iterations + deflated.iterations,
        first,
        second,
        shift,
        near_degenerate,
    })
}

/// Dominant (algebraically largest) eigenpair of a symmetric matrix.
pub fn dominant_eigenpair(m: &SymMatrix, cfg: &SolverConfig) -> Result<Eigensolve> {
    cfg.validate()?;
    let n = m.n();
    if n == 0 {
        return Err(Error::Degenerate("empty matrix".into()));
    }
    let shift = m.inf_norm();
    if shift == 0.0 {
        return Ok(Eigensolve {
            pair: EigenPair {
                value: 0.0,
                vector: canonical_basis_vector(n, 0, false, &[]),
            },
            shift,
            iterations: 0,
            residual: 0.0,
            degenerate: n > 1,
        });
    }
    let res = subspace_iteration(m, End::Largest, shift, false, &[], 1, cfg)?;
    let gap_tol = cfg.tol.sqrt() * shift.max(1.0);
    let out = Eigensolve {
        pair: canonical_pair(res.values[0], res.vectors[0].clone()),
        shift,
        iterations: res.iterations,
        residual: res.residuals[0],
        degenerate: res.values.len() > 1 && (res.values[0] - res.values[1]).abs() <= gap_tol,
    };
    if res.converged {
        Ok(out)
    } else {
        Err(Error::NoConvergence {
            iterations: res.iterations,
            residual: out.residual,
            best: Box::new(out),
        })
    }
}

/// Accepts the last iterate of a solver that hit its cap. The flag is
/// `false` in that case.
pub fn accept_unconverged(res: Result<Eigensolve>) -> Result<(Eigensolve, bool)> {
    match res {
        Ok(sol) => Ok((sol, true)),
        Err(Error::NoConvergence { best, .. }) => Ok((*best, false)),
        Err(e) => Err(e),
    }
}

/// Non-private spectral clustering of a graph: sign pattern of the Fiedler
/// vector. If the solver hits its iteration cap the last iterate is used and
/// `converged` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub labels: LabelVector,
    pub eigen: Eigensolve,
    pub converged: bool,
}

pub fn spectral_clustering(a: &AdjacencyMatrix, cfg: &SolverConfig) -> Result<Clustering> {
    let (eigen, converged) = accept_unconverged(fiedler_vector(&laplacian(a), cfg))?;
    Ok(Clustering {
        labels: labels_from_vector(&eigen.pair.vector)?,
        eigen,
        converged,
    })
}

/// Sign labelling: entries `<= 0` map to +1, entries `> 0` map to -1.
pub fn labels_from_vector(v: &[f64]) -> Result<LabelVector> {
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("cannot label from an all-zero vector".into()));
    }
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Degenerate("vector contains NaN".into()));
    }
    LabelVector::new(v.iter().map(|&x| if x <= 0.0 { 1 } else { -1 }).collect())
}

/// Misclassified fraction, minimized over a global flip. Lies in `[0, 1/2]`.
pub fn error_rate(est: &LabelVector, truth: &LabelVector) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::invalid(format!(
            "label vectors differ in length: {} vs {}",
            est.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("empty label vectors"));
    }
    let n = truth.len();
    let ham = est
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    Ok(ham.min(n - ham) as f64 / n as f64)
}

/// `1 - error_rate`.
pub fn overlap_rate(est: &LabelVector, truth: &LabelVector) -> Result<f64> {
    error_rate(est, truth).map(|e| 1.0 - e)
}
