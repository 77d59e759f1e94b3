//! Graph representation, two-block SBM sampling, and the two matrices the
//! spectral methods operate on: the Laplacian `L = D - A` and the centered
//! adjacency `B = A - rho * 11^T`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::rng::rng_from_seed;

/// Symmetric 0/1 adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    bits: Vec<u8>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; n * n],
        }
    }

    /// Builds an undirected simple graph from an edge list. Self-loops are
    /// dropped and duplicate edges collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut a = Self::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u != v {
                a.set(u, v, true);
            }
        }
        Ok(a)
    }

    /// Builds from a dense row-major 0/1 slice, validating every invariant.
    pub fn from_dense(n: usize, entries: &[u8]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let e = entries[i * n + j];
                if e > 1 {
                    return Err(Error::invalid(format!("entry ({i}, {j}) = {e} is not 0/1")));
                }
                if e != entries[j * n + i] {
                    return Err(Error::invalid(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            n,
            bits: entries.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j] != 0
    }

    /// Sets the symmetric pair `(i, j)`, `(j, i)`. Panics on `i == j`.
    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, present: bool) {
        assert_ne!(i, j, "self-loops are not allowed");
        let b = u8::from(present);
        self.bits[i * self.n + j] = b;
        self.bits[j * self.n + i] = b;
    }

    /// Returns a copy with the pair `(i, j)` toggled.
    pub fn with_toggled(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        out.set(i, j, !self.has_edge(i, j));
        out
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|&b| b as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum::<usize>() / 2
    }

    /// Undirected edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    /// Number of edges whose endpoints carry different labels.
    pub fn inter_edge_count(&self, labels: &LabelVector) -> usize {
        self.edges()
            .filter(|&(i, j)| labels.get(i) != labels.get(j))
            .count()
    }

    /// Graph complement (diagonal stays zero).
    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    out.bits[i * self.n + j] ^= 1;
                }
            }
        }
        out
    }

    pub fn to_sym_matrix(&self) -> SymMatrix {
        let data = self.bits.iter().map(|&b| f64::from(b)).collect();
        SymMatrix::from_row_major(self.n, data).expect("adjacency is symmetric")
    }
}

/// Community assignment over {-1, +1}, compared up to a global flip.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelVector(Vec<i8>);

impl LabelVector {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        if let Some(pos) = labels.iter().position(|&l| l != 1 && l != -1) {
            return Err(Error::invalid(format!(
                "label {} at index {pos} is not +1 or -1",
                labels[pos]
            )));
        }
        Ok(Self(labels))
    }

    /// First `n/2` nodes labelled +1, the rest -1.
    pub fn balanced(n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::invalid(format!("balanced labels need even n > 0, got {n}")));
        }
        Ok(Self(
            (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&l| -l).collect())
    }

    /// Flips globally so that the first entry is +1.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(-1) => self.negated(),
            _ => self.clone(),
        }
    }

    pub fn count_positive(&self) -> usize {
        self.0.iter().filter(|&&l| l == 1).count()
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.count_positive() == self.len()
    }
}

/// Two-block SBM parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmParams {
    n: usize,
    p: f64,
    q: f64,
}

impl SbmParams {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::invalid(format!("n must be even and positive, got {n}")));
        }
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) || q > p {
            return Err(Error::invalid(format!(
                "need 0 <= q <= p <= 1, got p = {p}, q = {q}"
            )));
        }
        Ok(Self { n, p, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Samples a graph from SBM(truth, n, p, q). Pairs `i < j` are visited in
/// row-major order, one uniform draw each.
pub fn generate_sbm(truth: &LabelVector, params: &SbmParams, seed: u64) -> Result<AdjacencyMatrix> {
    let n = params.n();
    if truth.len() != n {
        return Err(Error::invalid(format!(
            "truth has length {}, params.n = {n}",
            truth.len()
        )));
    }
    if !truth.is_balanced() {
        return Err(Error::invalid("truth vector is not balanced"));
    }
    let mut rng = rng_from_seed(seed);
    let mut a = AdjacencyMatrix::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let prob = if truth.get(i) == truth.get(j) {
                params.p()
            } else {
                params.q()
            };
            if rng.random::<f64>() < prob {
                a.set(i, j, true);
            }
        }
    }
    Ok(a)
}

/// Graph Laplacian `D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(SymMatrix);

impl Laplacian {
    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.0
    }

    pub fn max_degree(&self) -> f64 {
        (0..self.n()).map(|i| self.0.get(i, i)).fold(0.0, f64::max)
    }
}

pub fn laplacian(a: &AdjacencyMatrix) -> Laplacian {
    let n = a.n();
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if a.has_edge(i, j) {
                m.set_sym(i, j, -1.0);
            }
        }
        m.set_sym(i, i, a.degree(i) as f64);
    }
    Laplacian(m)
}

/// `B = M - rho * 11^T` with `rho` the mean entry of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredAdjacency {
    rho: f64,
    matrix: SymMatrix,
}

impl CenteredAdjacency {
    /// Centers an arbitrary symmetric matrix (used for noisy releases of `A`).
    pub fn from_matrix(m: &SymMatrix) -> Self {
        let n = m.n();
        let rho = if n == 0 {
            0.0
        } else {
            m.total_sum() / (n * n) as f64
        };
        let data = m.as_slice().iter().map(|v| v - rho).collect();
        Self {
            rho,
            matrix: SymMatrix::from_row_major(n, data).expect("centering preserves symmetry"),
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }
}

pub fn centered_adjacency(a: &AdjacencyMatrix) -> CenteredAdjacency {
    let n = a.n();
    // rho is an exact rational; compute it from the integer sum.
    let rho = if n == 0 {
        0.0
    } else {
        (2 * a.edge_count()) as f64 / (n * n) as f64
    };
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        data.extend(a.row(i).iter().map(|&b| f64::from(b) - rho));
    }
    CenteredAdjacency {
        rho,
        matrix: SymMatrix::from_row_major(n, data).expect("centering preserves symmetry"),
    }
}
