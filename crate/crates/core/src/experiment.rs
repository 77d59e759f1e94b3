//! Monte-Carlo sweeps over synthetic SBMs and the labeled-dataset driver.
//!
//! Every trial draws a fresh graph and runs one mechanism, seeded by
//! `trial_seed(base, point, trial)`. Trials may run on a thread pool; results
//! are reduced in trial order, so output does not depend on the worker count.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accounting::sigma_for_budget;
use crate::bounds::{
    npi_distance_bound, overlap_lower_bound, rr_distance_bound, subsample_distance_bound,
    BoundMechanism, SubsampleVariance, UniversalConstants,
};
use crate::dataset::load_labeled_graph;
use crate::error::{Error, Result};
use crate::graph::{centered_adjacency, generate_sbm, AdjacencyMatrix, LabelVector, SbmParams};
use crate::mechanisms::{
    noisy_power_iteration, perturb_and_cluster, private_power_with_init, subsampling_stability,
    Aggregator, PrivacyBudget, Sensitivity, SubsampleConfig, DEFAULT_MAX_SUBGRAPHS,
};
use crate::rng::{derive_seed, trial_seed};
use crate::spectral::{
    accept_unconverged, dominant_eigenpair, labels_from_vector, overlap_rate, spectral_clustering,
    SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    /// Randomized response, then spectral clustering.
    Rr,
    /// Subsample-and-aggregate with a noisy stability test.
    Subsample,
    /// Noisy power method from a random start; `N`-fold Gaussian budget.
    Npi,
    /// Noisy power method from a privately released start; `(N+1)`-fold budget.
    NpiInit,
    /// Spectral clustering on the true graph.
    Nonprivate,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 5] = [
        MechanismKind::Rr,
        MechanismKind::Subsample,
        MechanismKind::Npi,
        MechanismKind::NpiInit,
        MechanismKind::Nonprivate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Rr => "rr",
            MechanismKind::Subsample => "subsample",
            MechanismKind::Npi => "npi",
            MechanismKind::NpiInit => "npi_init",
            MechanismKind::Nonprivate => "nonprivate",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MechanismKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown mechanism `{s}` (expected one of rr, subsample, npi, npi_init, nonprivate)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    Fixed(f64),
    /// `delta = 1/n^2`.
    InverseSquare,
}

impl DeltaRule {
    pub fn delta(&self, n: usize) -> f64 {
        match *self {
            DeltaRule::Fixed(d) => d,
            DeltaRule::InverseSquare => 1.0 / (n as f64 * n as f64),
        }
    }
}

fn default_n_steps() -> u32 {
    8
}

fn default_failure_prob() -> f64 {
    0.01
}

fn default_max_subgraphs() -> u64 {
    DEFAULT_MAX_SUBGRAPHS
}

fn default_true() -> bool {
    true
}

/// A sweep over `mechanisms x n x eps`. Deserializes from JSON with the same
/// field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mechanisms: Vec<MechanismKind>,
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    pub p: f64,
    pub q: f64,
    pub delta: DeltaRule,
    pub trials: usize,
    #[serde(default = "default_n_steps")]
    pub n_steps: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub aggregator: Aggregator,
    #[serde(default)]
    pub sensitivity: Sensitivity,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Thread count; `None` uses the global pool.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Failure probability used for the theoretical overlap floors.
    #[serde(default = "default_failure_prob")]
    pub failure_prob: f64,
    #[serde(default = "default_max_subgraphs")]
    pub max_subgraphs: u64,
    /// When false the `seconds` column is written as 0.
    #[serde(default = "default_true")]
    pub timing: bool,
    /// Iteration cap for the per-trial eigensolves; `None` keeps the solver
    /// default. Only the sign pattern of these solves is used.
    #[serde(default)]
    pub max_solver_iters: Option<usize>,
}

impl SweepSpec {
    pub fn new(mechanisms: Vec<MechanismKind>, eps: Vec<f64>, n: Vec<usize>, p: f64, q: f64) -> Self {
        Self {
            mechanisms,
            eps,
            n,
            p,
            q,
            delta: DeltaRule::InverseSquare,
            trials: 100,
            n_steps: default_n_steps(),
            seed: 0,
            aggregator: Aggregator::Mode,
            sensitivity: Sensitivity::Adaptive,
            out: None,
            workers: None,
            failure_prob: default_failure_prob(),
            max_subgraphs: default_max_subgraphs(),
            timing: true,
            max_solver_iters: None,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let spec: SweepSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.mechanisms.is_empty() || self.eps.is_empty() || self.n.is_empty() {
            return Err(Error::invalid("mechanism, eps and n lists must be non-empty"));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::invalid(format!("eps values must be positive, got {e}")));
        }
        if !(0.0 <= self.q && self.q <= self.p && self.p <= 1.0) {
            return Err(Error::invalid(format!(
                "need 0 <= q <= p <= 1, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        if let DeltaRule::Fixed(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::invalid(format!("delta must lie in (0, 1), got {d}")));
            }
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be >= 1"));
        }
        if self.max_solver_iters == Some(0) {
            return Err(Error::invalid("max_solver_iters must be >= 1"));
        }
        if !(self.failure_prob > 0.0 && self.failure_prob < 1.0) {
            return Err(Error::invalid("failure_prob must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// One CSV row. `status` is `ok`, `skipped: ...` or `failed: ...`; numeric
/// result fields are empty unless the point ran.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub mechanism: String,
    pub n: usize,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub trials: usize,
    pub mean_overlap: Option<f64>,
    pub stderr: Option<f64>,
    pub bottom_rate: Option<f64>,
    pub seconds: f64,
    pub status: String,
    #[serde(skip)]
    pub overlap_floor: Option<f64>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "mechanism",
    "n",
    "eps",
    "delta",
    "sigma",
    "trials",
    "mean_overlap",
    "stderr",
    "bottom_rate",
    "seconds",
    "status",
];

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

fn write_csv_file(records: &[SweepRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(records, std::io::BufWriter::new(file))
}

#[derive(Debug, Clone, Copy)]
struct TrialResult {
    overlap: f64,
    bottom: bool,
}

/// Everything about a grid point that does not depend on the trial.
#[derive(Debug, Clone)]
enum Plan {
    Rr { eps: f64 },
    Subsample(SubsampleConfig),
    Npi { sigma: f64 },
    NpiInit(PrivacyBudget),
    Nonprivate,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    kind: MechanismKind,
    n: usize,
    eps: f64,
    delta: f64,
}

/// Returns the plan and the value of the `sigma` column.
fn plan(spec: &SweepSpec, pt: &Point) -> Result<(Plan, f64)> {
    SbmParams::new(pt.n, spec.p, spec.q)?;
    match pt.kind {
        MechanismKind::Rr => Ok((Plan::Rr { eps: pt.eps }, 1.0 / (pt.eps.exp() + 1.0))),
        MechanismKind::Subsample => {
            let cfg = SubsampleConfig::new(pt.n, pt.eps, pt.delta, spec.max_subgraphs)?
                .with_aggregator(spec.aggregator);
            Ok((Plan::Subsample(cfg), cfg.laplace_scale()))
        }
        MechanismKind::Npi => {
            let sigma = sigma_for_budget(pt.eps, pt.delta, spec.n_steps)?;
            Ok((Plan::Npi { sigma }, sigma))
        }
        MechanismKind::NpiInit => {
            let budget = PrivacyBudget::new(pt.eps, pt.delta, spec.n_steps)?;
            let sigma = sigma_for_budget(pt.eps, pt.delta, spec.n_steps + 1)?;
            Ok((Plan::NpiInit(budget), sigma))
        }
        MechanismKind::Nonprivate => Ok((Plan::Nonprivate, 0.0)),
    }
}

fn run_trial(spec: &SweepSpec, n: usize, plan: &Plan, seed: u64) -> Result<TrialResult> {
    let truth = LabelVector::balanced(n)?;
    let graph = generate_sbm(&truth, &SbmParams::new(n, spec.p, spec.q)?, derive_seed(seed, 0))?;
    let mech_seed = derive_seed(seed, 1);
    let cfg = trial_solver(spec.max_solver_iters, derive_seed(seed, 2));
    let (labels, bottom) = match plan {
        Plan::Rr { eps } => (perturb_and_cluster(&graph, *eps, &cfg, mech_seed)?.labels, false),
        Plan::Subsample(sub) => {
            let out = subsampling_stability(&graph, sub, &cfg, mech_seed)?;
            (out.labels, out.bottom)
        }
        Plan::Npi { sigma } => {
            let out = noisy_power_iteration(&graph, *sigma, spec.n_steps, spec.sensitivity, mech_seed, None)?;
            (out.labels, false)
        }
        Plan::NpiInit(budget) => {
            (private_power_with_init(&graph, budget, spec.sensitivity, &cfg, mech_seed)?.labels, false)
        }
        Plan::Nonprivate => (spectral_clustering(&graph, &cfg)?.labels, false),
    };
    Ok(TrialResult {
        overlap: overlap_rate(&labels, &truth)?,
        bottom,
    })
}

fn trial_solver(max_iters: Option<usize>, seed: u64) -> SolverConfig {
    SolverConfig {
        max_iters,
        ..SolverConfig::default()
    }
    .with_seed(seed)
}

/// `(mean, sample standard deviation / sqrt(k))`, summed in index order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Resource(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Theoretical overlap floor with default constants, when the bound applies.
fn overlap_floor(spec: &SweepSpec, pt: &Point, plan: &Plan) -> Option<f64> {
    let consts = UniversalConstants::default();
    let eta = spec.failure_prob;
    let (n, p, q) = (pt.n, spec.p, spec.q);
    let floor = match plan {
        Plan::Rr { eps } => rr_distance_bound(n, p, q, *eps, eta)
            .and_then(|c| overlap_lower_bound(c, BoundMechanism::Rr, None, &consts)),
        Plan::Subsample(cfg) => {
            // Expected edge counts; the failure budget is split as 3 m eta.
            let half = (n / 2) as f64;
            let inter = half * half * q;
            let total = 2.0 * half * (half - 1.0) / 2.0 * p + inter;
            let eta = eta / (3.0 * cfg.m() as f64);
            subsample_distance_bound(
                n,
                p,
                q,
                cfg.q_s(),
                total.round() as usize,
                inter.round() as usize,
                eta,
                SubsampleVariance::InterEdges,
            )
            .and_then(|c| overlap_lower_bound(c, BoundMechanism::Subsample, Some(cfg.m()), &consts))
        }
        Plan::Npi { sigma } => npi_distance_bound(n, p, q, *sigma, spec.n_steps, eta, &consts)
            .and_then(|c| overlap_lower_bound(c, BoundMechanism::Npi, None, &consts)),
        Plan::NpiInit(_) | Plan::Nonprivate => return None,
    };
    floor.ok()
}

/// Runs every grid point and writes the CSV to `spec.out` when set.
/// Infeasible points become rows with a `skipped` status.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let mut points = Vec::new();
    for &kind in &spec.mechanisms {
        for &n in &spec.n {
            for &eps in &spec.eps {
                points.push(Point {
                    kind,
                    n,
                    eps,
                    delta: spec.delta.delta(n),
                });
            }
        }
    }

    let mut seen = HashSet::new();
    for point in 0..points.len() as u64 {
        for trial in 0..spec.trials as u64 {
            if !seen.insert(trial_seed(spec.seed, point, trial)) {
                return Err(Error::invalid(format!(
                    "trial seed collision at point {point}, trial {trial}"
                )));
            }
        }
    }

    let mut records = Vec::with_capacity(points.len());
    for (idx, pt) in points.iter().enumerate() {
        let started = Instant::now();
        let mut rec = SweepRecord {
            mechanism: pt.kind.name().to_string(),
            n: pt.n,
            eps: Some(pt.eps),
            delta: Some(pt.delta),
            sigma: None,
            trials: spec.trials,
            mean_overlap: None,
            stderr: None,
            bottom_rate: None,
            seconds: 0.0,
            status: String::new(),
            overlap_floor: None,
        };
        let (plan, sigma) = match plan(spec, pt) {
            Ok(v) => v,
            Err(e) => {
                rec.status = format!("skipped: {e}");
                records.push(rec);
                continue;
            }
        };
        rec.sigma = Some(sigma);
        let results: Vec<Result<TrialResult>> = with_pool(spec.workers, || {
            (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(spec, pt.n, &plan, trial_seed(spec.seed, idx as u64, t as u64)))
                .collect()
        })?;
        match results.into_iter().collect::<Result<Vec<_>>>() {
            Ok(trials) => {
                let overlaps: Vec<f64> = trials.iter().map(|t| t.overlap).collect();
                let (mean, se) = mean_and_stderr(&overlaps);
                rec.mean_overlap = Some(mean);
                rec.stderr = Some(se);
                rec.bottom_rate = Some(trials.iter().filter(|t| t.bottom).count() as f64 / spec.trials as f64);
                rec.status = "ok".into();
                rec.overlap_floor = overlap_floor(spec, pt, &plan);
                if let Some(floor) = rec.overlap_floor {
                    if floor > mean + 2.0 * se {
                        eprintln!(
                            "warning: {} n={} eps={}: overlap floor {floor} exceeds measured {mean} + 2 x {se}",
                            rec.mechanism, rec.n, pt.eps
                        );
                    }
                }
            }
            Err(e) => rec.status = format!("failed: {e}"),
        }
        if spec.timing {
            rec.seconds = started.elapsed().as_secs_f64();
        }
        records.push(rec);
    }

    if let Some(path) = &spec.out {
        write_csv_file(&records, path)?;
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetVariant {
    /// Noisy power method from a privately released start.
    PrivateInit,
    /// Noisy power method started at the noiseless leading eigenvector of B.
    FixedInit,
    /// Randomized response, then spectral clustering.
    GraphPerturb,
}

impl DatasetVariant {
    pub fn name(self) -> &'static str {
        match self {
            DatasetVariant::PrivateInit => "private_init",
            DatasetVariant::FixedInit => "fixed_init",
            DatasetVariant::GraphPerturb => "graph_perturb",
        }
    }
}

impl FromStr for DatasetVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "private_init" => Ok(DatasetVariant::PrivateInit),
            "fixed_init" => Ok(DatasetVariant::FixedInit),
            "graph_perturb" => Ok(DatasetVariant::GraphPerturb),
            other => Err(Error::invalid(format!(
                "unknown variant `{other}` (expected private_init, fixed_init or graph_perturb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub edges: PathBuf,
    pub labels: PathBuf,
    pub eps: Vec<f64>,
    pub delta: DeltaRule,
    pub n_steps: u32,
    pub trials: usize,
    pub variants: Vec<DatasetVariant>,
    pub seed: u64,
    pub sensitivity: Sensitivity,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub timing: bool,
    pub max_solver_iters: Option<usize>,
}

impl DatasetSpec {
    pub fn new(edges: impl Into<PathBuf>, labels: impl Into<PathBuf>, eps: Vec<f64>) -> Self {
        Self {
            edges: edges.into(),
            labels: labels.into(),
            eps,
            delta: DeltaRule::InverseSquare,
            n_steps: 3,
            trials: 100,
            variants: vec![
                DatasetVariant::PrivateInit,
                DatasetVariant::FixedInit,
                DatasetVariant::GraphPerturb,
            ],
            seed: 0,
            sensitivity: Sensitivity::Adaptive,
            workers: None,
            out: None,
            timing: true,
            max_solver_iters: None,
        }
    }
}

/// Labels from the leading eigenvector of the centered adjacency matrix:
/// the zero-noise limit of the power-method variants.
pub fn centered_spectral_labels(a: &AdjacencyMatrix, cfg: &SolverConfig) -> Result<(LabelVector, Vec<f64>)> {
    let b = centered_adjacency(a);
    let (sol, _) = accept_unconverged(dominant_eigenpair(b.matrix(), cfg))?;
    Ok((labels_from_vector(&sol.pair.vector)?, sol.pair.vector))
}

/// Runs the dataset comparison. The first row is the noiseless `baseline`.
pub fn run_dataset(spec: &DatasetSpec) -> Result<Vec<SweepRecord>> {
    if spec.trials == 0 || spec.eps.is_empty() || spec.variants.is_empty() {
        return Err(Error::invalid("need trials >= 1 and non-empty eps and variant lists"));
    }
    if spec.n_steps == 0 {
        return Err(Error::invalid("n_steps must be >= 1"));
    }
    if spec.max_solver_iters == Some(0) {
        return Err(Error::invalid("max_solver_iters must be >= 1"));
    }
    let (graph, truth) = load_labeled_graph(&spec.edges, &spec.labels, true)?;
    let n = graph.n();
    let cfg = SolverConfig::default().with_seed(derive_seed(spec.seed, u64::MAX));

    let started = Instant::now();
    let (baseline, init) = centered_spectral_labels(&graph, &cfg)?;
    let mut records = vec![SweepRecord {
        mechanism: "baseline".into(),
        n,
        eps: None,
        delta: None,
        sigma: Some(0.0),
        trials: 1,
        mean_overlap: Some(overlap_rate(&baseline, &truth)?),
        stderr: Some(0.0),
        bottom_rate: Some(0.0),
        seconds: if spec.timing { started.elapsed().as_secs_f64() } else { 0.0 },
        status: "ok".into(),
        overlap_floor: None,
    }];

    let mut point = 0u64;
    for &variant in &spec.variants {
        for &eps in &spec.eps {
            let started = Instant::now();
            let delta = spec.delta.delta(n);
            let sigma = match variant {
                DatasetVariant::PrivateInit => sigma_for_budget(eps, delta, spec.n_steps + 1),
                DatasetVariant::FixedInit => sigma_for_budget(eps, delta, spec.n_steps),
                DatasetVariant::GraphPerturb => Ok(1.0 / (eps.exp() + 1.0)),
            };
            let mut rec = SweepRecord {
                mechanism: variant.name().into(),
                n,
                eps: Some(eps),
                delta: (variant != DatasetVariant::GraphPerturb).then_some(delta),
                sigma: None,
                trials: spec.trials,
                mean_overlap: None,
                stderr: None,
                bottom_rate: None,
                seconds: 0.0,
                status: String::new(),
                overlap_floor: None,
            };
            let sigma = match sigma {
                Ok(s) => s,
                Err(e) => {
                    rec.status = format!("skipped: {e}");
                    records.push(rec);
                    point += 1;
                    continue;
                }
            };
            rec.sigma = Some(sigma);
            let run = |seed: u64| -> Result<f64> {
                let cfg = trial_solver(spec.max_solver_iters, derive_seed(seed, 2));
                let labels = match variant {
                    DatasetVariant::PrivateInit => {
                        let budget = PrivacyBudget::new(eps, delta, spec.n_steps)?;
                        private_power_with_init(&graph, &budget, spec.sensitivity, &cfg, seed)?.labels
                    }
                    DatasetVariant::FixedInit => {
                        noisy_power_iteration(&graph, sigma, spec.n_steps, spec.sensitivity, seed, Some(&init))?.labels
                    }
                    DatasetVariant::GraphPerturb => perturb_and_cluster(&graph, eps, &cfg, seed)?.labels,
                };
                overlap_rate(&labels, &truth)
            };
            let results: Vec<Result<f64>> = with_pool(spec.workers, || {
                (0..spec.trials)
                    .into_par_iter()
                    .map(|t| run(trial_seed(spec.seed, point, t as u64)))
                    .collect()
            })?;
            match results.into_iter().collect::<Result<Vec<_>>>() {
                Ok(overlaps) => {
                    let (mean, se) = mean_and_stderr(&overlaps);
                    rec.mean_overlap = Some(mean);
                    rec.stderr = Some(se);
                    rec.bottom_rate = Some(0.0);
                    rec.status = "ok".into();
                }
                Err(e) => rec.status = format!("failed: {e}"),
            }
            if spec.timing {
                rec.seconds = started.elapsed().as_secs_f64();
            }
            records.push(rec);
            point += 1;
        }
    }

    if let Some(path) = &spec.out {
        write_csv_file(&records, path)?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke() -> SweepSpec {
        let mut s = SweepSpec::new(vec![MechanismKind::Rr], vec![1.0], vec![50], 0.3, 0.05);
        s.trials = 10;
        s
    }

    #[test]
    fn smoke_sweep_yields_one_row() {
        let rec = run_sweep(&smoke()).unwrap();
        assert_eq!(rec.len(), 1);
        assert!(rec[0].is_ok());
        let m = rec[0].mean_overlap.unwrap();
        assert!((0.0..=1.0).contains(&m));
        assert_eq!(rec[0].sigma, Some(1.0 / (1f64.exp() + 1.0)));
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let mut s = SweepSpec::new(
            vec![MechanismKind::Subsample, MechanismKind::Npi],
            vec![1.0],
            vec![51, 200],
            0.2,
            0.02,
        );
        s.trials = 2;
        s.max_subgraphs = 10;
        let rec = run_sweep(&s).unwrap();
        assert_eq!(rec.len(), 4);
        // Odd n is rejected by the SBM; the subgraph cap stops subsampling at n = 200.
        assert!(rec[0].status.starts_with("skipped"));
        assert!(rec[1].status.starts_with("skipped"));
        assert!(rec[2].status.starts_with("skipped"));
        assert!(rec[3].is_ok());
    }

    #[test]
    fn spec_validation() {
        let mut s = smoke();
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = smoke();
        s.eps = vec![0.0];
        assert!(s.validate().is_err());
        let mut s = smoke();
        s.q = 0.5;
        assert!(s.validate().is_err());
        let mut s = smoke();
        s.delta = DeltaRule::Fixed(1.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"mechanisms": ["rr", "npi_init"], "eps": [0.5, 1], "n": [100],
            "p": 0.2, "q": 0.02, "delta": {"fixed": 1e-6}, "trials": 3}"#;
        let s: SweepSpec = serde_json::from_str(json).unwrap();
        assert_eq!(s.mechanisms, vec![MechanismKind::Rr, MechanismKind::NpiInit]);
        assert_eq!(s.delta, DeltaRule::Fixed(1e-6));
        assert_eq!(s.n_steps, 8);
        assert!(s.timing);
        let back: SweepSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let inv: SweepSpec = serde_json::from_str(
            r#"{"mechanisms": ["npi"], "eps": [1], "n": [10], "p": 0.5, "q": 0.1,
                "delta": "inverse_square", "trials": 1}"#,
        )
        .unwrap();
        assert_eq!(inv.delta.delta(10), 0.01);
        assert!(serde_json::from_str::<SweepSpec>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn stderr_formula() {
        let (m, se) = mean_and_stderr(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(m, 0.5);
        assert!((se - (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn csv_header_and_empty_fields() {
        let mut s = smoke();
        s.timing = false;
        s.mechanisms.push(MechanismKind::Subsample);
        s.max_subgraphs = 1;
        let rec = run_sweep(&s).unwrap();
        let mut buf = Vec::new();
        write_csv(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row = lines.next().unwrap();
        assert!(row.starts_with("rr,50,1.0,0.0004,0.2689414213699951,10,"), "{row}");
        assert!(row.ends_with(",0.0,ok"), "{row}");
        let skipped = lines.next().unwrap();
        assert!(skipped.starts_with("subsample,50,1.0,0.0004,,10,,,,0.0,\"skipped: resource limit"), "{skipped}");
    }

    #[test]
    fn mechanism_names_parse() {
        for m in MechanismKind::ALL {
            assert_eq!(m.name().parse::<MechanismKind>().unwrap(), m);
        }
        assert!("ppi".parse::<MechanismKind>().is_err());
        assert_eq!("fixed_init".parse::<DatasetVariant>().unwrap(), DatasetVariant::FixedInit);
    }
}
