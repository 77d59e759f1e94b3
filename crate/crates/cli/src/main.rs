use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use edgedp_spectral::accounting::{delta_of_epsilon, sigma_basic, sigma_for_budget, GaussAccountParams};
use edgedp_spectral::bounds::{
    converse_min_n, npi_distance_bound, overlap_lower_bound, rr_distance_bound, rr_separation_ok,
    spectral_gap_bound, subsample_distance_bound, AccuracyTarget, BoundMechanism, PackingExponent,
    SbmLogScale, SubsampleVariance, UniversalConstants,
};
use edgedp_spectral::experiment::{
    run_dataset, run_sweep, write_csv, DatasetSpec, DatasetVariant, DeltaRule, MechanismKind,
    SweepRecord, SweepSpec,
};
use edgedp_spectral::mechanisms::{Aggregator, Sensitivity, SubsampleConfig, DEFAULT_MAX_SUBGRAPHS};

#[derive(Parser)]
#[command(name = "edgedp", version, about = "Edge-private spectral community detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo overlap sweep on synthetic two-block SBMs.
    Sweep(SweepArgs),
    /// Overlap-vs-epsilon on a labeled edge-list dataset.
    Polblogs(PolblogsArgs),
    /// Gaussian noise calibration.
    Account(AccountArgs),
    /// Theoretical bounds.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaRuleArg {
    InverseSquare,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum SensitivityArg {
    Adaptive,
    WorstCase,
    Rigorous,
}

impl From<SensitivityArg> for Sensitivity {
    fn from(s: SensitivityArg) -> Self {
        match s {
            SensitivityArg::Adaptive => Sensitivity::Adaptive,
            SensitivityArg::WorstCase => Sensitivity::WorstCase,
            SensitivityArg::Rigorous => Sensitivity::Rigorous,
        }
    }
}

#[derive(Args)]
struct DeltaArgs {
    /// Fixed delta.
    #[arg(long, conflicts_with = "delta_rule")]
    delta: Option<f64>,
    /// `inverse-square` uses delta = 1/n^2.
    #[arg(long, value_enum)]
    delta_rule: Option<DeltaRuleArg>,
}

impl DeltaArgs {
    fn rule(&self) -> Result<DeltaRule, String> {
        match (self.delta, self.delta_rule) {
            (Some(d), _) => Ok(DeltaRule::Fixed(d)),
            (None, Some(DeltaRuleArg::Fixed)) => Err("--delta-rule fixed needs --delta".into()),
            _ => Ok(DeltaRule::InverseSquare),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep spec; grid flags are then not allowed.
    #[arg(long, conflicts_with_all = ["mechanism", "n", "eps", "p", "q", "trials"])]
    spec: Option<PathBuf>,
    /// Comma-separated: rr, subsample, npi, npi_init, nonprivate.
    #[arg(long, value_delimiter = ',')]
    mechanism: Vec<MechanismKind>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[command(flatten)]
    delta: DeltaArgs,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 8)]
    n_steps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `mode` or `majority`.
    #[arg(long, default_value = "mode")]
    aggregator: Aggregator,
    #[arg(long, value_enum, default_value = "adaptive")]
    sensitivity: SensitivityArg,
    #[arg(long, default_value_t = DEFAULT_MAX_SUBGRAPHS)]
    max_subgraphs: u64,
    #[arg(long, default_value_t = 0.01)]
    failure_prob: f64,
    #[arg(long)]
    workers: Option<usize>,
    /// Write 0 in the `seconds` column.
    #[arg(long)]
    no_timing: bool,
    /// Iteration cap for per-trial eigensolves (default 10n + 1000).
    #[arg(long)]
    max_solver_iters: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PolblogsArgs {
    /// Edge list, `u v [weight]` per line.
    #[arg(long)]
    edges: PathBuf,
    /// Labels, `node label` per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4,8,16")]
    eps: Vec<f64>,
    #[command(flatten)]
    delta: DeltaArgs,
    #[arg(long, default_value_t = 3)]
    n_steps: u32,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Comma-separated: private_init, fixed_init, graph_perturb.
    #[arg(long, value_delimiter = ',', default_value = "private_init,fixed_init,graph_perturb")]
    variants: Vec<DatasetVariant>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "adaptive")]
    sensitivity: SensitivityArg,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    no_timing: bool,
    /// Iteration cap for per-trial eigensolves (default 10n + 1000).
    #[arg(long)]
    max_solver_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AccountArgs {
    #[arg(long)]
    eps: f64,
    /// Target delta; prints the calibrated sigma.
    #[arg(long, required_unless_present = "sigma", conflicts_with = "sigma")]
    delta: Option<f64>,
    /// Noise ratio; prints delta(eps).
    #[arg(long)]
    sigma: Option<f64>,
    /// Number of composed Gaussian releases.
    #[arg(long, default_value_t = 1)]
    n_steps: u32,
}

#[derive(Args)]
struct BoundsArgs {
    /// Print only the converse minimum n.
    #[arg(long)]
    converse: bool,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    /// Error-rate budget for the converse bound.
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Failure probability.
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    /// Use the packing exponent ln(1/(8 e^beta)) instead of ln(1/(8 e beta)).
    #[arg(long)]
    printed_exponent: bool,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    delta: DeltaArgs,
    #[arg(long, default_value_t = 8)]
    n_steps: u32,
    /// Universal constant override applied to every constant.
    #[arg(long)]
    constant: Option<f64>,
    /// Emit `quantity,value` CSV instead of a table.
    #[arg(long)]
    csv: bool,
}

type CliResult<T> = Result<T, String>;

fn txt(r: edgedp_spectral::Result<f64>) -> CliResult<f64> {
    r.map_err(|e| e.to_string())
}

fn emit(records: &[SweepRecord], out: &Option<PathBuf>) -> CliResult<()> {
    // With --out the library already wrote the file.
    if out.is_none() {
        write_csv(records, std::io::stdout().lock()).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> CliResult<()> {
    let mut spec = match &args.spec {
        Some(path) => SweepSpec::from_json_file(path).map_err(|e| e.to_string())?,
        None => {
            let (p, q) = match (args.p, args.q) {
                (Some(p), Some(q)) => (p, q),
                _ => return Err("--p and --q are required without --spec".into()),
            };
            if args.mechanism.is_empty() || args.n.is_empty() || args.eps.is_empty() {
                return Err("--mechanism, --n and --eps are required without --spec".into());
            }
            let mut s = SweepSpec::new(args.mechanism.clone(), args.eps.clone(), args.n.clone(), p, q);
            s.delta = args.delta.rule()?;
            s.trials = args.trials.unwrap_or(100);
            s.n_steps = args.n_steps;
            s.seed = args.seed;
            s.aggregator = args.aggregator;
            s.sensitivity = args.sensitivity.into();
            s.max_subgraphs = args.max_subgraphs;
            s.failure_prob = args.failure_prob;
            s
        }
    };
    if args.out.is_some() {
        spec.out = args.out.clone();
    }
    if args.workers.is_some() {
        spec.workers = args.workers;
    }
    if args.no_timing {
        spec.timing = false;
    }
    if args.max_solver_iters.is_some() {
        spec.max_solver_iters = args.max_solver_iters;
    }
    let records = run_sweep(&spec).map_err(|e| e.to_string())?;
    emit(&records, &spec.out)
}

fn polblogs(args: PolblogsArgs) -> CliResult<()> {
    let mut spec = DatasetSpec::new(args.edges, args.labels, args.eps);
    spec.delta = args.delta.rule()?;
    spec.n_steps = args.n_steps;
    spec.trials = args.trials;
    spec.variants = args.variants;
    spec.seed = args.seed;
    spec.sensitivity = args.sensitivity.into();
    spec.workers = args.workers;
    spec.out = args.out.clone();
    spec.timing = !args.no_timing;
    spec.max_solver_iters = args.max_solver_iters;
    let records = run_dataset(&spec).map_err(|e| e.to_string())?;
    emit(&records, &args.out)
}

fn account(args: AccountArgs) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    let io = |e: std::io::Error| e.to_string();
    match (args.delta, args.sigma) {
        (Some(delta), _) => {
            let tight = sigma_for_budget(args.eps, delta, args.n_steps).map_err(|e| e.to_string())?;
            let basic = sigma_basic(args.eps, delta, args.n_steps).map_err(|e| e.to_string())?;
            writeln!(out, "sigma {tight}").map_err(io)?;
            writeln!(out, "sigma_basic {basic}").map_err(io)?;
        }
        (None, Some(sigma)) => {
            let params = GaussAccountParams::new(sigma, args.n_steps).map_err(|e| e.to_string())?;
            let delta = delta_of_epsilon(args.eps, &params).map_err(|e| e.to_string())?;
            writeln!(out, "delta {delta}").map_err(io)?;
        }
        (None, None) => unreachable!("clap requires --delta or --sigma"),
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> CliResult<()> {
    let packing = if args.printed_exponent {
        PackingExponent::Printed
    } else {
        PackingExponent::Derived
    };
    let target = AccuracyTarget::new(args.beta, args.eta).map_err(|e| e.to_string())?;
    let converse = converse_min_n(&target, args.eps, args.p, args.q, packing);
    if args.converse {
        let n = converse.map_err(|e| e.to_string())?;
        println!("{n}");
        return Ok(());
    }

    let n = args.n.ok_or("--n is required for the bound table")?;
    let mut consts = UniversalConstants::default();
    if let Some(c) = args.constant {
        consts = UniversalConstants {
            c_laplacian: c,
            c_rr: c,
            c_sub: c,
            c1: c,
            c2: c,
            c_vote: c,
        };
    }
    consts.validate().map_err(|e| e.to_string())?;
    let delta = args.delta.rule()?.delta(n);
    let (p, q, eps, eta) = (args.p, args.q, args.eps, args.eta);

    let mut rows: Vec<(String, String)> = Vec::new();
    let mut push = |name: &str, v: Result<f64, String>| {
        let value = match v {
            Ok(x) => x.to_string(),
            Err(e) => format!("n/a ({e})"),
        };
        rows.push((name.to_string(), value));
    };
    push("constant", Ok(consts.c1));
    push("delta", Ok(delta));
    push("converse_min_n", txt(converse));
    let rr = txt(rr_distance_bound(n, p, q, eps, eta));
    push("rr_distance", rr.clone());
    push(
        "rr_overlap_floor",
        rr.and_then(|c| txt(overlap_lower_bound(c, BoundMechanism::Rr, None, &consts))),
    );
    match rr_separation_ok(n, p, q, eps, eta, &consts) {
        Ok(s) => {
            push("rr_separation_margin", Ok(s.margin));
            push("rr_separation_ok", Ok(if s.satisfied { 1.0 } else { 0.0 }));
        }
        Err(e) => push("rr_separation_margin", Err(e.to_string())),
    }
    match SubsampleConfig::new(n, eps, delta, u64::MAX) {
        Ok(cfg) => {
            let half = (n / 2) as f64;
            let inter = half * half * q;
            let total = half * (half - 1.0) * p + inter;
            let eta_sub = eta / (3.0 * cfg.m() as f64);
            push("subsample_q_s", Ok(cfg.q_s()));
            push("subsample_m", Ok(cfg.m() as f64));
            let d = txt(subsample_distance_bound(
                n,
                p,
                q,
                cfg.q_s(),
                total.round() as usize,
                inter.round() as usize,
                eta_sub,
                SubsampleVariance::InterEdges,
            ));
            push("subsample_distance", d.clone());
            push(
                "subsample_overlap_floor",
                d.and_then(|c| txt(overlap_lower_bound(c, BoundMechanism::Subsample, Some(cfg.m()), &consts))),
            );
        }
        Err(e) => push("subsample_m", Err(e.to_string())),
    }
    match sigma_for_budget(eps, delta, args.n_steps) {
        Ok(sigma) => {
            push("npi_sigma", Ok(sigma));
            let d = txt(npi_distance_bound(n, p, q, sigma, args.n_steps, eta, &consts));
            push("npi_distance", d.clone());
            push(
                "npi_overlap_floor",
                d.and_then(|c| txt(overlap_lower_bound(c, BoundMechanism::Npi, None, &consts))),
            );
        }
        Err(e) => push("npi_sigma", Err(e.to_string())),
    }
    match SbmLogScale::from_probabilities(n, p, q).and_then(|s| spectral_gap_bound(&s, n, &consts)) {
        Ok(g) => {
            push("gap_lambda1_lower", Ok(g.lambda1_lower));
            push("gap_rest_upper", Ok(g.rest_upper));
            push("gap_success_probability", Ok(g.success_probability));
            push("gap_reciprocal", Ok(g.gap_reciprocal));
        }
        Err(e) => push("gap_lambda1_lower", Err(e.to_string())),
    }

    let mut out = std::io::stdout().lock();
    let io = |e: std::io::Error| e.to_string();
    if args.csv {
        writeln!(out, "quantity,value").map_err(io)?;
        for (k, v) in &rows {
            if v.contains(',') {
                writeln!(out, "{k},\"{v}\"").map_err(io)?;
            } else {
                writeln!(out, "{k},{v}").map_err(io)?;
            }
        }
    } else {
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (k, v) in &rows {
            writeln!(out, "{k:<width$}  {v}").map_err(io)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Polblogs(a) => polblogs(a),
        Command::Account(a) => account(a),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
