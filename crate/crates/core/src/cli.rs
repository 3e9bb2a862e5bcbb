//! Command-line front end: subcommand routing, JSON run configs, CSV/JSON
//! emission and run manifests.
//!
//! Every invocation is reduced to a [`RunConfig`]. A run that writes its
//! results to a file also writes `<file>.manifest.json`, which echoes the
//! config; passing that manifest back through `--config` reproduces the
//! results byte for byte.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::{fmt_f64, Dataset};
use crate::dgp::DgpSpec;
use crate::dist::{joint_distance_bound, joint_distance_exact, marginal_distance, Metric, MAX_EXACT_K};
use crate::error::{invalid, Error, Result};
use crate::ios::{extract, extract_ranked, extract_two_sided, IosResult};
use crate::knn::{normality_diagnostic, Statistic};
use crate::rates::{
    growth_threshold_study, joint_rate_fit, log_correction_profile, log_grid, marginal_rate_fit, schedule, Engine,
    RateRow, TAU_CLOSED_FORM, TAU_MIXTURE,
};
use crate::rdd::{permutation_test, q_rule, size_power_simulation_with, PermSettings};

/// Environment variable naming the directory for results when `--out` is
/// not given.
pub const OUT_DIR_ENV: &str = "IOS_RATES_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ios-rates", version, about = "Induced order statistics: distances, rates, RDD tests and k-NN diagnostics")]
struct Cli {
    /// Run config (or a manifest written by an earlier run) instead of a subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Results file; a manifest is written next to it.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of every random stream used by the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the slope tolerance of rate fits.
    #[arg(long = "tol", global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Option<Command>,
}

/// A fully resolved invocation. Round-trips through JSON; unknown fields are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Registered data-generating processes.
    #[command(subcommand)]
    Specs(SpecsCommand),
    /// Induced order statistics of a dataset.
    #[command(subcommand)]
    Ios(IosCommand),
    /// Marginal and joint distances.
    #[command(subcommand)]
    Dist(DistCommand),
    /// Rate fits and the growth threshold study.
    #[command(subcommand)]
    Rates(RatesCommand),
    /// Covariate-balance permutation test at a cutoff.
    #[command(subcommand)]
    Rdd(RddCommand),
    /// Nearest-neighbour estimators and their normal approximation.
    #[command(subcommand)]
    Knn(KnnCommand),
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecsCommand {
    /// Registry ids, one per line.
    List,
    /// JSON document of one spec.
    Show(SpecArg),
    /// CSV sample of `n` draws.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecArg {
    #[arg(long)]
    pub spec: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IosCommand {
    /// `S_n`, `ι_n` (1-based) and `R_(k+1)` for the `k` nearest points to `x0`.
    Extract(ExtractArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x0: Vec<f64>,
    #[arg(long)]
    pub k: usize,
    /// Also emit the full rank map `σ_n`.
    #[arg(long)]
    #[serde(default)]
    pub ranks: bool,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistCommand {
    /// `d(P_r, P)`.
    Marginal(MarginalDistArgs),
    /// `d(L(S_n), P^k)`.
    Joint(JointDistArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalDistArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub r: f64,
    #[arg(long, value_enum, default_value_t = Metric::Hellinger)]
    #[serde(default = "default_metric")]
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDistArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Metric::Hellinger)]
    #[serde(default = "default_metric")]
    pub metric: Metric,
    /// Exact count-reduced integral (discrete outcomes).
    #[arg(long, conflicts_with = "bound")]
    #[serde(default)]
    pub exact: bool,
    /// Tensorised upper bound.
    #[arg(long)]
    #[serde(default)]
    pub bound: bool,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatesCommand {
    /// Marginal distances over a radius grid and their log-log slope (CSV).
    Marginal(MarginalRateArgs),
    /// Joint distances along `k = ⌊c n^γ⌋` against the predicted rate (CSV).
    Joint(JointRateArgs),
    /// Joint distances for several growth exponents (CSV).
    Threshold(ThresholdArgs),
    /// Log-corrected TV profile of the log-correction family (JSON).
    LogProfile(LogProfileArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalRateArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_enum, default_value_t = Metric::Hellinger)]
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[arg(long, default_value_t = 13)]
    #[serde(default = "default_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointRateArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_enum, default_value_t = Metric::Hellinger)]
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_c")]
    pub c: f64,
    /// Smallest `n` is `2^n_min_exp`.
    #[arg(long, default_value_t = 9)]
    #[serde(default = "default_joint_min_exp")]
    pub n_min_exp: u32,
    #[arg(long, default_value_t = 15)]
    #[serde(default = "default_joint_max_exp")]
    pub n_max_exp: u32,
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    #[serde(default = "default_engine")]
    pub engine: Engine,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_enum, default_value_t = Metric::Hellinger)]
    #[serde(default = "default_metric")]
    pub metric: Metric,
    /// Comma-separated growth exponents.
    #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.55, 0.8])]
    #[serde(default = "default_gammas")]
    pub gamma: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    #[serde(default = "default_threshold_min_exp")]
    pub n_min_exp: u32,
    #[arg(long, default_value_t = 24)]
    #[serde(default = "default_threshold_max_exp")]
    pub n_max_exp: u32,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogProfileArgs {
    #[arg(long, default_value = "log_correction")]
    #[serde(default = "default_log_spec")]
    pub spec: String,
    /// Smallest radius is `e^{-l_max}`.
    #[arg(long, default_value_t = 12.0)]
    #[serde(default = "default_l_max")]
    pub l_max: f64,
    #[arg(long, default_value_t = 4.0)]
    #[serde(default = "default_l_min")]
    pub l_min: f64,
    #[arg(long, default_value_t = 17)]
    #[serde(default = "default_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RddCommand {
    /// Permutation test on a dataset (JSON).
    Test(RddTestArgs),
    /// Size or power simulation (CSV rep,statistic,p).
    Simulate(RddSimulateArgs),
}

/// How `S_n` is assembled from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// `q` nearest strictly left of the cutoff, then `q` nearest strictly right.
    TwoSided,
    /// `2q` nearest to the cutoff in sample order, split into first and second half.
    Halves,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RddTestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    #[serde(default)]
    pub cutoff: f64,
    /// Neighbours per side; overrides the `q = ⌊c n^γ⌋` rule.
    #[arg(long, conflicts_with = "gamma")]
    #[serde(default)]
    pub q: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_c")]
    pub c: f64,
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[arg(long, default_value_t = crate::rdd::DEFAULT_MAX_EXACT)]
    #[serde(default = "default_exact_max")]
    pub exact_max: u64,
    #[arg(long, default_value_t = crate::rdd::DEFAULT_N_RANDOM)]
    #[serde(default = "default_perms")]
    pub perms: usize,
    #[arg(long, value_enum, default_value_t = Layout::TwoSided)]
    #[serde(default = "default_layout")]
    pub layout: Layout,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RddSimulateArgs {
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub right: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_c")]
    pub c: f64,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[arg(long, default_value_t = crate::rdd::DEFAULT_MAX_EXACT)]
    #[serde(default = "default_exact_max")]
    pub exact_max: u64,
    #[arg(long, default_value_t = crate::rdd::DEFAULT_N_RANDOM)]
    #[serde(default = "default_perms")]
    pub perms: usize,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnCommand {
    /// `ψ(S_n)` on a dataset (JSON).
    Estimate(KnnEstimateArgs),
    /// KS distance of the standardised estimator to `N(0, 1)` (JSON).
    Normality(KnnNormalityArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnEstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x0: Vec<f64>,
    #[arg(long)]
    pub k: usize,
    /// `mean`, `cdf:<t>` or `quantile:<tau>`.
    #[arg(long, default_value = "mean")]
    #[serde(default = "default_stat")]
    pub stat: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnNormalityArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub n: usize,
    /// `k = ⌊n^γ⌋`.
    #[arg(long, conflicts_with = "k")]
    #[serde(default)]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// `mean` or `cdf:<t>`.
    #[arg(long, default_value = "mean")]
    #[serde(default = "default_stat")]
    pub stat: String,
    /// Keep the standardised draws in the report.
    #[arg(long)]
    #[serde(default)]
    pub keep_draws: bool,
}

fn default_metric() -> Metric {
    Metric::Hellinger
}
fn default_r_min() -> f64 {
    1e-3
}
fn default_r_max() -> f64 {
    1e-1
}
fn default_points() -> usize {
    13
}
fn default_gamma() -> f64 {
    0.5
}
fn default_c() -> f64 {
    1.0
}
fn default_joint_min_exp() -> u32 {
    9
}
fn default_joint_max_exp() -> u32 {
    15
}
fn default_engine() -> Engine {
    Engine::Exact
}
fn default_gammas() -> Vec<f64> {
    vec![0.4, 0.55, 0.8]
}
fn default_threshold_min_exp() -> u32 {
    3
}
fn default_threshold_max_exp() -> u32 {
    24
}
fn default_log_spec() -> String {
    "log_correction".into()
}
fn default_l_max() -> f64 {
    12.0
}
fn default_l_min() -> f64 {
    4.0
}
fn default_alpha() -> f64 {
    0.05
}
fn default_exact_max() -> u64 {
    crate::rdd::DEFAULT_MAX_EXACT
}
fn default_perms() -> usize {
    crate::rdd::DEFAULT_N_RANDOM
}
fn default_layout() -> Layout {
    Layout::TwoSided
}
fn default_reps() -> usize {
    1000
}
fn default_stat() -> String {
    "mean".into()
}

/// Results of one command: the payload and a short summary for the
/// manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: Body,
    pub summary: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Json(Value),
    Csv(String),
    Text(String),
}

impl Body {
    fn render(&self) -> Result<String> {
        Ok(match self {
            Body::Json(v) => serde_json::to_string_pretty(v)? + "\n",
            Body::Csv(s) | Body::Text(s) => s.clone(),
        })
    }

    fn extension(&self) -> &'static str {
        match self {
            Body::Json(_) => "json",
            Body::Csv(_) => "csv",
            Body::Text(_) => "txt",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub threads: usize,
    pub output: PathBuf,
    pub output_bytes: usize,
    pub wall_time_seconds: f64,
    pub summary: Value,
}

/// Path of the manifest written next to `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

impl Command {
    /// File name used when results go to the output directory.
    fn default_file_stem(&self) -> &'static str {
        match self {
            Command::Specs(SpecsCommand::List) => "specs-list",
            Command::Specs(SpecsCommand::Show(_)) => "specs-show",
            Command::Specs(SpecsCommand::Sample(_)) => "specs-sample",
            Command::Ios(IosCommand::Extract(_)) => "ios-extract",
            Command::Dist(DistCommand::Marginal(_)) => "dist-marginal",
            Command::Dist(DistCommand::Joint(_)) => "dist-joint",
            Command::Rates(RatesCommand::Marginal(_)) => "rates-marginal",
            Command::Rates(RatesCommand::Joint(_)) => "rates-joint",
            Command::Rates(RatesCommand::Threshold(_)) => "rates-threshold",
            Command::Rates(RatesCommand::LogProfile(_)) => "rates-log-profile",
            Command::Rdd(RddCommand::Test(_)) => "rdd-test",
            Command::Rdd(RddCommand::Simulate(_)) => "rdd-simulate",
            Command::Knn(KnnCommand::Estimate(_)) => "knn-estimate",
            Command::Knn(KnnCommand::Normality(_)) => "knn-normality",
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 on usage or validation errors, 1 on
/// runtime failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match resolve(cli).and_then(|cfg| execute_config(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() || matches!(e, Error::Json(_)) {
                2
            } else {
                1
            }
        }
    }
}

/// Reads a run config, or the `config` member of a manifest.
pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    let inner = match value.get("config") {
        Some(cfg) if value.get("tool").is_some() => cfg.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner)?)
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return invalid("give either --config or a subcommand, not both"),
        (None, None) => return invalid("missing subcommand; see --help"),
        (Some(path), None) => {
            let mut cfg = read_config(&path)?;
            if cli.seed.is_some() {
                return invalid("--seed cannot override a config file");
            }
            if cli.tolerance.is_some() {
                cfg.tolerance = cli.tolerance;
            }
            cfg
        }
        (None, Some(command)) => RunConfig {
            command,
            seed: cli.seed.unwrap_or(0),
            out: None,
            threads: None,
            tolerance: cli.tolerance,
        },
    };
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

/// Runs a config and writes its outputs: to the configured file, to the
/// output directory from the environment, or to stdout.
pub fn execute_config(cfg: &RunConfig) -> Result<()> {
    let threads = match cfg.threads {
        Some(0) => return invalid("--threads must be at least 1"),
        Some(t) => t,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| execute(cfg))?;
    let wall = start.elapsed().as_secs_f64();
    let text = outcome.body.render()?;
    let out = match (&cfg.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => {
            Some(PathBuf::from(dir).join(format!("{}.{}", cfg.command.default_file_stem(), outcome.body.extension())))
        }
        (None, None) => None,
    };
    let Some(out) = out else {
        print!("{text}");
        return Ok(());
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&out, &text)?;
    let mut echoed = cfg.clone();
    echoed.out = Some(out.clone());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: echoed,
        seed: cfg.seed,
        threads,
        output: out.clone(),
        output_bytes: text.len(),
        wall_time_seconds: wall,
        summary: outcome.summary,
    };
    let mpath = manifest_path(&out);
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)? + "\n")?;
    eprintln!("wrote {} and {}", out.display(), mpath.display());
    Ok(())
}

/// Runs the command of `cfg` on the current rayon pool.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.seed;
    match &cfg.command {
        Command::Specs(cmd) => specs(cmd, seed),
        Command::Ios(IosCommand::Extract(a)) => ios_extract(a),
        Command::Dist(cmd) => dist(cmd),
        Command::Rates(cmd) => rates(cmd, cfg.tolerance),
        Command::Rdd(cmd) => rdd(cmd, seed),
        Command::Knn(cmd) => knn(cmd, seed),
    }
}

fn no_summary(body: Body) -> Outcome {
    Outcome { body, summary: Value::Null }
}

fn specs(cmd: &SpecsCommand, seed: u64) -> Result<Outcome> {
    match cmd {
        SpecsCommand::List => {
            let ids: String = DgpSpec::registry().iter().map(|s| s.id.clone() + "\n").collect();
            Ok(no_summary(Body::Text(ids)))
        }
        SpecsCommand::Show(a) => {
            let spec = DgpSpec::by_id(&a.spec)?;
            Ok(no_summary(Body::Json(serde_json::to_value(spec.to_document())?)))
        }
        SpecsCommand::Sample(a) => {
            let data = DgpSpec::by_id(&a.spec)?.sample(a.n, seed)?;
            let mut buf = Vec::new();
            data.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).map_err(|e| Error::Numerical(e.to_string()))?;
            Ok(Outcome { body: Body::Csv(text), summary: json!({ "n": a.n, "spec": a.spec }) })
        }
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// `s_n` as a flat list for scalar outcomes, as rows otherwise.
fn s_n_value(res: &IosResult) -> Value {
    if res.m == 1 {
        json!(res.s_n)
    } else {
        json!(res.s_n.chunks(res.m).collect::<Vec<_>>())
    }
}

fn ios_extract(a: &ExtractArgs) -> Result<Outcome> {
    let data = Dataset::read_csv_path(&a.input)?;
    let res = if a.ranks { extract_ranked(&data, &a.x0, a.k)? } else { extract(&data, &a.x0, a.k)? };
    let mut body = json!({
        "k": res.k,
        "s_n": s_n_value(&res),
        "iota": one_based(&res.iota),
        "nearest": one_based(&res.nearest),
        "r_k_plus_1": res.r_k_plus_1,
    });
    if let Some(r) = &res.ranks {
        body["ranks"] = json!(r);
    }
    Ok(no_summary(Body::Json(body)))
}

fn dist(cmd: &DistCommand) -> Result<Outcome> {
    let est = match cmd {
        DistCommand::Marginal(a) => marginal_distance(&DgpSpec::by_id(&a.spec)?, a.r, a.metric)?,
        DistCommand::Joint(a) => {
            let spec = DgpSpec::by_id(&a.spec)?;
            let exact = a.exact || (!a.bound && spec.is_discrete() && a.k <= MAX_EXACT_K);
            if exact {
                joint_distance_exact(&spec, a.n, a.k, a.metric)?
            } else {
                joint_distance_bound(&spec, a.n, a.k, a.metric)?
            }
        }
    };
    Ok(no_summary(Body::Json(serde_json::to_value(est)?)))
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with columns `scale,n,k,distance,err,method`.
fn rate_csv<'a>(rows: impl IntoIterator<Item = &'a RateRow>) -> String {
    let mut s = String::from("scale,n,k,distance,err,method\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(r.scale),
            opt_usize(r.n),
            opt_usize(r.k),
            fmt_f64(r.distance),
            fmt_f64(r.err),
            r.method
        );
    }
    s
}

fn n_grid(min_exp: u32, max_exp: u32) -> Result<Vec<usize>> {
    if min_exp > max_exp || max_exp > 40 {
        return invalid(format!("need n_min_exp ≤ n_max_exp ≤ 40, got {min_exp}..{max_exp}"));
    }
    Ok((min_exp..=max_exp).map(|e| 1usize << e).collect())
}

fn rates(cmd: &RatesCommand, tolerance: Option<f64>) -> Result<Outcome> {
    match cmd {
        RatesCommand::Marginal(a) => {
            let spec = DgpSpec::by_id(&a.spec)?;
            let grid = log_grid(a.r_min, a.r_max, a.points);
            let study = marginal_rate_fit(&spec, a.metric, &grid, tolerance.unwrap_or(TAU_CLOSED_FORM))?;
            Ok(Outcome { body: Body::Csv(rate_csv(&study.rows)), summary: serde_json::to_value(&study.fit)? })
        }
        RatesCommand::Joint(a) => {
            let spec = DgpSpec::by_id(&a.spec)?;
            let sched = schedule(&n_grid(a.n_min_exp, a.n_max_exp)?, a.gamma, a.c);
            let study = joint_rate_fit(&spec, a.metric, &sched, a.engine, tolerance.unwrap_or(TAU_MIXTURE))?;
            Ok(Outcome { body: Body::Csv(rate_csv(&study.rows)), summary: serde_json::to_value(&study.fit)? })
        }
        RatesCommand::Threshold(a) => {
            let spec = DgpSpec::by_id(&a.spec)?;
            let report = growth_threshold_study(&spec, a.metric, &a.gamma, &n_grid(a.n_min_exp, a.n_max_exp)?)?;
            let summary = json!({
                "threshold": report.threshold,
                "passed": report.passed,
                "series": report.series.iter().map(|s| json!({
                    "gamma": s.gamma, "vanishing": s.vanishing, "asserted": s.asserted
                })).collect::<Vec<_>>(),
            });
            let csv = rate_csv(report.series.iter().flat_map(|s| &s.rows));
            Ok(Outcome { body: Body::Csv(csv), summary })
        }
        RatesCommand::LogProfile(a) => {
            let spec = DgpSpec::by_id(&a.spec)?;
            let grid = log_grid((-a.l_max).exp(), (-a.l_min).exp(), a.points);
            let profile = log_correction_profile(&spec, &grid, &[0.05, 0.1])?;
            let summary = json!({ "bounded": profile.bounded, "lower_bound_holds": profile.lower_bound_holds });
            Ok(Outcome { body: Body::Json(serde_json::to_value(profile)?), summary })
        }
    }
}

fn rdd(cmd: &RddCommand, seed: u64) -> Result<Outcome> {
    match cmd {
        RddCommand::Test(a) => {
            let data = Dataset::read_csv_path(&a.input)?;
            let q = match (a.q, a.gamma) {
                (Some(q), _) => q,
                (None, Some(g)) => q_rule(data.n(), g, a.c),
                (None, None) => return invalid("give --q or --gamma"),
            };
            let s_n = match a.layout {
                Layout::TwoSided => extract_two_sided(&data, a.cutoff, q)?.s_n,
                Layout::Halves => {
                    if data.d() != 1 || data.m() != 1 {
                        return invalid("the halves layout needs d = 1 and a scalar outcome");
                    }
                    extract(&data, &[a.cutoff], 2 * q)?.s_n
                }
            };
            let res = permutation_test(&s_n, a.alpha, a.exact_max, a.perms, seed)?;
            let summary = json!({ "q": res.q, "p_value": res.p_value, "reject": res.reject });
            Ok(Outcome { body: Body::Json(serde_json::to_value(res)?), summary })
        }
        RddCommand::Simulate(a) => {
            let left = DgpSpec::by_id(&a.left)?;
            let right = DgpSpec::by_id(&a.right)?;
            let perms = PermSettings { max_exact: a.exact_max, n_random: a.perms };
            let rep = size_power_simulation_with(&left, &right, a.n, a.gamma, a.c, a.reps, a.alpha, seed, perms)?;
            let mut csv = String::from("rep,statistic,p\n");
            for r in &rep.rows {
                let _ = writeln!(csv, "{},{},{}", r.rep, fmt_f64(r.statistic), fmt_f64(r.p_value));
            }
            info!("rejection rate {} (se {})", rep.rejection_rate, rep.std_error);
            let summary = json!({
                "q": rep.q,
                "rejection_rate": rep.rejection_rate,
                "std_error": rep.std_error,
                "dropped": rep.dropped,
            });
            Ok(Outcome { body: Body::Csv(csv), summary })
        }
    }
}

fn knn(cmd: &KnnCommand, seed: u64) -> Result<Outcome> {
    match cmd {
        KnnCommand::Estimate(a) => {
            let stat: Statistic = a.stat.parse()?;
            let data = Dataset::read_csv_path(&a.input)?;
            let res = extract(&data, &a.x0, a.k)?;
            let estimate = stat.evaluate(&res.s_n, res.m)?;
            let body = json!({
                "statistic": stat.to_string(),
                "k": res.k,
                "estimate": estimate,
                "iota": one_based(&res.iota),
            });
            Ok(no_summary(Body::Json(body)))
        }
        KnnCommand::Normality(a) => {
            let stat: Statistic = a.stat.parse()?;
            let spec = DgpSpec::by_id(&a.spec)?;
            let k = match (a.k, a.gamma) {
                (Some(k), _) => k,
                (None, Some(g)) => ((a.n as f64).powf(g).floor() as usize).max(1),
                (None, None) => return invalid("give --k or --gamma"),
            };
            let mut report = normality_diagnostic(&spec, stat, a.n, k, a.reps, seed)?;
            if !a.keep_draws {
                report.standardized_draws = None;
            }
            let summary = json!({ "k": k, "ks_distance": report.ks_distance, "budget": report.budget });
            Ok(Outcome { body: Body::Json(serde_json::to_value(report)?), summary })
        }
    }
}
