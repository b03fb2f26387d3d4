//! Command-line front end: `simulate`, `select` and `verify`.
//!
//! Exit codes: 0 on success, 1 on usage, configuration or estimation errors,
//! 2 when a verification suite has an asserted failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::baselines::LassoConfig;
use crate::collections::{recommended_complete_dmax, ModelCollection};
use crate::error::{Error, Result};
use crate::experiments::{
    compare_k3_k2, concentration_grid, lemma21_configurations, run_experiment, verify_circulant_psd,
    verify_concentration, verify_fpe_trend, verify_lemma21, verify_minimal_penalty, CellStatus, ConcentrationKind,
    EstimatorSpec, ExperimentConfig, ExperimentReport,
};
use crate::penalties::{check_assumption, PenaltySpec};
use crate::regression::{DataSet, GroundTruth};
use crate::selector::select;
use crate::stochastic::{read_covariance_csv, CovarianceKind, SeedSpec};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "RANDES_THREADS";

#[derive(Debug, Parser)]
#[command(name = "randes", version, about = "Penalized model selection for Gaussian random-design regression")]
pub struct Cli {
    /// Worker threads (overrides RANDES_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo experiment described by a config file.
    Simulate {
        /// Experiment config (`key = value`, `[estimator]` sections).
        #[arg(long)]
        config: PathBuf,
        /// Report path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Master seed; overrides the config. Drawn from entropy when absent everywhere.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's replication count.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Select a model on a data file with header `y,x1,…,xp`.
    Select {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "complete")]
        collection: CollectionArg,
        /// Largest dimension for ordered/complete collections.
        #[arg(long)]
        dmax: Option<usize>,
        /// Model list for explicit collections (`1,2 : prior` per line).
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "complete")]
        penalty: PenaltyArg,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        /// Check the collection-size assumption at this η and fail if it is violated.
        #[arg(long)]
        eta: Option<f64>,
        /// Writes `model,dim,criterion` for every model.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Concentration: a single kind instead of the full grid.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        x: Option<f64>,
        /// Sample size (Wishart kinds, minimal-penalty).
        #[arg(long)]
        n: Option<usize>,
        /// Minimal-penalty: number of covariates.
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        nu: Option<f64>,
        /// FPE trend: comma-separated sample sizes.
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<usize>>,
        /// FPE trend: decay exponent of the bias increments.
        #[arg(long)]
        s: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CollectionArg {
    Ordered,
    Complete,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    Minimal,
    Heuristic,
    Complexity,
    Complete,
    Prior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma21,
    Concentration,
    MinimalPenalty,
    FpeTrend,
    CirculantPsd,
}

/// Parsed experiment config with its output settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    /// `None` when the config leaves the seed to the caller.
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let threads = match worker_count(cli.threads, std::env::var(THREADS_ENV).ok().as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    pool.install(|| match cli.command {
        Command::Simulate {
            config,
            out,
            format,
            seed,
            reps,
        } => report(cmd_simulate(&config, out, format, seed, reps, threads.is_some())),
        Command::Select {
            data,
            collection,
            dmax,
            models,
            penalty,
            k,
            eta,
            audit,
        } => report(cmd_select(&data, collection, dmax, models.as_deref(), penalty, k, eta, audit.as_deref())),
        Command::Verify {
            suite,
            reps,
            seed,
            kind,
            d,
            x,
            n,
            p,
            nu,
            n_grid,
            s,
        } => {
            let opts = VerifyOptions {
                reps,
                seed,
                kind,
                d,
                x,
                n,
                p,
                nu,
                n_grid,
                s,
            };
            match cmd_verify(suite, &opts) {
                Ok(true) => 0,
                Ok(false) => 2,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
    })
}

fn report(r: Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// The flag wins over the environment; `None` leaves the pool at its default size.
pub fn worker_count(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    let pick = match (flag, env) {
        (Some(t), _) => Some(t),
        (None, Some(v)) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{THREADS_ENV} = '{v}' is not a thread count")))?,
        ),
        _ => None,
    };
    if pick == Some(0) {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    Ok(pick)
}

fn resolve_seed(explicit: Option<u64>) -> SeedSpec {
    match explicit {
        Some(s) => SeedSpec::new(s),
        None => {
            let s = SeedSpec::from_entropy();
            eprintln!("seed: {}", s.master_seed);
            s
        }
    }
}

fn cmd_simulate(
    config: &Path,
    out: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
    reps: Option<usize>,
    threads_fixed: bool,
) -> Result<()> {
    let text = fs::read_to_string(config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
    let base = config.parent().unwrap_or(Path::new("."));
    let mut rc = parse_run_config(&text, base)?;
    rc.experiment.seed = resolve_seed(seed.or(rc.seed));
    if let Some(r) = reps {
        rc.experiment.replications = r;
    }
    // the config's thread hint applies only when neither the flag nor the environment set one
    let result = match rc.threads {
        Some(t) if !threads_fixed => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(|| run_experiment(&rc.experiment))?,
        _ => run_experiment(&rc.experiment)?,
    };
    let format = format.unwrap_or(rc.format);
    let body = match format {
        Format::Csv => report_csv(&result),
        Format::Json => report_json(&result)?,
    };
    match out.or(rc.output) {
        Some(path) => fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Column header of the report CSV.
pub const CSV_HEADER: &str = "estimator,n,metric,value,ci_half_width,reps,seed";

#[derive(Debug, Serialize)]
struct ReportRow<'a> {
    estimator: &'a str,
    n: usize,
    metric: &'static str,
    value: f64,
    ci_half_width: f64,
    reps: usize,
    seed: u64,
}

fn report_rows(r: &ExperimentReport) -> Vec<ReportRow<'_>> {
    let mut rows = Vec::new();
    for e in &r.estimators {
        for (metric, m) in [("risk_ratio", e.risk_ratio), ("power", e.power), ("fdr", e.fdr)] {
            rows.push(ReportRow {
                estimator: &e.estimator,
                n: r.n,
                metric,
                value: m.mean,
                ci_half_width: m.ci_half_width,
                reps: r.replications,
                seed: r.seed,
            });
        }
    }
    rows
}

/// Report table; numbers use the shortest representation that round-trips.
pub fn report_csv(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# seed={} generator={}", r.seed, r.generator);
    let _ = writeln!(s, "{CSV_HEADER}");
    for row in report_rows(r) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            row.estimator, row.n, row.metric, row.value, row.ci_half_width, row.reps, row.seed
        );
    }
    s
}

pub fn report_json(r: &ExperimentReport) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        seed: u64,
        generator: &'a str,
        oracle_risk: f64,
        oracle_model: &'a str,
        rows: Vec<ReportRow<'a>>,
    }
    let doc = Doc {
        seed: r.seed,
        generator: &r.generator,
        oracle_risk: r.oracle_risk,
        oracle_model: &r.oracle_model,
        rows: report_rows(r),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Default)]
struct EstimatorSection {
    line: usize,
    kind: Option<String>,
    penalty: Option<String>,
    k: Option<f64>,
    lasso: LassoConfig,
}

/// Parses an experiment config.
///
/// ```text
/// p = 20
/// n = 30
/// replications = 1000
/// covariance = identity        # identity | sigma2 | exp_circulant | poly_circulant | file
/// theta = 2, 1, 0.5            # zero-padded to p
/// collection = complete
/// max_dim = 5
///
/// [estimator]
/// kind = penalized             # penalized | lasso | adaptive_lasso
/// penalty = complete
/// k = 1.1
/// ```
///
/// Relative paths are resolved against `base`.
pub fn parse_run_config(text: &str, base: &Path) -> Result<RunConfig> {
    let mut top: Vec<(usize, String, String)> = Vec::new();
    let mut sections: Vec<EstimatorSection> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[estimator]" {
                return Err(Error::Config(format!("line {line_no}: unknown section '{line}'")));
            }
            sections.push(EstimatorSection {
                line: line_no,
                ..Default::default()
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Config(format!("line {line_no}: expected 'key = value'")))?;
        match sections.last_mut() {
            None => {
                if !TOP_KEYS.contains(&key) {
                    return Err(Error::Config(format!("line {line_no}: unknown key '{key}'")));
                }
                if top.iter().any(|(_, k, _)| k == key) {
                    return Err(Error::Config(format!("line {line_no}: duplicate key '{key}'")));
                }
                top.push((line_no, key.to_string(), value.to_string()));
            }
            Some(sec) => estimator_key(sec, line_no, key, value)?,
        }
    }

    let get = |key: &str| top.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()));
    let required = |key: &str| get(key).ok_or_else(|| Error::Config(format!("missing key '{key}'")));
    let (l, v) = required("p")?;
    let p: usize = parse_num(l, "p", v)?;
    let (l, v) = required("n")?;
    let n: usize = parse_num(l, "n", v)?;
    let replications = match get("replications") {
        Some((l, v)) => parse_num(l, "replications", v)?,
        None => 1000,
    };
    let noise_var = match get("noise_var") {
        Some((l, v)) => parse_num(l, "noise_var", v)?,
        None => 1.0,
    };
    let (l, v) = required("theta")?;
    let coords: Vec<f64> = parse_list(l, "theta", v)?;
    if coords.len() > p {
        return Err(Error::Config(format!("line {l}: theta has {} entries, p = {p}", coords.len())));
    }
    let mut theta = DVector::zeros(p);
    theta.rows_mut(0, coords.len()).copy_from_slice(&coords);

    let covariance = match get("covariance") {
        None => CovarianceKind::Identity(p).build()?,
        Some((l, v)) => {
            let param = |key: &str| -> Result<f64> {
                let (pl, pv) = get(key).ok_or_else(|| Error::Config(format!("line {l}: covariance '{v}' needs '{key}'")))?;
                parse_num(pl, key, pv)
            };
            match v {
                "identity" => CovarianceKind::Identity(p),
                "sigma2" => CovarianceKind::PaperSigma2(p),
                "exp_circulant" => CovarianceKind::ExpCirculant { p, omega: param("omega")? },
                "poly_circulant" => CovarianceKind::PolyCirculant { p, t: param("t")? },
                "file" => {
                    let (fl, fv) = get("covariance_file")
                        .ok_or_else(|| Error::Config(format!("line {l}: covariance 'file' needs 'covariance_file'")))?;
                    let path = existing(base, fv, fl)?;
                    let text = fs::read_to_string(&path)?;
                    let m = read_covariance_csv(&text)?;
                    if m.nrows() != p {
                        return Err(Error::Config(format!("line {fl}: covariance is {0}x{0}, p = {p}", m.nrows())));
                    }
                    CovarianceKind::Explicit(m)
                }
                other => return Err(Error::Config(format!("line {l}: unknown covariance '{other}'"))),
            }
            .build()?
        }
    };
    let truth = GroundTruth::new(theta, covariance, noise_var)?;

    let collection = build_collection(&get, base, p, "collection", "max_dim", "models", recommended_complete_dmax(n, p))?;
    let oracle_collection = if get("oracle_collection").is_some() {
        build_collection(&get, base, p, "oracle_collection", "oracle_max_dim", "oracle_models", 5)?
    } else {
        collection.clone()
    };

    let seed = match get("seed") {
        Some((l, v)) => Some(parse_num(l, "seed", v)?),
        None => None,
    };
    let format = match get("format") {
        None | Some((_, "csv")) => Format::Csv,
        Some((_, "json")) => Format::Json,
        Some((l, v)) => return Err(Error::Config(format!("line {l}: unknown format '{v}'"))),
    };
    let threads = match get("threads") {
        Some((l, "0")) => return Err(Error::Config(format!("line {l}: threads must be at least 1"))),
        Some((l, v)) => Some(parse_num(l, "threads", v)?),
        None => None,
    };
    let output = get("output").map(|(_, v)| base.join(v));

    if sections.is_empty() {
        return Err(Error::Config("no [estimator] section".into()));
    }
    let estimators = sections.into_iter().map(finish_estimator).collect::<Result<Vec<_>>>()?;
    let experiment = ExperimentConfig {
        truth,
        n,
        replications,
        estimators,
        collection,
        oracle_collection,
        seed: SeedSpec::new(seed.unwrap_or(0)),
    };
    experiment.validate()?;
    Ok(RunConfig {
        experiment,
        seed,
        output,
        format,
        threads,
    })
}

const TOP_KEYS: &[&str] = &[
    "p",
    "n",
    "replications",
    "noise_var",
    "theta",
    "covariance",
    "omega",
    "t",
    "covariance_file",
    "collection",
    "max_dim",
    "models",
    "oracle_collection",
    "oracle_max_dim",
    "oracle_models",
    "seed",
    "output",
    "format",
    "threads",
];

fn build_collection<'a>(
    get: &impl Fn(&str) -> Option<(usize, &'a str)>,
    base: &Path,
    p: usize,
    kind_key: &str,
    dim_key: &str,
    models_key: &str,
    default_dim: usize,
) -> Result<ModelCollection> {
    let dim = || -> Result<usize> {
        match get(dim_key) {
            Some((l, v)) => parse_num(l, dim_key, v),
            None => Ok(default_dim),
        }
    };
    match get(kind_key) {
        None | Some((_, "complete")) => ModelCollection::complete(p, dim()?),
        Some((_, "ordered")) => ModelCollection::ordered(p, dim()?),
        Some((l, "explicit")) => {
            let (ml, mv) = get(models_key)
                .ok_or_else(|| Error::Config(format!("line {l}: explicit collection needs '{models_key}'")))?;
            ModelCollection::load_explicit(&existing(base, mv, ml)?, p)
        }
        Some((l, v)) => Err(Error::Config(format!("line {l}: unknown collection '{v}'"))),
    }
}

fn estimator_key(sec: &mut EstimatorSection, line: usize, key: &str, value: &str) -> Result<()> {
    match key {
        "kind" => sec.kind = Some(value.to_string()),
        "penalty" => sec.penalty = Some(value.to_string()),
        "k" => sec.k = Some(parse_num(line, key, value)?),
        "lambda_grid" => sec.lasso.lambda_grid = parse_list(line, key, value)?,
        "lambda_points" => sec.lasso.lambda_points = parse_num(line, key, value)?,
        "gamma_grid" => sec.lasso.gamma_grid = parse_list(line, key, value)?,
        "max_iter" => sec.lasso.max_iter = parse_num(line, key, value)?,
        "tol" => sec.lasso.tol = parse_num(line, key, value)?,
        _ => return Err(Error::Config(format!("line {line}: unknown key '{key}'"))),
    }
    Ok(())
}

fn finish_estimator(sec: EstimatorSection) -> Result<EstimatorSpec> {
    let at = sec.line;
    let kind = sec
        .kind
        .ok_or_else(|| Error::Config(format!("line {at}: estimator section needs 'kind'")))?;
    let spec = match kind.as_str() {
        "penalized" => {
            let name = sec.penalty.as_deref().unwrap_or("complete");
            EstimatorSpec::Penalized(penalty_from_name(name, sec.k.unwrap_or(2.0)).map_err(|e| Error::Config(format!("line {at}: {e}")))?)
        }
        "lasso" => EstimatorSpec::Lasso(sec.lasso),
        "adaptive_lasso" => EstimatorSpec::AdaptiveLasso(sec.lasso),
        other => return Err(Error::Config(format!("line {at}: unknown estimator kind '{other}'"))),
    };
    Ok(spec)
}

fn penalty_from_name(name: &str, k: f64) -> Result<PenaltySpec> {
    PenaltySpec::from_name(name, k).map_err(|e| match e {
        Error::InvalidParameter(msg) => Error::Config(msg),
        e => e,
    })
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: '{key}' has invalid value '{value}'")))
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|t| parse_num(line, key, t.trim()))
        .collect()
}

fn existing(base: &Path, rel: &str, line: usize) -> Result<PathBuf> {
    let path = base.join(rel);
    if !path.is_file() {
        return Err(Error::Config(format!("line {line}: file '{}' does not exist", path.display())));
    }
    Ok(path)
}

/// Reads a data file with header `y,x1,…,xp`.
pub fn read_data_csv(text: &str) -> Result<DataSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::InvalidData("data file is empty".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let p = cols.len().saturating_sub(1);
    let well_formed = cols.first() == Some(&"y")
        && p > 0
        && cols[1..].iter().enumerate().all(|(j, c)| *c == format!("x{}", j + 1));
    if !well_formed {
        return Err(Error::InvalidData(format!("header must be 'y,x1,...,xp', got '{header}'")));
    }
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidData(format!("line {}: '{}' is not a number", i + 1, t.trim())))
            })
            .collect::<Result<_>>()?;
        if vals.len() != p + 1 {
            return Err(Error::InvalidData(format!("line {}: expected {} fields, got {}", i + 1, p + 1, vals.len())));
        }
        y.push(vals[0]);
        rows.push(vals[1..].to_vec());
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("data file has no observations".into()));
    }
    let x = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    DataSet::new(x, DVector::from_vec(y))
}

#[allow(clippy::too_many_arguments)]
fn cmd_select(
    data_path: &Path,
    collection: CollectionArg,
    dmax: Option<usize>,
    models: Option<&Path>,
    penalty: PenaltyArg,
    k: f64,
    eta: Option<f64>,
    audit: Option<&Path>,
) -> Result<()> {
    let text = fs::read_to_string(data_path).map_err(|e| Error::Io(format!("{}: {e}", data_path.display())))?;
    let data = read_data_csv(&text)?;
    let (n, p) = (data.n(), data.p());
    let recommended = recommended_complete_dmax(n, p);
    let c = match collection {
        CollectionArg::Ordered => ModelCollection::ordered(p, dmax.unwrap_or((n / 2).min(p)))?,
        CollectionArg::Complete => {
            let d = dmax.unwrap_or(recommended);
            if d > recommended {
                eprintln!("warning: dmax = {d} exceeds the recommended cap {recommended} for n = {n}, p = {p}");
            }
            ModelCollection::complete(p, d)?
        }
        CollectionArg::Explicit => {
            let path = models.ok_or_else(|| Error::Config("--collection explicit needs --models".into()))?;
            ModelCollection::load_explicit(path, p)?
        }
    };
    let name = match penalty {
        PenaltyArg::Minimal => "minimal",
        PenaltyArg::Heuristic => "heuristic",
        PenaltyArg::Complexity => "complexity",
        PenaltyArg::Complete => "complete",
        PenaltyArg::Prior => "prior",
    };
    let spec = penalty_from_name(name, k)?;
    if let Some(eta) = eta {
        let check = check_assumption(&c, k, n, eta);
        if !check.holds {
            return Err(Error::Config(format!(
                "collection-size assumption fails: {}",
                check.diagnostic.unwrap_or_default()
            )));
        }
    }
    let r = select(&data, &c, spec)?;
    println!("model: {}", r.chosen.to_one_based_string());
    println!("criterion: {:e}", r.criterion);
    println!("penalty: {}", r.penalty_used);
    for &j in r.chosen.indices() {
        println!("theta[{}] = {}", j + 1, r.estimate[j]);
    }
    if let Some(path) = audit {
        let mut s = String::from("model,dim,criterion\n");
        for (m, v) in &r.criterion_values {
            let _ = writeln!(s, "\"{}\",{},{}", m.to_one_based_string(), m.dim(), v);
        }
        fs::write(path, s).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Debug, Default, Clone)]
pub struct VerifyOptions {
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub kind: Option<String>,
    pub d: Option<usize>,
    pub x: Option<f64>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub nu: Option<f64>,
    pub n_grid: Option<Vec<usize>>,
    pub s: Option<f64>,
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs a suite, printing one line per cell. `Ok(false)` when an asserted cell fails.
pub fn cmd_verify(suite: Suite, o: &VerifyOptions) -> Result<bool> {
    let seed = resolve_seed(o.seed);
    let mut all = true;
    match suite {
        Suite::Lemma21 => {
            let reps = o.reps.unwrap_or(100_000);
            for (i, (label, truth, m, n)) in lemma21_configurations()?.into_iter().enumerate() {
                let r = verify_lemma21(&truth, &m, n, reps, seed.derive(i as u64))?;
                all &= r.pass;
                println!(
                    "{} {label}, n = {n}: E[gamma] {} vs {} (z = {:.2}); E[gamma_n] {} vs {} (z = {:.2})",
                    verdict(r.pass),
                    r.prediction_error.mc_mean,
                    r.prediction_error.expected,
                    r.prediction_error.z_score(),
                    r.empirical_error.mc_mean,
                    r.empirical_error.expected,
                    r.empirical_error.z_score(),
                );
            }
        }
        Suite::Concentration => {
            let reps = o.reps.unwrap_or(100_000);
            let cells = match &o.kind {
                None => concentration_grid(reps, seed)?,
                Some(name) => {
                    let kind = ConcentrationKind::parse(name)
                        .ok_or_else(|| Error::Config(format!("unknown concentration kind '{name}'")))?;
                    let d = o.d.ok_or_else(|| Error::Config("--kind needs --d".into()))?;
                    let x = o.x.ok_or_else(|| Error::Config("--kind needs --x".into()))?;
                    vec![verify_concentration(kind, d, x, o.n, reps, seed)?]
                }
            };
            for c in cells {
                all &= c.status != CellStatus::Fail;
                let status = match c.status {
                    CellStatus::Pass => "PASS",
                    CellStatus::Fail => "FAIL",
                    CellStatus::Skipped => "SKIP",
                };
                let freq = c.frequency.map_or("-".to_string(), |f| f.to_string());
                let mut line = format!(
                    "{status} {} d = {} x = {}: frequency {freq}, bound {}, allowed {}",
                    c.kind.name(),
                    c.d,
                    c.x,
                    c.bound,
                    c.allowed
                );
                if matches!(c.kind, ConcentrationKind::WishartInv | ConcentrationKind::WishartMax) {
                    let _ = write!(line, ", n = {}", c.n);
                }
                if let Some(l) = c.literal_frequency {
                    let _ = write!(line, ", literal reading {l}");
                }
                println!("{line}");
            }
        }
        Suite::MinimalPenalty => {
            let n = o.n.unwrap_or(60);
            let r = verify_minimal_penalty(n, o.p.unwrap_or(40), o.nu.unwrap_or(0.5), o.reps.unwrap_or(500), seed, None)?;
            all &= r.pass;
            let tag = if r.asserted { verdict(r.pass) } else { "INFO" };
            println!(
                "{tag} n = {} p = {} nu = {}: frequency(d >= n/4) {} under (1-nu) d/(n-d), {} under K = 2",
                r.n, r.p, r.nu, r.under_frequency, r.control_frequency
            );
        }
        Suite::FpeTrend => {
            let grid = o.n_grid.clone().unwrap_or_else(|| vec![50, 100, 200, 400]);
            let s = o.s.unwrap_or(1.0);
            let reps = o.reps.unwrap_or(200);
            let r = verify_fpe_trend(&grid, s, 1.0, reps, seed)?;
            for pt in &r.points {
                println!("     n = {}: median oracle ratio {}", pt.n, pt.median_ratio);
            }
            println!("{} median ratio nonincreasing and <= 1.5 at the largest n", verdict(r.pass));
            let share = compare_k3_k2(15, s, 1.0, reps.max(500), seed.derive(1))?;
            let ok = share >= 0.5;
            println!("{} K = 3 no worse than K = 2 at n = 15 in {share} of paired runs", verdict(ok));
            all &= r.pass && ok;
        }
        Suite::CirculantPsd => {
            for c in verify_circulant_psd()? {
                all &= c.pass;
                println!(
                    "{} {}({}) p = {}: min eigenvalue {}, DFT error {:e}",
                    verdict(c.pass),
                    c.family,
                    c.param,
                    c.p,
                    c.min_eigenvalue,
                    c.max_dft_error
                );
            }
        }
    }
    println!("{}", if all { "all asserted cells passed" } else { "some asserted cells failed" });
    Ok(all)
}

/// Config text of the experiment cells; used by the bundled config files.
pub fn preset_config_text(experiment: u8, n: usize) -> String {
    let (cov, theta) = match experiment {
        1 => ("identity", "2, 1, 0.5"),
        _ => ("sigma2", "40, 40"),
    };
    let dmax = (n / 5).clamp(1, 5);
    let mut s = format!(
        "# experiment {experiment}, n = {n}\np = 20\nn = {n}\nreplications = 1000\nnoise_var = 1\n\
         covariance = {cov}\ntheta = {theta}\ncollection = complete\nmax_dim = {dmax}\n\
         oracle_collection = complete\noracle_max_dim = 5\n"
    );
    for k in ["1.1", "1.5", "2"] {
        let _ = write!(s, "\n[estimator]\nkind = penalized\npenalty = complete\nk = {k}\n");
    }
    s.push_str("\n[estimator]\nkind = lasso\nlambda_points = 20\n");
    s.push_str("\n[estimator]\nkind = adaptive_lasso\nlambda_points = 20\ngamma_grid = 0.5, 1, 2\n");
    s
}
