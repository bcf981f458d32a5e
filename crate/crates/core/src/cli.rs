//! Command-line front end: `simulate`, `cluster`, `evaluate`, `study`.
//!
//! Every subcommand accepts `--config FILE` with a JSON object whose keys are
//! the long flag names; flags given on the command line win.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::correlation::{mixed_matrix, EstimatorPolicy};
use crate::data::Dataset;
use crate::error::Error;
use crate::evaluation::{batch_score, run_condition, score, summarize, write_score_csv, BatchConfig, Condition};
use crate::fofc::{fofc_matrix, Clustering, FofcConfig};
use crate::sem::{implied_covariance, random_model, simulate, DataType, DatasetMetadata};
use crate::studies::{category_ratio_sweep, default_grid, tetrad_ratio_sweep, write_csv, DichotomyMode};
use crate::tetrad::{TetradConfig, TetradTest};
use crate::SCHEMA_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fofc",
    version,
    about = "Latent cluster discovery on mixed continuous and discrete data"
)]
pub struct Cli {
    /// Worker threads for parallel work (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate data from a random latent variable model.
    Simulate(SimulateArgs),
    /// Cluster a dataset into one-factor measurement models.
    Cluster(ClusterArgs),
    /// Score clusterings against simulated ground truth.
    Evaluate(EvaluateArgs),
    /// Run an analytic ratio study.
    Study(StudyArgs),
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    pub latents: Option<usize>,
    #[arg(long)]
    pub children: Option<usize>,
    #[arg(long)]
    pub latent_edges: Option<usize>,
    #[arg(long)]
    pub impurities: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// 0 continuous, 2 median binary, 2_ non-median binary, k >= 3 k-ary.
    #[arg(long)]
    pub categories: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; the metadata JSON is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClusterArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Metadata JSON; defaults to the input path with a `.json` extension.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// pearson, rank or tetrachoric (polychoric for k-ary pairs).
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// wishart or delta.
    #[arg(long)]
    pub test: Option<String>,
    #[arg(long)]
    pub min_abs_corr: Option<f64>,
    /// Cluster the model-implied population covariance from the metadata.
    #[arg(long)]
    pub population: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvaluateArgs {
    /// Clustering JSON written by `cluster` (single-run mode).
    #[arg(long)]
    pub clustering: Option<PathBuf>,
    /// Metadata JSON of the clustered dataset (single-run mode).
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Simulate and score a batch of conditions instead.
    #[arg(long)]
    pub batch: bool,
    /// Comma-separated latent edge counts (batch mode).
    #[arg(long)]
    pub latent_edges: Option<String>,
    /// Comma-separated data type codes (batch mode).
    #[arg(long)]
    pub categories: Option<String>,
    #[arg(long)]
    pub latents: Option<usize>,
    #[arg(long)]
    pub children: Option<usize>,
    #[arg(long)]
    pub impurities: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub fix_coefficients: bool,
    /// Per-run rows in batch mode.
    #[arg(long)]
    pub runs_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct StudyArgs {
    /// tetrad-ratio or category-ratio.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of evenly spaced correlation values in (0, 1).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            error: Error::Precondition(msg.into()),
        }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Domain(_) | Error::InfeasibleModel(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        CliError { code, error }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema_version: u32,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::DegenerateDistribution => "degenerate_distribution",
        Error::InvalidCutoffs(_) => "invalid_cutoffs",
        Error::InvalidDataset(_) => "invalid_dataset",
        Error::ZeroVariance { .. } => "zero_variance",
        Error::EmptyCategory { .. } => "empty_category",
        Error::Pair { .. } => "estimation",
        Error::TestUndefined(_) => "test_undefined",
        Error::Precondition(_) => "precondition",
        Error::InfeasibleModel(_) => "infeasible_model",
        Error::Context { source, .. } => error_kind(source),
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors go to stderr as JSON.
fn is_broken_pipe(error: &Error) -> bool {
    match error {
        Error::Io(e) => e.kind() == std::io::ErrorKind::BrokenPipe,
        Error::Json(e) => e.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe),
        Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe),
        Error::Context { source, .. } => is_broken_pipe(source),
        _ => false,
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        // Output closed early by the reader, e.g. `| head`.
        Err(CliError { error, .. }) if is_broken_pipe(&error) => EXIT_OK,
        Err(CliError { code, error }) => {
            let report = ErrorReport {
                schema_version: SCHEMA_VERSION,
                error: ErrorBody {
                    kind: error_kind(&error),
                    message: error.to_string(),
                    exit_code: code,
                },
            };
            eprintln!(
                "{}",
                serde_json::to_string(&report).unwrap_or_else(|_| error.to_string())
            );
            code
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::from(Error::Precondition(format!("thread pool: {e}"))))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => cmd_simulate(merge_config(a, |a| a.config.clone())?),
        Command::Cluster(a) => cmd_cluster(merge_config(a, |a| a.config.clone())?),
        Command::Evaluate(a) => cmd_evaluate(merge_config(a, |a| a.config.clone())?),
        Command::Study(a) => cmd_study(merge_config(a, |a| a.config.clone())?),
    })
}

/// Fills unset fields of `flags` from the JSON config named by `--config`.
fn merge_config<A>(flags: A, config: impl Fn(&A) -> Option<PathBuf>) -> CliResult<A>
where
    A: DeserializeOwned + Merge,
{
    let Some(path) = config(&flags) else {
        return Ok(flags);
    };
    let file = open_input(&path)?;
    let from_file: A = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    Ok(flags.merge(from_file))
}

trait Merge {
    fn merge(self, fallback: Self) -> Self;
}

macro_rules! impl_merge {
    ($t:ty { opts: [$($o:ident),*], flags: [$($b:ident),*] }) => {
        impl Merge for $t {
            fn merge(self, fallback: Self) -> Self {
                Self {
                    $($o: self.$o.or(fallback.$o),)*
                    $($b: self.$b || fallback.$b,)*
                    config: self.config,
                }
            }
        }
    };
}

impl_merge!(SimulateArgs {
    opts: [latents, children, latent_edges, impurities, n, categories, seed, out],
    flags: []
});
impl_merge!(ClusterArgs {
    opts: [input, meta, estimator, alpha, test, min_abs_corr, out],
    flags: [population]
});
impl_merge!(EvaluateArgs {
    opts: [
        clustering,
        meta,
        latent_edges,
        categories,
        latents,
        children,
        impurities,
        n,
        reps,
        seed,
        estimator,
        alpha,
        runs_out,
        out
    ],
    flags: [batch, fix_coefficients]
});
impl_merge!(StudyArgs {
    opts: [mode, reps, seed, grid, out],
    flags: []
});

fn open_input(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError {
        code: EXIT_USAGE,
        error: Error::Precondition(format!("cannot open {}: {e}", path.display())),
    })
}

fn parse_flag<T: std::str::FromStr<Err = Error>>(value: &str) -> CliResult<T> {
    value.parse().map_err(|e: Error| CliError {
        code: EXIT_USAGE,
        error: e,
    })
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn with_output<F>(out: Option<&Path>, write: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> crate::Result<()>,
{
    match out {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(Error::from)?);
            write(&mut f)?;
            f.flush().map_err(Error::from)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    let out = a.out.ok_or_else(|| CliError::usage("--out is required"))?;
    let data_type: DataType = parse_flag(a.categories.as_deref().unwrap_or("0"))?;
    let n = a.n.unwrap_or(2000);
    let spec = random_model(
        a.latents.unwrap_or(5),
        a.children.unwrap_or(4),
        a.latent_edges.unwrap_or(0),
        a.impurities.unwrap_or(0),
        a.seed.unwrap_or(0),
    )?;
    let (data, meta) = simulate(&spec, n, data_type)?;
    data.write_csv(BufWriter::new(File::create(&out).map_err(Error::from)?))?;
    meta.write_json(&sidecar(&out))?;
    Ok(())
}

/// JSON document written by `cluster`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub schema_version: u32,
    pub input: String,
    pub estimator: String,
    pub population: bool,
    pub config: FofcConfig,
    pub n: usize,
    pub variables: Vec<String>,
    pub clusters: Vec<NamedCluster>,
    pub unclustered: Vec<String>,
    pub clustering: Clustering,
    /// Pairs whose polychoric estimate hit the boundary.
    pub clamped_pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCluster {
    pub label: String,
    pub members: Vec<String>,
}

fn cmd_cluster(a: ClusterArgs) -> CliResult<()> {
    let input = a.input.ok_or_else(|| CliError::usage("--in is required"))?;
    let policy: EstimatorPolicy = parse_flag(a.estimator.as_deref().unwrap_or("pearson"))?;
    let mut tetrad = TetradConfig::default();
    if let Some(alpha) = a.alpha {
        tetrad.alpha = alpha;
    }
    if let Some(t) = &a.test {
        tetrad.test = parse_flag::<TetradTest>(t)?;
    }
    if let Some(m) = a.min_abs_corr {
        tetrad.min_abs_corr = m;
    }
    let cfg = FofcConfig {
        tetrad,
        ..FofcConfig::default()
    };
    cfg.validate().map_err(|e| CliError {
        code: EXIT_USAGE,
        error: e,
    })?;

    let csv_file = open_input(&input)?;
    let meta_path = a.meta.clone().unwrap_or_else(|| sidecar(&input));
    let meta = if meta_path.exists() {
        Some(DatasetMetadata::read_json(&meta_path)?)
    } else if a.meta.is_some() || a.population {
        return Err(CliError::usage(format!("metadata {} not found", meta_path.display())));
    } else {
        None
    };
    let data = Dataset::read_csv(BufReader::new(csv_file), meta.as_ref().map(|m| m.columns.clone()))?;

    let corr = if a.population {
        let spec = &meta.as_ref().expect("checked above").spec;
        if spec.num_measured() != data.p() {
            return Err(Error::InvalidDataset("metadata spec does not match the dataset".into()).into());
        }
        implied_covariance(spec)?
    } else {
        mixed_matrix(&data, policy).map_err(|e| e.context(format!("{policy} correlation matrix")))?
    };
    let clustering = fofc_matrix(&corr, &cfg)?;

    let names: Vec<String> = data.columns().iter().map(|c| c.name.clone()).collect();
    let report = ClusterReport {
        schema_version: SCHEMA_VERSION,
        input: input.display().to_string(),
        estimator: if a.population {
            "population".into()
        } else {
            policy.to_string()
        },
        population: a.population,
        config: cfg,
        n: data.n(),
        clusters: clustering
            .clusters
            .iter()
            .map(|c| NamedCluster {
                label: c.label.clone(),
                members: c.members.iter().map(|&i| names[i].clone()).collect(),
            })
            .collect(),
        unclustered: clustering.unclustered.iter().map(|&i| names[i].clone()).collect(),
        clamped_pairs: corr
            .clamped_pairs()
            .iter()
            .map(|&(i, j)| (names[i].clone(), names[j].clone()))
            .collect(),
        variables: names,
        clustering,
    };
    with_output(a.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

/// One row written by single-run `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub condition: String,
    pub data_type: DataType,
    pub seed: u64,
    pub estimator: String,
    /// Empty when the clustering has no clusters.
    pub precision: Option<f64>,
    pub recall: f64,
    pub clusters: usize,
}

fn parse_list<T: std::str::FromStr<Err = E>, E: std::fmt::Display>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|e| CliError::usage(format!("bad {what} `{x}`: {e}")))
        })
        .collect()
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<()> {
    if !a.batch {
        let cpath = a
            .clustering
            .ok_or_else(|| CliError::usage("--clustering is required"))?;
        let mpath = a.meta.ok_or_else(|| CliError::usage("--meta is required"))?;
        let report: ClusterReport =
            serde_json::from_reader(BufReader::new(open_input(&cpath)?)).map_err(Error::from)?;
        if !(1..=SCHEMA_VERSION).contains(&report.schema_version) {
            return Err(Error::InvalidDataset(format!("unsupported schema_version {}", report.schema_version)).into());
        }
        open_input(&mpath)?;
        let meta = DatasetMetadata::read_json(&mpath)?;
        let names: Vec<&str> = meta.columns.iter().map(|c| c.name.as_str()).collect();
        if report.variables.iter().map(String::as_str).ne(names.iter().copied()) {
            return Err(Error::InvalidDataset("clustering variables do not match the metadata columns".into()).into());
        }
        let s = score(&report.clustering, &meta.spec.true_clusters());
        let topo = meta.spec.topology();
        let row = EvaluationRow {
            condition: format!(
                "L{}C{}E{}I{}",
                topo.num_latents,
                topo.children_per_latent,
                topo.latent_edges.len(),
                topo.impurities.len()
            ),
            data_type: meta.data_type,
            seed: meta.seed,
            estimator: report.estimator,
            precision: s.precision,
            recall: s.recall,
            clusters: s.clusters,
        };
        return with_output(a.out.as_deref(), |w| write_score_csv(&[row], w));
    }

    let edges: Vec<usize> = parse_list(a.latent_edges.as_deref().unwrap_or("0"), "edge count")?;
    let types: Vec<DataType> = parse_list(a.categories.as_deref().unwrap_or("0"), "data type")?;
    let policy: EstimatorPolicy = parse_flag(a.estimator.as_deref().unwrap_or("pearson"))?;
    let mut fofc = FofcConfig::default();
    if let Some(alpha) = a.alpha {
        fofc.tetrad.alpha = alpha;
    }
    fofc.validate().map_err(|e| CliError {
        code: EXIT_USAGE,
        error: e,
    })?;
    let cfg = BatchConfig {
        reps: a.reps.unwrap_or(40),
        master_seed: a.seed.unwrap_or(0),
        fix_coefficients: a.fix_coefficients,
        fofc,
    };
    if cfg.reps == 0 {
        return Err(CliError::usage("--reps must be at least 1"));
    }
    let conditions: Vec<Condition> = edges
        .iter()
        .flat_map(|&e| {
            types.iter().map(move |&dt| Condition {
                num_latents: a.latents.unwrap_or(5),
                children: a.children.unwrap_or(4),
                latent_edges: e,
                impurities: a.impurities.unwrap_or(0),
                n: a.n.unwrap_or(2000),
                data_type: dt,
                policy,
            })
        })
        .collect();
    if let Some(runs_out) = &a.runs_out {
        let mut rows = Vec::new();
        let mut runs_all = Vec::new();
        for c in &conditions {
            let runs = run_condition(c, &cfg)?;
            rows.push(summarize(c, &runs));
            runs_all.extend(runs);
        }
        with_output(Some(runs_out), |w| write_score_csv(&runs_all, w))?;
        with_output(a.out.as_deref(), |w| write_score_csv(&rows, w))
    } else {
        let rows = batch_score(&conditions, &cfg)?;
        with_output(a.out.as_deref(), |w| write_score_csv(&rows, w))
    }
}

fn cmd_study(a: StudyArgs) -> CliResult<()> {
    let mode = a.mode.ok_or_else(|| CliError::usage("--mode is required"))?;
    let seed = a.seed.unwrap_or(0);
    match mode.as_str() {
        "tetrad-ratio" => {
            let grid = default_grid(a.grid.unwrap_or(19));
            let study = tetrad_ratio_sweep(&DichotomyMode::ALL, &grid, a.reps.unwrap_or(50), seed)?;
            if study.skipped > 0 {
                eprintln!("skipped {} draws with a zero denominator", study.skipped);
            }
            with_output(a.out.as_deref(), |w| write_csv(&study.records, w))
        }
        "category-ratio" => {
            let rhos = default_grid(a.grid.unwrap_or(9));
            let mut rows = Vec::new();
            for r in 0..a.reps.unwrap_or(1) {
                rows.extend(category_ratio_sweep(&rhos, seed + r as u64)?);
            }
            with_output(a.out.as_deref(), |w| write_csv(&rows, w))
        }
        other => Err(CliError::usage(format!(
            "unknown study mode `{other}` (expected tetrad-ratio or category-ratio)"
        ))),
    }
}
