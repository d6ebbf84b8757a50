use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use cachecalc::cli::{
    emit, figure_rows, has_row_errors, run_bounds, run_exact, run_probe, run_simulate,
    ExperimentSpec, FigureOptions, OutputFormat, PolicyName, ResultRow,
};
use cachecalc::simulation::ScalingRegime;
use cachecalc::Result;

#[derive(Parser)]
#[command(
    name = "cachecalc",
    version,
    about = "Delivery-time analysis for coded caching with randomly shared caches",
    after_help = "Environment: CACHECALC_THREADS caps the worker pool (default: all cores)."
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact optimal average delay over a (K, caches, t) grid
    Exact(GridArgs),
    /// Analytical, threshold, proximity and non-uniform bounds
    Bounds(GridArgs),
    /// Seeded Monte Carlo delay estimation
    Simulate(GridArgs),
    /// Deterioration scaling probes across a cache-count grid
    ProbeScaling(ProbeArgs),
    /// Reproduce a bundled figure dataset (ids 2-10)
    Figure(FigureArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Uniform,
    Hchoice,
    Proximity,
}

impl From<PolicyArg> for PolicyName {
    fn from(p: PolicyArg) -> PolicyName {
        match p {
            PolicyArg::Uniform => PolicyName::Uniform,
            PolicyArg::Hchoice => PolicyName::HChoice,
            PolicyArg::Proximity => PolicyName::Proximity,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    /// K = caches
    Linear,
    /// K = caches * ln(caches)
    LinearLog,
    /// K = caches^2
    Quadratic,
}

impl From<RegimeArg> for ScalingRegime {
    fn from(r: RegimeArg) -> ScalingRegime {
        match r {
            RegimeArg::Linear => ScalingRegime::Linear,
            RegimeArg::LinearLog => ScalingRegime::LinearLog,
            RegimeArg::Quadratic => ScalingRegime::Quadratic,
        }
    }
}

/// Flags shared by the grid commands. Precedence: flags beat the config
/// file, the config file beats built-in defaults.
#[derive(Args)]
struct GridArgs {
    /// Number of users K (comma-separated grid)
    #[arg(short = 'K', long = "users", value_delimiter = ',')]
    users: Vec<u32>,
    /// Number of caches (comma-separated grid)
    #[arg(short = 'L', long = "caches", value_delimiter = ',')]
    caches: Vec<u32>,
    /// Cache redundancy t (comma-separated; mutually exclusive with --gamma)
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<u32>>,
    /// Normalized cache size gamma = t/caches (comma-separated)
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Association policy
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Choice / group size h for hchoice and proximity policies
    #[arg(long)]
    h: Option<u32>,
    /// Zipf exponent for non-uniform intensities
    #[arg(long)]
    alpha: Option<f64>,
    /// Coverage threshold for the numerical bounds
    #[arg(long)]
    rho: Option<f64>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<u64>,
    /// RNG seed (required for simulate)
    #[arg(long)]
    seed: Option<u64>,
    /// Profile-enumeration budget for exact sums and threshold bounds
    #[arg(long)]
    budget: Option<u64>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    users: Option<Vec<u32>>,
    caches: Option<Vec<u32>>,
    t: Option<Vec<u32>>,
    gamma: Option<Vec<f64>>,
    policy: Option<String>,
    h: Option<u32>,
    alpha: Option<f64>,
    rho: Option<f64>,
    samples: Option<u64>,
    seed: Option<u64>,
    budget: Option<u64>,
    format: Option<String>,
    out: Option<PathBuf>,
}

struct ResolvedGrid {
    spec: ExperimentSpec,
    format: OutputFormat,
    out: Option<PathBuf>,
}

impl GridArgs {
    fn resolve(self) -> Result<ResolvedGrid> {
        let file: ConfigFile = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)?
            }
            None => ConfigFile::default(),
        };
        let policy = match self.policy {
            Some(p) => p.into(),
            None => match file.policy.as_deref() {
                None => PolicyName::Uniform,
                Some("uniform") => PolicyName::Uniform,
                Some("hchoice") => PolicyName::HChoice,
                Some("proximity") => PolicyName::Proximity,
                Some(other) => {
                    return Err(cachecalc::Error::InvalidConfig(format!(
                        "config policy: unknown value {other:?}"
                    )))
                }
            },
        };
        let format = match self.format {
            Some(f) => f.into(),
            None => match file.format.as_deref() {
                None | Some("csv") => OutputFormat::Csv,
                Some("json") => OutputFormat::Json,
                Some(other) => {
                    return Err(cachecalc::Error::InvalidConfig(format!(
                        "config format: unknown value {other:?}"
                    )))
                }
            },
        };
        let defaults = ExperimentSpec::default();
        let spec = ExperimentSpec {
            users: if self.users.is_empty() {
                file.users.unwrap_or_default()
            } else {
                self.users
            },
            caches: if self.caches.is_empty() {
                file.caches.unwrap_or_default()
            } else {
                self.caches
            },
            t_values: self.t.or(file.t),
            gammas: self.gamma.or(file.gamma),
            policy,
            h: self.h.or(file.h).unwrap_or(defaults.h),
            alpha: self.alpha.or(file.alpha),
            rho: self.rho.or(file.rho),
            samples: self.samples.or(file.samples).unwrap_or(defaults.samples),
            seed: self.seed.or(file.seed),
            budget: self.budget.or(file.budget).unwrap_or(defaults.budget),
        };
        Ok(ResolvedGrid {
            spec,
            format,
            out: self.out.or(file.out),
        })
    }
}

#[derive(Args)]
struct ProbeArgs {
    /// Cache-count grid (comma-separated)
    #[arg(short = 'L', long = "caches", value_delimiter = ',', required = true)]
    caches: Vec<u32>,
    /// User-count regime
    #[arg(long, value_enum, default_value = "linear")]
    regime: RegimeArg,
    #[arg(long, value_enum, default_value = "uniform")]
    policy: PolicyArg,
    #[arg(long, default_value_t = 2)]
    h: u32,
    /// Normalized cache size (t rounds to gamma * caches, at least 1)
    #[arg(long, default_value_t = 0.03125)]
    gamma: f64,
    #[arg(long, default_value_t = 2000)]
    samples: u64,
    #[arg(long, required = true)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// Figure id, 2 through 10
    id: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    /// Replacement profile file for figure 2
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_worker_pool() {
    if let Ok(value) = std::env::var("CACHECALC_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn run() -> Result<Vec<ResultRow>> {
    let cli = CliArgs::parse();
    match cli.command {
        Command::Exact(args) => {
            let resolved = args.resolve()?;
            let rows = run_exact(&resolved.spec)?;
            emit(
                &rows,
                resolved.format,
                resolved.out.as_deref(),
                resolved.spec.seed,
            )?;
            Ok(rows)
        }
        Command::Bounds(args) => {
            let resolved = args.resolve()?;
            let rows = run_bounds(&resolved.spec)?;
            emit(
                &rows,
                resolved.format,
                resolved.out.as_deref(),
                resolved.spec.seed,
            )?;
            Ok(rows)
        }
        Command::Simulate(args) => {
            let resolved = args.resolve()?;
            let rows = run_simulate(&resolved.spec)?;
            emit(
                &rows,
                resolved.format,
                resolved.out.as_deref(),
                resolved.spec.seed,
            )?;
            Ok(rows)
        }
        Command::ProbeScaling(args) => {
            let rows = run_probe(
                &args.caches,
                args.regime.into(),
                args.policy.into(),
                args.h,
                args.gamma,
                args.samples,
                args.seed,
            )?;
            emit(
                &rows,
                args.format.into(),
                args.out.as_deref(),
                Some(args.seed),
            )?;
            Ok(rows)
        }
        Command::Figure(args) => {
            let options = FigureOptions {
                seed: args.seed,
                samples: args.samples,
                budget: args.budget,
                profiles_path: args.profiles,
            };
            let rows = figure_rows(args.id, &options)?;
            emit(&rows, args.format.into(), args.out.as_deref(), args.seed)?;
            Ok(rows)
        }
    }
}

fn is_broken_pipe(e: &cachecalc::Error) -> bool {
    use std::io::ErrorKind;
    match e {
        cachecalc::Error::Io(io) => io.kind() == ErrorKind::BrokenPipe,
        cachecalc::Error::OutputIo { source, .. } => source.kind() == ErrorKind::BrokenPipe,
        cachecalc::Error::Json(json) => json.io_error_kind() == Some(ErrorKind::BrokenPipe),
        cachecalc::Error::Csv(csv) => matches!(
            csv.kind(),
            csv::ErrorKind::Io(io) if io.kind() == ErrorKind::BrokenPipe
        ),
        _ => false,
    }
}

fn main() -> ExitCode {
    init_worker_pool();
    match run() {
        Ok(rows) => {
            if has_row_errors(&rows) {
                eprintln!("cachecalc: completed with row-level errors");
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        // a closed downstream pipe (e.g. `cachecalc ... | head`) is not an
        // error worth reporting
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cachecalc: {e}");
            ExitCode::FAILURE
        }
    }
}
