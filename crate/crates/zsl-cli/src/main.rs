//! `zsl` — command-line driver for the spectral laboratory: random graph
//! and random group sampling, link spectra, fixed-point certificates,
//! Poincaré constants, p-Laplacian bounds, and bound self-checks.
//!
//! Exit codes: 0 success, 2 validation error (bad flags, bad config, bad
//! parameters), 3 runtime error (I/O failures, non-convergence, violated
//! bounds).

mod commands;
mod config;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{CertifyParams, ErStatsParams, ModelChoice};
use config::{FileConfig, RhoRule};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use zsl_core::complex::ComplexError;
use zsl_core::certify::CertifyError;
use zsl_core::ergraph::ErGraphError;
use zsl_core::graph::GraphError;
use zsl_core::groups::GroupError;
use zsl_core::poincare::PoincareError;

// ---------------------------------------------------------------------------
// error type shared by the whole binary

/// Failures are split by exit code: `Validation` exits 2, `Runtime` exits 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::Io(_) => CliError::Runtime(e.to_string()),
            GroupError::Graph(inner) => inner.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ErGraphError> for CliError {
    fn from(e: ErGraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<PoincareError> for CliError {
    fn from(e: PoincareError) -> Self {
        match e {
            PoincareError::Graph(inner) => inner.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ComplexError> for CliError {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::Io(_) => CliError::Runtime(e.to_string()),
            ComplexError::MaxIterExceeded { .. } => CliError::Runtime(e.to_string()),
            ComplexError::Graph(inner) => inner.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CertifyError> for CliError {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::Group(inner) => inner.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// shared output options

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

impl OutFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }
}

impl fmt::Display for OutFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output destination and format, shared by every command.
pub struct Common {
    pub out: Option<PathBuf>,
    pub format: OutFormat,
}

// ---------------------------------------------------------------------------
// command line

#[derive(Parser)]
#[command(
    name = "zsl",
    version,
    about = "Spectral laboratory: random graphs, random group presentations, \
             link spectra, and fixed-point certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key=value config file; explicit flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed (flag > config file > ZSL_SEED env > 0); recorded in
    /// every output row.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (default: stdout). Does not affect output bytes.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Output format: csv (with a leading "# config:" line) or json
    /// (newline-delimited, first object holds "_config").
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,

    /// Worker threads for Monte Carlo runs (default: one per CPU).
    /// Does not affect output bytes.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo spectral-gap / degree statistics for random weighted
    /// graphs G(m, rho) over an m-grid.
    ErStats {
        /// Vertex counts, comma separated (e.g. "1000" or "300,600").
        #[arg(long)]
        m: Option<String>,
        /// Absolute edge probability (exclusive with --rho-rule).
        #[arg(long)]
        rho: Option<f64>,
        /// Edge-probability rule: a number, "c*logm/m", or "c*logm/(8*m^2)".
        #[arg(long)]
        rho_rule: Option<RhoRule>,
        /// Statistic set: "gap" (eigensolve, default) or "degrees".
        #[arg(long)]
        kind: Option<String>,
        /// Trials per grid point (default 50).
        #[arg(long)]
        trials: Option<u32>,
    },

    /// Sample one random triangular presentation and print it.
    GroupSample {
        /// Generator count.
        #[arg(long)]
        m: Option<u32>,
        /// Random model: binomial, uniform, or density.
        #[arg(long)]
        model: Option<String>,
        /// Per-relator inclusion probability (binomial model).
        #[arg(long)]
        rho: Option<f64>,
        /// Number of relators (uniform model).
        #[arg(long)]
        count: Option<u64>,
        /// Density exponent in (0, 1) (density model).
        #[arg(long)]
        density: Option<f64>,
    },

    /// Link-graph spectral report: one presentation from --input, or a
    /// binomial Monte Carlo sweep from --m/--rho/--trials.
    LinkSpectrum {
        /// Presentation file (exclusive with the sweep flags).
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Generator counts, comma separated (sweep mode).
        #[arg(long)]
        m: Option<String>,
        /// Per-relator inclusion probability (sweep mode).
        #[arg(long)]
        rho: Option<f64>,
        /// Trials per grid point (default 50).
        #[arg(long)]
        trials: Option<u32>,
    },

    /// Fixed-point certificates: thresholds vs the measured link gap,
    /// largest certified p, and conformal-dimension bounds.
    Certify {
        /// Presentation file (exclusive with --model/--m/--trials).
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Random model: binomial, uniform, or density.
        #[arg(long)]
        model: Option<String>,
        /// Generator counts, comma separated.
        #[arg(long)]
        m: Option<String>,
        /// Per-relator inclusion probability (binomial model).
        #[arg(long)]
        rho: Option<f64>,
        /// Number of relators (uniform model).
        #[arg(long)]
        count: Option<u64>,
        /// Density exponent in (0, 1) (density model).
        #[arg(long)]
        density: Option<f64>,
        /// Trials per grid point (default 100).
        #[arg(long)]
        trials: Option<u32>,
        /// Target family, repeatable: lp and/or subquotient (default lp).
        #[arg(long)]
        family: Vec<String>,
        /// Banach-Mazur distance for the subquotient family (default 1).
        #[arg(long)]
        alpha: Option<f64>,
        /// Universal constant in the subquotient threshold (default 1).
        #[arg(long)]
        const_k: Option<f64>,
        /// Budget constant in the density gap thresholds (default 0.17).
        #[arg(long)]
        const_b: Option<f64>,
        /// Slack in the conformal-dimension bound (default 0.01).
        #[arg(long)]
        eta: Option<f64>,
    },

    /// Lower-estimate the p-Poincaré constant of a graph by ratio
    /// maximization (exact closed form doubles as a check at p = 2).
    Poincare {
        /// Graph: a file, or a family spec such as complete:8, cycle:5,
        /// path:4, star:6, complete-bipartite:3x4.
        #[arg(long)]
        graph: Option<String>,
        /// Exponent p >= 1 (default 2).
        #[arg(long)]
        p: Option<f64>,
        /// Target dimension (default 1).
        #[arg(long)]
        k: Option<usize>,
        /// Gradient-ascent restarts (default 32).
        #[arg(long)]
        restarts: Option<u32>,
        /// Ascent iterations per restart (default 5000).
        #[arg(long)]
        max_iters: Option<u32>,
        /// Restrict to functions supported on one side of a bipartition
        /// (complete-bipartite specs only).
        #[arg(long)]
        bipartite: bool,
    },

    /// Two-sided bounds on the first positive p-Laplacian eigenvalue.
    Plaplacian {
        /// Graph: a file or a family spec (see poincare).
        #[arg(long)]
        graph: Option<String>,
        /// Exponent p > 1 (default 2).
        #[arg(long)]
        p: Option<f64>,
        /// Gradient-ascent restarts (default 24).
        #[arg(long)]
        restarts: Option<u32>,
        /// Skip the eigensolve that feeds the gap-driven lower bound.
        #[arg(long)]
        skip_gap: bool,
    },

    /// Midpoint iteration toward a fixed point of an action on a
    /// 2-dimensional complex; prints the energy trace.
    FixedpointDemo {
        /// Complex: "triangle", "octahedron", or a file (default triangle).
        #[arg(long)]
        complex: Option<String>,
        /// Action file in cycle notation (default: trivial action).
        #[arg(long, value_name = "FILE")]
        action: Option<PathBuf>,
        /// Exponent p >= 1 (default 2).
        #[arg(long)]
        p: Option<f64>,
        /// Target dimension (default 1).
        #[arg(long)]
        k: Option<usize>,
        /// Energy tolerance declaring convergence (default 1e-8).
        #[arg(long)]
        tol: Option<f64>,
        /// Step budget (default 200).
        #[arg(long)]
        max_iter: Option<usize>,
    },

    /// Randomized self-check of the perturbation and union gap bounds;
    /// exits 3 if any trial violates a proven inequality.
    UnionCheck {
        /// Number of random graph pairs (default 1000).
        #[arg(long)]
        trials: Option<u32>,
        /// Maximum vertex count per graph (default 8).
        #[arg(long)]
        n: Option<u32>,
    },
}

// ---------------------------------------------------------------------------
// dispatch

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Validation("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let common = Common { out: cli.out, format: cli.format };

    match cli.command {
        Command::ErStats { m, rho, rho_rule, kind, trials } => {
            let params = ErStatsParams::resolve(&cfg, m, rho, rho_rule, kind, trials, cli.seed)?;
            commands::er_stats(params, &common)
        }
        Command::GroupSample { m, model, rho, count, density } => {
            let model = ModelChoice::resolve(&cfg, model, rho, count, density)?;
            commands::group_sample(&cfg, m, model, cli.seed, &common)
        }
        Command::LinkSpectrum { input, m, rho, trials } => match input {
            Some(path) => {
                if m.is_some() || rho.is_some() || trials.is_some() {
                    return Err(CliError::Validation(
                        "--input is exclusive with --m/--rho/--trials".into(),
                    ));
                }
                commands::link_spectrum_file(&path, &common)
            }
            None => commands::link_spectrum_sweep(&cfg, m, rho, trials, cli.seed, &common),
        },
        Command::Certify {
            input,
            model,
            m,
            rho,
            count,
            density,
            trials,
            family,
            alpha,
            const_k,
            const_b,
            eta,
        } => {
            let params = CertifyParams::resolve(&cfg, family, alpha, const_k, const_b, eta)?;
            match input {
                Some(path) => {
                    if model.is_some() || m.is_some() || trials.is_some() {
                        return Err(CliError::Validation(
                            "--input is exclusive with --model/--m/--trials".into(),
                        ));
                    }
                    commands::certify_file(&path, params, &common)
                }
                None => {
                    let model = ModelChoice::resolve(&cfg, model, rho, count, density)?;
                    commands::certify_sweep(&cfg, m, model, trials, cli.seed, params, &common)
                }
            }
        }
        Command::Poincare { graph, p, k, restarts, max_iters, bipartite } => {
            commands::poincare_cmd(
                &cfg, graph, p, k, restarts, max_iters, bipartite, cli.seed, &common,
            )
        }
        Command::Plaplacian { graph, p, restarts, skip_gap } => {
            commands::plaplacian_cmd(&cfg, graph, p, restarts, skip_gap, cli.seed, &common)
        }
        Command::FixedpointDemo { complex, action, p, k, tol, max_iter } => {
            commands::fixedpoint_demo(
                &cfg, complex, action, p, k, tol, max_iter, cli.seed, &common,
            )
        }
        Command::UnionCheck { trials, n } => {
            commands::union_check(&cfg, trials, n, cli.seed, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; only usage errors
            // should exit nonzero.
            let failed = e.use_stderr();
            let _ = e.print();
            return if failed { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
