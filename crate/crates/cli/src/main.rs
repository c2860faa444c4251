//! `simploscore`: turn MIDI into evolving simplicial complexes and report
//! their topology, curvature and trend fits.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error, 3 internal
//! consistency failure. Log level comes from `SIMPLOSCORE_LOG`.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use simploscore::curvature::CurvatureError;
use simploscore::evolution::EvolutionError;
use simploscore::fitting::FitError;
use simploscore::homology::HomologyError;
use simploscore::ingest::IngestError;

#[derive(Debug)]
pub enum AppError {
    /// Bad flags or configuration (exit 2).
    Usage(String),
    /// Unreadable or unusable input data (exit 1).
    Data(String),
    /// A violated internal invariant; aborts the run (exit 3).
    Internal(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Data(_) => 1,
            AppError::Usage(_) => 2,
            AppError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "usage error: {m}"),
            AppError::Data(m) => write!(f, "data error: {m}"),
            AppError::Internal(m) => write!(f, "internal consistency failure: {m}"),
        }
    }
}

impl From<HomologyError> for AppError {
    fn from(e: HomologyError) -> Self {
        match e {
            HomologyError::Consistency(_) => AppError::Internal(e.to_string()),
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<EvolutionError> for AppError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::BadWindow
            | EvolutionError::WindowTooLarge { .. }
            | EvolutionError::SlidingByElements
            | EvolutionError::MeasuresNotAssigned
            | EvolutionError::UnknownVariant { .. } => AppError::Usage(e.to_string()),
            EvolutionError::EmptySequence | EvolutionError::SeriesTooShort { .. } => {
                AppError::Data(e.to_string())
            }
            EvolutionError::Homology(h) => h.into(),
            EvolutionError::Curvature(c) => c.into(),
        }
    }
}

impl From<CurvatureError> for AppError {
    fn from(e: CurvatureError) -> Self {
        match e {
            CurvatureError::UnknownMode(_) => AppError::Usage(e.to_string()),
            CurvatureError::SeriesTooShort { .. } => AppError::Data(e.to_string()),
            CurvatureError::MissingSimplex(_)
            | CurvatureError::MissingVertex(_)
            | CurvatureError::OrderZero => AppError::Internal(e.to_string()),
        }
    }
}

impl From<IngestError> for AppError {
    fn from(e: IngestError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<FitError> for AppError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::NotConverged { iterations, best } => AppError::Data(format!(
                "fit did not converge within {iterations} iterations; best parameters {:?} (r2 {:.6})",
                best.params, best.r_squared
            )),
            other => AppError::Data(other.to_string()),
        }
    }
}

/// Flags shared by every subcommand (CLI > `--config` file > defaults).
#[derive(Debug, Default, Clone, Args)]
pub struct SharedOpts {
    /// Simultaneity tolerance in beats, e.g. 1/16
    #[arg(long, value_name = "BEATS")]
    pub epsilon_beats: Option<String>,
    /// Beats per measure override (required when the file has no time signature)
    #[arg(long, value_name = "BEATS")]
    pub beats_per_measure: Option<String>,
    /// Anacrusis length in beats; measure counting starts after it
    #[arg(long, value_name = "BEATS")]
    pub pickup_beats: Option<String>,
    /// Temporal scheme: cumulative or sliding
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,
    /// Sliding window width in measures
    #[arg(long, value_name = "N")]
    pub window: Option<usize>,
    /// Sliding window stride in measures
    #[arg(long, value_name = "N")]
    pub stride: Option<usize>,
    /// Step unit for cumulative runs: measure or element
    #[arg(long, value_name = "UNIT")]
    pub step_unit: Option<String>,
    /// Vertex curvature mode: forman_sum, forman_mean or angle_deficit
    #[arg(long, value_name = "MODE")]
    pub curvature: Option<String>,
    /// Trend model: linear, exp or poly:N
    #[arg(long, value_name = "MODEL")]
    pub model: Option<String>,
    /// Pin the exponential offset C to zero
    #[arg(long)]
    pub exp_no_offset: bool,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma list of output formats: csv,json,svg
    #[arg(long, value_name = "LIST")]
    pub format: Option<String>,
    /// TOML config file with the same keys as the long flags
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "simploscore",
    version,
    about = "Topological and geometric analysis of symbolic music via simplicial complexes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full-piece report: simplex counts, Betti numbers, Euler characteristic, curvature
    Analyze {
        /// MIDI input file(s)
        #[arg(required = true, value_name = "MIDI")]
        inputs: Vec<PathBuf>,
        /// Also export the boundary matrices B_1..B_d as CSV
        #[arg(long)]
        export_matrices: bool,
        #[command(flatten)]
        opts: SharedOpts,
    },
    /// Per-step topology and curvature series (cumulative or sliding window)
    Evolve {
        #[arg(required = true, value_name = "MIDI")]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        opts: SharedOpts,
    },
    /// Fit a trend model to columns of a series CSV
    Fit {
        /// Series CSV produced by `evolve`
        #[arg(value_name = "CSV")]
        series: PathBuf,
        /// Column used as x
        #[arg(long, default_value = "t_norm", value_name = "NAME")]
        x_col: String,
        /// Column used as y
        #[arg(long, default_value = "euler_norm", value_name = "NAME")]
        y_col: String,
        #[command(flatten)]
        opts: SharedOpts,
    },
    /// Total vertex curvature against Euler characteristic with a fitted line
    GaussBonnet {
        #[arg(required = true, value_name = "MIDI")]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        opts: SharedOpts,
    },
    /// Render series CSV columns to an SVG line plot
    Plot {
        #[arg(value_name = "CSV")]
        series: PathBuf,
        #[arg(long, default_value = "t_norm", value_name = "NAME")]
        x_col: String,
        /// Comma list of columns to draw
        #[arg(long, default_value = "euler_norm", value_name = "LIST")]
        y_cols: String,
        #[command(flatten)]
        opts: SharedOpts,
    },
}

/// Outputs are named by file stem, so two inputs sharing a stem would write
/// over each other (concurrently, at that).
fn reject_colliding_stems(inputs: &[PathBuf]) -> Result<(), AppError> {
    let mut seen = std::collections::HashMap::new();
    for input in inputs {
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if let Some(first) = seen.insert(stem.clone(), input) {
            return Err(AppError::Usage(format!(
                "inputs {} and {} share the output stem `{stem}`; their artifacts would collide",
                first.display(),
                input.display()
            )));
        }
    }
    Ok(())
}

/// Run one job per input file; files are independent, so they run on
/// separate threads. Summaries print in input order.
fn run_batch<F>(inputs: &[PathBuf], job: F) -> i32
where
    F: Fn(&PathBuf) -> Result<String, AppError> + Sync,
{
    let results: Vec<Result<String, AppError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .iter()
            .map(|input| scope.spawn(|| job(input)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("job thread panicked"))
            .collect()
    });
    let mut code = 0;
    for result in results {
        match result {
            Ok(summary) => println!("{summary}"),
            Err(e) => {
                eprintln!("{e}");
                code = code.max(e.exit_code());
            }
        }
    }
    code
}

fn run(cli: Cli) -> i32 {
    let outcome: Result<i32, AppError> = (|| match &cli.command {
        Command::Analyze {
            inputs,
            export_matrices,
            opts,
        } => {
            let settings = config::resolve(opts)?;
            reject_colliding_stems(inputs)?;
            Ok(run_batch(inputs, |input| {
                commands::analyze(input, &settings, *export_matrices)
            }))
        }
        Command::Evolve { inputs, opts } => {
            let settings = config::resolve(opts)?;
            reject_colliding_stems(inputs)?;
            Ok(run_batch(inputs, |input| commands::evolve(input, &settings)))
        }
        Command::GaussBonnet { inputs, opts } => {
            let settings = config::resolve(opts)?;
            reject_colliding_stems(inputs)?;
            Ok(run_batch(inputs, |input| {
                commands::gauss_bonnet(input, &settings)
            }))
        }
        Command::Fit {
            series,
            x_col,
            y_col,
            opts,
        } => {
            let settings = config::resolve(opts)?;
            let summary = commands::fit(series, &settings, x_col, y_col)?;
            println!("{summary}");
            Ok(0)
        }
        Command::Plot {
            series,
            x_col,
            y_cols,
            opts,
        } => {
            let settings = config::resolve(opts)?;
            let summary = commands::plot(series, &settings, x_col, y_cols)?;
            println!("{summary}");
            Ok(0)
        }
    })();

    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn main() {
    env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("SIMPLOSCORE_LOG", "warn"),
    )
    .init();
    let cli = Cli::parse();
    std::process::exit(run(cli));
}
