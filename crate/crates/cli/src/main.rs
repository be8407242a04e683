use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mediatrix_core::export::{render_svg, CurveDocument};
use mediatrix_core::pipeline;
use mediatrix_core::scenario::{self, Scenario, ViewProjection};

/// Environment variable holding the worker-thread count.
const WORKERS_ENV: &str = "MEDIATRIX_WORKERS";

#[derive(Parser)]
#[command(
    name = "mediatrix",
    version,
    about = "Trace and analyse mediatrices on surfaces of revolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a bundled scenario by name.
    Run {
        config: String,
        /// Output directory; `out/<scenario>` when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled scenarios.
    ListScenarios,
    /// Render a curve.json as SVG.
    Render {
        curve: PathBuf,
        #[arg(long, value_enum, default_value_t = Projection::ChartPlane)]
        projection: Projection,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Projection {
    #[value(name = "chart_plane")]
    ChartPlane,
    #[value(name = "orthographic_3d")]
    Orthographic3d,
}

impl From<Projection> for ViewProjection {
    fn from(p: Projection) -> Self {
        match p {
            Projection::ChartPlane => ViewProjection::ChartPlane,
            Projection::Orthographic3d => ViewProjection::Orthographic3d,
        }
    }
}

const EXIT_FAILED_ANALYSIS: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn load_config(config: &str) -> Result<String, String> {
    let path = Path::new(config);
    if path.exists() {
        return fs::read_to_string(path).map_err(|e| format!("cannot read {config}: {e}"));
    }
    scenario::bundled_source(config)
        .map(str::to_string)
        .ok_or_else(|| format!("{config} is neither a file nor a bundled scenario"))
}

fn run(config: &str, out: Option<PathBuf>) -> Result<bool, String> {
    let text = load_config(config)?;
    let name = Scenario::from_toml(&text).map_err(|e| e.to_string())?.name;
    let out = out.unwrap_or_else(|| Path::new("out").join(&name));
    let manifest = pipeline::run(&text, &out).map_err(|e| e.to_string())?;
    for (analysis, passed) in &manifest.analyses {
        println!("{:<18} {}", analysis, if *passed { "pass" } else { "FAIL" });
    }
    println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
    Ok(manifest.passed)
}

fn render(curve: &Path, projection: Projection, out: Option<PathBuf>) -> Result<(), String> {
    let text = fs::read_to_string(curve).map_err(|e| format!("cannot read {}: {e}", curve.display()))?;
    let doc: CurveDocument = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", curve.display()))?;
    let svg = render_svg(&doc, projection.into()).map_err(|e| e.to_string())?;
    match out {
        Some(path) => fs::write(&path, svg).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{svg}");
            Ok(())
        }
    }
}

fn configure_workers() -> Result<(), String> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{WORKERS_ENV} must be a positive integer, got {value:?}"))?;
    pipeline::set_worker_count(workers).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR);
    }
    let result = match cli.command {
        Command::Run { config, out } => run(&config, out).map(|passed| {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED_ANALYSIS)
            }
        }),
        Command::ListScenarios => {
            for (name, text) in scenario::bundled() {
                let description = Scenario::from_toml(text).map(|s| s.description).unwrap_or_default();
                println!("{name:<18} {description}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { curve, projection, out } => render(&curve, projection, out).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_ERROR)
    })
}
