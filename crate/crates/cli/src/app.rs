//! Argument parsing and the run loop shared by the binary and the tests.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use crate::commands::CommandRegistry;
use crate::config::{resolve, Format, Overrides, RunConfig};
use crate::error::{AppError, EXIT_CHECK_FAILED, EXIT_OK};
use crate::output::{encode, sidecar_path, write_file, write_stdout};

const AFTER_HELP: &str = "Commands:
  fig4    normalized coincidence rate without loss
  fig6    normalized coincidence rate after losing 4000 photons
  fig8    homodyne density, alpha = 100, phi = 0.02
  fig9    homodyne density with overlapping states, phi = 0.003
  fig10   homodyne density after losing 100 photons
  fig11   CHSH parameter versus phi and separation (0.15 dB/km)
  sweep   CHSH parameter over a configurable grid
  check   run the invariant and golden-number suite

Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 domain error.";

#[derive(Debug, Parser)]
#[command(
    name = "catsim",
    version,
    about = "Nonlocal interferometry with phase-entangled coherent states",
    after_help = AFTER_HELP,
    allow_negative_numbers = true
)]
struct Cli {
    /// Command to run.
    command: String,
    /// JSON file mirroring the run configuration; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (stdout if omitted). A `<out>.meta.json` sidecar is written next to it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Initial amplitude of both lasers.
    #[arg(long)]
    alpha: Option<f64>,
    /// Nonlinear phase shift, radians.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// Beam-splitter loss, photons lost over both beams together.
    #[arg(long, value_name = "F", conflicts_with_all = ["loss_per_beam", "fiber_km", "fiber_db_per_km"])]
    loss_total_photons: Option<f64>,
    /// Beam-splitter loss, photons lost from each beam.
    #[arg(long, value_name = "F", conflicts_with_all = ["fiber_km", "fiber_db_per_km"])]
    loss_per_beam: Option<f64>,
    /// Fiber length per beam (figures) or total separation (fig11 / sweep), km.
    #[arg(long, value_name = "F")]
    fiber_km: Option<f64>,
    #[arg(long, value_name = "F")]
    fiber_db_per_km: Option<f64>,
    /// Local-oscillator phase, radians.
    #[arg(long, value_name = "F")]
    lo_phase: Option<f64>,
    /// Half-width of the zero-phase acceptance window (0 = point value).
    #[arg(long, value_name = "F")]
    window: Option<f64>,
    #[arg(long, value_name = "F")]
    grid_min: Option<f64>,
    #[arg(long, value_name = "F")]
    grid_max: Option<f64>,
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,
    /// Worker threads for the parallel parts (results do not depend on it).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            format: self.format,
            alpha: self.alpha,
            phi: self.phi,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            loss_total_photons: self.loss_total_photons,
            loss_per_beam: self.loss_per_beam,
            fiber_km: self.fiber_km,
            fiber_db_per_km: self.fiber_db_per_km,
            lo_phase: self.lo_phase,
            window: self.window,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            grid_n: self.grid_n,
            threads: self.threads,
        }
    }
}

/// Runs the CLI and returns the process exit code. Errors go to stderr as a
/// single JSON record.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let message = e.render().to_string();
            let err = AppError::usage(message.trim());
            eprintln!("{}", err.to_json());
            return err.exit_code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, AppError> {
    let registry = CommandRegistry::default();
    let command = registry.get(&cli.command)?;
    let config = resolve(command.defaults(), cli.config.as_deref(), &cli.overrides())?;

    let started = Instant::now();
    let outcome = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::usage(format!("cannot start {n} threads: {e}")))?
            .install(|| command.run(&config))?,
        None => command.run(&config)?,
    };
    let elapsed = started.elapsed().as_secs_f64();

    let bytes = encode(&outcome.table, config.format)?;
    match &config.output {
        Some(path) => {
            write_file(path, &bytes)?;
            let meta = metadata(&config, &outcome, elapsed);
            let mut text = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
            text.push(b'\n');
            write_file(&sidecar_path(path), &text)?;
        }
        None => write_stdout(&bytes)?,
    }
    Ok(if outcome.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn metadata(config: &RunConfig, outcome: &crate::commands::Outcome, elapsed: f64) -> serde_json::Value {
    json!({
        "tool": "catsim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command,
        "config": config,
        "columns": outcome.table.columns,
        "row_count": outcome.table.rows.len(),
        "threads": config.threads.unwrap_or_else(rayon::current_num_threads),
        "wall_time_seconds": elapsed,
        "passed": outcome.passed,
        "results": outcome.summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run(["catsim", "--help"]), 0);
        assert_eq!(run(["catsim", "--version"]), 0);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["catsim"]), 2);
        assert_eq!(run(["catsim", "fig4", "--bogus"]), 2);
        assert_eq!(run(["catsim", "fig5"]), 2);
        assert_eq!(run(["catsim", "fig4", "--loss-per-beam", "1", "--fiber-km", "2"]), 2);
        assert_eq!(run(["catsim", "fig4", "--threads", "0"]), 2);
    }

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from(["catsim", "fig8", "--grid-min", "-3", "--sigma2", "-1.5"]).unwrap();
        assert_eq!(cli.grid_min, Some(-3.0));
        assert_eq!(cli.sigma2, Some(-1.5));
    }
}
