//! The commands the CLI can run, looked up by name.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use catsim::bell::{sweep, violation_range, Cutoff};
use catsim::homodyne::{density_grid, JointDensity};
use catsim::interferometer::normalized_rate;
use catsim::numerics::linspace;
use catsim::{GridSpec, InterferometerParams, LossChannel};
use serde_json::{json, Map, Value};

use crate::check::{run_checks, CheckOptions};
use crate::config::{FiberSpec, RunConfig};
use crate::error::AppError;
use crate::output::{Cell, Table};

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Derived quantities recorded in the metadata sidecar.
    pub summary: Map<String, Value>,
    /// False when a check failed.
    pub passed: bool,
}

impl Outcome {
    fn ok(table: Table, summary: Map<String, Value>) -> Self {
        Outcome {
            table,
            summary,
            passed: true,
        }
    }
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    /// Configuration used when neither a config file nor flags say otherwise.
    fn defaults(&self) -> RunConfig;
    fn run(&self, config: &RunConfig) -> Result<Outcome, AppError>;
}

/// `R_N` versus `sigma2` for `sigma1` in {0, pi}, with the visibility set by
/// the decoherence factor alone.
struct RateFigure {
    name: &'static str,
    about: &'static str,
    phi: f64,
    total_photons_lost: f64,
}

const RATE_SAMPLES: usize = 201;

impl Command for RateFigure {
    fn name(&self) -> &'static str {
        self.name
    }

    fn about(&self) -> &'static str {
        self.about
    }

    fn defaults(&self) -> RunConfig {
        let mut c = RunConfig::new(self.name, InterferometerParams::symmetric(100.0, self.phi, 0.0, 0.0));
        if self.total_photons_lost > 0.0 {
            c.loss = Some(LossChannel::beam_splitter_total(self.total_photons_lost));
        }
        // The grid sets the sigma2 axis; partial grid flags refine this one.
        c.grid = Some(GridSpec::square(0.0, 2.0 * PI, RATE_SAMPLES));
        c
    }

    fn run(&self, config: &RunConfig) -> Result<Outcome, AppError> {
        config.params.validate()?;
        let loss = config.loss_model()?;
        let v = loss.cross_term_factor(config.params.phi).clamp(0.0, 1.0);
        let (lo, hi, n) = match config.grid {
            Some(g) => {
                g.validate()?;
                (g.x1_min, g.x1_max, g.n1)
            }
            None => (0.0, 2.0 * PI, RATE_SAMPLES),
        };
        let mut table = Table::new(vec!["sigma1", "sigma2", "r_n"]);
        let mut min_rate = f64::INFINITY;
        for sigma1 in [0.0, PI] {
            for sigma2 in linspace(lo, hi, n) {
                let r = normalized_rate(sigma1, sigma2, v)?;
                min_rate = min_rate.min(r);
                table.push(vec![sigma1.into(), sigma2.into(), r.into()]);
            }
        }
        let mut summary = Map::new();
        summary.insert("loss_model".into(), json!(loss.name()));
        summary.insert("photons_lost_per_beam".into(), json!(loss.photons_lost_per_beam()));
        summary.insert("visibility".into(), json!(v));
        summary.insert("min_r_n".into(), json!(min_rate));
        Ok(Outcome::ok(table, summary))
    }
}

/// `rho(x1, x2)` on a grid.
struct DensityFigure {
    name: &'static str,
    about: &'static str,
    phi: f64,
    sigma1: f64,
    total_photons_lost: f64,
}

impl Command for DensityFigure {
    fn name(&self) -> &'static str {
        self.name
    }

    fn about(&self) -> &'static str {
        self.about
    }

    fn defaults(&self) -> RunConfig {
        let mut c = RunConfig::new(
            self.name,
            InterferometerParams::symmetric(100.0, self.phi, self.sigma1, 0.0),
        );
        if self.total_photons_lost > 0.0 {
            c.loss = Some(LossChannel::beam_splitter_total(self.total_photons_lost));
        }
        c
    }

    fn run(&self, config: &RunConfig) -> Result<Outcome, AppError> {
        let loss = config.loss_model()?;
        let grid = config.grid.unwrap_or_else(|| GridSpec::covering(&config.params));
        let values = density_grid(&config.params, loss.as_ref(), &config.homodyne, &grid)?;
        let exact = JointDensity::new(&config.params, loss.as_ref(), &config.homodyne)?.total_probability();

        let mut table = Table::new(vec!["x1", "x2", "rho"]);
        for (i, &x1) in values.x1.iter().enumerate() {
            for (j, &x2) in values.x2.iter().enumerate() {
                table.push(vec![x1.into(), x2.into(), values.values[i][j].into()]);
            }
        }
        let (i, j) = values.argmax();
        let mut summary = Map::new();
        summary.insert("loss_model".into(), json!(loss.name()));
        summary.insert("photons_lost_per_beam".into(), json!(loss.photons_lost_per_beam()));
        summary.insert("grid".into(), json!(grid));
        summary.insert("max_rho".into(), json!(values.max()));
        summary.insert("argmax".into(), json!([values.x1[i], values.x2[j]]));
        summary.insert("min_rho".into(), json!(values.min()));
        summary.insert("grid_integral".into(), json!(values.integral()));
        summary.insert("exact_total_probability".into(), json!(exact));
        Ok(Outcome::ok(table, summary))
    }
}

/// CHSH parameter over separations and phases.
struct SweepCommand {
    name: &'static str,
    about: &'static str,
}

impl Command for SweepCommand {
    fn name(&self) -> &'static str {
        self.name
    }

    fn about(&self) -> &'static str {
        self.about
    }

    fn defaults(&self) -> RunConfig {
        let mut c = RunConfig::new(self.name, InterferometerParams::symmetric(100.0, 0.01, 0.0, 0.0));
        c.fiber = Some(FiberSpec::default());
        c
    }

    fn run(&self, config: &RunConfig) -> Result<Outcome, AppError> {
        let bell = config.bell_sweep()?;
        let result = sweep(&bell)?;
        let mut table = Table::new(vec!["separation_km", "phi", "visibility", "s"]);
        for r in &result.rows {
            table.push(vec![r.separation_km.into(), r.phi.into(), r.visibility.into(), r.s.into()]);
        }
        let mut summary = Map::new();
        summary.insert("sweep".into(), json!(bell));
        summary.insert("optima".into(), json!(result.optima));
        let cutoff = match violation_range(&bell) {
            Ok(Cutoff::Finite { separation_km }) => json!({ "separation_km": separation_km }),
            Ok(Cutoff::Unbounded) => json!("unbounded"),
            Err(e) => json!({ "error": e.to_string() }),
        };
        summary.insert("violation_cutoff".into(), cutoff);
        Ok(Outcome::ok(table, summary))
    }
}

struct CheckCommand;

impl Command for CheckCommand {
    fn name(&self) -> &'static str {
        "check"
    }

    fn about(&self) -> &'static str {
        "run the invariant and golden-number suite"
    }

    fn defaults(&self) -> RunConfig {
        RunConfig::new("check", InterferometerParams::default())
    }

    fn run(&self, _config: &RunConfig) -> Result<Outcome, AppError> {
        let results = run_checks(CheckOptions::default());
        let mut table = Table::new(vec!["module", "item", "status", "detail"]);
        for r in &results {
            let status = if r.passed { "PASS" } else { "FAIL" };
            table.push(vec![r.module.into(), r.name.clone().into(), status.into(), Cell::Text(r.detail.clone())]);
        }
        let failed = results.iter().filter(|r| !r.passed).count();
        let mut summary = Map::new();
        summary.insert("items".into(), json!(results.len()));
        summary.insert("failed".into(), json!(failed));
        Ok(Outcome {
            table,
            summary,
            passed: failed == 0,
        })
    }
}

pub struct CommandRegistry {
    commands: BTreeMap<&'static str, Box<dyn Command>>,
}

impl CommandRegistry {
    pub fn empty() -> Self {
        CommandRegistry {
            commands: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, command: Box<dyn Command>) {
        self.commands.insert(command.name(), command);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.commands.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Command> {
        self.commands.values().map(|c| c.as_ref())
    }

    pub fn get(&self, name: &str) -> Result<&dyn Command, AppError> {
        self.commands.get(name).map(|c| c.as_ref()).ok_or_else(|| {
            AppError::usage(format!(
                "unknown command `{name}` (known: {})",
                self.names().join(", ")
            ))
        })
    }
}

impl Default for CommandRegistry {
    fn default() -> Self {
        let mut r = CommandRegistry::empty();
        r.register(Box::new(RateFigure {
            name: "fig4",
            about: "normalized coincidence rate without loss",
            phi: 0.02,
            total_photons_lost: 0.0,
        }));
        r.register(Box::new(RateFigure {
            name: "fig6",
            about: "normalized coincidence rate after losing 4000 photons (phi = 0.01)",
            phi: 0.01,
            total_photons_lost: 4000.0,
        }));
        r.register(Box::new(DensityFigure {
            name: "fig8",
            about: "homodyne density, alpha = 100, phi = 0.02, no loss",
            phi: 0.02,
            sigma1: 0.0,
            total_photons_lost: 0.0,
        }));
        r.register(Box::new(DensityFigure {
            name: "fig9",
            about: "homodyne density with overlapping states, phi = 0.003, sigma1 - sigma2 = pi",
            phi: 0.003,
            sigma1: PI,
            total_photons_lost: 0.0,
        }));
        r.register(Box::new(DensityFigure {
            name: "fig10",
            about: "homodyne density after losing 100 photons, phi = 0.02",
            phi: 0.02,
            sigma1: 0.0,
            total_photons_lost: 100.0,
        }));
        r.register(Box::new(SweepCommand {
            name: "fig11",
            about: "CHSH parameter versus phi and separation, 0.15 dB/km fiber",
        }));
        r.register(Box::new(SweepCommand {
            name: "sweep",
            about: "CHSH parameter over a configurable phi / separation grid",
        }));
        r.register(Box::new(CheckCommand));
        r
    }
}
