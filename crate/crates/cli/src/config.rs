//! Run configuration: command defaults, JSON config files and flag overrides,
//! applied in that order.

use std::path::{Path, PathBuf};

use catsim::bell::{ArmConvention, BellSweepConfig};
use catsim::decoherence::{fiber_loss_fraction, BeamSplitterLoss};
use catsim::{GridSpec, HomodyneConfig, InterferometerParams, LossChannel, LossModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Fiber between the source and each analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    /// Fiber length per beam for the figure commands; for `fig11` and `sweep`
    /// a single total separation to evaluate instead of the default list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_km: Option<f64>,
    #[serde(default = "default_attenuation")]
    pub attenuation_db_per_km: f64,
}

fn default_attenuation() -> f64 {
    catsim::bell::DEFAULT_ATTENUATION_DB_PER_KM
}

impl Default for FiberSpec {
    fn default() -> Self {
        FiberSpec {
            distance_km: None,
            attenuation_db_per_km: default_attenuation(),
        }
    }
}

/// Phase and separation grids of a distance sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub phi_values: Vec<f64>,
    pub separations_km: Vec<f64>,
    pub arm_convention: ArmConvention,
    pub estimator: String,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let d = BellSweepConfig::default();
        SweepSpec {
            phi_values: d.phi_values,
            separations_km: d.separations_km,
            arm_convention: d.arm_convention,
            estimator: d.estimator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub params: InterferometerParams,
    #[serde(default)]
    pub loss: Option<LossChannel>,
    #[serde(default)]
    pub fiber: Option<FiberSpec>,
    #[serde(default)]
    pub homodyne: HomodyneConfig,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &str, params: InterferometerParams) -> Self {
        RunConfig {
            command: command.to_string(),
            params,
            loss: None,
            fiber: None,
            homodyne: HomodyneConfig::default(),
            grid: None,
            sweep: None,
            output: None,
            format: Format::Csv,
            threads: None,
        }
    }

    /// The loss acting on each beam: an explicit channel, a fiber length, or none.
    pub fn loss_model(&self) -> Result<Box<dyn LossModel>, AppError> {
        match (&self.loss, &self.fiber) {
            (Some(_), Some(_)) => Err(AppError::config(
                "`loss` and `fiber` are mutually exclusive",
            )),
            (Some(channel), None) => Ok(channel.build()?),
            (None, Some(fiber)) => {
                let d = fiber.distance_km.ok_or_else(|| {
                    AppError::config("`fiber.distance_km` is required for this command")
                })?;
                let g = fiber_loss_fraction(d, fiber.attenuation_db_per_km)?;
                let n0 = self.params.alpha0 * self.params.alpha0;
                Ok(Box::new(BeamSplitterLoss::from_fraction(g, n0)?))
            }
            (None, None) => Ok(Box::new(BeamSplitterLoss::lossless())),
        }
    }

    /// Sweep settings for `fig11` / `sweep`.
    pub fn bell_sweep(&self) -> Result<BellSweepConfig, AppError> {
        if self.loss.is_some() {
            return Err(AppError::config(format!(
                "`{}` takes its loss from `fiber`; remove `loss`",
                self.command
            )));
        }
        let fiber = self.fiber.ok_or_else(|| {
            AppError::config(format!("`{}` requires a `fiber` specification", self.command))
        })?;
        let spec = self.sweep.clone().unwrap_or_default();
        let separations_km = match fiber.distance_km {
            Some(d) => vec![d],
            None => spec.separations_km,
        };
        if self.params.beta0 != self.params.alpha0 {
            return Err(AppError::config(
                "distance sweeps assume a symmetric source (beta0 = alpha0)",
            ));
        }
        let config = BellSweepConfig {
            alpha0: self.params.alpha0,
            phi_values: spec.phi_values,
            separations_km,
            attenuation_db_per_km: fiber.attenuation_db_per_km,
            arm_convention: spec.arm_convention,
            homodyne: self.homodyne,
            estimator: spec.estimator,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Command-line overrides; `None` leaves the configured value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub loss_total_photons: Option<f64>,
    pub loss_per_beam: Option<f64>,
    pub fiber_km: Option<f64>,
    pub fiber_db_per_km: Option<f64>,
    pub lo_phase: Option<f64>,
    pub window: Option<f64>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_n: Option<usize>,
    pub threads: Option<usize>,
}

/// Layers `defaults`, then the JSON file (if any), then `overrides`.
pub fn resolve(
    defaults: RunConfig,
    file: Option<&Path>,
    overrides: &Overrides,
) -> Result<RunConfig, AppError> {
    let mut config = match file {
        None => defaults,
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                AppError::config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            let patch: Value = serde_json::from_str(&text).map_err(|e| {
                AppError::config(format!("invalid JSON in {}: {e}", path.display()))
            })?;
            merge_json(&defaults, patch)?
        }
    };
    apply_overrides(&mut config, overrides)?;
    Ok(config)
}

/// Deep-merges a JSON object onto the serialized defaults. The command name
/// is fixed by the caller and may not be changed by the file.
pub fn merge_json(defaults: &RunConfig, patch: Value) -> Result<RunConfig, AppError> {
    if !patch.is_object() {
        return Err(AppError::config("config file must contain a JSON object"));
    }
    if let Some(cmd) = patch.get("command").and_then(Value::as_str) {
        if cmd != defaults.command {
            return Err(AppError::config(format!(
                "config file is for `{cmd}` but the command is `{}`",
                defaults.command
            )));
        }
    }
    let mut base = serde_json::to_value(defaults).expect("RunConfig serializes");
    merge_value(&mut base, patch);
    serde_json::from_value(base).map_err(|e| AppError::config(format!("invalid config: {e}")))
}

fn merge_value(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_value(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn apply_overrides(c: &mut RunConfig, o: &Overrides) -> Result<(), AppError> {
    if let Some(out) = &o.out {
        c.output = Some(out.clone());
    }
    if let Some(f) = o.format {
        c.format = f;
    }
    if let Some(a) = o.alpha {
        c.params.alpha0 = a;
        c.params.beta0 = a;
    }
    if let Some(phi) = o.phi {
        c.params.phi = phi;
    }
    if let Some(s) = o.sigma1 {
        c.params.sigma1 = s;
    }
    if let Some(s) = o.sigma2 {
        c.params.sigma2 = s;
    }
    let loss_flags = [
        o.loss_total_photons.is_some(),
        o.loss_per_beam.is_some(),
        o.fiber_km.is_some() || o.fiber_db_per_km.is_some(),
    ];
    if loss_flags.iter().filter(|&&f| f).count() > 1 {
        return Err(AppError::usage(
            "--loss-total-photons, --loss-per-beam and --fiber-km/--fiber-db-per-km are mutually exclusive",
        ));
    }
    if let Some(total) = o.loss_total_photons {
        c.loss = Some(LossChannel::beam_splitter_total(total));
        c.fiber = None;
    }
    if let Some(n) = o.loss_per_beam {
        c.loss = Some(LossChannel::beam_splitter(n));
        c.fiber = None;
    }
    if o.fiber_km.is_some() || o.fiber_db_per_km.is_some() {
        let mut fiber = c.fiber.unwrap_or_default();
        if let Some(d) = o.fiber_km {
            fiber.distance_km = Some(d);
        }
        if let Some(a) = o.fiber_db_per_km {
            fiber.attenuation_db_per_km = a;
        }
        c.fiber = Some(fiber);
        c.loss = None;
    }
    if let Some(p) = o.lo_phase {
        c.homodyne.lo_phase = p;
    }
    if let Some(w) = o.window {
        c.homodyne.window = w;
    }
    if o.grid_min.is_some() || o.grid_max.is_some() || o.grid_n.is_some() {
        let base = c.grid.unwrap_or_else(|| GridSpec::covering(&c.params));
        let min = o.grid_min.unwrap_or(base.x1_min);
        let max = o.grid_max.unwrap_or(base.x1_max);
        let n = o.grid_n.unwrap_or(base.n1);
        c.grid = Some(GridSpec::square(min, max, n));
    }
    if let Some(t) = o.threads {
        c.threads = Some(t);
    }
    if c.threads == Some(0) {
        return Err(AppError::usage("--threads must be at least 1"));
    }
    Ok(())
}
