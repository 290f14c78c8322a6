//! CHSH parameter versus nonlinear phase and fiber separation.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoherence::{fiber_loss_fraction, BeamSplitterLoss};
use crate::error::{self, Error, Result};
use crate::homodyne::HomodyneConfig;
use crate::interferometer::InterferometerParams;
use crate::numerics::golden_max;
use crate::visibility::EstimatorRegistry;

/// Fiber attenuation assumed for the distance sweeps, dB/km.
pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 0.15;

/// Bisection tolerance on the separation, km.
pub const RANGE_TOLERANCE_KM: f64 = 0.1;

// Separations beyond this are reported as having no finite cutoff.
const MAX_SEARCH_KM: f64 = 1.0e6;

/// `s = 2 sqrt(2) v`, the CHSH value of a sinusoidal fringe of visibility `v`
/// at the optimal analyzer settings.
pub fn chsh_parameter(visibility: f64) -> Result<f64> {
    let v = error::unit_interval("visibility", visibility)?;
    Ok(2.0 * SQRT_2 * v)
}

/// How the total separation is split into fiber per beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmConvention {
    /// Source in the middle: each beam travels S/2.
    #[default]
    HalfEach,
    /// Each beam travels the full separation S.
    FullOneArm,
}

impl ArmConvention {
    pub fn fiber_per_beam(self, separation_km: f64) -> f64 {
        match self {
            ArmConvention::HalfEach => separation_km / 2.0,
            ArmConvention::FullOneArm => separation_km,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BellSweepConfig {
    pub alpha0: f64,
    pub phi_values: Vec<f64>,
    pub separations_km: Vec<f64>,
    pub attenuation_db_per_km: f64,
    pub arm_convention: ArmConvention,
    pub homodyne: HomodyneConfig,
    /// Name of the visibility estimator to use.
    pub estimator: String,
}

impl Default for BellSweepConfig {
    fn default() -> Self {
        BellSweepConfig {
            alpha0: 100.0,
            phi_values: (1..=25).map(|k| 0.002 * k as f64).collect(),
            separations_km: vec![0.0, 1.0, 2.0, 4.0, 8.2, 10.0, 20.0, 50.0],
            attenuation_db_per_km: DEFAULT_ATTENUATION_DB_PER_KM,
            arm_convention: ArmConvention::HalfEach,
            homodyne: HomodyneConfig::default(),
            estimator: "homodyne".into(),
        }
    }
}

impl BellSweepConfig {
    pub fn validate(&self) -> Result<()> {
        error::non_negative("alpha0", self.alpha0)?;
        error::non_negative("attenuation_db_per_km", self.attenuation_db_per_km)?;
        self.homodyne.validate()?;
        if self.phi_values.is_empty() {
            return Err(Error::Config("phi_values must not be empty".into()));
        }
        for &phi in &self.phi_values {
            if !(phi > 0.0 && phi < FRAC_PI_4) {
                return Err(Error::domain("phi", phi, "a value in (0, pi/4)"));
            }
        }
        if self.phi_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("phi_values must be strictly increasing".into()));
        }
        for &s in &self.separations_km {
            error::non_negative("separation_km", s)?;
        }
        Ok(())
    }

    /// Visibility at one separation and phase.
    pub fn visibility_at(&self, separation_km: f64, phi: f64) -> Result<f64> {
        self.visibility_with(&EstimatorRegistry::default(), separation_km, phi)
    }

    fn visibility_with(&self, registry: &EstimatorRegistry, separation_km: f64, phi: f64) -> Result<f64> {
        let estimator = registry.get(&self.estimator)?;
        let d = self.arm_convention.fiber_per_beam(separation_km);
        let g = fiber_loss_fraction(d, self.attenuation_db_per_km)?;
        let loss = BeamSplitterLoss::from_fraction(g, self.alpha0 * self.alpha0)?;
        let params = InterferometerParams::symmetric(self.alpha0, phi, 0.0, 0.0);
        estimator.visibility(&params, &loss, &self.homodyne)
    }

    /// Best `s` over the phase grid at one separation, refined by golden-section
    /// search between the neighbours of the best grid point.
    pub fn refined_s_max(&self, separation_km: f64) -> Result<(f64, f64)> {
        let registry = EstimatorRegistry::default();
        let s_at = |phi: f64| -> Result<f64> {
            chsh_parameter(self.visibility_with(&registry, separation_km, phi)?)
        };
        let grid: Vec<f64> = self
            .phi_values
            .iter()
            .map(|&phi| s_at(phi))
            .collect::<Result<_>>()?;
        let (k, &best) = grid
            .iter()
            .enumerate()
            .fold((0, &grid[0]), |acc, (i, s)| if *s > *acc.1 { (i, s) } else { acc });
        let n = self.phi_values.len();
        if n < 2 {
            return Ok((self.phi_values[0], best));
        }
        let lo = self.phi_values[k.saturating_sub(1)];
        let hi = self.phi_values[(k + 1).min(n - 1)];
        let mut failure = None;
        let (phi_opt, s_opt) = golden_max(
            |phi| match s_at(phi) {
                Ok(s) => s,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            lo,
            hi,
            1e-7,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if s_opt > best {
            Ok((phi_opt, s_opt))
        } else {
            Ok((self.phi_values[k], best))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub separation_km: f64,
    pub phi: f64,
    pub visibility: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationOptimum {
    pub separation_km: f64,
    pub phi_optimal: f64,
    pub s_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// One row per (separation, phi), separation-major.
    pub rows: Vec<SweepRow>,
    pub optima: Vec<SeparationOptimum>,
}

impl SweepResult {
    pub fn rows_for(&self, separation_km: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows
            .iter()
            .filter(move |r| r.separation_km == separation_km)
    }
}

/// Evaluates every (separation, phi) pair. Cells run in parallel; rows come
/// back in input order.
pub fn sweep(config: &BellSweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let registry = EstimatorRegistry::default();
    registry.get(&config.estimator)?;
    let cells: Vec<(f64, f64)> = config
        .separations_km
        .iter()
        .flat_map(|&s| config.phi_values.iter().map(move |&phi| (s, phi)))
        .collect();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(separation_km, phi)| {
            let visibility = config.visibility_with(&registry, separation_km, phi)?;
            Ok(SweepRow {
                separation_km,
                phi,
                visibility,
                s: chsh_parameter(visibility)?,
            })
        })
        .collect::<Result<_>>()?;

    let optima = rows
        .chunks(config.phi_values.len())
        .map(|chunk| {
            let best = chunk
                .iter()
                .fold(chunk[0], |acc, r| if r.s > acc.s { *r } else { acc });
            SeparationOptimum {
                separation_km: best.separation_km,
                phi_optimal: best.phi,
                s_max: best.s,
            }
        })
        .collect();
    Ok(SweepResult { rows, optima })
}

/// Largest separation at which the CHSH bound is still violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    Finite { separation_km: f64 },
    /// `s_max` never drops to 2 (for example with lossless fiber).
    Unbounded,
}

pub fn violation_range(config: &BellSweepConfig) -> Result<Cutoff> {
    config.validate()?;
    let violates = |s_km: f64| -> Result<bool> { Ok(config.refined_s_max(s_km)?.1 > 2.0) };

    let (_, s0) = config.refined_s_max(0.0)?;
    if s0 <= 2.0 {
        return Err(Error::NoViolation { s_max: s0 });
    }
    if config.attenuation_db_per_km == 0.0 {
        return Ok(Cutoff::Unbounded);
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    while violates(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_SEARCH_KM {
            return Ok(Cutoff::Unbounded);
        }
    }
    while hi - lo > RANGE_TOLERANCE_KM {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Cutoff::Finite { separation_km: lo })
}
