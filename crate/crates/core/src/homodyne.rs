//! Joint homodyne probability density of the two beams.
//!
//! The eight retained terms are each a product of two single-mode quadrature
//! wavefunctions. The density is the Hermitian form over all 64 pairs of
//! terms; pairs whose environment records differ are weighted by the real
//! two-beam environment overlap. Every pair is combined in log form before
//! exponentiation.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::{attenuate, overlap, quad_amplitude, CoherentState, ComplexAmplitude, LogAmplitude};
use crate::decoherence::LossModel;
use crate::error::{self, Error, Result};
use crate::interferometer::{enumerate_terms_for, InterferometerParams, Sign};
use crate::numerics::{composite_rule, golden_max, linspace, linspace_at};

/// Samples of the analyzer phase difference used to locate fringe extrema.
pub const FRINGE_SAMPLES: usize = 64;

/// Common-phase samples averaged over when forming a fringe; exact for the
/// second-order trigonometric dependence of the density on the common phase.
const COMMON_PHASE_SAMPLES: usize = 4;

// Width of one Gauss-Legendre panel for windowed rates, in quadrature units.
const WINDOW_PANEL_WIDTH: f64 = 0.5;
const WINDOW_PANEL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HomodyneConfig {
    /// Local-oscillator phase, radians.
    pub lo_phase: f64,
    /// Half-width of the zero-phase acceptance square; 0 evaluates the density
    /// at the origin.
    pub window: f64,
}

impl Default for HomodyneConfig {
    fn default() -> Self {
        HomodyneConfig {
            lo_phase: FRAC_PI_2,
            window: 0.0,
        }
    }
}

impl HomodyneConfig {
    pub fn validate(&self) -> Result<()> {
        error::finite("lo_phase", self.lo_phase)?;
        error::non_negative("window", self.window)?;
        Ok(())
    }
}

/// One retained term with its (attenuated) coherent labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTerm {
    pub coefficient: ComplexAmplitude,
    pub beam1: CoherentState,
    pub beam2: CoherentState,
    pub env_sign: Sign,
}

/// Builds the eight terms. Loss acts between the source shift and the
/// analyzer shift, removing the fraction `n_lost / alpha0^2` from each beam.
pub fn joint_amplitude_terms(
    params: &InterferometerParams,
    loss: &dyn LossModel,
    config: &HomodyneConfig,
) -> Result<Vec<JointTerm>> {
    params.validate()?;
    config.validate()?;
    let g = loss_fraction(params, loss)?;
    let alpha = CoherentState::from_polar(params.alpha0, 0.0)?;
    let beta = CoherentState::from_polar(params.beta0, 0.0)?;
    let phi = params.phi;

    let label = |start: &CoherentState, shifts: [Sign; 2]| -> Result<CoherentState> {
        let after_source = start.rotated(phi * shifts[0].value() as f64);
        let (kept, _lost) = attenuate(&after_source, g)?;
        Ok(kept.rotated(phi * shifts[1].value() as f64))
    };

    enumerate_terms_for(params.sigma1, params.sigma2)
        .into_iter()
        .map(|t| {
            Ok(JointTerm {
                coefficient: t.coefficient,
                beam1: label(&alpha, t.beam1_shifts)?,
                beam2: label(&beta, t.beam2_shifts)?,
                env_sign: t.env_sign,
            })
        })
        .collect()
}

fn loss_fraction(params: &InterferometerParams, loss: &dyn LossModel) -> Result<f64> {
    let n_lost = error::non_negative("n_lost", loss.photons_lost_per_beam())?;
    if n_lost == 0.0 {
        return Ok(0.0);
    }
    let n0 = params.alpha0 * params.alpha0;
    let g = n_lost / n0;
    if !(g <= 1.0) {
        return Err(Error::domain(
            "n_lost",
            n_lost,
            "at most the initial photon number alpha0^2",
        ));
    }
    Ok(g)
}

/// The joint density for fixed parameters, ready to be evaluated pointwise.
#[derive(Debug, Clone)]
pub struct JointDensity {
    params: InterferometerParams,
    terms: Vec<JointTerm>,
    cross: f64,
    lo_phase: f64,
}

impl JointDensity {
    pub fn new(
        params: &InterferometerParams,
        loss: &dyn LossModel,
        config: &HomodyneConfig,
    ) -> Result<Self> {
        let terms = joint_amplitude_terms(params, loss, config)?;
        let cross = loss.cross_term_factor(params.phi);
        error::unit_interval("cross-term factor", cross)?;
        Ok(JointDensity {
            params: *params,
            terms,
            cross,
            lo_phase: config.lo_phase,
        })
    }

    pub fn terms(&self) -> &[JointTerm] {
        &self.terms
    }

    /// Same labels and loss, new analyzer phases.
    pub fn rephased(&self, sigma1: f64, sigma2: f64) -> Self {
        let mut out = self.clone();
        out.params = out.params.with_phases(sigma1, sigma2);
        for (t, fresh) in out.terms.iter_mut().zip(enumerate_terms_for(sigma1, sigma2)) {
            t.coefficient = fresh.coefficient;
        }
        out
    }

    /// `rho(x1, x2)`.
    pub fn at(&self, x1: f64, x2: f64) -> f64 {
        self.at_with_scale(x1, x2).0
    }

    // The density together with the sum of the magnitudes of its pair terms,
    // which bounds the rounding error of the sum.
    fn at_with_scale(&self, x1: f64, x2: f64) -> (f64, f64) {
        let amps: [LogAmplitude; 8] = std::array::from_fn(|j| {
            let t = &self.terms[j];
            LogAmplitude::from_complex(t.coefficient)
                .mul(&quad_amplitude(&t.beam1, x1, self.lo_phase))
                .mul(&quad_amplitude(&t.beam2, x2, self.lo_phase))
        });

        let mut sum = 0.0;
        let mut scale = 0.0;
        for i in 0..8 {
            for j in i..8 {
                let pair = amps[i].conj_mul(&amps[j]);
                let weight = if self.terms[i].env_sign == self.terms[j].env_sign {
                    1.0
                } else {
                    self.cross
                };
                let magnitude = pair.log_magnitude.exp();
                let multiplicity = if i == j { 1.0 } else { 2.0 };
                sum += multiplicity * weight * magnitude * pair.phase.cos();
                scale += multiplicity * magnitude;
            }
        }
        if sum < 0.0 && -sum <= 1e-13 * scale {
            (0.0, scale)
        } else {
            (sum, scale)
        }
    }

    /// `\int\int rho`, from the exact coherent-state overlaps:
    /// `sum_ij conj(c_i) c_j E_ij <a_i|a_j> <b_i|b_j>`. Differs from the
    /// orthogonal-state value `(8 - 2 cos D) / 64` by the residual overlaps.
    pub fn total_probability(&self) -> f64 {
        let mut sum = 0.0;
        for (i, ti) in self.terms.iter().enumerate() {
            for tj in &self.terms[i..] {
                let weight = if ti.env_sign == tj.env_sign { 1.0 } else { self.cross };
                let pair = ti.coefficient.conj()
                    * tj.coefficient
                    * overlap(&ti.beam1, &tj.beam1)
                    * overlap(&ti.beam2, &tj.beam2);
                let multiplicity = if std::ptr::eq(ti, tj) { 1.0 } else { 2.0 };
                sum += multiplicity * weight * pair.re;
            }
        }
        sum
    }

    /// Probability of a zero-phase result: the density at the origin, or its
    /// integral over `[-w, w]^2` for a window `w > 0`.
    pub fn zero_phase_rate(&self, window: f64) -> f64 {
        self.zero_phase_with_scale(window).0
    }

    fn zero_phase_with_scale(&self, window: f64) -> (f64, f64) {
        if window == 0.0 {
            return self.at_with_scale(0.0, 0.0);
        }
        let panels = ((2.0 * window) / WINDOW_PANEL_WIDTH).ceil().max(1.0) as usize;
        let rule = composite_rule(-window, window, panels, WINDOW_PANEL_ORDER);
        let mut rate = 0.0;
        let mut scale = 0.0;
        for &(x1, w1) in &rule {
            for &(x2, w2) in &rule {
                let (r, s) = self.at_with_scale(x1, x2);
                rate += w1 * w2 * r;
                scale += w1 * w2 * s;
            }
        }
        (rate, scale)
    }

    /// Zero-phase rate at analyzer phase difference `delta`, averaged over the
    /// common analyzer phase so that only the nonlocal dependence remains.
    pub fn fringe_rate(&self, delta: f64, window: f64) -> f64 {
        self.fringe_with_scale(delta, window).0
    }

    fn fringe_with_scale(&self, delta: f64, window: f64) -> (f64, f64) {
        let (rate, scale) = (0..COMMON_PHASE_SAMPLES)
            .map(|k| {
                let m = 2.0 * PI * k as f64 / COMMON_PHASE_SAMPLES as f64;
                self.rephased(m + delta / 2.0, m - delta / 2.0)
                    .zero_phase_with_scale(window)
            })
            .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
        let n = COMMON_PHASE_SAMPLES as f64;
        (rate / n, scale / n)
    }
}

/// `rho(x1, x2)` for a single point.
pub fn joint_density(
    params: &InterferometerParams,
    loss: &dyn LossModel,
    config: &HomodyneConfig,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    error::finite("x1", x1)?;
    error::finite("x2", x2)?;
    Ok(JointDensity::new(params, loss, config)?.at(x1, x2))
}

pub fn zero_phase_rate(
    params: &InterferometerParams,
    loss: &dyn LossModel,
    config: &HomodyneConfig,
) -> Result<f64> {
    Ok(JointDensity::new(params, loss, config)?.zero_phase_rate(config.window))
}

/// Fringe visibility `(Rmax - Rmin) / (Rmax + Rmin)` of the zero-phase rate
/// as the analyzer phase difference sweeps a full period, counted only when
/// the fringe has the ideal orientation (maximum at a phase difference of pi).
/// An inverted fringe gives 0; see [`signed_visibility_via_homodyne`].
pub fn visibility_via_homodyne(
    params: &InterferometerParams,
    loss: &dyn LossModel,
    config: &HomodyneConfig,
) -> Result<f64> {
    Ok(signed_visibility_via_homodyne(params, loss, config)?.max(0.0))
}

/// Fringe contrast in `[-1, 1]`, negative when the rate is larger at equal
/// analyzer phases than at opposite ones (the reverse of the ideal law
/// `P ~ sin^2(delta / 2)`). This happens when heavily attenuated, barely
/// separated coherent states dominate the zero-phase rate.
pub fn signed_visibility_via_homodyne(
    params: &InterferometerParams,
    loss: &dyn LossModel,
    config: &HomodyneConfig,
) -> Result<f64> {
    let density = JointDensity::new(params, loss, config)?;
    let window = config.window;
    let step = 2.0 * PI / FRINGE_SAMPLES as f64;
    let mut rates = Vec::with_capacity(FRINGE_SAMPLES);
    let mut scale: f64 = 0.0;
    for k in 0..FRINGE_SAMPLES {
        let (r, s) = density.fringe_with_scale(k as f64 * step, window);
        rates.push(r);
        scale = scale.max(s);
    }

    let (imax, _) = extreme(&rates, |a, b| a > b);
    let (imin, _) = extreme(&rates, |a, b| a < b);
    let refine = |centre: usize, sign: f64| {
        let c = centre as f64 * step;
        let (_, best) = golden_max(
            |d| sign * density.fringe_rate(d, window),
            c - step,
            c + step,
            1e-9,
        );
        sign * best
    };
    let r_max = refine(imax, 1.0).max(rates[imax]);
    let r_min = refine(imin, -1.0).min(rates[imin]).max(0.0);

    // Rates at the rounding level of the pair sum carry no fringe.
    if !(r_max + r_min > 1e-12 * scale) {
        return Err(Error::NoInterference);
    }
    let contrast = ((r_max - r_min) / (r_max + r_min)).clamp(0.0, 1.0);
    // The averaged rate is A + B cos(delta - delta0); its orientation is
    // read off the two ends of the period.
    let at_pi = rates[FRINGE_SAMPLES / 2];
    let at_zero = rates[0];
    Ok(if at_pi >= at_zero { contrast } else { -contrast })
}

fn extreme(xs: &[f64], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = (0, xs[0]);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if better(x, best.1) {
            best = (i, x);
        }
    }
    best
}

/// Rectangular sampling grid over (x1, x2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
    pub n1: usize,
    pub n2: usize,
}

impl GridSpec {
    pub fn square(min: f64, max: f64, n: usize) -> Self {
        GridSpec {
            x1_min: min,
            x1_max: max,
            x2_min: min,
            x2_max: max,
            n1: n,
            n2: n,
        }
    }

    /// Square grid reaching 6 units past the outermost peak,
    /// `sqrt(2) alpha0 sin(2 phi)`, with 201 points per axis.
    pub fn covering(params: &InterferometerParams) -> Self {
        let amp = params.alpha0.max(params.beta0);
        let half = SQRT_2 * amp * (2.0 * params.phi).sin().abs() + 6.0;
        GridSpec::square(-half, half, 201)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("x1_min", self.x1_min),
            ("x1_max", self.x1_max),
            ("x2_min", self.x2_min),
            ("x2_max", self.x2_max),
        ] {
            error::finite(name, v)?;
        }
        if !(self.x1_min < self.x1_max) {
            return Err(Error::domain("x1_max", self.x1_max, "greater than x1_min"));
        }
        if !(self.x2_min < self.x2_max) {
            return Err(Error::domain("x2_max", self.x2_max, "greater than x2_min"));
        }
        if self.n1 < 2 || self.n2 < 2 {
            return Err(Error::domain(
                "resolution",
                self.n1.min(self.n2) as f64,
                "at least 2 points per axis",
            ));
        }
        Ok(())
    }
}

/// Sampled density; `values[i][j]` is `rho(x1[i], x2[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl DensityGrid {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest sample.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > self.values[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        let w = |xs: &[f64], i: usize| -> f64 {
            let n = xs.len();
            let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
            0.5 * (left + right)
        };
        self.values
            .iter()
            .enumerate()
            .map(|(i, row)| {
                w(&self.x1, i)
                    * row
                        .iter()
                        .enumerate()
                        .map(|(j, v)| w(&self.x2, j) * v)
                        .sum::<f64>()
            })
            .sum()
    }
}

/// Evaluates the density on every grid point. Rows are computed in parallel;
/// each value depends only on its own coordinates.
pub fn density_grid(
    params: &InterferometerParams,
    loss: &dyn LossModel,
    config: &HomodyneConfig,
    grid: &GridSpec,
) -> Result<DensityGrid> {
    grid.validate()?;
    let density = JointDensity::new(params, loss, config)?;
    let x1 = linspace(grid.x1_min, grid.x1_max, grid.n1);
    let x2 = linspace(grid.x2_min, grid.x2_max, grid.n2);
    let values = (0..grid.n1)
        .into_par_iter()
        .map(|i| {
            let a = linspace_at(grid.x1_min, grid.x1_max, grid.n1, i);
            x2.iter().map(|&b| density.at(a, b)).collect()
        })
        .collect();
    Ok(DensityGrid { x1, x2, values })
}
