//! The eight retained terms of the nonlocal interferometer and the
//! coincidence probabilities that follow from them when coherent states with
//! different net phase shifts are treated as orthogonal.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::ComplexAmplitude;
use crate::error::{self, Error, Result};

/// Source and analyzer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterferometerParams {
    /// Initial amplitude of laser 1.
    pub alpha0: f64,
    /// Initial amplitude of laser 2.
    pub beta0: f64,
    /// Magnitude of each nonlinear phase shift, radians.
    pub phi: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for InterferometerParams {
    fn default() -> Self {
        InterferometerParams {
            alpha0: 100.0,
            beta0: 100.0,
            phi: 0.02,
            sigma1: 0.0,
            sigma2: 0.0,
        }
    }
}

impl InterferometerParams {
    /// Symmetric source: both beams start with amplitude `alpha0`.
    pub fn symmetric(alpha0: f64, phi: f64, sigma1: f64, sigma2: f64) -> Self {
        InterferometerParams {
            alpha0,
            beta0: alpha0,
            phi,
            sigma1,
            sigma2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        error::non_negative("alpha0", self.alpha0)?;
        error::non_negative("beta0", self.beta0)?;
        if !(self.phi.abs() < PI / 2.0) {
            return Err(Error::domain("phi", self.phi, "a value in (-pi/2, pi/2)"));
        }
        error::finite("sigma1", self.sigma1)?;
        error::finite("sigma2", self.sigma2)?;
        Ok(())
    }

    pub fn with_phases(mut self, sigma1: f64, sigma2: f64) -> Self {
        self.sigma1 = sigma1;
        self.sigma2 = sigma2;
        self
    }

    pub fn delta_sigma(&self) -> f64 {
        self.sigma1 - self.sigma2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// One term of the retained superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTerm {
    pub coefficient: ComplexAmplitude,
    /// (source shift, analyzer shift) applied to beam 1.
    pub beam1_shifts: [Sign; 2],
    pub beam2_shifts: [Sign; 2],
    /// Which branch of the source superposition the term belongs to. Loss
    /// records this branch in the environment.
    pub env_sign: Sign,
}

impl StateTerm {
    /// Net phase of beam 1 in units of phi: -2, 0 or 2.
    pub fn beam1_net(&self) -> i32 {
        self.beam1_shifts[0].value() + self.beam1_shifts[1].value()
    }

    pub fn beam2_net(&self) -> i32 {
        self.beam2_shifts[0].value() + self.beam2_shifts[1].value()
    }
}

#[derive(Clone, Copy)]
enum Phase {
    One,
    Sigma1,
    Sigma2,
    Both,
}

use Sign::{Minus as M, Plus as P};

// (sign, phase, beam-1 shifts, beam-2 shifts), in the order of the retained sum.
const TERMS: [(f64, Phase, [Sign; 2], [Sign; 2]); 8] = [
    (1.0, Phase::Sigma2, [P, P], [M, M]),
    (-1.0, Phase::One, [P, P], [M, P]),
    (-1.0, Phase::Both, [P, M], [M, M]),
    (1.0, Phase::Sigma1, [P, M], [M, P]),
    (-1.0, Phase::Sigma2, [M, P], [P, M]),
    (1.0, Phase::One, [M, P], [P, P]),
    (1.0, Phase::Both, [M, M], [P, M]),
    (-1.0, Phase::Sigma1, [M, M], [P, P]),
];

/// The eight terms accompanying a detection in detectors 1, 3 and 5, each
/// with coefficient of modulus 1/8.
pub fn enumerate_terms(params: &InterferometerParams) -> Vec<StateTerm> {
    enumerate_terms_for(params.sigma1, params.sigma2)
}

pub(crate) fn enumerate_terms_for(sigma1: f64, sigma2: f64) -> Vec<StateTerm> {
    TERMS
        .iter()
        .map(|&(sign, phase, beam1, beam2)| {
            let theta = match phase {
                Phase::One => 0.0,
                Phase::Sigma1 => sigma1,
                Phase::Sigma2 => sigma2,
                Phase::Both => sigma1 + sigma2,
            };
            StateTerm {
                coefficient: Complex64::from_polar(sign / 8.0, theta),
                beam1_shifts: beam1,
                beam2_shifts: beam2,
                env_sign: beam1[0],
            }
        })
        .collect()
}

/// Joint probability of the coincidence with both homodyne results at zero
/// net phase: `sin^2((sigma1 - sigma2) / 2) / 16`.
pub fn ideal_joint_probability(sigma1: f64, sigma2: f64) -> f64 {
    let s = ((sigma1 - sigma2) / 2.0).sin();
    s * s / 16.0
}

/// Normalization constant of the state post-selected on detectors 1, 3, 5:
/// `1 / sqrt(8 - 2 cos(sigma1 - sigma2))`.
pub fn postselected_norm(sigma1: f64, sigma2: f64) -> f64 {
    1.0 / (8.0 - 2.0 * (sigma1 - sigma2).cos()).sqrt()
}

/// Probability of the zero-phase homodyne outcome given that detectors
/// 1, 3 and 5 fired: `(2 - 2 cos D) / (8 - 2 cos D)`.
pub fn conditional_probability(sigma1: f64, sigma2: f64) -> f64 {
    let c = (sigma1 - sigma2).cos();
    (2.0 - 2.0 * c) / (8.0 - 2.0 * c)
}

/// Coincidence rate with the interference term scaled by the visibility `v`,
/// normalized to a unit maximum: `(1 - v cos D) / (1 + v)`.
pub fn normalized_rate(sigma1: f64, sigma2: f64, visibility: f64) -> Result<f64> {
    let v = error::unit_interval("visibility", visibility)?;
    Ok((1.0 - v * (sigma1 - sigma2).cos()) / (1.0 + v))
}

/// Squared norm of the retained sum when coherent states carrying different
/// net phases are orthogonal. Terms with the same (beam 1, beam 2) label add
/// coherently; all others add in quadrature.
pub fn retained_norm_squared(terms: &[StateTerm]) -> f64 {
    let mut by_label: BTreeMap<(i32, i32), Complex64> = BTreeMap::new();
    for t in terms {
        *by_label
            .entry((t.beam1_net(), t.beam2_net()))
            .or_insert_with(|| Complex64::new(0.0, 0.0)) += t.coefficient;
    }
    by_label.values().map(|c| c.norm_sqr()).sum()
}

/// The retained terms rescaled so the post-selected state has unit norm.
pub fn postselected_terms(sigma1: f64, sigma2: f64) -> Vec<StateTerm> {
    let scale = 8.0 * postselected_norm(sigma1, sigma2);
    enumerate_terms_for(sigma1, sigma2)
        .into_iter()
        .map(|mut t| {
            t.coefficient *= scale;
            t
        })
        .collect()
}
