//! Coherent-state algebra.
//!
//! Overlaps, linear attenuation and the quadrature wavefunction of a coherent
//! state in dimensionless units. Wavefunction values are kept as complex
//! logarithms so that amplitudes around |alpha| = 100 (exponents of order 1e4)
//! never pass through `exp` until two of them have been combined.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};

/// Coherent amplitude or probability amplitude.
pub type ComplexAmplitude = Complex64;

/// Single-mode coherent state `|alpha>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentState {
    amplitude: ComplexAmplitude,
}

impl CoherentState {
    pub fn new(amplitude: ComplexAmplitude) -> Result<Self> {
        error::finite("amplitude.re", amplitude.re)?;
        error::finite("amplitude.im", amplitude.im)?;
        let n = amplitude.norm_sqr();
        if !n.is_finite() {
            return Err(Error::domain("mean photon number", n, "a finite value"));
        }
        Ok(CoherentState { amplitude })
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(magnitude, phase))
    }

    pub fn vacuum() -> Self {
        CoherentState {
            amplitude: Complex64::new(0.0, 0.0),
        }
    }

    pub fn amplitude(&self) -> ComplexAmplitude {
        self.amplitude
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitude.norm_sqr()
    }

    /// Phase shift `|alpha> -> |alpha e^{i theta}>`.
    pub fn rotated(&self, theta: f64) -> Self {
        CoherentState {
            amplitude: self.amplitude * Complex64::from_polar(1.0, theta),
        }
    }

    pub(crate) fn scaled(&self, factor: f64) -> Self {
        CoherentState {
            amplitude: self.amplitude * factor,
        }
    }
}

impl fmt::Display for CoherentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{:+.6}{:+.6}i>", self.amplitude.re, self.amplitude.im)
    }
}

/// A complex number stored as `ln|z|` and `arg z`.
///
/// `log_magnitude` may be `-inf` (exact zero) but is never `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAmplitude {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl LogAmplitude {
    pub const ZERO: LogAmplitude = LogAmplitude {
        log_magnitude: f64::NEG_INFINITY,
        phase: 0.0,
    };

    /// Wraps a complex exponent `w`, representing `exp(w)`.
    pub fn from_exponent(w: Complex64) -> Self {
        LogAmplitude {
            log_magnitude: w.re,
            phase: w.im,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Self::ZERO;
        }
        LogAmplitude {
            log_magnitude: z.norm().ln(),
            phase: z.arg(),
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn conj(&self) -> Self {
        LogAmplitude {
            log_magnitude: self.log_magnitude,
            phase: -self.phase,
        }
    }

    pub fn mul(&self, other: &LogAmplitude) -> Self {
        LogAmplitude {
            log_magnitude: self.log_magnitude + other.log_magnitude,
            phase: self.phase + other.phase,
        }
    }

    /// `conj(self) * other`, combined before exponentiation.
    pub fn conj_mul(&self, other: &LogAmplitude) -> Self {
        LogAmplitude {
            log_magnitude: self.log_magnitude + other.log_magnitude,
            phase: other.phase - self.phase,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.log_magnitude == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }
}

/// Inner product `<a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)`.
pub fn overlap(a: &CoherentState, b: &CoherentState) -> ComplexAmplitude {
    let (a, b) = (a.amplitude, b.amplitude);
    // -|a|^2/2 - |b|^2/2 + Re(conj(a) b) == -|a - b|^2 / 2
    let log_magnitude = -0.5 * (a - b).norm_sqr();
    let phase = a.re * b.im - a.im * b.re;
    if log_magnitude.exp() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(log_magnitude.exp(), phase)
}

/// Linear loss removing a fraction `g` of the mean photon number.
///
/// Returns the transmitted and the lost (environment) coherent states.
pub fn attenuate(state: &CoherentState, g: f64) -> Result<(CoherentState, CoherentState)> {
    let g = error::unit_interval("loss fraction", g)?;
    Ok((state.scaled((1.0 - g).sqrt()), state.scaled(g.sqrt())))
}

/// Quadrature wavefunction `psi_alpha(x)` measured with a local oscillator at `lo_phase`.
///
/// The amplitude is rotated by `-lo_phase` first; the result is
/// `pi^{-1/4} exp(-x^2/2 + sqrt(2) x a - |a|^2/2 - a^2/2)` in log form.
pub fn quad_amplitude(state: &CoherentState, x: f64, lo_phase: f64) -> LogAmplitude {
    let a = state.amplitude * Complex64::from_polar(1.0, -lo_phase);
    // Real and imaginary parts of the exponent, grouped so the O(|a|^2)
    // pieces cancel analytically instead of numerically.
    let centre = SQRT_2 * a.re;
    let re = -0.5 * (x - centre) * (x - centre);
    let im = a.im * (SQRT_2 * x - a.re);
    LogAmplitude {
        log_magnitude: re - 0.25 * PI.ln(),
        phase: im,
    }
}

/// Upper bound on the error in telling `|alpha e^{i phi}>` from `|alpha e^{-i phi}>`
/// apart by homodyne detection: `erfc(alpha |sin 2 phi| / sqrt 2)`.
pub fn distinguish_error_bound(alpha: f64, phi: f64) -> Result<f64> {
    let alpha = error::non_negative("alpha", alpha)?;
    error::finite("phi", phi)?;
    let arg = alpha * (2.0 * phi).sin().abs() / SQRT_2;
    Ok(statrs::function::erf::erfc(arg).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cs(re: f64, im: f64) -> CoherentState {
        CoherentState::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn self_overlap_is_one() {
        for a in [cs(0.0, 0.0), cs(3.0, -1.0), cs(100.0, 0.0), cs(-140.0, 140.0)] {
            let o = overlap(&a, &a);
            assert_relative_eq!(o.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(o.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn vacuum_overlap() {
        let b = cs(1.5, -0.7);
        let o = overlap(&CoherentState::vacuum(), &b);
        assert_relative_eq!(o.re, (-b.mean_photon_number() / 2.0).exp(), epsilon = 1e-15);
        assert_relative_eq!(o.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn small_phase_overlap_magnitude() {
        let a = CoherentState::from_polar(250f64.sqrt(), 0.014).unwrap();
        let b = CoherentState::from_polar(250f64.sqrt(), -0.014).unwrap();
        // exp(-4 * 250 * sin^2(0.014))
        assert_relative_eq!(overlap(&a, &b).norm_sqr(), 0.8220227606111685, max_relative = 1e-12);
    }

    #[test]
    fn attenuate_edges() {
        let a = cs(100.0, 0.0);
        let (kept, lost) = attenuate(&a, 0.0).unwrap();
        assert_eq!(kept, a);
        assert_eq!(lost.mean_photon_number(), 0.0);

        let (kept, lost) = attenuate(&a, 1.0).unwrap();
        assert_eq!(kept.mean_photon_number(), 0.0);
        assert_eq!(lost, a);

        let (kept, lost) = attenuate(&a, 0.25).unwrap();
        assert_relative_eq!(kept.amplitude().re, 86.60254037844386, max_relative = 1e-15);
        assert_relative_eq!(lost.amplitude().re, 50.0, max_relative = 1e-15);
        assert_relative_eq!(
            kept.mean_photon_number() + lost.mean_photon_number(),
            1e4,
            max_relative = 1e-15
        );
    }

    #[test]
    fn attenuate_rejects_bad_fraction() {
        let a = cs(1.0, 0.0);
        assert!(matches!(attenuate(&a, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(attenuate(&a, 1.5), Err(Error::Domain { .. })));
        assert!(attenuate(&a, f64::NAN).is_err());
    }

    #[test]
    fn non_finite_amplitude_rejected() {
        assert!(CoherentState::new(Complex64::new(f64::NAN, 0.0)).is_err());
        assert!(CoherentState::new(Complex64::new(1e200, 0.0)).is_err());
    }

    #[test]
    fn vacuum_wavefunction_at_origin() {
        let psi = quad_amplitude(&CoherentState::vacuum(), 0.0, 0.0);
        assert_relative_eq!(psi.magnitude(), 0.7511255444649425, max_relative = 1e-15);
    }

    #[test]
    fn large_amplitude_stays_finite() {
        // Far from the centre the density underflows gracefully, never NaN.
        let a = cs(0.0, -100.0);
        for x in [-300.0, -5.0, 0.0, 5.0, 300.0] {
            let psi = quad_amplitude(&a, x, 0.0);
            assert!(psi.log_magnitude.is_finite());
            assert!(psi.phase.is_finite());
            assert!(!psi.to_complex().re.is_nan());
        }
    }

    #[test]
    fn quadrature_centre_follows_lo_phase() {
        // With the oscillator at pi/2 an amplitude on the real axis centres at x = 0.
        let a = cs(100.0, 0.0);
        let at_centre = quad_amplitude(&a, 0.0, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(at_centre.log_magnitude, -0.25 * PI.ln(), epsilon = 1e-12);
        let unrotated = quad_amplitude(&a, 100.0 * SQRT_2, 0.0);
        assert_relative_eq!(unrotated.log_magnitude, -0.25 * PI.ln(), epsilon = 1e-12);
    }

    #[test]
    fn error_bound_values() {
        assert_eq!(distinguish_error_bound(37.0, 0.0).unwrap(), 1.0);
        // erfc(100 sin(0.04) / sqrt 2) = erfc(2.82767...)
        assert_relative_eq!(
            distinguish_error_bound(100.0, 0.02).unwrap(),
            6.362857509982392e-05,
            max_relative = 1e-9
        );
        assert!(distinguish_error_bound(1e6, 0.3).unwrap() < 1e-300);
        assert!(distinguish_error_bound(-1.0, 0.1).is_err());
    }

    #[test]
    fn log_amplitude_roundtrip() {
        let z = Complex64::new(-0.3, 0.4);
        let back = LogAmplitude::from_complex(z).to_complex();
        assert_relative_eq!(back.re, z.re, epsilon = 1e-15);
        assert_relative_eq!(back.im, z.im, epsilon = 1e-15);
        assert_eq!(LogAmplitude::from_complex(Complex64::new(0.0, 0.0)).to_complex().norm(), 0.0);
    }
}
