//! Property tests for coherent-state overlaps, attenuation and quadrature
//! wavefunctions, checked against independent oracles.

use std::f64::consts::{PI, SQRT_2};

use catsim::coherent::{attenuate, overlap, quad_amplitude};
use catsim::{CoherentState, ComplexAmplitude};
use num_complex::Complex64;
use proptest::prelude::*;

fn state(re: f64, im: f64) -> CoherentState {
    CoherentState::new(Complex64::new(re, im)).unwrap()
}

fn amplitude(max: f64) -> impl Strategy<Value = CoherentState> {
    (0.0..max, 0.0..2.0 * PI).prop_map(|(r, t)| CoherentState::from_polar(r, t).unwrap())
}

/// `<a|b>` summed in the Fock basis with the per-mode recursion
/// `c_n = c_{n-1} a / sqrt(n)`, `c_0 = exp(-|a|^2 / 2)`.
fn fock_overlap(a: ComplexAmplitude, b: ComplexAmplitude) -> ComplexAmplitude {
    let mut ca = Complex64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
    let mut cb = Complex64::new((-b.norm_sqr() / 2.0).exp(), 0.0);
    let mut sum = ca.conj() * cb;
    for n in 1..400 {
        let s = (n as f64).sqrt();
        ca *= a / s;
        cb *= b / s;
        let term = ca.conj() * cb;
        sum += term;
        if n > 10 && term.norm() < 1e-18 && (a.norm() * b.norm()) < n as f64 {
            break;
        }
    }
    sum
}

/// `<a|b>` as the trapezoid-rule integral of the quadrature wavefunctions.
fn quadrature_overlap(a: &CoherentState, b: &CoherentState, lo_phase: f64) -> ComplexAmplitude {
    let h = 0.02;
    let half_width = SQRT_2 * 5.0 + 14.0;
    let n = (2.0 * half_width / h) as usize;
    (0..=n)
        .map(|i| {
            let x = -half_width + h * i as f64;
            let pa = quad_amplitude(a, x, lo_phase);
            let pb = quad_amplitude(b, x, lo_phase);
            pa.conj_mul(&pb).to_complex() * h
        })
        .sum()
}

proptest! {
    #[test]
    fn hermitian_symmetry(a in amplitude(200.0), b in amplitude(200.0)) {
        let ab = overlap(&a, &b);
        let ba = overlap(&b, &a);
        prop_assert!((ab - ba.conj()).norm() <= 1e-14 * (1.0 + ab.norm()));
    }

    #[test]
    fn cauchy_schwarz(a in amplitude(200.0), b in amplitude(200.0)) {
        let o = overlap(&a, &b);
        prop_assert!(o.norm() <= 1.0 + 1e-15);
        prop_assert!(o.re.is_finite() && o.im.is_finite());
    }

    #[test]
    fn magnitude_law(a in amplitude(50.0), b in amplitude(50.0)) {
        let d = (a.amplitude() - b.amplitude()).norm_sqr();
        let o = overlap(&a, &b).norm_sqr();
        let expected = (-d).exp();
        prop_assert!((o - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-300);
    }

    #[test]
    fn fock_series_oracle(a in amplitude(6.0), b in amplitude(6.0)) {
        let closed = overlap(&a, &b);
        let series = fock_overlap(a.amplitude(), b.amplitude());
        prop_assert!((closed - series).norm() <= 1e-10, "{} vs {}", closed, series);
    }

    #[test]
    fn quadrature_completeness(a in amplitude(5.0), b in amplitude(5.0), lo in 0.0..2.0 * PI) {
        let closed = overlap(&a, &b);
        let integral = quadrature_overlap(&a, &b, lo);
        prop_assert!((closed - integral).norm() <= 1e-8, "{} vs {}", closed, integral);
    }

    #[test]
    fn attenuation_composes(a in amplitude(200.0), g1 in 0.0..1.0f64, g2 in 0.0..1.0f64) {
        let (once, _) = attenuate(&attenuate(&a, g1).unwrap().0, g2).unwrap();
        let combined = 1.0 - (1.0 - g1) * (1.0 - g2);
        let (direct, _) = attenuate(&a, combined).unwrap();
        prop_assert!((once.amplitude() - direct.amplitude()).norm() <= 1e-12 * (1.0 + a.amplitude().norm()));
    }

    #[test]
    fn attenuation_conserves_photons(a in amplitude(200.0), g in 0.0..=1.0f64) {
        let (kept, lost) = attenuate(&a, g).unwrap();
        let n = a.mean_photon_number();
        prop_assert!((kept.mean_photon_number() + lost.mean_photon_number() - n).abs() <= 1e-12 * (1.0 + n));
    }

    #[test]
    fn no_nan_for_large_amplitudes(
        a in amplitude(1.0e6), b in amplitude(1.0e6), x in -1.0e3..1.0e3f64, lo in -10.0..10.0f64
    ) {
        let o = overlap(&a, &b);
        prop_assert!(!o.re.is_nan() && !o.im.is_nan());
        let q = quad_amplitude(&a, x, lo);
        prop_assert!(!q.log_magnitude.is_nan() && !q.phase.is_nan());
    }
}

#[test]
fn fock_oracle_matches_known_value() {
    let o = fock_overlap(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    assert!((o.re - (-0.5f64).exp()).abs() < 1e-15);
    let a = state(3.0, 1.0);
    let b = state(-2.0, 0.5);
    assert!((overlap(&a, &b) - fock_overlap(a.amplitude(), b.amplitude())).norm() < 1e-12);
}
