//! The joint density against an independent direct implementation, plus
//! structural properties.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use catsim::decoherence::BeamSplitterLoss;
use catsim::homodyne::{density_grid, joint_density, visibility_via_homodyne, JointDensity};
use catsim::{GridSpec, HomodyneConfig, InterferometerParams, LossModel};
use num_complex::Complex64;
use proptest::prelude::*;

/// Quadrature wavefunction with the local oscillator at pi/2, written out
/// directly in complex arithmetic.
fn psi(a: Complex64, x: f64) -> Complex64 {
    let a = a * Complex64::new(0.0, -1.0);
    let exponent = -x * x / 2.0 + SQRT_2 * x * a - a.norm_sqr() / 2.0 - a * a / 2.0;
    exponent.exp() * PI.powf(-0.25)
}

/// Direct sum over the two environment branches:
/// `rho = |psi_+|^2 + |psi_-|^2 + 2 E Re(conj(psi_+) psi_-)`.
fn oracle_density(alpha: f64, phi: f64, s1: f64, s2: f64, n_lost: f64, x1: f64, x2: f64) -> f64 {
    let g = n_lost / (alpha * alpha);
    let amp = alpha * (1.0 - g).sqrt();
    let label = |source: f64, analyzer: f64| Complex64::from_polar(amp, phi * (source + analyzer));
    let e = |t: f64| Complex64::from_polar(1.0, t);
    // (coefficient, beam-1 shifts, beam-2 shifts)
    let terms = [
        (e(s2), (1.0, 1.0), (-1.0, -1.0)),
        (-e(0.0), (1.0, 1.0), (-1.0, 1.0)),
        (-e(s1 + s2), (1.0, -1.0), (-1.0, -1.0)),
        (e(s1), (1.0, -1.0), (-1.0, 1.0)),
        (-e(s2), (-1.0, 1.0), (1.0, -1.0)),
        (e(0.0), (-1.0, 1.0), (1.0, 1.0)),
        (e(s1 + s2), (-1.0, -1.0), (1.0, -1.0)),
        (-e(s1), (-1.0, -1.0), (1.0, 1.0)),
    ];
    let mut plus = Complex64::new(0.0, 0.0);
    let mut minus = Complex64::new(0.0, 0.0);
    for (c, b1, b2) in terms {
        let v = c / 8.0 * psi(label(b1.0, b1.1), x1) * psi(label(b2.0, b2.1), x2);
        if b1.0 > 0.0 {
            plus += v;
        } else {
            minus += v;
        }
    }
    let cross = (-4.0 * n_lost * phi.sin().powi(2)).exp();
    plus.norm_sqr() + minus.norm_sqr() + 2.0 * cross * (plus.conj() * minus).re
}

#[test]
fn dense_grid_matches_direct_oracle() {
    for &(alpha, phi, s1, s2, n_lost) in &[
        (100.0, 0.003, PI, 0.0, 0.0),
        (100.0, 0.02, 0.0, 0.0, 0.0),
        (100.0, 0.01, 0.7, -1.3, 250.0),
        (10.0, 0.1, FRAC_PI_2, 0.0, 12.5),
    ] {
        let p = InterferometerParams::symmetric(alpha, phi, s1, s2);
        let loss = BeamSplitterLoss::new(n_lost).unwrap();
        let grid = GridSpec::square(-4.0, 4.0, 41);
        let values = density_grid(&p, &loss, &HomodyneConfig::default(), &grid).unwrap();
        let peak = values.max();
        for (i, &x1) in values.x1.iter().enumerate() {
            for (j, &x2) in values.x2.iter().enumerate() {
                let expected = oracle_density(alpha, phi, s1, s2, n_lost, x1, x2);
                let got = values.values[i][j];
                assert!(
                    (got - expected).abs() <= 1e-10 * peak,
                    "({alpha},{phi},{s1},{s2},{n_lost}) at ({x1},{x2}): {got} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn visibility_tracks_window_and_overlap() {
    // Overlapping states (alpha phi = 0.3) lose visibility once the
    // acceptance window is finite.
    let p = InterferometerParams::symmetric(100.0, 0.003, 0.0, 0.0);
    let cfg = HomodyneConfig { window: 0.5, ..Default::default() };
    let v = visibility_via_homodyne(&p, &BeamSplitterLoss::lossless(), &cfg).unwrap();
    assert!((v - 0.6424876874157417).abs() < 1e-9, "{v}");
    assert!(v < 0.99);
}

#[test]
fn grid_rows_are_independent_of_thread_count() {
    let p = InterferometerParams::symmetric(100.0, 0.02, 0.0, PI);
    let grid = GridSpec::square(-4.0, 4.0, 33);
    let cfg = HomodyneConfig::default();
    let loss = BeamSplitterLoss::new(100.0).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
    let a = single.install(|| density_grid(&p, &loss, &cfg, &grid).unwrap());
    let b = many.install(|| density_grid(&p, &loss, &cfg, &grid).unwrap());
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Exchanging the beams and their analyzer phases leaves the density unchanged.
    #[test]
    fn beam_exchange_symmetry(
        phi in 0.001..0.05f64, s1 in -PI..PI, s2 in -PI..PI, n in 0.0..2000.0f64,
        x1 in -5.0..5.0f64, x2 in -5.0..5.0f64,
    ) {
        let loss = BeamSplitterLoss::new(n).unwrap();
        let cfg = HomodyneConfig::default();
        let a = joint_density(&InterferometerParams::symmetric(100.0, phi, s1, s2), &loss, &cfg, x1, x2).unwrap();
        let b = joint_density(&InterferometerParams::symmetric(100.0, phi, s2, s1), &loss, &cfg, x2, x1).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (a.abs() + b.abs()) + 1e-300);
    }

    #[test]
    fn density_is_nonnegative(
        phi in 0.001..0.05f64, s1 in -PI..PI, s2 in -PI..PI, n in 0.0..2000.0f64,
        x1 in -8.0..8.0f64, x2 in -8.0..8.0f64,
    ) {
        let loss = BeamSplitterLoss::new(n).unwrap();
        let p = InterferometerParams::symmetric(100.0, phi, s1, s2);
        let d = JointDensity::new(&p, &loss, &HomodyneConfig::default()).unwrap();
        prop_assert!(d.at(x1, x2) >= 0.0);
    }

    #[test]
    fn visibility_in_unit_interval(phi in 0.002..0.05f64, n in 0.0..3000.0f64) {
        let loss = BeamSplitterLoss::new(n).unwrap();
        let p = InterferometerParams::symmetric(100.0, phi, 0.0, 0.0);
        let v = visibility_via_homodyne(&p, &loss, &HomodyneConfig::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        // Never more than the decoherence bound allows (plus rounding).
        prop_assert!(v <= loss.cross_term_factor(phi) + 1e-9);
    }
}
