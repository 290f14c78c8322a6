//! The invariant and golden-number suite behind `catsim check`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use catsim::bell::{chsh_parameter, sweep, violation_range, BellSweepConfig, Cutoff};
use catsim::coherent::{attenuate, distinguish_error_bound, overlap, quad_amplitude};
use catsim::decoherence::{
    atomic_factor, beam_splitter_factor, fiber_loss_fraction, visibility_from_factor,
    BeamSplitterLoss,
};
use catsim::homodyne::{density_grid, visibility_via_homodyne, JointDensity};
use catsim::interferometer::{
    conditional_probability, enumerate_terms, ideal_joint_probability, normalized_rate,
    postselected_norm, retained_norm_squared,
};
use catsim::visibility::EstimatorRegistry;
use catsim::{CoherentState, GridSpec, HomodyneConfig, InterferometerParams, LossModel};
use num_complex::Complex64;

/// Knobs for exercising the suite itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions {
    /// Relative error injected into the post-selection constant c_n.
    pub cn_perturbation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

type Verdict = (bool, String);

pub struct Check {
    pub module: &'static str,
    pub name: String,
    run: Box<dyn Fn() -> Verdict + Send + Sync>,
}

impl Check {
    fn new(
        module: &'static str,
        name: impl Into<String>,
        run: impl Fn() -> Verdict + Send + Sync + 'static,
    ) -> Self {
        Check {
            module,
            name: name.into(),
            run: Box::new(run),
        }
    }

    pub fn run(&self) -> CheckResult {
        let (passed, detail) = (self.run)();
        CheckResult {
            module: self.module,
            name: self.name.clone(),
            passed,
            detail,
        }
    }
}

fn cs(re: f64, im: f64) -> CoherentState {
    CoherentState::new(Complex64::new(re, im)).expect("finite amplitude")
}

fn within(value: f64, expected: f64, tol: f64) -> Verdict {
    let ok = (value - expected).abs() <= tol;
    (ok, format!("value {value:.12} expected {expected:.12} tol {tol:e}"))
}

fn worst(errors: impl IntoIterator<Item = f64>, tol: f64) -> Verdict {
    let m = errors.into_iter().fold(0.0f64, |a, e| if e.is_nan() { f64::INFINITY } else { a.max(e) });
    (m <= tol, format!("worst deviation {m:e} tol {tol:e}"))
}

fn sample_pairs() -> Vec<(CoherentState, CoherentState)> {
    vec![
        (cs(1.0, 0.5), cs(-0.3, 2.0)),
        (cs(4.0, -3.0), cs(4.5, -2.0)),
        (cs(0.0, 0.0), cs(5.0, 0.0)),
        (cs(-2.0, 2.0), cs(-2.1, 1.9)),
        (cs(3.5, 1.0), cs(-1.0, -4.0)),
    ]
}

fn fock_overlap(a: Complex64, b: Complex64) -> Complex64 {
    let mut ca = Complex64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
    let mut cb = Complex64::new((-b.norm_sqr() / 2.0).exp(), 0.0);
    let mut sum = ca.conj() * cb;
    for n in 1..400 {
        let s = (n as f64).sqrt();
        ca *= a / s;
        cb *= b / s;
        sum += ca.conj() * cb;
    }
    sum
}

fn quadrature_overlap(a: &CoherentState, b: &CoherentState) -> Complex64 {
    let h = 0.02;
    let half = 22.0;
    let n = (2.0 * half / h) as usize;
    (0..=n)
        .map(|i| {
            let x = -half + h * i as f64;
            quad_amplitude(a, x, 0.3)
                .conj_mul(&quad_amplitude(b, x, 0.3))
                .to_complex()
                * h
        })
        .sum()
}

fn homodyne_v(alpha: f64, phi: f64, n_lost: f64) -> catsim::Result<f64> {
    let p = InterferometerParams::symmetric(alpha, phi, 0.0, 0.0);
    visibility_via_homodyne(&p, &BeamSplitterLoss::new(n_lost)?, &HomodyneConfig::default())
}

/// Every check, in report order.
pub fn suite(opts: CheckOptions) -> Vec<Check> {
    let mut checks = Vec::new();

    // --- coherent ---------------------------------------------------------
    checks.push(Check::new("coherent", "self-overlap is 1", || {
        worst(
            [cs(0.0, 0.0), cs(3.0, -1.0), cs(100.0, 0.0), cs(-140.0, 140.0)]
                .iter()
                .map(|a| (overlap(a, a) - 1.0).norm()),
            1e-15,
        )
    }));
    checks.push(Check::new("coherent", "hermitian symmetry", || {
        worst(
            sample_pairs()
                .iter()
                .map(|(a, b)| (overlap(a, b) - overlap(b, a).conj()).norm()),
            1e-15,
        )
    }));
    checks.push(Check::new("coherent", "|<a|b>|^2 = exp(-|a-b|^2)", || {
        worst(
            sample_pairs().iter().map(|(a, b)| {
                let d = (a.amplitude() - b.amplitude()).norm_sqr();
                (overlap(a, b).norm_sqr() - (-d).exp()).abs()
            }),
            1e-14,
        )
    }));
    checks.push(Check::new("coherent", "Fock-series oracle", || {
        worst(
            sample_pairs()
                .iter()
                .map(|(a, b)| (overlap(a, b) - fock_overlap(a.amplitude(), b.amplitude())).norm()),
            1e-10,
        )
    }));
    checks.push(Check::new("coherent", "quadrature completeness", || {
        worst(
            sample_pairs()
                .iter()
                .map(|(a, b)| (overlap(a, b) - quadrature_overlap(a, b)).norm()),
            1e-8,
        )
    }));
    checks.push(Check::new("coherent", "attenuation composes and conserves photons", || {
        let a = cs(70.0, -20.0);
        let mut errs = Vec::new();
        for (g1, g2) in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.01)] {
            let twice = attenuate(&attenuate(&a, g1).unwrap().0, g2).unwrap().0;
            let once = attenuate(&a, 1.0 - (1.0 - g1) * (1.0 - g2)).unwrap().0;
            errs.push((twice.amplitude() - once.amplitude()).norm() / a.amplitude().norm());
            let (k, l) = attenuate(&a, g1).unwrap();
            errs.push(
                (k.mean_photon_number() + l.mean_photon_number() - a.mean_photon_number()).abs()
                    / a.mean_photon_number(),
            );
        }
        worst(errs, 1e-14)
    }));
    checks.push(Check::new("coherent", "homodyne error bound erfc(alpha sin 2phi / sqrt 2)", || {
        within(distinguish_error_bound(100.0, 0.02).unwrap(), 6.362857509982392e-05, 6.4e-5 * 1e-9)
    }));

    // --- interferometer ---------------------------------------------------
    checks.push(Check::new("interferometer", "P = sin^2(D/2)/16, maximum 1/16 at D = pi", || {
        let mut errs: Vec<f64> = (0..1000)
            .map(|k| {
                let d = 2.0 * PI * k as f64 / 999.0;
                (ideal_joint_probability(0.0, d) - (d / 2.0).sin().powi(2) / 16.0).abs()
            })
            .collect();
        errs.push((ideal_joint_probability(0.0, PI) - 1.0 / 16.0).abs());
        worst(errs, 1e-15)
    }));
    let pert = opts.cn_perturbation;
    checks.push(Check::new("interferometer", "post-selected norm c_n (Eq. A1)", move || {
        let mut errs = Vec::new();
        for (delta, expected) in [(0.0, 1.0 / 6f64.sqrt()), (FRAC_PI_2, 1.0 / 8f64.sqrt()), (PI, 1.0 / 10f64.sqrt())] {
            let cn = postselected_norm(delta, 0.0) * (1.0 + pert);
            errs.push((cn - expected).abs());
            let params = InterferometerParams::symmetric(100.0, 0.02, delta, 0.0);
            let terms: Vec<_> = enumerate_terms(&params)
                .into_iter()
                .map(|mut t| {
                    t.coefficient *= 8.0 * cn;
                    t
                })
                .collect();
            errs.push((retained_norm_squared(&terms) - 1.0).abs());
        }
        worst(errs, 1e-12)
    }));
    checks.push(Check::new("interferometer", "conditional probability = 64 P / (8 - 2 cos D)", || {
        worst(
            (0..100).map(|k| {
                let d = 0.063 * k as f64;
                let p = 64.0 * ideal_joint_probability(d, 0.0) / (8.0 - 2.0 * d.cos());
                (conditional_probability(d, 0.0) - p).abs()
            }),
            1e-15,
        )
    }));
    checks.push(Check::new("interferometer", "R_N fringe visibility equals v", || {
        worst(
            [0.0, 0.25, 0.4493, 0.9, 1.0].iter().map(|&v| {
                let max = normalized_rate(0.0, PI, v).unwrap();
                let min = normalized_rate(0.0, 0.0, v).unwrap();
                ((max - min) / (max + min) - v).abs() + (max - 1.0).abs()
            }),
            1e-12,
        )
    }));

    // --- decoherence ------------------------------------------------------
    checks.push(Check::new("decoherence", "visibility(250, 0.014) = 0.8221 ± 5e-4", || {
        within(visibility_from_factor(&beam_splitter_factor(250.0, 0.014).unwrap()), 0.8221, 5e-4)
    }));
    checks.push(Check::new("decoherence", "visibility(2000, 0.01) = exp(-0.8) ± 1e-3", || {
        within(visibility_from_factor(&beam_splitter_factor(2000.0, 0.01).unwrap()), (-0.8f64).exp(), 1e-3)
    }));
    checks.push(Check::new("decoherence", "4000-photon R_N minimum = 0.380 ± 1e-3", || {
        let v = visibility_from_factor(&beam_splitter_factor(2000.0, 0.01).unwrap());
        within(normalized_rate(0.0, 0.0, v).unwrap(), 0.380, 1e-3)
    }));
    checks.push(Check::new("decoherence", "|f| multiplicative in photons lost", || {
        worst(
            [(10.0, 20.0, 0.01), (250.0, 250.0, 0.014), (1000.0, 3.0, 0.05)].iter().map(|&(a, b, phi)| {
                let fa = beam_splitter_factor(a, phi).unwrap().magnitude();
                let fb = beam_splitter_factor(b, phi).unwrap().magnitude();
                let fab = beam_splitter_factor(a + b, phi).unwrap().magnitude();
                (fab - fa * fb).abs() / fab
            }),
            1e-12,
        )
    }));
    checks.push(Check::new("decoherence", "atomic and beam-splitter models agree (Eq. 14)", || {
        worst(
            [(250.0, 0.01, 0.014), (1000.0, 0.005, 0.02), (5000.0, 0.01, 0.05), (5000.0, 0.001, 0.03)]
                .iter()
                .map(|&(n, eps, phi): &(f64, f64, f64)| {
                    let n_atoms = (n / (eps * eps)).round() as u64;
                    let a = atomic_factor(n_atoms, eps, phi).unwrap();
                    let b = beam_splitter_factor(n, phi).unwrap().magnitude();
                    ((a - b) / b).abs()
                }),
            1e-3,
        )
    }));
    checks.push(Check::new("decoherence", "fiber loss fraction g(4.1 km, 0.15 dB/km)", || {
        within(fiber_loss_fraction(4.1, 0.15).unwrap(), 0.13203942270762237, 1e-15)
    }));
    checks.push(Check::new("decoherence", "small-angle form within exp(2 N phi^4 / 3) - 1", || {
        let mut ok = true;
        let mut worst_ratio = 0.0f64;
        for &(n, phi) in &[(250.0, 0.014), (2000.0, 0.01), (5000.0, 0.05), (100.0, 0.003)] {
            let f = beam_splitter_factor(n, phi).unwrap().magnitude();
            let rel = ((f - (-2.0 * n * phi * phi).exp()) / f).abs();
            let bound = (2.0 * n * phi.powi(4) / 3.0).exp_m1() + 1e-13;
            ok &= rel <= bound;
            worst_ratio = worst_ratio.max(rel / bound);
        }
        (ok, format!("largest deviation / bound = {worst_ratio:.3}"))
    }));

    // --- homodyne ---------------------------------------------------------
    checks.push(Check::new("homodyne", "homodyne visibility(250, 0.014) = 0.822 ± 0.01", || {
        within(homodyne_v(100.0, 0.014, 250.0).unwrap(), 0.822, 0.01)
    }));
    checks.push(Check::new("homodyne", "full density matches |f|^2 within 1% for alpha phi >= 1", || {
        let reg = EstimatorRegistry::default();
        let cfg = HomodyneConfig::default();
        let mut errs = Vec::new();
        for ap in [1.0, 1.5, 2.0] {
            for n_lost in [0.0, 250.0] {
                let p = InterferometerParams::symmetric(100.0, ap / 100.0, 0.0, 0.0);
                let loss = BeamSplitterLoss::new(n_lost).unwrap();
                let full = reg.get("homodyne").unwrap().visibility(&p, &loss, &cfg).unwrap();
                let orth = reg.get("orthogonal").unwrap().visibility(&p, &loss, &cfg).unwrap();
                errs.push(((full - orth) / orth).abs());
            }
        }
        worst(errs, 0.01)
    }));
    checks.push(Check::new("homodyne", "Fig. 8 origin: dark at D = 0, brightest at D = pi", || {
        let cfg = HomodyneConfig::default();
        let loss = BeamSplitterLoss::lossless();
        let p0 = InterferometerParams::symmetric(100.0, 0.02, 0.0, 0.0);
        let grid = GridSpec::covering(&p0);
        let dark = density_grid(&p0, &loss, &cfg, &grid).unwrap();
        let bright = density_grid(&p0.with_phases(PI, 0.0), &loss, &cfg, &grid).unwrap();
        let c = grid.n1 / 2;
        let dark_ratio = dark.values[c][c] / dark.max();
        let bright_gap = bright.max() - bright.values[c][c];
        let ok = dark_ratio <= 1e-4 && bright_gap <= 1e-15 * bright.max();
        (ok, format!("dark rho(0,0)/max = {dark_ratio:e}; bright max - rho(0,0) = {bright_gap:e}"))
    }));
    checks.push(Check::new("homodyne", "grid integral equals exact overlap norm; rho >= 0", || {
        let cfg = HomodyneConfig::default();
        let mut errs = Vec::new();
        let mut min_ratio = f64::INFINITY;
        for &(phi, s1, n_lost) in &[(0.02, 0.0, 0.0), (0.02, PI, 0.0), (0.003, PI, 0.0), (0.02, 0.0, 50.0)] {
            let p = InterferometerParams::symmetric(100.0, phi, s1, 0.0);
            let loss = BeamSplitterLoss::new(n_lost).unwrap();
            let exact = JointDensity::new(&p, &loss, &cfg).unwrap().total_probability();
            let grid = density_grid(&p, &loss, &cfg, &GridSpec::covering(&p)).unwrap();
            errs.push((grid.integral() - exact).abs());
            min_ratio = min_ratio.min(grid.min() / grid.max());
        }
        let (ok, detail) = worst(errs, 1e-6);
        (ok && min_ratio >= -1e-14, format!("{detail}; min rho / peak = {min_ratio:e}"))
    }));
    checks.push(Check::new("homodyne", "beam-exchange symmetry", || {
        let cfg = HomodyneConfig::default();
        let loss = BeamSplitterLoss::new(120.0).unwrap();
        let a = JointDensity::new(&InterferometerParams::symmetric(100.0, 0.01, 0.4, -1.1), &loss, &cfg).unwrap();
        let b = JointDensity::new(&InterferometerParams::symmetric(100.0, 0.01, -1.1, 0.4), &loss, &cfg).unwrap();
        worst(
            [(0.0, 0.0), (1.3, -0.2), (-2.0, 0.7), (0.4, 3.1)]
                .iter()
                .map(|&(x1, x2)| (a.at(x1, x2) - b.at(x2, x1)).abs() / a.at(x1, x2).abs().max(1e-300)),
            1e-12,
        )
    }));

    // --- bell -------------------------------------------------------------
    checks.push(Check::new("bell", "s = 2 sqrt(2) v; s > 2 iff v > 1/sqrt(2)", || {
        let top = chsh_parameter(1.0).unwrap();
        let edge_hi = chsh_parameter(1.0 / SQRT_2 + 1e-12).unwrap();
        let edge_lo = chsh_parameter(1.0 / SQRT_2 - 1e-12).unwrap();
        let ok = (top - 2.0 * SQRT_2).abs() < 1e-15 && edge_hi > 2.0 && edge_lo < 2.0;
        (ok, format!("s(1) = {top}"))
    }));
    checks.push(Check::new("bell", "Fig. 11 sweep shape and violation cutoff in [6.5, 10] km", || {
        let config = BellSweepConfig::default();
        let result = match sweep(&config) {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        let monotone = result.optima.windows(2).all(|w| w[1].s_max <= w[0].s_max + 1e-12);
        let s0_ok = result
            .rows_for(0.0)
            .filter(|r| 100.0 * r.phi >= 2.0)
            .all(|r| (r.s / (2.0 * SQRT_2) - 1.0).abs() <= 0.01);
        let n = config.phi_values.len();
        let interior = result.optima.iter().filter(|o| o.separation_km > 0.0).all(|o| {
            let i = config.phi_values.iter().position(|&p| p == o.phi_optimal).unwrap();
            i > 0 && i + 1 < n
        });
        let s20 = result.optima.iter().find(|o| o.separation_km == 20.0).map(|o| o.s_max);
        let s20_ok = s20.is_some_and(|s| s > 0.0 && s < 2.0);
        let cutoff = violation_range(&config);
        let cutoff_ok = matches!(cutoff, Ok(Cutoff::Finite { separation_km }) if (6.5..=10.0).contains(&separation_km));
        (
            monotone && s0_ok && interior && s20_ok && cutoff_ok,
            format!(
                "non-increasing {monotone}; s(0) = 2 sqrt 2 {s0_ok}; interior optimum {interior}; s_max(20 km) = {s20:?}; cutoff {cutoff:?}"
            ),
        )
    }));
    checks.push(Check::new("bell", "well-separated sweep visibility matches exp(-4 N_L sin^2 phi)", || {
        let config = BellSweepConfig {
            separations_km: vec![2.0, 8.0],
            phi_values: vec![0.012, 0.02],
            ..BellSweepConfig::default()
        };
        let rows = match sweep(&config) {
            Ok(r) => r.rows,
            Err(e) => return (false, e.to_string()),
        };
        worst(
            rows.iter().map(|r| {
                let g = fiber_loss_fraction(r.separation_km / 2.0, 0.15).unwrap();
                let loss = BeamSplitterLoss::from_fraction(g, 1e4).unwrap();
                let e = loss.cross_term_factor(r.phi);
                ((r.visibility - e) / e).abs()
            }),
            0.015,
        )
    }));

    checks
}

pub fn run_checks(opts: CheckOptions) -> Vec<CheckResult> {
    suite(opts).iter().map(Check::run).collect()
}
