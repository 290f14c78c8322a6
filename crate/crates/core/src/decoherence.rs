//! Photon-loss decoherence.
//!
//! Two loss mechanisms are modelled: a weak beam splitter tapping each beam,
//! and absorption by resonant two-level atoms. Both are [`LossModel`]s and
//! are looked up by name through a [`LossRegistry`], so the homodyne and
//! sweep code never needs to know which one it is driving.

use std::collections::BTreeMap;
use std::f64::consts::LN_10;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{overlap, CoherentState, ComplexAmplitude};
use crate::error::{self, Error, Result};

/// Largest per-atom excitation amplitude accepted by the atomic model.
pub const MAX_ATOMIC_EPSILON: f64 = 0.1;

/// Overlap `f` of the two environment states left behind by the two branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceFactor {
    value: ComplexAmplitude,
}

impl DecoherenceFactor {
    pub const NONE: DecoherenceFactor = DecoherenceFactor {
        value: Complex64::new(1.0, 0.0),
    };

    pub fn new(value: ComplexAmplitude) -> Result<Self> {
        error::finite("f.re", value.re)?;
        error::finite("f.im", value.im)?;
        if value.norm() > 1.0 + 1e-12 {
            return Err(Error::domain("|f|", value.norm(), "a magnitude <= 1"));
        }
        Ok(DecoherenceFactor { value })
    }

    pub fn value(&self) -> ComplexAmplitude {
        self.value
    }

    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }
}

/// `f = <gamma-|gamma+>` for `gamma± = sqrt(n_lost) e^{±i phi}`.
///
/// `|f| = exp(-2 n_lost sin^2 phi)`; the phase `n_lost sin 2phi` is kept.
pub fn beam_splitter_factor(n_lost: f64, phi: f64) -> Result<DecoherenceFactor> {
    let n_lost = error::non_negative("n_lost", n_lost)?;
    error::finite("phi", phi)?;
    let r = n_lost.sqrt();
    let plus = CoherentState::from_polar(r, phi)?;
    let minus = CoherentState::from_polar(r, -phi)?;
    DecoherenceFactor::new(overlap(&minus, &plus))
}

/// Product of the two single-beam overlaps entering an interference cross
/// term, `<gamma-|gamma+><delta+|delta->`. The phases cancel between the
/// beams, leaving `exp(2 n_lost (cos 2phi - 1))`.
pub fn two_beam_cross_factor(n_lost: f64, phi: f64) -> f64 {
    let s = phi.sin();
    (-4.0 * n_lost * s * s).exp()
}

/// `|f|` for absorption by `n_atoms` resonant atoms in each beam.
///
/// Each atom ends up in `(1 - eps^2/2)|G> + i eps e^{±i phi}|E>`, renormalized
/// to unit length. The per-atom contribution is the real part of the
/// inner product of the two branches, raised to the number of atoms.
pub fn atomic_factor(n_atoms: u64, epsilon: f64, phi: f64) -> Result<f64> {
    let epsilon = error::non_negative("epsilon", epsilon)?;
    if epsilon > MAX_ATOMIC_EPSILON {
        return Err(Error::domain(
            "epsilon",
            epsilon,
            "a value <= 0.1 (perturbative regime)",
        ));
    }
    error::finite("phi", phi)?;
    let eps2 = epsilon * epsilon;
    let s = phi.sin();
    // Re<A-|A+> / <A|A> = 1 - 2 eps^2 sin^2 phi / (1 + eps^4 / 4)
    let per_atom_drop = 2.0 * eps2 * s * s / (1.0 + eps2 * eps2 / 4.0);
    Ok((n_atoms as f64 * (-per_atom_drop).ln_1p()).exp())
}

/// Fringe visibility `|f|^2` after the cross terms are scaled by `f^2`.
pub fn visibility_from_factor(f: &DecoherenceFactor) -> f64 {
    f.value.norm_sqr().min(1.0)
}

/// Fraction of photons lost in `distance_km` of fiber: `1 - 10^(-a d / 10)`.
pub fn fiber_loss_fraction(distance_km: f64, attenuation_db_per_km: f64) -> Result<f64> {
    let d = error::non_negative("distance_km", distance_km)?;
    let a = error::non_negative("attenuation_db_per_km", attenuation_db_per_km)?;
    Ok(-(-(a * d) * LN_10 / 10.0).exp_m1())
}

/// A photon-loss mechanism acting identically on both beams.
pub trait LossModel: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Mean number of photons removed from each beam.
    fn photons_lost_per_beam(&self) -> f64;

    /// `|f|` for one beam at nonlinear phase `phi`.
    fn decoherence_magnitude(&self, phi: f64) -> f64;

    /// Real factor multiplying interference terms between the two branches.
    fn cross_term_factor(&self, phi: f64) -> f64 {
        let f = self.decoherence_magnitude(phi);
        f * f
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterLoss {
    n_lost: f64,
}

impl BeamSplitterLoss {
    pub fn new(n_lost_per_beam: f64) -> Result<Self> {
        Ok(BeamSplitterLoss {
            n_lost: error::non_negative("n_lost", n_lost_per_beam)?,
        })
    }

    pub fn lossless() -> Self {
        BeamSplitterLoss { n_lost: 0.0 }
    }

    /// Loss given as a fraction `g` of an initial photon number `n0`.
    pub fn from_fraction(g: f64, n0: f64) -> Result<Self> {
        let g = error::unit_interval("loss fraction", g)?;
        Self::new(g * error::non_negative("initial photon number", n0)?)
    }

    pub fn factor(&self, phi: f64) -> Result<DecoherenceFactor> {
        beam_splitter_factor(self.n_lost, phi)
    }
}

impl LossModel for BeamSplitterLoss {
    fn name(&self) -> &'static str {
        "beam_splitter"
    }

    fn photons_lost_per_beam(&self) -> f64 {
        self.n_lost
    }

    fn decoherence_magnitude(&self, phi: f64) -> f64 {
        let s = phi.sin();
        (-2.0 * self.n_lost * s * s).exp()
    }

    fn cross_term_factor(&self, phi: f64) -> f64 {
        two_beam_cross_factor(self.n_lost, phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicLoss {
    n_atoms: u64,
    epsilon: f64,
}

impl AtomicLoss {
    pub fn new(n_atoms: u64, epsilon: f64) -> Result<Self> {
        // Validates epsilon.
        atomic_factor(n_atoms, epsilon, 0.0)?;
        Ok(AtomicLoss { n_atoms, epsilon })
    }
}

impl LossModel for AtomicLoss {
    fn name(&self) -> &'static str {
        "atomic"
    }

    fn photons_lost_per_beam(&self) -> f64 {
        self.n_atoms as f64 * self.epsilon * self.epsilon
    }

    fn decoherence_magnitude(&self, phi: f64) -> f64 {
        atomic_factor(self.n_atoms, self.epsilon, phi).unwrap_or(0.0)
    }
}

/// Serializable description of a loss channel.
///
/// `kind` names an entry in the [`LossRegistry`]; the remaining fields are
/// read by whichever builder handles that kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    pub kind: String,
    /// Photons lost per beam (`beam_splitter`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_lost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl LossChannel {
    pub fn lossless() -> Self {
        Self::beam_splitter(0.0)
    }

    pub fn beam_splitter(n_lost_per_beam: f64) -> Self {
        LossChannel {
            kind: "beam_splitter".into(),
            n_lost: Some(n_lost_per_beam),
            n_atoms: None,
            epsilon: None,
        }
    }

    /// Total photons lost over both beams, split evenly.
    pub fn beam_splitter_total(total: f64) -> Self {
        Self::beam_splitter(total / 2.0)
    }

    pub fn atomic(n_atoms: u64, epsilon: f64) -> Self {
        LossChannel {
            kind: "atomic".into(),
            n_lost: None,
            n_atoms: Some(n_atoms),
            epsilon: Some(epsilon),
        }
    }

    pub fn build(&self) -> Result<Box<dyn LossModel>> {
        LossRegistry::default().build(self)
    }
}

type LossBuilder = fn(&LossChannel) -> Result<Box<dyn LossModel>>;

/// Name -> constructor table for loss models.
pub struct LossRegistry {
    builders: BTreeMap<&'static str, LossBuilder>,
}

impl LossRegistry {
    pub fn empty() -> Self {
        LossRegistry {
            builders: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, builder: LossBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, channel: &LossChannel) -> Result<Box<dyn LossModel>> {
        let builder = self
            .builders
            .get(channel.kind.as_str())
            .ok_or_else(|| Error::Unknown {
                kind: "loss model",
                name: channel.kind.clone(),
                known: self.names().join(", "),
            })?;
        builder(channel)
    }
}

impl Default for LossRegistry {
    fn default() -> Self {
        let mut r = LossRegistry::empty();
        r.register("none", |_| Ok(Box::new(BeamSplitterLoss::lossless())));
        r.register("beam_splitter", |c| {
            let n = c
                .n_lost
                .ok_or_else(|| Error::Config("beam_splitter loss needs n_lost".into()))?;
            Ok(Box::new(BeamSplitterLoss::new(n)?))
        });
        r.register("atomic", |c| {
            let (n, eps) = c
                .n_atoms
                .zip(c.epsilon)
                .ok_or_else(|| Error::Config("atomic loss needs n_atoms and epsilon".into()))?;
            Ok(Box::new(AtomicLoss::new(n, eps)?))
        });
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lossless_factor_is_one() {
        let f = beam_splitter_factor(0.0, 0.3).unwrap();
        assert_eq!(f.value(), Complex64::new(1.0, 0.0));
        assert_eq!(visibility_from_factor(&f), 1.0);
        assert_eq!(visibility_from_factor(&DecoherenceFactor::NONE), 1.0);
    }

    #[test]
    fn eighty_two_percent_example() {
        let f = beam_splitter_factor(250.0, 0.014).unwrap();
        assert_relative_eq!(f.magnitude(), 0.90665470859152, max_relative = 1e-12);
        assert_relative_eq!(visibility_from_factor(&f), 0.8220227606111685, max_relative = 1e-12);
        // The imaginary part is a compensable phase n sin(2 phi).
        let expected = (250.0 * 0.028f64.sin()).rem_euclid(2.0 * std::f64::consts::PI);
        assert_relative_eq!(f.value().arg().rem_euclid(2.0 * std::f64::consts::PI), expected, max_relative = 1e-9);
    }

    #[test]
    fn four_thousand_photon_example() {
        let f = beam_splitter_factor(2000.0, 0.01).unwrap();
        assert_relative_eq!(visibility_from_factor(&f), 0.44934094622288995, max_relative = 1e-12);
        assert!((visibility_from_factor(&f) - (-0.8f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn saturated_visibility() {
        // g = 1, alpha0 = 100, phi = 0.005: |f| -> exp(-2 (alpha0 phi)^2) in the small-angle form.
        let f = DecoherenceFactor::new(Complex64::new((-2.0f64 * 0.25).exp(), 0.0)).unwrap();
        assert_relative_eq!(visibility_from_factor(&f), (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn negative_loss_rejected() {
        assert!(beam_splitter_factor(-1.0, 0.1).is_err());
        assert!(BeamSplitterLoss::new(-0.5).is_err());
    }

    #[test]
    fn atomic_edges() {
        assert_eq!(atomic_factor(1_000_000, 0.0, 0.2).unwrap(), 1.0);
        assert_eq!(atomic_factor(1_000_000, 0.05, 0.0).unwrap(), 1.0);
        assert!(atomic_factor(10, 0.11, 0.01).is_err());
        assert!(atomic_factor(10, -0.01, 0.01).is_err());
    }

    #[test]
    fn atomic_matches_beam_splitter_example() {
        let eps = 2.5e-4f64.sqrt();
        let a = atomic_factor(1_000_000, eps, 0.014).unwrap();
        let b = beam_splitter_factor(250.0, 0.014).unwrap().magnitude();
        assert!((a - b).abs() <= 1e-3 * b, "{a} vs {b}");
        assert!((a - 0.9067).abs() < 1e-3);
    }

    #[test]
    fn atomic_small_angle_limit() {
        for (n, eps, phi) in [(2_500_000u64, 0.01, 0.014), (10_000, 0.005, 0.05), (1000, 0.01, 0.002)] {
            let exact = atomic_factor(n, eps, phi).unwrap();
            let limit = (-2.0 * n as f64 * eps * eps * phi * phi).exp();
            assert!((exact - limit).abs() <= 1e-3 * limit, "{n} {eps} {phi}");
        }
    }

    #[test]
    fn fiber_fraction() {
        assert_eq!(fiber_loss_fraction(0.0, 0.15).unwrap(), 0.0);
        assert_relative_eq!(fiber_loss_fraction(4.1, 0.15).unwrap(), 0.13203942270762237, max_relative = 1e-12);
        assert!(fiber_loss_fraction(1e5, 0.15).unwrap() > 1.0 - 1e-12);
        assert!(fiber_loss_fraction(1e5, 0.15).unwrap() <= 1.0);
        assert!(fiber_loss_fraction(-1.0, 0.15).is_err());
        assert!(fiber_loss_fraction(1.0, -0.15).is_err());
    }

    #[test]
    fn registry_builds_by_name() {
        let reg = LossRegistry::default();
        assert_eq!(reg.names(), vec!["atomic", "beam_splitter", "none"]);
        let bs = reg.build(&LossChannel::beam_splitter_total(500.0)).unwrap();
        assert_eq!(bs.name(), "beam_splitter");
        assert_eq!(bs.photons_lost_per_beam(), 250.0);
        let at = reg.build(&LossChannel::atomic(1_000_000, 0.01)).unwrap();
        assert_relative_eq!(at.photons_lost_per_beam(), 100.0, max_relative = 1e-12);
        let err = reg
            .build(&LossChannel {
                kind: "mirror".into(),
                n_lost: None,
                n_atoms: None,
                epsilon: None,
            })
            .unwrap_err();
        assert!(matches!(err, Error::Unknown { .. }));
        let missing = LossChannel {
            kind: "atomic".into(),
            n_lost: None,
            n_atoms: Some(3),
            epsilon: None,
        };
        assert!(matches!(reg.build(&missing), Err(Error::Config(_))));
    }

    #[test]
    fn cross_factor_equals_single_beam_product() {
        for &(n, phi) in &[(250.0, 0.014), (2000.0, 0.01), (37.0, 0.3)] {
            let f = beam_splitter_factor(n, phi).unwrap().value();
            // <gamma-|gamma+> <delta+|delta-> with delta the mirror image.
            let prod = f * f.conj();
            assert_relative_eq!(prod.re, two_beam_cross_factor(n, phi), max_relative = 1e-12);
            assert!(prod.im.abs() < 1e-15);
        }
    }
}
