//! Numerical model of nonlocal interferometry with phase-entangled coherent
//! states probed by single photons.
//!
//! * [`coherent`]: coherent-state overlaps, attenuation and quadrature wavefunctions
//! * [`interferometer`]: the retained eight-term state and its coincidence probabilities
//! * [`decoherence`]: beam-splitter and atomic photon-loss models
//! * [`homodyne`]: joint homodyne density, zero-phase rates and fringe visibility
//! * [`visibility`]: interchangeable visibility estimators
//! * [`bell`]: CHSH parameter and fiber-distance sweeps

pub mod bell;
pub mod coherent;
pub mod decoherence;
pub mod error;
pub mod homodyne;
pub mod interferometer;
pub mod numerics;
pub mod visibility;

pub use coherent::{CoherentState, ComplexAmplitude, LogAmplitude};
pub use decoherence::{LossChannel, LossModel, LossRegistry};
pub use error::{Error, Result};
pub use homodyne::{DensityGrid, GridSpec, HomodyneConfig};
pub use interferometer::InterferometerParams;
pub use visibility::{EstimatorRegistry, VisibilityEstimator};
