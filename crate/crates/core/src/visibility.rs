//! Interchangeable ways of turning a loss configuration into a fringe
//! visibility, selectable by name.

use std::collections::BTreeMap;
use std::fmt;

use crate::decoherence::LossModel;
use crate::error::{Error, Result};
use crate::homodyne::{visibility_via_homodyne, HomodyneConfig};
use crate::interferometer::InterferometerParams;

pub trait VisibilityEstimator: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn visibility(
        &self,
        params: &InterferometerParams,
        loss: &dyn LossModel,
        homodyne: &HomodyneConfig,
    ) -> Result<f64>;
}

/// Treats differently shifted coherent states as orthogonal: `v = |f|^2`.
/// Ignores the overlap penalty of attenuated amplitudes.
#[derive(Debug, Clone, Copy, Default)]
pub struct OrthogonalEstimator;

impl VisibilityEstimator for OrthogonalEstimator {
    fn name(&self) -> &'static str {
        "orthogonal"
    }

    fn visibility(
        &self,
        params: &InterferometerParams,
        loss: &dyn LossModel,
        _homodyne: &HomodyneConfig,
    ) -> Result<f64> {
        params.validate()?;
        Ok(loss.cross_term_factor(params.phi).clamp(0.0, 1.0))
    }
}

/// Full joint-density calculation, capturing both decoherence and overlap.
#[derive(Debug, Clone, Copy, Default)]
pub struct HomodyneEstimator;

impl VisibilityEstimator for HomodyneEstimator {
    fn name(&self) -> &'static str {
        "homodyne"
    }

    fn visibility(
        &self,
        params: &InterferometerParams,
        loss: &dyn LossModel,
        homodyne: &HomodyneConfig,
    ) -> Result<f64> {
        visibility_via_homodyne(params, loss, homodyne)
    }
}

pub struct EstimatorRegistry {
    estimators: BTreeMap<&'static str, Box<dyn VisibilityEstimator>>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        EstimatorRegistry {
            estimators: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, estimator: Box<dyn VisibilityEstimator>) {
        self.estimators.insert(estimator.name(), estimator);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.estimators.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn VisibilityEstimator> {
        self.estimators
            .get(name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "visibility estimator",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut r = EstimatorRegistry::empty();
        r.register(Box::new(HomodyneEstimator));
        r.register(Box::new(OrthogonalEstimator));
        r
    }
}
