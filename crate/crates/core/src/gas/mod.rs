//! Gas fields and the open-path laser sensor.
//!
//! A [`GasField`] is an evaluable concentration `u*(x, t)` in ppm. The sensor
//! reports the integral of that field along the beam in ppm·m; the path
//! length factor is part of the integral so that dividing by the distance
//! gives back the path-average concentration.

mod plume;
mod sensor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::Position3;
use crate::quadrature::{self, QuadratureParams};

pub use plume::{Dispersion, GaussianPlume, Wind};
pub use sensor::{link_budget, tdlas_measure, BeamGeometry, MeasurementRecord, SensorModel, StatusCode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GasError {
    #[error("gas field out of domain: {0}")]
    OutOfDomain(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GasField {
    Uniform { ppm: f64 },
    GaussianPlume(GaussianPlume),
    Sum { fields: Vec<GasField> },
}

impl GasField {
    pub fn uniform(ppm: f64) -> Self {
        GasField::Uniform { ppm }
    }

    pub fn zero() -> Self {
        GasField::Uniform { ppm: 0.0 }
    }

    pub fn validate(&self) -> Result<(), GasError> {
        match self {
            GasField::Uniform { ppm } if !(ppm.is_finite() && *ppm >= 0.0) => Err(
                GasError::OutOfDomain(format!("uniform concentration {ppm} must be finite and >= 0")),
            ),
            GasField::Uniform { .. } => Ok(()),
            GasField::GaussianPlume(p) => p.validate(),
            GasField::Sum { fields } => fields.iter().try_for_each(GasField::validate),
        }
    }

    /// Concentration in ppm at `x` and time `t`.
    pub fn concentration_at(&self, x: Position3, t: f64) -> Result<f64, GasError> {
        self.validate()?;
        Ok(self.eval(x, t))
    }

    /// Evaluation without validation; callers validate once up front.
    pub(crate) fn eval(&self, x: Position3, t: f64) -> f64 {
        match self {
            GasField::Uniform { ppm } => *ppm,
            GasField::GaussianPlume(p) => p.eval(x),
            GasField::Sum { fields } => fields.iter().map(|f| f.eval(x, t)).sum(),
        }
    }

    /// Upper bound on the field, where one is known in closed form.
    pub fn upper_bound(&self) -> Option<f64> {
        match self {
            GasField::Uniform { ppm } => Some(*ppm),
            GasField::GaussianPlume(p) => Some(p.peak_bound()),
            GasField::Sum { fields } => fields.iter().map(GasField::upper_bound).sum(),
        }
    }
}

/// Integral of the field along the straight segment from `x_tdlas` to
/// `x_drone`, in ppm·m.
pub fn beam_integral(
    f: &GasField,
    x_tdlas: Position3,
    x_drone: Position3,
    t: f64,
    q: &QuadratureParams,
) -> Result<f64, GasError> {
    let d = (x_drone - x_tdlas).norm();
    if d == 0.0 {
        return Err(GasError::DegenerateGeometry("beam endpoints coincide"));
    }
    f.validate()?;
    if let GasField::Uniform { ppm } = f {
        return Ok(ppm * d);
    }
    let r = quadrature::integrate(|s| f.eval(x_tdlas.lerp(x_drone, s), t), 0.0, 1.0, q);
    Ok(d * r.value)
}
