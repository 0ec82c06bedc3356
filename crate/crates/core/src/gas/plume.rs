use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GasError;
use crate::geo::Position3;

/// Horizontal wind vector, m/s (direction the air moves toward).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wind {
    pub east: f64,
    pub north: f64,
}

impl Wind {
    pub fn speed(&self) -> f64 {
        self.east.hypot(self.north)
    }
}

/// Power-law dispersion `sigma(x) = sqrt(sigma0^2 + (c * x^p)^2)` for the
/// crosswind and vertical spreads, with a smooth near-field taper so the
/// field stays continuous at the source plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Dispersion {
    pub sigma_y_coef: f64,
    pub sigma_y_exp: f64,
    pub sigma_z_coef: f64,
    pub sigma_z_exp: f64,
    /// Spread at the release point, meters.
    pub initial_sigma: f64,
    /// Downwind length over which the plume ramps up from zero, meters.
    pub onset_length: f64,
}

impl Default for Dispersion {
    /// Pasquill-Gifford stability class D (neutral), open country.
    fn default() -> Self {
        Self {
            sigma_y_coef: 0.128,
            sigma_y_exp: 0.905,
            sigma_z_coef: 0.093,
            sigma_z_exp: 0.855,
            initial_sigma: 0.1,
            onset_length: 0.5,
        }
    }
}

/// Steady Gaussian plume with ground reflection. Concentrations are ppm of
/// the released gas by volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPlume {
    /// Release point; its `up` component is the release height.
    pub source: Position3,
    pub emission_rate_l_per_min: f64,
    pub wind: Wind,
    /// `up` coordinate of the ground the plume reflects from.
    pub ground_level: f64,
    #[serde(default)]
    pub dispersion: Dispersion,
}

impl GaussianPlume {
    pub fn validate(&self) -> Result<(), GasError> {
        let speed = self.wind.speed();
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(GasError::OutOfDomain(format!(
                "plume needs a nonzero finite wind speed, got {speed}"
            )));
        }
        if !(self.emission_rate_l_per_min >= 0.0 && self.emission_rate_l_per_min.is_finite()) {
            return Err(GasError::OutOfDomain("emission rate must be finite and >= 0".into()));
        }
        if !self.source.is_finite() || !self.ground_level.is_finite() {
            return Err(GasError::OutOfDomain("plume geometry must be finite".into()));
        }
        let d = &self.dispersion;
        if !(d.initial_sigma > 0.0 && d.sigma_y_coef >= 0.0 && d.sigma_z_coef >= 0.0 && d.onset_length > 0.0) {
            return Err(GasError::OutOfDomain("dispersion coefficients must be positive".into()));
        }
        Ok(())
    }

    /// Volumetric release rate in m³/s.
    pub fn emission_rate_m3_per_s(&self) -> f64 {
        self.emission_rate_l_per_min * 1e-3 / 60.0
    }

    pub fn sigmas(&self, downwind: f64) -> (f64, f64) {
        let d = &self.dispersion;
        let s0 = d.initial_sigma * d.initial_sigma;
        let sy = d.sigma_y_coef * downwind.powf(d.sigma_y_exp);
        let sz = d.sigma_z_coef * downwind.powf(d.sigma_z_exp);
        ((s0 + sy * sy).sqrt(), (s0 + sz * sz).sqrt())
    }

    /// Downwind, crosswind and height-above-ground coordinates of `x`.
    pub fn plume_coordinates(&self, x: Position3) -> (f64, f64, f64) {
        let speed = self.wind.speed();
        let (we, wn) = (self.wind.east / speed, self.wind.north / speed);
        let r = x - self.source;
        let downwind = r.east * we + r.north * wn;
        // crosswind axis is the wind direction rotated 90° counter-clockwise
        let crosswind = -r.east * wn + r.north * we;
        (downwind, crosswind, x.up - self.ground_level)
    }

    pub(crate) fn eval(&self, x: Position3) -> f64 {
        let (downwind, crosswind, z) = self.plume_coordinates(x);
        if downwind <= 0.0 {
            return 0.0;
        }
        let h = self.source.up - self.ground_level;
        let (sy, sz) = self.sigmas(downwind);
        let onset = 1.0 - (-(downwind / self.dispersion.onset_length).powi(2)).exp();
        let q = self.emission_rate_m3_per_s() * 1e6;
        let lateral = (-crosswind * crosswind / (2.0 * sy * sy)).exp();
        let vertical = (-(z - h).powi(2) / (2.0 * sz * sz)).exp() + (-(z + h).powi(2) / (2.0 * sz * sz)).exp();
        onset * q / (2.0 * PI * self.wind.speed() * sy * sz) * lateral * vertical
    }

    /// No point of the plume exceeds this value.
    pub fn peak_bound(&self) -> f64 {
        let s0 = self.dispersion.initial_sigma;
        2.0 * self.emission_rate_m3_per_s() * 1e6 / (2.0 * PI * self.wind.speed() * s0 * s0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::test_plume;
    use super::*;
    use crate::quadrature::{integrate, QuadratureParams};
    use approx::assert_relative_eq;

    /// Closed form written out again from scratch, in the original axes.
    fn reference(p: &GaussianPlume, x: Position3) -> f64 {
        let u = (p.wind.east.powi(2) + p.wind.north.powi(2)).sqrt();
        let dx = x.east - p.source.east;
        let dy = x.north - p.source.north;
        let along = (dx * p.wind.east + dy * p.wind.north) / u;
        if along <= 0.0 {
            return 0.0;
        }
        let across2 = dx * dx + dy * dy - along * along;
        let d = &p.dispersion;
        let sy2 = d.initial_sigma.powi(2) + (d.sigma_y_coef * along.powf(d.sigma_y_exp)).powi(2);
        let sz2 = d.initial_sigma.powi(2) + (d.sigma_z_coef * along.powf(d.sigma_z_exp)).powi(2);
        let z = x.up - p.ground_level;
        let h = p.source.up - p.ground_level;
        let q_ppm = p.emission_rate_l_per_min / 60_000.0 * 1e6;
        let taper = 1.0 - (-(along * along) / (d.onset_length * d.onset_length)).exp();
        taper * q_ppm / (2.0 * PI * u * (sy2 * sz2).sqrt())
            * (-across2.max(0.0) / (2.0 * sy2)).exp()
            * ((-(z - h).powi(2) / (2.0 * sz2)).exp() + (-(z + h).powi(2) / (2.0 * sz2)).exp())
    }

    #[test]
    fn matches_reference_on_grid() {
        let p = test_plume();
        for i in -10..=10 {
            for j in 0..=20 {
                for k in 0..=4 {
                    let x = Position3::new(f64::from(i) * 1.5, -16.0 - f64::from(j) * 1.7, f64::from(k) - 1.2);
                    let got = p.eval(x);
                    let want = reference(&p, x);
                    assert!(
                        (got - want).abs() <= 1e-9 * want.abs().max(1e-300),
                        "{x:?}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn far_crosswind_is_negligible() {
        let p = test_plume();
        // 20 m downwind on the axis, then 500 m crosswind
        let (we, wn) = (p.wind.east / p.wind.speed(), p.wind.north / p.wind.speed());
        let on_axis = p.source + Position3::new(we, wn, 0.0) * 20.0;
        let off = on_axis + Position3::new(-wn, we, 0.0) * 500.0;
        assert!(p.eval(off) <= 1e-6);
        assert!(p.eval(on_axis) > 1.0);
    }

    #[test]
    fn upwind_is_zero() {
        let p = test_plume();
        assert_eq!(p.eval(Position3::new(0.0, 0.0, 0.0)), 0.0);
        assert_eq!(p.eval(p.source), 0.0);
    }

    #[test]
    fn crosswind_flux_recovers_emission_rate() {
        let p = test_plume();
        let q = QuadratureParams { rel_tol: 1e-9, ..Default::default() };
        for downwind in [10.0, 20.0, 40.0] {
            let (sy, sz) = p.sigmas(downwind);
            let speed = p.wind.speed();
            let (we, wn) = (p.wind.east / speed, p.wind.north / speed);
            let axis = p.source + Position3::new(we, wn, 0.0) * downwind;
            let ylim = 8.0 * sy;
            let zlim = (p.source.up - p.ground_level) + 8.0 * sz;
            let flux = integrate(
                |y| {
                    integrate(
                        |z| {
                            let x = axis + Position3::new(-wn * y, we * y, 0.0);
                            p.eval(Position3::new(x.east, x.north, p.ground_level + z))
                        },
                        0.0,
                        zlim,
                        &q,
                    )
                    .value
                },
                -ylim,
                ylim,
                &q,
            )
            .value
                * speed;
            let released_ppm_m3_s = p.emission_rate_m3_per_s() * 1e6;
            assert_relative_eq!(flux, released_ppm_m3_s, max_relative = 0.02);
        }
    }
}
