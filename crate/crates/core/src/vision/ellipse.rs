//! Direct least-squares ellipse fitting.
//!
//! Minimizes the algebraic distance of the conic
//! `A x² + B xy + C y² + D x + E y + F = 0` subject to `4AC - B² = 1`, which
//! admits only ellipses. The 6×6 generalized eigenproblem on the scatter
//! matrix is reduced to a 3×3 one by eliminating the linear terms, and the
//! points are mean-centered and scaled before building the scatter matrix.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::VisionError;
use crate::geo::PixelPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseFit {
    pub center: PixelPoint,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Angle of the major axis from the +x1 axis, radians in `(-π/2, π/2]`.
    pub orientation: f64,
}

impl EllipseFit {
    pub fn major_diameter(&self) -> f64 {
        2.0 * self.semi_major
    }
}

/// General conic coefficients `[A, B, C, D, E, F]`.
pub type Conic = [f64; 6];

fn conic_to_ellipse(c: &Conic) -> Result<EllipseFit, VisionError> {
    let [a, b, cc, d, e, f] = *c;
    let det = 4.0 * a * cc - b * b;
    if det <= 0.0 {
        return Err(VisionError::DegenerateInput("fitted conic is not an ellipse"));
    }
    let x0 = (b * e - 2.0 * cc * d) / det;
    let y0 = (b * d - 2.0 * a * e) / det;
    let f0 = a * x0 * x0 + b * x0 * y0 + cc * y0 * y0 + d * x0 + e * y0 + f;
    // eigenvalues of the quadratic form [[a, b/2], [b/2, c]]
    let mean = 0.5 * (a + cc);
    let rad = (0.25 * (a - cc).powi(2) + 0.25 * b * b).sqrt();
    let (l_small, l_large) = if mean >= 0.0 { (mean - rad, mean + rad) } else { (mean + rad, mean - rad) };
    let r_major = -f0 / l_small;
    let r_minor = -f0 / l_large;
    if !(r_major > 0.0 && r_minor > 0.0) || !r_major.is_finite() {
        return Err(VisionError::DegenerateInput("imaginary or degenerate ellipse"));
    }
    // major axis: eigenvector of the quadratic form for l_small
    let (h, k) = (b / 2.0, l_small);
    let (v1, v2) = ((h, k - a), (k - cc, h));
    let (vx, vy) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
    let mut theta = if vx == 0.0 && vy == 0.0 { 0.0 } else { vy.atan2(vx) };
    if theta > FRAC_PI_2 {
        theta -= PI;
    } else if theta <= -FRAC_PI_2 {
        theta += PI;
    }
    Ok(EllipseFit {
        center: PixelPoint::new(x0, y0),
        semi_major: r_major.sqrt(),
        semi_minor: r_minor.sqrt(),
        orientation: theta,
    })
}

/// Null vector of a (near-)singular 3×3 matrix.
fn null_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three singular values");
    v_t.row(k).transpose()
}

/// Fits an ellipse to at least five non-collinear points.
pub fn fit_ellipse(points: &[PixelPoint]) -> Result<EllipseFit, VisionError> {
    if points.len() < 5 {
        return Err(VisionError::DegenerateInput("ellipse fit needs at least 5 points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x1).sum::<f64>() / n;
    let my = points.iter().map(|p| p.x2).sum::<f64>() / n;
    let spread = (points.iter().map(|p| (p.x1 - mx).powi(2) + (p.x2 - my).powi(2)).sum::<f64>() / (2.0 * n)).sqrt();
    if !(spread > 0.0) {
        return Err(VisionError::DegenerateInput("all points coincide"));
    }

    let mut s1 = Matrix3::zeros();
    let mut s2 = Matrix3::zeros();
    let mut s3 = Matrix3::zeros();
    for p in points {
        let x = (p.x1 - mx) / spread;
        let y = (p.x2 - my) / spread;
        let quad = Vector3::new(x * x, x * y, y * y);
        let lin = Vector3::new(x, y, 1.0);
        s1 += quad * quad.transpose();
        s2 += quad * lin.transpose();
        s3 += lin * lin.transpose();
    }
    let s3_inv = s3
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or(VisionError::DegenerateInput("collinear points"))?;
    if s3.determinant().abs() < 1e-12 * s3.norm().powi(3) {
        return Err(VisionError::DegenerateInput("collinear points"));
    }
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;
    // premultiply by the inverse of the reduced constraint matrix
    let reduced = Matrix3::new(
        m[(2, 0)] / 2.0, m[(2, 1)] / 2.0, m[(2, 2)] / 2.0,
        -m[(1, 0)], -m[(1, 1)], -m[(1, 2)],
        m[(0, 0)] / 2.0, m[(0, 1)] / 2.0, m[(0, 2)] / 2.0,
    );

    let eig = reduced.complex_eigenvalues();
    let scale = reduced.norm().max(f64::MIN_POSITIVE);
    let mut best: Option<(f64, Vector3<f64>)> = None;
    for lambda in eig.iter() {
        if lambda.im.abs() > 1e-9 * scale {
            continue;
        }
        let v = null_vector(&(reduced - Matrix3::identity() * lambda.re));
        let constraint = 4.0 * v[0] * v[2] - v[1] * v[1];
        if constraint > 0.0 {
            let v = v / constraint.sqrt();
            if best.as_ref().is_none_or(|(l, _)| lambda.re.abs() < l.abs()) {
                best = Some((lambda.re, v));
            }
        }
    }
    let (_, quad) = best.ok_or(VisionError::DegenerateInput("no elliptical solution"))?;
    let lin = t * quad;
    let normalized: Conic = [quad[0], quad[1], quad[2], lin[0], lin[1], lin[2]];
    let e = conic_to_ellipse(&normalized)?;
    Ok(EllipseFit {
        center: PixelPoint::new(mx + spread * e.center.x1, my + spread * e.center.x2),
        semi_major: e.semi_major * spread,
        semi_minor: e.semi_minor * spread,
        orientation: e.orientation,
    })
}
