//! Spherical coordinates (θ, φ) on the unit sphere. Only used to cross-check
//! curvature quantities; simulations use the embedded representation.

use super::{Christoffel, Vec3};
use crate::error::{domain, Result};

const POLE_TOL: f64 = 1e-12;

pub fn to_embedded(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

pub fn from_embedded(p: &Vec3) -> (f64, f64) {
    (p[2].clamp(-1.0, 1.0).acos(), p[1].atan2(p[0]))
}

/// Diagonal of the metric, `(1, sin²θ)`.
pub fn metric(theta: f64) -> [f64; 2] {
    [1.0, theta.sin().powi(2)]
}

pub fn christoffel(theta: f64) -> Result<Christoffel> {
    let s = theta.sin();
    if s.abs() < POLE_TOL {
        return domain("spherical chart is singular at the poles");
    }
    let c = theta.cos();
    let mut gamma = [[[0.0; 3]; 3]; 3];
    gamma[0][1][1] = -s * c;
    gamma[1][0][1] = c / s;
    gamma[1][1][0] = c / s;
    Ok(Christoffel { dim: 2, gamma })
}
