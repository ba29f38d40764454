//! Half-plane geodesics, computed by moving the base point to `i` with an
//! affine map and rotating the vertical geodesic with an elliptic Möbius map.

use nalgebra::Complex;

use super::Vec3;

type C64 = Complex<f64>;

/// Endpoint of `exp(p, v)` and the complex factor realizing parallel
/// transport along that geodesic (transport is conformal in the chart).
pub(super) fn step(p: &Vec3, v: &Vec3) -> (Vec3, C64) {
    let (x0, y0) = (p[0], p[1]);
    let w = C64::new(v[0], v[1]) / y0;
    let s = w.norm();
    if s == 0.0 {
        return (*p, C64::new(1.0, 0.0));
    }
    let theta = 0.5 * (w.arg() - std::f64::consts::FRAC_PI_2);
    let (sn, c) = theta.sin_cos();
    let top = C64::new(0.0, s.exp());
    let den = C64::new(c, 0.0) - top * sn;
    let z = (top * c + sn) / den;
    let d0 = C64::new(c, -sn);
    let mult = (d0 * d0) / (den * den) * s.exp();
    (Vec3::new(x0 + y0 * z.re, y0 * z.im, 0.0), mult)
}

pub(super) fn apply(mult: C64, v: &Vec3) -> Vec3 {
    let z = mult * C64::new(v[0], v[1]);
    Vec3::new(z.re, z.im, 0.0)
}

pub(super) fn dist(p: &Vec3, q: &Vec3) -> f64 {
    let dx = q[0] - p[0];
    let dy = q[1] - p[1];
    let chord = (dx * dx + dy * dy).sqrt();
    2.0 * (chord / (2.0 * (p[1] * q[1]).sqrt())).asinh()
}

pub(super) fn log(p: &Vec3, q: &Vec3) -> Vec3 {
    let y0 = p[1];
    let a = (q[0] - p[0]) / y0;
    let b = q[1] / y0;
    let bm1 = (q[1] - p[1]) / y0;
    let dir = nalgebra::Vector2::new(2.0 * a, a * a + bm1 * (b + 1.0));
    let len = dir.norm();
    if len == 0.0 {
        return Vec3::zeros();
    }
    let d = dist(p, q);
    let u = dir * (y0 * d / len);
    Vec3::new(u[0], u[1], 0.0)
}
