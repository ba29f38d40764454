use super::Vec3;
use crate::error::{Error, Result};

const CUT_MARGIN: f64 = 1e-9;

pub(super) fn exp(p: &Vec3, v: &Vec3) -> Vec3 {
    let theta = v.norm();
    if theta == 0.0 {
        return *p;
    }
    let q = p * theta.cos() + v * (theta.sin() / theta);
    q / q.norm()
}

pub(super) fn log(p: &Vec3, q: &Vec3) -> Result<Vec3> {
    let c = p.dot(q);
    if c < -1.0 + CUT_MARGIN {
        return Err(Error::CutLocus);
    }
    let u = q - p * c;
    let s = u.norm();
    if s == 0.0 {
        return Ok(Vec3::zeros());
    }
    let theta = s.atan2(c);
    let v = u * (theta / s);
    Ok(v - p * v.dot(p))
}

pub(super) fn dist(p: &Vec3, q: &Vec3) -> f64 {
    p.cross(q).norm().atan2(p.dot(q))
}

/// Transport of `w` from `p` along `t ↦ exp(p, t v)` for `t ∈ [0, 1]`.
pub(super) fn transport_along(p: &Vec3, v: &Vec3, w: &Vec3) -> Vec3 {
    let theta = v.norm();
    if theta == 0.0 {
        return *w;
    }
    let e = v / theta;
    let a = w.dot(&e);
    w + (e * (theta.cos() - 1.0) - p * theta.sin()) * a
}
