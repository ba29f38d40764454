//! Riemannian manifolds used throughout: flat space, the unit sphere and the
//! hyperbolic half-plane.
//!
//! Points and vectors are stored as `Vector3<f64>`. Sphere points use the
//! embedded coordinates in R^3; the other two use chart coordinates, padded
//! with zeros when the dimension is below three.

mod hyperbolic;
mod sphere;
pub mod spherical_chart;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector3};

use crate::error::{domain, Error, Result};

pub type Vec3 = Vector3<f64>;

const BASE_TOL: f64 = 1e-12;
const FRAME_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ManifoldSpec {
    Euclidean { n: usize },
    Sphere2,
    Hyperbolic2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldPoint {
    coords: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    components: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthonormalFrame {
    base: ManifoldPoint,
    dim: usize,
    columns: [Vec3; 3],
}

/// Christoffel symbols `gamma[a][b][c]` = Γ^a_{bc} in chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    pub gamma: [[[f64; 3]; 3]; 3],
}

impl ManifoldPoint {
    pub fn coords(&self) -> &Vec3 {
        &self.coords
    }

    pub(crate) fn from_raw(coords: Vec3) -> Self {
        Self { coords }
    }
}

impl TangentVector {
    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn components(&self) -> &Vec3 {
        &self.components
    }

    pub(crate) fn from_raw(base: ManifoldPoint, components: Vec3) -> Self {
        Self { base, components }
    }
}

impl OrthonormalFrame {
    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, i: usize) -> TangentVector {
        TangentVector::from_raw(self.base, self.columns[i])
    }

    pub fn columns(&self) -> &[Vec3] {
        &self.columns[..self.dim]
    }

    /// `U a = Σ a_i e_i`.
    pub fn apply(&self, a: &[f64]) -> Vec3 {
        let mut v = Vec3::zeros();
        for (e, &c) in self.columns().iter().zip(a) {
            v += e * c;
        }
        v
    }

    pub(crate) fn from_raw(base: ManifoldPoint, dim: usize, columns: [Vec3; 3]) -> Self {
        Self { base, dim, columns }
    }

    pub(crate) fn raw_columns(&self) -> [Vec3; 3] {
        self.columns
    }
}

impl Christoffel {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma[a][b][c]
    }
}

fn same_base(p: &ManifoldPoint, q: &ManifoldPoint) -> bool {
    (p.coords - q.coords).amax() <= BASE_TOL * (1.0 + p.coords.amax())
}

fn check_base(p: &ManifoldPoint, v: &TangentVector) -> Result<()> {
    if same_base(p, &v.base) {
        Ok(())
    } else {
        domain("tangent vector is not based at the given point")
    }
}

impl ManifoldSpec {
    pub fn euclidean(n: usize) -> Result<Self> {
        if (1..=3).contains(&n) {
            Ok(Self::Euclidean { n })
        } else {
            domain(format!("Euclidean dimension must be 1, 2 or 3, got {n}"))
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Euclidean { n } => *n,
            Self::Sphere2 | Self::Hyperbolic2 => 2,
        }
    }

    /// Number of stored coordinates per point.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Euclidean { n } => *n,
            Self::Sphere2 => 3,
            Self::Hyperbolic2 => 2,
        }
    }

    /// `K` with `Ric = K g`.
    pub fn ricci_constant(&self) -> f64 {
        match self {
            Self::Euclidean { .. } => 0.0,
            Self::Sphere2 => 1.0,
            Self::Hyperbolic2 => -1.0,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Self::Sphere2)
    }

    /// Reference point: the origin, the north pole, or `i`.
    pub fn origin(&self) -> ManifoldPoint {
        ManifoldPoint::from_raw(match self {
            Self::Euclidean { .. } => Vec3::zeros(),
            Self::Sphere2 => Vec3::new(0.0, 0.0, 1.0),
            Self::Hyperbolic2 => Vec3::new(0.0, 1.0, 0.0),
        })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        if !x.iter().all(|c| c.is_finite()) {
            return false;
        }
        match self {
            Self::Euclidean { n } => x.iter().skip(*n).all(|&c| c == 0.0),
            Self::Sphere2 => (x.norm_squared() - 1.0).abs() <= 1e-12,
            Self::Hyperbolic2 => x[1] > 0.0 && x[2] == 0.0,
        }
    }

    /// Builds a point from its stored coordinates. Sphere input within 1e-9
    /// of unit length is renormalized.
    pub fn point(&self, coords: &[f64]) -> Result<ManifoldPoint> {
        if coords.len() != self.ambient_dim() {
            return domain(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                coords.len()
            ));
        }
        let mut x = Vec3::zeros();
        x.as_mut_slice()[..coords.len()].copy_from_slice(coords);
        if let Self::Sphere2 = self {
            let r2 = x.norm_squared();
            if (r2 - 1.0).abs() <= 1e-9 {
                x /= r2.sqrt();
            }
        }
        if self.contains(&x) {
            Ok(ManifoldPoint::from_raw(x))
        } else {
            domain(format!("{coords:?} is not a point of {self}"))
        }
    }

    pub fn tangent(&self, p: &ManifoldPoint, components: &[f64]) -> Result<TangentVector> {
        if components.len() != self.ambient_dim() {
            return domain(format!(
                "expected {} components, got {}",
                self.ambient_dim(),
                components.len()
            ));
        }
        let mut v = Vec3::zeros();
        v.as_mut_slice()[..components.len()].copy_from_slice(components);
        if !v.iter().all(|c| c.is_finite()) {
            return domain("non-finite tangent components");
        }
        if let Self::Sphere2 = self {
            if v.dot(&p.coords).abs() > 1e-10 * (1.0 + v.norm()) {
                return domain("vector is not tangent to the sphere at the base point");
            }
        }
        Ok(TangentVector::from_raw(*p, v))
    }

    /// Orthogonal projection of an ambient vector onto `T_p`.
    pub fn project(&self, p: &ManifoldPoint, v: &Vec3) -> TangentVector {
        let w = match self {
            Self::Sphere2 => v - p.coords * v.dot(&p.coords),
            Self::Euclidean { n } => {
                let mut w = *v;
                w.iter_mut().skip(*n).for_each(|c| *c = 0.0);
                w
            }
            Self::Hyperbolic2 => Vec3::new(v[0], v[1], 0.0),
        };
        TangentVector::from_raw(*p, w)
    }

    pub fn zero_vector(&self, p: &ManifoldPoint) -> TangentVector {
        TangentVector::from_raw(*p, Vec3::zeros())
    }

    pub fn metric(&self, p: &ManifoldPoint, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        check_base(p, v)?;
        check_base(p, w)?;
        Ok(self.dot_raw(&p.coords, &v.components, &w.components))
    }

    pub fn norm(&self, p: &ManifoldPoint, v: &TangentVector) -> Result<f64> {
        Ok(self.metric(p, v, v)?.sqrt())
    }

    pub fn christoffel(&self, p: &ManifoldPoint) -> Result<Christoffel> {
        let mut gamma = [[[0.0; 3]; 3]; 3];
        match self {
            Self::Euclidean { n } => Ok(Christoffel { dim: *n, gamma }),
            Self::Sphere2 => domain(
                "the sphere is stored in embedded coordinates; use spherical_chart for a chart",
            ),
            Self::Hyperbolic2 => {
                let y = p.coords[1];
                gamma[0][0][1] = -1.0 / y;
                gamma[0][1][0] = -1.0 / y;
                gamma[1][0][0] = 1.0 / y;
                gamma[1][1][1] = -1.0 / y;
                Ok(Christoffel { dim: 2, gamma })
            }
        }
    }

    pub fn exp_map(&self, p: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
        check_base(p, v)?;
        Ok(ManifoldPoint::from_raw(self.exp_raw(&p.coords, &v.components)))
    }

    pub fn log_map(&self, p: &ManifoldPoint, q: &ManifoldPoint) -> Result<TangentVector> {
        Ok(TangentVector::from_raw(*p, self.log_raw(&p.coords, &q.coords)?))
    }

    pub fn parallel_transport(
        &self,
        p: &ManifoldPoint,
        q: &ManifoldPoint,
        v: &TangentVector,
    ) -> Result<TangentVector> {
        check_base(p, v)?;
        let w = self.transport_raw(&p.coords, &q.coords, &v.components)?;
        Ok(TangentVector::from_raw(*q, w))
    }

    pub fn distance(&self, p: &ManifoldPoint, q: &ManifoldPoint) -> f64 {
        self.dist_raw(&p.coords, &q.coords)
    }

    /// `ρ̃ = min(ρ, 1)`.
    pub fn truncated_distance(&self, p: &ManifoldPoint, q: &ManifoldPoint) -> f64 {
        self.distance(p, q).min(1.0)
    }

    /// Ricci tensor read in the frame, as an n×n matrix acting on R^n.
    /// All three instances have constant curvature, so on an orthonormal
    /// frame this is `K I`.
    pub fn ricci_operator(&self, frame: &OrthonormalFrame) -> DMatrix<f64> {
        let n = frame.dim;
        DMatrix::identity(n, n) * self.ricci_constant()
    }

    /// Smallest eigenvalue of the Ricci operator at `p`.
    pub fn ricci_lower_bound(&self, _p: &ManifoldPoint) -> f64 {
        self.ricci_constant()
    }

    /// Canonical orthonormal frame at `p`.
    pub fn standard_frame(&self, p: &ManifoldPoint) -> OrthonormalFrame {
        let x = p.coords;
        let cols = match self {
            Self::Euclidean { .. } => [Vec3::x(), Vec3::y(), Vec3::z()],
            Self::Hyperbolic2 => [Vec3::new(x[1], 0.0, 0.0), Vec3::new(0.0, x[1], 0.0), Vec3::zeros()],
            Self::Sphere2 => {
                let axis = x.iamin();
                let mut a = Vec3::zeros();
                a[axis] = 1.0;
                let e1 = (a - x * a.dot(&x)).normalize();
                let e2 = x.cross(&e1);
                [e1, e2, Vec3::zeros()]
            }
        };
        let mut cols = cols;
        if let Self::Euclidean { n } = self {
            for c in cols.iter_mut().skip(*n) {
                *c = Vec3::zeros();
            }
        }
        OrthonormalFrame::from_raw(*p, self.dimension(), cols)
    }

    /// Frame from explicit columns; rejects non-orthonormal input.
    pub fn frame(&self, p: &ManifoldPoint, columns: &[TangentVector]) -> Result<OrthonormalFrame> {
        let n = self.dimension();
        if columns.len() != n {
            return domain(format!("expected {n} frame columns, got {}", columns.len()));
        }
        let mut cols = [Vec3::zeros(); 3];
        for (i, c) in columns.iter().enumerate() {
            check_base(p, c)?;
            cols[i] = c.components;
        }
        for i in 0..n {
            for j in 0..n {
                let g = self.dot_raw(&p.coords, &cols[i], &cols[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).abs() > FRAME_TOL {
                    return domain("frame columns are not orthonormal");
                }
            }
        }
        Ok(OrthonormalFrame::from_raw(*p, n, cols))
    }

    /// Maximum deviation of the Gram matrix from the identity.
    pub fn frame_defect(&self, frame: &OrthonormalFrame) -> f64 {
        let n = frame.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let g = self.dot_raw(&frame.base.coords, &frame.columns[i], &frame.columns[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        if let Self::Sphere2 = self {
            for c in frame.columns() {
                worst = worst.max(c.dot(&frame.base.coords).abs());
            }
        }
        worst
    }

    // Unchecked coordinate-level operations. Callers guarantee base points.

    pub fn dot_raw(&self, p: &Vec3, v: &Vec3, w: &Vec3) -> f64 {
        match self {
            Self::Hyperbolic2 => (v[0] * w[0] + v[1] * w[1]) / (p[1] * p[1]),
            _ => v.dot(w),
        }
    }

    pub fn exp_raw(&self, p: &Vec3, v: &Vec3) -> Vec3 {
        match self {
            Self::Euclidean { .. } => p + v,
            Self::Sphere2 => sphere::exp(p, v),
            Self::Hyperbolic2 => hyperbolic::step(p, v).0,
        }
    }

    pub fn log_raw(&self, p: &Vec3, q: &Vec3) -> Result<Vec3> {
        match self {
            Self::Euclidean { .. } => Ok(q - p),
            Self::Sphere2 => sphere::log(p, q),
            Self::Hyperbolic2 => Ok(hyperbolic::log(p, q)),
        }
    }

    pub fn dist_raw(&self, p: &Vec3, q: &Vec3) -> f64 {
        match self {
            Self::Euclidean { .. } => (q - p).norm(),
            Self::Sphere2 => sphere::dist(p, q),
            Self::Hyperbolic2 => hyperbolic::dist(p, q),
        }
    }

    pub fn transport_raw(&self, p: &Vec3, q: &Vec3, v: &Vec3) -> Result<Vec3> {
        match self {
            Self::Euclidean { .. } => Ok(*v),
            Self::Sphere2 => {
                let step = sphere::log(p, q)?;
                Ok(sphere::transport_along(p, &step, v))
            }
            Self::Hyperbolic2 => {
                let step = hyperbolic::log(p, q);
                let (_, mult) = hyperbolic::step(p, &step);
                Ok(hyperbolic::apply(mult, v))
            }
        }
    }

    /// Moves along the geodesic `t ↦ exp(p, t v)`, transporting `frame` in place
    /// and re-orthonormalizing it at the endpoint, which is returned.
    pub fn step_raw(&self, p: &Vec3, v: &Vec3, frame: &mut [Vec3]) -> Vec3 {
        let q = match self {
            Self::Euclidean { .. } => return p + v,
            Self::Sphere2 => {
                let q = sphere::exp(p, v);
                for e in frame.iter_mut() {
                    *e = sphere::transport_along(p, v, e);
                }
                q
            }
            Self::Hyperbolic2 => {
                let (q, mult) = hyperbolic::step(p, v);
                for e in frame.iter_mut() {
                    *e = hyperbolic::apply(mult, e);
                }
                q
            }
        };
        self.orthonormalize_raw(&q, frame);
        q
    }

    /// Gram–Schmidt in the metric at `p` (sphere columns are first projected
    /// onto the tangent plane).
    pub fn orthonormalize_raw(&self, p: &Vec3, frame: &mut [Vec3]) {
        for i in 0..frame.len() {
            let mut e = frame[i];
            if let Self::Sphere2 = self {
                e -= p * e.dot(p);
            }
            for j in 0..i {
                let c = self.dot_raw(p, &e, &frame[j]);
                e -= frame[j] * c;
            }
            let len = self.dot_raw(p, &e, &e).sqrt();
            frame[i] = e / len;
        }
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euclidean { n } => write!(f, "euclidean{n}"),
            Self::Sphere2 => write!(f, "sphere2"),
            Self::Hyperbolic2 => write!(f, "hyperbolic2"),
        }
    }
}

impl FromStr for ManifoldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "euclidean1" | "r1" => Ok(Self::Euclidean { n: 1 }),
            "euclidean2" | "r2" => Ok(Self::Euclidean { n: 2 }),
            "euclidean3" | "r3" => Ok(Self::Euclidean { n: 3 }),
            "sphere" | "sphere2" | "s2" => Ok(Self::Sphere2),
            "hyperbolic" | "hyperbolic2" | "h2" => Ok(Self::Hyperbolic2),
            other => domain(format!("unknown manifold '{other}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn metric_examples() {
        let r2 = ManifoldSpec::euclidean(2).unwrap();
        let o = r2.origin();
        let v = r2.tangent(&o, &[1.0, 0.0]).unwrap();
        let w = r2.tangent(&o, &[0.0, 1.0]).unwrap();
        assert_eq!(r2.metric(&o, &v, &w).unwrap(), 0.0);

        let h = ManifoldSpec::Hyperbolic2;
        let p = h.point(&[0.0, 2.0]).unwrap();
        let v = h.tangent(&p, &[1.0, 0.0]).unwrap();
        assert!(close(h.metric(&p, &v, &v).unwrap(), 0.25, 1e-15));

        let s = ManifoldSpec::Sphere2;
        let n = s.origin();
        let e = s.tangent(&n, &[0.0, 1.0, 0.0]).unwrap();
        assert!(close(s.metric(&n, &e, &e).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn hyperbolic_metric_matches_distance_expansion() {
        let h = ManifoldSpec::Hyperbolic2;
        let p = h.point(&[0.0, 2.0]).unwrap();
        let eps = 1e-6;
        let q = h.point(&[eps, 2.0]).unwrap();
        let d = h.distance(&p, &q) / eps;
        assert!(close(d * d, 0.25, 1e-6));
    }

    #[test]
    fn metric_rejects_foreign_vectors() {
        let r2 = ManifoldSpec::euclidean(2).unwrap();
        let o = r2.origin();
        let p = r2.point(&[1.0, 0.0]).unwrap();
        let v = r2.tangent(&p, &[1.0, 0.0]).unwrap();
        assert!(matches!(r2.metric(&o, &v, &v), Err(Error::Domain(_))));
    }

    #[test]
    fn christoffel_examples() {
        let r3 = ManifoldSpec::euclidean(3).unwrap();
        let c = r3.christoffel(&r3.origin()).unwrap();
        assert!(c.gamma.iter().flatten().flatten().all(|&g| g == 0.0));

        let h = ManifoldSpec::Hyperbolic2;
        let c = h.christoffel(&h.point(&[0.0, 2.0]).unwrap()).unwrap();
        assert_eq!(c.get(1, 1, 1), -0.5);
        assert_eq!(c.get(1, 0, 0), 0.5);
        assert_eq!(c.get(0, 0, 1), -0.5);
        assert_eq!(c.get(0, 1, 0), -0.5);
        assert_eq!(c.get(0, 0, 0), 0.0);

        assert!(ManifoldSpec::Sphere2.christoffel(&ManifoldSpec::Sphere2.origin()).is_err());
    }

    #[test]
    fn exp_examples() {
        let r2 = ManifoldSpec::euclidean(2).unwrap();
        let o = r2.origin();
        let q = r2.exp_map(&o, &r2.tangent(&o, &[3.0, 4.0]).unwrap()).unwrap();
        assert_eq!(q.coords().as_slice()[..2], [3.0, 4.0]);

        let s = ManifoldSpec::Sphere2;
        let n = s.origin();
        let q = s.exp_map(&n, &s.tangent(&n, &[FRAC_PI_2, 0.0, 0.0]).unwrap()).unwrap();
        assert!((q.coords() - Vec3::x()).norm() < 1e-15);

        let h = ManifoldSpec::Hyperbolic2;
        let i = h.origin();
        let q = h.exp_map(&i, &h.tangent(&i, &[0.0, 1.3]).unwrap()).unwrap();
        assert!(close(q.coords()[0], 0.0, 1e-15));
        assert!(close(q.coords()[1], 1.3f64.exp(), 1e-14));
        assert!(close(h.distance(&i, &q), 1.3, 1e-14));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        for spec in [ManifoldSpec::euclidean(3).unwrap(), ManifoldSpec::Sphere2, ManifoldSpec::Hyperbolic2] {
            let p = match spec {
                ManifoldSpec::Sphere2 => spec.point(&[0.6, 0.0, 0.8]).unwrap(),
                ManifoldSpec::Hyperbolic2 => spec.point(&[0.3, 0.7]).unwrap(),
                _ => spec.point(&[1.0, 2.0, 3.0]).unwrap(),
            };
            assert_eq!(spec.exp_map(&p, &spec.zero_vector(&p)).unwrap(), p);
        }
    }

    #[test]
    fn log_examples() {
        let s = ManifoldSpec::Sphere2;
        let n = s.origin();
        let x = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let v = s.log_map(&n, &x).unwrap();
        assert!((v.components() - Vec3::x() * FRAC_PI_2).norm() < 1e-15);
        assert_eq!(s.log_map(&n, &n).unwrap().components(), &Vec3::zeros());
        let south = s.point(&[0.0, 0.0, -1.0]).unwrap();
        assert_eq!(s.log_map(&n, &south), Err(Error::CutLocus));

        let r3 = ManifoldSpec::euclidean(3).unwrap();
        let p = r3.point(&[1.0, 2.0, 3.0]).unwrap();
        let q = r3.point(&[-1.0, 0.5, 2.0]).unwrap();
        assert_eq!(r3.log_map(&p, &q).unwrap().components(), &(q.coords() - p.coords()));
    }

    #[test]
    fn distance_examples() {
        let s = ManifoldSpec::Sphere2;
        let x = s.point(&[1.0, 0.0, 0.0]).unwrap();
        assert!(close(s.distance(&s.origin(), &x), FRAC_PI_2, 1e-15));
        assert_eq!(s.distance(&x, &x), 0.0);
        let h = ManifoldSpec::Hyperbolic2;
        let q = h.point(&[0.0, std::f64::consts::E]).unwrap();
        assert!(close(h.distance(&h.origin(), &q), 1.0, 1e-15));
        assert_eq!(h.truncated_distance(&h.origin(), &h.point(&[0.0, 100.0]).unwrap()), 1.0);
        let south = s.point(&[0.0, 0.0, -1.0]).unwrap();
        assert!(close(s.distance(&s.origin(), &south), PI, 1e-15));
    }

    #[test]
    fn transport_trivial_cases() {
        let s = ManifoldSpec::Sphere2;
        let p = s.point(&[0.0, 0.6, 0.8]).unwrap();
        let v = s.tangent(&p, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.parallel_transport(&p, &p, &v).unwrap().components(), v.components());
        let r2 = ManifoldSpec::euclidean(2).unwrap();
        let a = r2.point(&[1.0, 1.0]).unwrap();
        let b = r2.point(&[-3.0, 2.0]).unwrap();
        let w = r2.tangent(&a, &[0.5, -2.0]).unwrap();
        assert_eq!(r2.parallel_transport(&a, &b, &w).unwrap().components(), w.components());
    }

    #[test]
    fn sphere_holonomy_of_octant_triangle() {
        let s = ManifoldSpec::Sphere2;
        let a = s.point(&[0.0, 0.0, 1.0]).unwrap();
        let b = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let c = s.point(&[0.0, 1.0, 0.0]).unwrap();
        let v0 = s.tangent(&a, &[1.0, 0.0, 0.0]).unwrap();
        let v1 = s.parallel_transport(&a, &b, &v0).unwrap();
        let v2 = s.parallel_transport(&b, &c, &v1).unwrap();
        let v3 = s.parallel_transport(&c, &a, &v2).unwrap();
        let cos = v3.components().dot(v0.components());
        assert!(cos.abs() < 1e-14);
        assert!((v3.components().norm() - 1.0).abs() < 1e-14);
        // the enclosed area is π/2; the rotation is counter-clockwise seen from outside
        let rotated = a.coords().cross(v0.components());
        assert!((v3.components() - rotated).norm() < 1e-14);
    }

    #[test]
    fn ricci_examples() {
        for (spec, k) in [
            (ManifoldSpec::euclidean(3).unwrap(), 0.0),
            (ManifoldSpec::Sphere2, 1.0),
            (ManifoldSpec::Hyperbolic2, -1.0),
        ] {
            let p = match spec {
                ManifoldSpec::Hyperbolic2 => spec.point(&[0.4, 2.5]).unwrap(),
                _ => spec.origin(),
            };
            let ric = spec.ricci_operator(&spec.standard_frame(&p));
            let n = spec.dimension();
            assert!((ric - DMatrix::identity(n, n) * k).amax() < 1e-14);
            let eig = spec.ricci_operator(&spec.standard_frame(&p)).symmetric_eigenvalues();
            assert!(close(eig.min(), spec.ricci_lower_bound(&p), 1e-14));
        }
    }

    #[test]
    fn standard_frames_are_orthonormal() {
        let s = ManifoldSpec::Sphere2;
        for c in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.48, -0.6, 0.64]] {
            let p = s.point(&c).unwrap();
            assert!(s.frame_defect(&s.standard_frame(&p)) < 1e-15);
        }
        let h = ManifoldSpec::Hyperbolic2;
        let p = h.point(&[3.0, 0.25]).unwrap();
        assert!(h.frame_defect(&h.standard_frame(&p)) < 1e-15);
    }

    #[test]
    fn point_validation() {
        assert!(ManifoldSpec::Hyperbolic2.point(&[0.0, 0.0]).is_err());
        assert!(ManifoldSpec::Hyperbolic2.point(&[0.0, -1.0]).is_err());
        assert!(ManifoldSpec::Sphere2.point(&[1.0, 1.0, 0.0]).is_err());
        assert!(ManifoldSpec::Sphere2.point(&[1.0, 0.0]).is_err());
        assert!(ManifoldSpec::euclidean(0).is_err());
        assert!(ManifoldSpec::euclidean(4).is_err());
        let s = ManifoldSpec::Sphere2;
        assert!(s.tangent(&s.origin(), &[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("sphere2".parse::<ManifoldSpec>().unwrap(), ManifoldSpec::Sphere2);
        assert_eq!("euclidean2".parse::<ManifoldSpec>().unwrap(), ManifoldSpec::Euclidean { n: 2 });
        assert_eq!("H2".parse::<ManifoldSpec>().unwrap(), ManifoldSpec::Hyperbolic2);
        for spec in [ManifoldSpec::Euclidean { n: 3 }, ManifoldSpec::Sphere2, ManifoldSpec::Hyperbolic2] {
            assert_eq!(spec.to_string().parse::<ManifoldSpec>().unwrap(), spec);
        }
        assert!("torus".parse::<ManifoldSpec>().is_err());
    }
}
