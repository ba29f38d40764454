//! Named cylinder functions and directions, addressable by string id.

use std::sync::Arc;

use super::{CurveFn, CylinderFunction, DirectionField, IntegrandFn, IntegrandGrad, OuterFn, OuterGrad, Window};
use crate::error::{domain, Result};
use crate::geometry::{ManifoldSpec, Vec3};

pub type Field = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
pub type FieldGrad = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;

/// A time-independent integrand `φ(x)` with its differential in stored
/// coordinates.
#[derive(Clone)]
pub struct ScalarField {
    pub phi: Field,
    pub grad: FieldGrad,
}

impl ScalarField {
    pub fn new(
        phi: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        Self { phi: Arc::new(phi), grad: Arc::new(grad) }
    }
}

fn sp(phi: impl Fn(&Vec3) -> f64 + Send + Sync + 'static, grad: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> ScalarField {
    ScalarField::new(phi, grad)
}

/// Smooth bounded test fields. `a`, `b`, `c` exist on every manifold; the
/// sphere also has the coordinate fields used by the inequality suites.
fn spatial(spec: ManifoldSpec, id: &str) -> ScalarField {
    match (spec, id) {
        (ManifoldSpec::Euclidean { .. }, "a") => sp(|x| x[0], |_| Vec3::new(1.0, 0.0, 0.0)),
        (ManifoldSpec::Euclidean { n }, "b") => {
            let last = n - 1;
            sp(
                move |x| (x[0] + 0.5 * x[last]).sin(),
                move |x| {
                    let c = (x[0] + 0.5 * x[last]).cos();
                    let mut g = Vec3::zeros();
                    g[0] += c;
                    g[last] += 0.5 * c;
                    g
                },
            )
        }
        (ManifoldSpec::Euclidean { .. }, "c") => sp(
            |x| (-x.norm_squared() / 4.0).exp(),
            |x| x * (-0.5 * (-x.norm_squared() / 4.0).exp()),
        ),
        (ManifoldSpec::Sphere2, "a" | "z") => sp(|x| x[2], |_| Vec3::new(0.0, 0.0, 1.0)),
        (ManifoldSpec::Sphere2, "b") => sp(|x| x[0] * x[1] + 0.3 * x[0], |x| Vec3::new(x[1] + 0.3, x[0], 0.0)),
        (ManifoldSpec::Sphere2, "c") => sp(|x| (0.5 * x[0]).exp(), |x| Vec3::new(0.5 * (0.5 * x[0]).exp(), 0.0, 0.0)),
        (ManifoldSpec::Sphere2, "x") => sp(|x| x[0], |_| Vec3::new(1.0, 0.0, 0.0)),
        (ManifoldSpec::Sphere2, "y") => sp(|x| x[1], |_| Vec3::new(0.0, 1.0, 0.0)),
        (ManifoldSpec::Sphere2, "xy") => sp(|x| x[0] * x[1], |x| Vec3::new(x[1], x[0], 0.0)),
        (ManifoldSpec::Sphere2, "z2") => sp(|x| x[2] * x[2], |x| Vec3::new(0.0, 0.0, 2.0 * x[2])),
        (ManifoldSpec::Hyperbolic2, "a") => sp(
            |x| x[0] / (1.0 + x[0] * x[0]).sqrt(),
            |x| Vec3::new((1.0 + x[0] * x[0]).powf(-1.5), 0.0, 0.0),
        ),
        (ManifoldSpec::Hyperbolic2, "b") => sp(|x| x[1] / (1.0 + x[1]), |x| Vec3::new(0.0, (1.0 + x[1]).powi(-2), 0.0)),
        (ManifoldSpec::Hyperbolic2, "c") => sp(
            |x| 1.0 / (1.0 + x[0] * x[0] + (x[1] - 1.0).powi(2)),
            |x| {
                let q = 1.0 + x[0] * x[0] + (x[1] - 1.0).powi(2);
                Vec3::new(-2.0 * x[0], -2.0 * (x[1] - 1.0), 0.0) / (q * q)
            },
        ),
        _ => unreachable!("no field {id} on {spec}"),
    }
}

fn window(length: f64, s: &ScalarField) -> Window {
    let (phi, grad) = (s.phi.clone(), s.grad.clone());
    let g: IntegrandFn = Arc::new(move |_, x| phi(x));
    let dg: IntegrandGrad = Arc::new(move |_, x| grad(x));
    Window { length, g, grad: dg }
}

/// Integrand `(1 + s/2) φ(x)`.
fn timed_window(length: f64, s: &ScalarField) -> Window {
    let (phi, grad) = (s.phi.clone(), s.grad.clone());
    let g: IntegrandFn = Arc::new(move |t, x| (1.0 + 0.5 * t) * phi(x));
    let dg: IntegrandGrad = Arc::new(move |t, x| grad(x) * (1.0 + 0.5 * t));
    Window { length, g, grad: dg }
}

fn outer(
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    df: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
) -> (OuterFn, OuterGrad) {
    (Arc::new(f), Arc::new(df))
}

/// Ids accepted by [`cylinder`] on every manifold.
pub fn cylinder_ids() -> &'static [&'static str] {
    &["linear", "trig-pair", "lorentz-time"]
}

/// Three structurally different half-line functions: one window with the
/// identity, two windows of different lengths, and a time-dependent integrand.
pub fn cylinder(id: &str, spec: ManifoldSpec) -> Result<CylinderFunction> {
    let (a, b, c) = (spatial(spec, "a"), spatial(spec, "b"), spatial(spec, "c"));
    match id {
        "linear" => {
            let (f, df) = outer(|a| a[0], |_, out| out[0] = 1.0);
            CylinderFunction::new(id, spec, f, df, vec![window(1.0, &a)], vec![])
        }
        "trig-pair" => {
            let (f, df) = outer(
                |a| a[0].sin() + 0.5 * a[1].cos(),
                |a, out| {
                    out[0] = a[0].cos();
                    out[1] = -0.5 * a[1].sin();
                },
            );
            CylinderFunction::new(id, spec, f, df, vec![window(1.5, &b), window(0.5, &c)], vec![])
        }
        "lorentz-time" => {
            let (f, df) = outer(
                |a| 1.0 / (1.0 + a[0] * a[0]),
                |a, out| out[0] = -2.0 * a[0] / (1.0 + a[0] * a[0]).powi(2),
            );
            CylinderFunction::new(id, spec, f, df, vec![timed_window(1.0, &c)], vec![])
        }
        _ => domain(format!("unknown cylinder function '{id}'")),
    }
}

/// The half-line suite used by the IBP experiment.
pub fn ibp_suite(spec: ManifoldSpec) -> Result<Vec<CylinderFunction>> {
    cylinder_ids().iter().map(|id| cylinder(id, spec)).collect()
}

fn exp_of(
    name: &str,
    windows: Vec<Window>,
    coeffs: Vec<f64>,
    backward: Vec<Window>,
    spec: ManifoldSpec,
) -> Result<CylinderFunction> {
    let c2 = coeffs.clone();
    let (f, df) = outer(
        move |a| a.iter().zip(&coeffs).map(|(x, c)| x * c).sum::<f64>().exp(),
        move |a, out| {
            let v = a.iter().zip(&c2).map(|(x, c)| x * c).sum::<f64>().exp();
            for (o, c) in out.iter_mut().zip(&c2) {
                *o = c * v;
            }
        },
    );
    CylinderFunction::new(name, spec, f, df, windows, backward)
}

/// Positive functions on the sphere for the log-Sobolev and Poincaré checks.
pub fn lsi_suite() -> Result<Vec<CylinderFunction>> {
    let spec = ManifoldSpec::Sphere2;
    let s = |id| spatial(spec, id);
    let mut out = vec![
        exp_of("exp-z", vec![window(1.0, &s("z"))], vec![0.5], vec![], spec)?,
        exp_of("exp-z-strong", vec![window(1.0, &s("z"))], vec![1.5], vec![], spec)?,
        exp_of("exp-x-short", vec![window(0.5, &s("x"))], vec![1.0], vec![], spec)?,
        exp_of("two-window", vec![window(0.5, &s("z")), window(1.5, &s("xy"))], vec![0.7, -0.4], vec![], spec)?,
        exp_of("exp-z2", vec![window(1.0, &s("z2"))], vec![1.0], vec![], spec)?,
    ];
    let (f, df) = outer(|a| 1.0 + 0.5 * (a[0] + a[1]).sin(), |a, o| {
        let c = 0.5 * (a[0] + a[1]).cos();
        o[0] = c;
        o[1] = c;
    });
    out.push(CylinderFunction::new("one-plus-sin", spec, f, df, vec![window(1.0, &s("x")), window(1.0, &s("y"))], vec![])?);
    let (f, df) = outer(|a| (0.2 + a[0] * a[0]).sqrt(), |a, o| o[0] = a[0] / (0.2 + a[0] * a[0]).sqrt());
    out.push(CylinderFunction::new("sqrt-quad", spec, f, df, vec![window(1.0, &s("z"))], vec![])?);
    let (f, df) = outer(|a| a[0].cosh(), |a, o| o[0] = a[0].sinh());
    out.push(CylinderFunction::new("cosh-y", spec, f, df, vec![window(1.0, &s("y"))], vec![])?);
    let (f, df) = outer(|a| (0.5 * a[0]).exp(), |a, o| o[0] = 0.5 * (0.5 * a[0]).exp());
    out.push(CylinderFunction::new("time-weighted", spec, f, df, vec![timed_window(2.0, &s("z"))], vec![])?);
    let (f, df) = outer(|a| 1.0 / (1.0 + (-2.0 * a[0]).exp()), |a, o| {
        let e = (-2.0 * a[0]).exp();
        o[0] = 2.0 * e / (1.0 + e).powi(2);
    });
    out.push(CylinderFunction::new("logistic-x", spec, f, df, vec![window(1.0, &s("x"))], vec![])?);
    let (f, df) = outer(|a| 1.0 + 0.1 * a[0], |_, o| o[0] = 0.1);
    out.push(CylinderFunction::new("near-one", spec, f, df, vec![window(1.0, &s("z"))], vec![])?);
    out.push(CylinderFunction::constant(spec, 1.0));
    Ok(out)
}

/// Two-sided functions on the sphere for the whole-line inequality.
pub fn whole_line_suite() -> Result<Vec<CylinderFunction>> {
    let spec = ManifoldSpec::Sphere2;
    let s = |id| spatial(spec, id);
    let mut out = vec![
        exp_of("exp-z-both", vec![window(1.0, &s("z"))], vec![0.5, 0.5], vec![window(1.0, &s("z"))], spec)?,
        exp_of("exp-x-past", vec![], vec![1.0], vec![window(0.5, &s("x"))], spec)?,
        exp_of("exp-z-future", vec![window(1.0, &s("z"))], vec![0.5], vec![], spec)?,
        exp_of("exp-mixed", vec![window(0.5, &s("xy"))], vec![0.8, -0.6], vec![window(1.5, &s("y"))], spec)?,
    ];
    let (f, df) = outer(|a| 1.0 + 0.5 * (a[0] - a[1]).sin(), |a, o| {
        let c = 0.5 * (a[0] - a[1]).cos();
        o[0] = c;
        o[1] = -c;
    });
    out.push(CylinderFunction::new("one-plus-sin-both", spec, f, df, vec![window(1.0, &s("x"))], vec![window(1.0, &s("y"))])?);
    let (f, df) = outer(|a| (0.2 + (a[0] + a[1]).powi(2)).sqrt(), |a, o| {
        let v = (a[0] + a[1]) / (0.2 + (a[0] + a[1]).powi(2)).sqrt();
        o[0] = v;
        o[1] = v;
    });
    out.push(CylinderFunction::new("sqrt-quad-both", spec, f, df, vec![window(1.0, &s("z"))], vec![window(1.0, &s("z"))])?);
    out.push(CylinderFunction::constant(spec, 1.0));
    Ok(out)
}

/// `F_T(γ) = ∫₀^T γ₁(s) ds` on Euclidean space.
pub fn time_integral(n: usize, horizon: f64) -> Result<CylinderFunction> {
    let spec = ManifoldSpec::euclidean(n)?;
    let (f, df) = outer(|a| a[0], |_, o| o[0] = 1.0);
    CylinderFunction::new(format!("time-integral-{horizon}"), spec, f, df, vec![window(horizon, &spatial(spec, "a"))], vec![])
}

/// `F_T(γ) = T⁻¹ ∫₀^T u(γ(s)) ds`.
pub fn time_average(spec: ManifoldSpec, horizon: f64, u: &ScalarField) -> Result<CylinderFunction> {
    let (f, df) = outer(move |a| a[0] / horizon, move |_, o| o[0] = 1.0 / horizon);
    CylinderFunction::new(format!("time-average-{horizon}"), spec, f, df, vec![window(horizon, u)], vec![])
}

/// [`time_average`] of the harmonic function `u = arg(z)/π` on the upper
/// half-plane.
pub fn harmonic_average(horizon: f64) -> Result<CylinderFunction> {
    time_average(ManifoldSpec::Hyperbolic2, horizon, &harmonic_field())
}

pub fn harmonic_field() -> ScalarField {
    sp(harmonic_u, harmonic_grad)
}

/// `exp(−|x|²/2)` on Euclidean space.
pub fn gaussian_bump() -> ScalarField {
    sp(|x| (-0.5 * x.norm_squared()).exp(), |x| x * -(-0.5 * x.norm_squared()).exp())
}

/// `u(x, y) = atan2(y, x)/π`, harmonic on the upper half-plane.
pub fn harmonic_u(x: &Vec3) -> f64 {
    x[1].atan2(x[0]) / std::f64::consts::PI
}

/// Chart partials of [`harmonic_u`].
pub fn harmonic_grad(x: &Vec3) -> Vec3 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    Vec3::new(-x[1], x[0], 0.0) / (std::f64::consts::PI * r2)
}

/// Riemannian `|∇u|²` of [`harmonic_u`].
pub fn harmonic_grad_sq(x: &Vec3) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    x[1] * x[1] / (std::f64::consts::PI.powi(2) * r2)
}

pub fn direction_ids() -> &'static [&'static str] {
    &["ramp", "wave"]
}

fn axis(dim: usize, i: usize, v: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[i.min(dim - 1)] = v;
    out
}

/// Built-in directions. `ramp`: `min(s, 1)` then down to 0 at `s = 2`, along
/// the first axis, mirrored at half height along the last axis for `s < 0`.
/// `wave`: `sin(π s)` on `[−2, 2]` along the last axis.
pub fn direction(id: &str, dim: usize) -> Result<DirectionField> {
    if !(1..=3).contains(&dim) {
        return domain(format!("dimension must be 1, 2 or 3, got {dim}"));
    }
    let last = dim - 1;
    let (h, dh, support): (CurveFn, CurveFn, (f64, f64)) = match id {
        "ramp" => {
            let r = |s: f64| if s <= 1.0 { s } else { 2.0 - s };
            let dr = |s: f64| if s < 1.0 { 1.0 } else { -1.0 };
            (
                Arc::new(move |t| if t >= 0.0 { axis(dim, 0, r(t)) } else { axis(dim, last, 0.5 * r(-t)) }),
                Arc::new(move |t| if t >= 0.0 { axis(dim, 0, dr(t)) } else { axis(dim, last, -0.5 * dr(-t)) }),
                (-2.0, 2.0),
            )
        }
        "wave" => {
            let pi = std::f64::consts::PI;
            (
                Arc::new(move |t| axis(dim, last, (pi * t).sin())),
                Arc::new(move |t| axis(dim, last, pi * (pi * t).cos())),
                (-2.0, 2.0),
            )
        }
        _ => return domain(format!("unknown direction '{id}'")),
    };
    DirectionField::new(id, dim, h, dh, support)
}
