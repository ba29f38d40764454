//! Cylinder functions on path space, their gradients, cut-off processes and
//! the Monte Carlo estimators built on them.

mod estimators;
pub mod registry;

use std::sync::Arc;

use crate::brownian::{sample_initial, sample_two_sided_framed, sample_bm_framed, steps_for, FramedPath, NuSpec, TwoSidedPath};
use crate::error::{domain, Error, Result};
use crate::geometry::{ManifoldPoint, ManifoldSpec, OrthonormalFrame, Vec3};
use crate::rng::RngStream;

pub use estimators::{
    dirichlet_form, energies, fd_gradient_of_expectation, gradient_of_expectation, ibp_residual, ibp_suite,
    GradientEstimate, IbpResult, SuiteSample,
};

pub type OuterFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type OuterGrad = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// `g(s, x)` with `x` in stored coordinates.
pub type IntegrandFn = Arc<dyn Fn(f64, &Vec3) -> f64 + Send + Sync>;
/// Differential of `g(s, ·)` in stored coordinates (ambient gradient on the
/// sphere, chart partials otherwise).
pub type IntegrandGrad = Arc<dyn Fn(f64, &Vec3) -> Vec3 + Send + Sync>;
pub type CurveFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

const GRAD_TOL: f64 = 1e-5;

#[derive(Clone)]
pub struct Window {
    /// `T_j` for a forward window; `T̄_j` (a positive length) for a backward one.
    pub length: f64,
    pub g: IntegrandFn,
    pub grad: IntegrandGrad,
}

/// Declared sup-norm bounds of `f`, `∂f`, `g`, `∇g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub f: f64,
    pub df: f64,
    pub g: f64,
    pub dg: f64,
}

#[derive(Clone)]
pub struct CylinderFunction {
    name: String,
    spec: ManifoldSpec,
    outer: OuterFn,
    outer_grad: OuterGrad,
    forward: Vec<Window>,
    backward: Vec<Window>,
    bounds: Option<Bounds>,
}

/// A Cameron–Martin direction on the whole line; half-line use reads `t ≥ 0`.
#[derive(Clone)]
pub struct DirectionField {
    name: String,
    dim: usize,
    h: CurveFn,
    dh: CurveFn,
    support: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffParams {
    pub m: f64,
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffProcess {
    pub m: f64,
    pub horizon: f64,
    /// `l(t_k)`.
    pub values: Vec<f64>,
    /// Forward differences `(l(t_{k+1}) − l(t_k))/dt`, one per step.
    pub derivatives: Vec<f64>,
}

/// `DF` on the grid of each leg, with the quadrature weights of the windows
/// folded in so that `⟨DF, h⟩ = dt Σ_k DF_k · h(t_k)` equals `D_h F` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub dt: f64,
    pub dim: usize,
    pub forward: Vec<[f64; 3]>,
    pub backward: Vec<[f64; 3]>,
}

/// Access to the one or two legs of a sampled path.
pub trait PathLegs {
    fn forward(&self) -> &FramedPath;
    fn backward(&self) -> Option<&FramedPath>;
}

impl PathLegs for FramedPath {
    fn forward(&self) -> &FramedPath {
        self
    }
    fn backward(&self) -> Option<&FramedPath> {
        None
    }
}

impl PathLegs for TwoSidedPath {
    fn forward(&self) -> &FramedPath {
        &self.forward
    }
    fn backward(&self) -> Option<&FramedPath> {
        Some(&self.backward)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampledPath {
    Half(FramedPath),
    Two(TwoSidedPath),
}

impl PathLegs for SampledPath {
    fn forward(&self) -> &FramedPath {
        match self {
            Self::Half(p) => p,
            Self::Two(p) => &p.forward,
        }
    }
    fn backward(&self) -> Option<&FramedPath> {
        match self {
            Self::Half(_) => None,
            Self::Two(p) => Some(&p.backward),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Start {
    Point(ManifoldPoint),
    Nu(NuSpec),
}

/// How ensemble paths are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampler {
    pub spec: ManifoldSpec,
    pub start: Start,
    pub two_sided: bool,
    pub horizon: f64,
    /// Rotation of the first two columns of the initial frame.
    pub frame_angle: f64,
}

impl Sampler {
    pub fn half_line(spec: ManifoldSpec, x0: ManifoldPoint, horizon: f64) -> Self {
        Self { spec, start: Start::Point(x0), two_sided: false, horizon, frame_angle: 0.0 }
    }

    pub fn two_sided(spec: ManifoldSpec, start: Start, horizon: f64) -> Self {
        Self { spec, start, two_sided: true, horizon, frame_angle: 0.0 }
    }

    pub fn initial_frame(&self, x0: &ManifoldPoint) -> OrthonormalFrame {
        let f = self.spec.standard_frame(x0);
        if self.frame_angle == 0.0 || self.spec.dimension() < 2 {
            return f;
        }
        let (s, c) = self.frame_angle.sin_cos();
        let mut cols = f.raw_columns();
        let (e1, e2) = (cols[0], cols[1]);
        cols[0] = e1 * c + e2 * s;
        cols[1] = e2 * c - e1 * s;
        OrthonormalFrame::from_raw(*x0, f.dim(), cols)
    }

    pub fn sample(&self, dt: f64, stream: &RngStream) -> Result<SampledPath> {
        let x0 = match &self.start {
            Start::Point(x) => *x,
            Start::Nu(nu) => sample_initial(self.spec, nu, stream)?.0,
        };
        let frame = self.initial_frame(&x0);
        if self.two_sided {
            Ok(SampledPath::Two(sample_two_sided_framed(self.spec, &frame, self.horizon, dt, stream)?))
        } else {
            Ok(SampledPath::Half(sample_bm_framed(self.spec, &frame, self.horizon, dt, stream)?))
        }
    }
}

/// `ρ̂(x) = ½ ρ(o, x)`.
pub fn rho_hat(spec: ManifoldSpec, o: &Vec3, x: &Vec3) -> f64 {
    0.5 * spec.dist_raw(o, x)
}

/// `ψ_T`: 1 on `[0, T]`, linear down to 0 on `[T, T + 1]`.
pub fn hat(t: f64, horizon: f64) -> f64 {
    (1.0 - (t - horizon).max(0.0)).max(0.0)
}

/// First grid time with `ρ̂(γ(t)) ≥ m`, or `+∞`.
pub fn hitting_time(path: &FramedPath, m: f64) -> f64 {
    let spec = path.spec();
    let o = *path.coords(0);
    (0..=path.n_steps())
        .find(|&k| rho_hat(spec, &o, path.coords(k)) >= m)
        .map_or(f64::INFINITY, |k| path.time(k))
}

/// `l(t_k) = ψ_T(t_k) clamp(m − max(m − 1, S_k), 0, 1)` where `S_k` is the
/// running maximum of `ρ̂` over the nodes strictly before `t_k` (over `t_0`
/// when `k = 0`). The one-step lag makes `l(t_{k+1})` known at time `t_k`.
pub fn cutoff(path: &FramedPath, m: f64, horizon: f64) -> Result<CutoffProcess> {
    if !(m >= 1.0) {
        return domain(format!("cutoff level m must be at least 1, got {m}"));
    }
    let spec = path.spec();
    let o = *path.coords(0);
    let n = path.n_steps();
    let mut values = Vec::with_capacity(n + 1);
    let mut sup = rho_hat(spec, &o, &o);
    for k in 0..=n {
        if k >= 2 {
            sup = sup.max(rho_hat(spec, &o, path.coords(k - 1)));
        }
        let l = (m - sup.max(m - 1.0)).clamp(0.0, 1.0);
        values.push(hat(path.time(k), horizon) * l);
    }
    let dt = path.dt();
    let derivatives = values.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    Ok(CutoffProcess { m, horizon, values, derivatives })
}

fn trapezoid_weight(k: usize, n: usize) -> f64 {
    if k > n {
        0.0
    } else if n == 0 {
        0.0
    } else if k == 0 || k == n {
        0.5
    } else {
        1.0
    }
}

impl CylinderFunction {
    /// Builds and validates the function: every supplied derivative is
    /// compared with central finite differences on deterministic probes.
    pub fn new(
        name: impl Into<String>,
        spec: ManifoldSpec,
        outer: OuterFn,
        outer_grad: OuterGrad,
        forward: Vec<Window>,
        backward: Vec<Window>,
    ) -> Result<Self> {
        let f = Self { name: name.into(), spec, outer, outer_grad, forward, backward, bounds: None };
        for w in f.forward.iter().chain(&f.backward) {
            if !(w.length > 0.0) {
                return domain(format!("{}: window lengths must be positive", f.name));
            }
        }
        f.validate()?;
        Ok(f)
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    /// `F ≡ c`.
    pub fn constant(spec: ManifoldSpec, c: f64) -> Self {
        Self {
            name: format!("constant-{c}"),
            spec,
            outer: Arc::new(move |_| c),
            outer_grad: Arc::new(|_, out| out.iter_mut().for_each(|v| *v = 0.0)),
            forward: Vec::new(),
            backward: Vec::new(),
            bounds: Some(Bounds { f: c.abs(), df: 0.0, g: 0.0, dg: 0.0 }),
        }
    }

    /// `φ ∘ F` with `φ′` supplied.
    pub fn compose(
        &self,
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (f, df) = (self.outer.clone(), self.outer_grad.clone());
        let outer: OuterFn = Arc::new(move |a| phi(f(a)));
        let f2 = self.outer.clone();
        let outer_grad: OuterGrad = Arc::new(move |a, out| {
            df(a, out);
            let s = dphi(f2(a));
            out.iter_mut().for_each(|v| *v *= s);
        });
        Self::new(name, self.spec, outer, outer_grad, self.forward.clone(), self.backward.clone())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn bounds(&self) -> Option<Bounds> {
        self.bounds
    }

    pub fn forward_windows(&self) -> &[Window] {
        &self.forward
    }

    pub fn backward_windows(&self) -> &[Window] {
        &self.backward
    }

    pub fn arity(&self) -> usize {
        self.forward.len() + self.backward.len()
    }

    /// Longest window over both legs.
    pub fn max_window(&self) -> f64 {
        self.forward.iter().chain(&self.backward).map(|w| w.length).fold(0.0, f64::max)
    }

    pub fn outer_value(&self, args: &[f64]) -> f64 {
        (self.outer)(args)
    }

    fn validate(&self) -> Result<()> {
        let m = self.arity();
        let mut worst: f64 = 0.0;
        let mut grad = vec![0.0; m];
        for probe in 0..6 {
            let args: Vec<f64> = (0..m).map(|j| 1.4 * (0.7 * (probe * m + j) as f64 + 0.3).sin()).collect();
            (self.outer_grad)(&args, &mut grad);
            for j in 0..m {
                let eps = 1e-5 * (1.0 + args[j].abs());
                let mut hi = args.clone();
                let mut lo = args.clone();
                hi[j] += eps;
                lo[j] -= eps;
                let fd = ((self.outer)(&hi) - (self.outer)(&lo)) / (2.0 * eps);
                worst = worst.max((fd - grad[j]).abs() / (1.0 + grad[j].abs()));
            }
        }
        if !(worst <= GRAD_TOL) {
            return Err(Error::GradientCheck { what: format!("{} outer function", self.name), err: worst });
        }
        let spec = self.spec;
        let probes = probe_points(spec);
        for (idx, w) in self.forward.iter().chain(&self.backward).enumerate() {
            let sign = if idx < self.forward.len() { 1.0 } else { -1.0 };
            let mut worst: f64 = 0.0;
            for (i, p) in probes.iter().enumerate() {
                let t = sign * w.length * (i as f64 + 0.5) / probes.len() as f64;
                let frame = spec.standard_frame(&ManifoldPoint::from_raw(*p));
                let dg = (w.grad)(t, p);
                for e in frame.columns() {
                    let eps = 1e-5;
                    let hi = spec.exp_raw(p, &(e * eps));
                    let lo = spec.exp_raw(p, &(e * -eps));
                    let fd = ((w.g)(t, &hi) - (w.g)(t, &lo)) / (2.0 * eps);
                    let an = dg.dot(e);
                    worst = worst.max((fd - an).abs() / (1.0 + an.abs()));
                }
            }
            if !(worst <= GRAD_TOL) {
                return Err(Error::GradientCheck { what: format!("{} integrand {idx}", self.name), err: worst });
            }
        }
        Ok(())
    }

    fn leg_args(&self, windows: &[Window], leg: &FramedPath, sign: f64, out: &mut Vec<f64>) -> Result<()> {
        let dt = leg.dt();
        for w in windows {
            let n = steps_for(w.length, dt)?;
            if n > leg.n_steps() {
                return domain(format!(
                    "{}: path horizon {} is shorter than window {}",
                    self.name,
                    leg.horizon(),
                    w.length
                ));
            }
            let mut acc = 0.0;
            for k in 0..=n {
                let c = trapezoid_weight(k, n);
                if c != 0.0 {
                    acc += c * (w.g)(sign * leg.time(k), leg.coords(k));
                }
            }
            out.push(acc * dt);
        }
        Ok(())
    }

    /// Window integrals `(∫g_1, …, ∫g_m, ∫ḡ_1, …)`.
    pub fn arguments<P: PathLegs + ?Sized>(&self, path: &P) -> Result<Vec<f64>> {
        let mut args = Vec::with_capacity(self.arity());
        self.leg_args(&self.forward, path.forward(), 1.0, &mut args)?;
        if !self.backward.is_empty() {
            let back = path
                .backward()
                .ok_or_else(|| Error::Domain(format!("{} needs a two-sided path", self.name)))?;
            self.leg_args(&self.backward, back, -1.0, &mut args)?;
        }
        Ok(args)
    }

    pub fn eval<P: PathLegs + ?Sized>(&self, path: &P) -> Result<f64> {
        Ok((self.outer)(&self.arguments(path)?))
    }

    fn leg_gradient(&self, windows: &[Window], weights: &[f64], leg: &FramedPath, sign: f64) -> Result<Vec<[f64; 3]>> {
        let dim = leg.spec().dimension();
        let mut out = vec![[0.0; 3]; leg.n_steps() + 1];
        for (w, &df) in windows.iter().zip(weights) {
            if df == 0.0 {
                continue;
            }
            let n = steps_for(w.length, leg.dt())?;
            for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
                let c = trapezoid_weight(k, n) * df;
                if c == 0.0 {
                    continue;
                }
                let dg = (w.grad)(sign * leg.time(k), leg.coords(k));
                for (i, e) in leg.frame_columns(k).iter().enumerate().take(dim) {
                    slot[i] += c * dg.dot(e);
                }
            }
        }
        Ok(out)
    }

    /// Value and gradient on one path.
    pub fn value_and_gradient<P: PathLegs + ?Sized>(&self, path: &P) -> Result<(f64, GradientField)> {
        let args = self.arguments(path)?;
        let value = (self.outer)(&args);
        let mut df = vec![0.0; args.len()];
        (self.outer_grad)(&args, &mut df);
        let nf = self.forward.len();
        let fwd = path.forward();
        let forward = self.leg_gradient(&self.forward, &df[..nf], fwd, 1.0)?;
        let backward = match path.backward() {
            Some(b) => self.leg_gradient(&self.backward, &df[nf..], b, -1.0)?,
            None => Vec::new(),
        };
        Ok((value, GradientField { dt: fwd.dt(), dim: fwd.spec().dimension(), forward, backward }))
    }

    pub fn gradient<P: PathLegs + ?Sized>(&self, path: &P) -> Result<GradientField> {
        Ok(self.value_and_gradient(path)?.1)
    }
}

/// Points used for gradient validation: the reference point and a few
/// geodesic steps away from it.
fn probe_points(spec: ManifoldSpec) -> Vec<Vec3> {
    let o = spec.origin();
    let frame = spec.standard_frame(&o);
    let n = spec.dimension();
    let mut pts = vec![*o.coords()];
    for (i, r) in [0.3, 0.9, 1.7, 2.4].iter().enumerate() {
        let a: Vec<f64> = (0..n).map(|j| ((i + 2 * j) as f64 * 1.3 + 0.4).cos()).collect();
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v = frame.apply(&a.iter().map(|x| x * r / norm).collect::<Vec<_>>());
        pts.push(spec.exp_raw(o.coords(), &v));
    }
    pts
}

impl GradientField {
    /// `⟨DF, h⟩` with `h` sampled at the grid nodes of each leg.
    pub fn inner(&self, other: &GradientField) -> f64 {
        let dot = |a: &[[f64; 3]], b: &[[f64; 3]]| -> f64 {
            a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).sum()
        };
        self.dt * (dot(&self.forward, &other.forward) + dot(&self.backward, &other.backward))
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<[f64; 3]>| v.iter().map(|x| [x[0] * c, x[1] * c, x[2] * c]).collect();
        Self { dt: self.dt, dim: self.dim, forward: s(&self.forward), backward: s(&self.backward) }
    }

    /// Grid samples of a direction, optionally multiplied by cut-offs.
    pub fn from_direction<P: PathLegs + ?Sized>(
        h: &DirectionField,
        path: &P,
        cut: Option<(&CutoffProcess, Option<&CutoffProcess>)>,
    ) -> Self {
        let fwd = path.forward();
        let sample = |leg: &FramedPath, sign: f64, l: Option<&CutoffProcess>| -> Vec<[f64; 3]> {
            (0..=leg.n_steps())
                .map(|k| {
                    let v = h.at(sign * leg.time(k));
                    let c = l.map_or(1.0, |l| l.values[k]);
                    [v[0] * c, v[1] * c, v[2] * c]
                })
                .collect()
        };
        let forward = sample(fwd, 1.0, cut.map(|c| c.0));
        let backward = path.backward().map_or(Vec::new(), |b| sample(b, -1.0, cut.and_then(|c| c.1)));
        Self { dt: fwd.dt(), dim: fwd.spec().dimension(), forward, backward }
    }
}

impl DirectionField {
    /// Validates `h(0) = 0`, a bounded support and `h′` against `h` through
    /// `h(b) − h(a) = ∫_a^b h′` on sub-intervals (robust to kinks).
    pub fn new(name: impl Into<String>, dim: usize, h: CurveFn, dh: CurveFn, support: (f64, f64)) -> Result<Self> {
        let name = name.into();
        let (a, b) = support;
        if !(a <= 0.0 && 0.0 <= b && a.is_finite() && b.is_finite()) {
            return domain(format!("{name}: support must be a bounded interval containing 0"));
        }
        let h0 = h(0.0);
        if h0.iter().any(|c| c.abs() > 1e-14) {
            return domain(format!("{name}: h(0) must vanish"));
        }
        let out = Self { name, dim, h, dh, support };
        let pieces = 16;
        let mut worst: f64 = 0.0;
        let width = b - a;
        if width > 0.0 {
            for p in 0..pieces {
                let lo = a + width * p as f64 / pieces as f64;
                let hi = a + width * (p + 1) as f64 / pieces as f64;
                let sub = 512;
                let step = (hi - lo) / sub as f64;
                let mut integral = [0.0; 3];
                for i in 0..sub {
                    // midpoint rule on each sub-cell; kinks only cost O(step)
                    let d = (out.dh)(lo + (i as f64 + 0.5) * step);
                    for c in 0..3 {
                        integral[c] += d[c] * step;
                    }
                }
                let (ha, hb) = ((out.h)(lo), (out.h)(hi));
                for c in 0..3 {
                    worst = worst.max((hb[c] - ha[c] - integral[c]).abs());
                }
            }
            if !(worst <= GRAD_TOL) {
                return Err(Error::GradientCheck { what: format!("{} derivative", out.name), err: worst });
            }
        }
        Ok(out)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `h(t)`, zero outside the support.
    pub fn at(&self, t: f64) -> [f64; 3] {
        if t < self.support.0 || t > self.support.1 {
            [0.0; 3]
        } else {
            (self.h)(t)
        }
    }

    pub fn derivative(&self, t: f64) -> [f64; 3] {
        if t < self.support.0 || t > self.support.1 {
            [0.0; 3]
        } else {
            (self.dh)(t)
        }
    }

    /// `∫ |h′|²` over the support (midpoint rule).
    pub fn energy(&self) -> f64 {
        let (a, b) = self.support;
        let n = 20_000;
        let step = (b - a) / n as f64;
        (0..n)
            .map(|i| {
                let d = self.derivative(a + (i as f64 + 0.5) * step);
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * step
            })
            .sum()
    }
}

/// `D_h F`, optionally with the cut-off `l_{m,T} h`.
pub fn directional_derivative<P: PathLegs + ?Sized>(
    f: &CylinderFunction,
    path: &P,
    h: &DirectionField,
    cut: Option<CutoffParams>,
) -> Result<f64> {
    let args = f.arguments(path)?;
    let mut df = vec![0.0; args.len()];
    (f.outer_grad)(&args, &mut df);
    let nf = f.forward.len();
    let leg_term = |windows: &[Window], weights: &[f64], leg: &FramedPath, sign: f64| -> Result<f64> {
        let l = match cut {
            Some(c) => Some(cutoff(leg, c.m, c.horizon)?),
            None => None,
        };
        let dt = leg.dt();
        let mut total = 0.0;
        for (w, &d) in windows.iter().zip(weights) {
            let n = steps_for(w.length, dt)?;
            let mut acc = 0.0;
            for k in 0..=n {
                let t = sign * leg.time(k);
                let hv = h.at(t);
                let lk = l.as_ref().map_or(1.0, |l| l.values[k]);
                let dg = (w.grad)(t, leg.coords(k));
                let mut inner = 0.0;
                for (i, e) in leg.frame_columns(k).iter().enumerate() {
                    inner += dg.dot(e) * hv[i];
                }
                acc += trapezoid_weight(k, n) * inner * lk;
            }
            total += d * acc * dt;
        }
        Ok(total)
    };
    let mut total = leg_term(&f.forward, &df[..nf], path.forward(), 1.0)?;
    if let Some(b) = path.backward() {
        total += leg_term(&f.backward, &df[nf..], b, -1.0)?;
    }
    Ok(total)
}
