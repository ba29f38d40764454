//! Brownian motion on a manifold by the geodesic random walk with a parallel
//! transported orthonormal frame.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::geometry::{ManifoldPoint, ManifoldSpec, OrthonormalFrame, Vec3};
use crate::rng::RngStream;
use crate::stats::{par_map, EnsembleParams, MonteCarloEstimate};

/// A path on the uniform grid `t_k = k dt` with its frames and the driving
/// increments `Δβ_k`, so that `x_{k+1} = exp(x_k, U_k Δβ_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FramedPath {
    spec: ManifoldSpec,
    dt: f64,
    points: Vec<Vec3>,
    frames: Vec<[Vec3; 3]>,
    increments: Vec<[f64; 3]>,
}

/// Forward leg for `t ≥ 0` and backward leg for `t = −s ≤ 0`, both started
/// from the same point and frame with independent noise.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSidedPath {
    pub forward: FramedPath,
    pub backward: FramedPath,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NuSpec {
    PointMass(ManifoldPoint),
    /// Normalized area measure of the sphere.
    UniformOnCompact,
    /// Volume measure restricted to the geodesic ball of the given radius
    /// around the reference point.
    TruncatedLebesgue { radius: f64 },
}

/// Number of grid steps covering `[0, horizon]`.
pub fn steps_for(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return domain(format!("time step must be positive, got {dt}"));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return domain(format!("horizon must be non-negative, got {horizon}"));
    }
    let n = (horizon / dt).round();
    if (n * dt - horizon).abs() > 1e-9 * horizon.max(dt) {
        return domain(format!("horizon {horizon} is not a multiple of dt = {dt}"));
    }
    Ok(n as usize)
}

pub(crate) fn gaussian_increment(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> [f64; 3] {
    let mut db = [0.0; 3];
    for c in db.iter_mut().take(dim) {
        *c = scale * rng.sample::<f64, _>(StandardNormal);
    }
    db
}

fn apply(frame: &[Vec3], db: &[f64; 3]) -> Vec3 {
    let mut v = Vec3::zeros();
    for (e, c) in frame.iter().zip(db) {
        v += e * *c;
    }
    v
}

impl FramedPath {
    /// Builds the path driven by the given increments.
    pub fn from_increments(
        spec: ManifoldSpec,
        frame0: &OrthonormalFrame,
        dt: f64,
        increments: &[[f64; 3]],
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        let mut it = increments.iter().copied();
        Ok(Self::generate(spec, frame0, dt, increments.len(), || it.next().unwrap()))
    }

    fn generate(
        spec: ManifoldSpec,
        frame0: &OrthonormalFrame,
        dt: f64,
        n: usize,
        mut draw: impl FnMut() -> [f64; 3],
    ) -> Self {
        let dim = spec.dimension();
        let mut points = Vec::with_capacity(n + 1);
        let mut frames = Vec::with_capacity(n + 1);
        let mut increments = Vec::with_capacity(n);
        let mut x = *frame0.base().coords();
        let mut cols = frame0.raw_columns();
        points.push(x);
        frames.push(cols);
        for _ in 0..n {
            let db = draw();
            let v = apply(&cols[..dim], &db);
            x = spec.step_raw(&x, &v, &mut cols[..dim]);
            points.push(x);
            frames.push(cols);
            increments.push(db);
        }
        Self { spec, dt, points, frames, increments }
    }

    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points.len()).map(|k| self.time(k)).collect()
    }

    pub fn point(&self, k: usize) -> ManifoldPoint {
        ManifoldPoint::from_raw(self.points[k])
    }

    pub fn coords(&self, k: usize) -> &Vec3 {
        &self.points[k]
    }

    pub fn origin(&self) -> ManifoldPoint {
        self.point(0)
    }

    pub fn frame(&self, k: usize) -> OrthonormalFrame {
        OrthonormalFrame::from_raw(self.point(k), self.spec.dimension(), self.frames[k])
    }

    pub fn frame_columns(&self, k: usize) -> &[Vec3] {
        &self.frames[k][..self.spec.dimension()]
    }

    /// `Δβ_k`, the increment over `[t_k, t_{k+1}]`.
    pub fn increment(&self, k: usize) -> &[f64] {
        &self.increments[k][..self.spec.dimension()]
    }

    pub fn increments(&self) -> &[[f64; 3]] {
        &self.increments
    }

    /// Prefix on `[0, t_n]`.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            spec: self.spec,
            dt: self.dt,
            points: self.points[..=n].to_vec(),
            frames: self.frames[..=n].to_vec(),
            increments: self.increments[..n].to_vec(),
        }
    }

    /// Anti-development `β_{t_k} = Σ_{i<k} Δβ_i`.
    pub fn antidevelopment(&self) -> Vec<[f64; 3]> {
        let mut acc = [0.0; 3];
        let mut out = Vec::with_capacity(self.points.len());
        out.push(acc);
        for db in &self.increments {
            for i in 0..3 {
                acc[i] += db[i];
            }
            out.push(acc);
        }
        out
    }
}

impl TwoSidedPath {
    pub fn origin(&self) -> ManifoldPoint {
        self.forward.origin()
    }

    /// Point at signed time `t`, which must lie on the grid.
    pub fn point_at(&self, t: f64) -> Result<ManifoldPoint> {
        let leg = if t >= 0.0 { &self.forward } else { &self.backward };
        let k = steps_for(t.abs(), leg.dt)?;
        if k > leg.n_steps() {
            return domain(format!("time {t} is outside the simulated horizon"));
        }
        Ok(leg.point(k))
    }
}

pub fn sample_bm(
    spec: ManifoldSpec,
    x0: &ManifoldPoint,
    horizon: f64,
    dt: f64,
    stream: &RngStream,
) -> Result<FramedPath> {
    sample_bm_framed(spec, &spec.standard_frame(x0), horizon, dt, stream)
}

/// Same as [`sample_bm`] with an explicit initial frame.
pub fn sample_bm_framed(
    spec: ManifoldSpec,
    frame0: &OrthonormalFrame,
    horizon: f64,
    dt: f64,
    stream: &RngStream,
) -> Result<FramedPath> {
    let n = steps_for(horizon, dt)?;
    let mut rng = stream.rng();
    let dim = spec.dimension();
    let scale = dt.sqrt();
    Ok(FramedPath::generate(spec, frame0, dt, n, || gaussian_increment(&mut rng, dim, scale)))
}

pub fn sample_two_sided(
    spec: ManifoldSpec,
    x0: &ManifoldPoint,
    horizon: f64,
    dt: f64,
    stream: &RngStream,
) -> Result<TwoSidedPath> {
    sample_two_sided_framed(spec, &spec.standard_frame(x0), horizon, dt, stream)
}

/// The forward leg consumes `stream` exactly as [`sample_bm`] does, so a
/// functional of the forward leg alone sees the same path in both pipelines.
pub fn sample_two_sided_framed(
    spec: ManifoldSpec,
    frame0: &OrthonormalFrame,
    horizon: f64,
    dt: f64,
    stream: &RngStream,
) -> Result<TwoSidedPath> {
    Ok(TwoSidedPath {
        forward: sample_bm_framed(spec, frame0, horizon, dt, stream)?,
        backward: sample_bm_framed(spec, frame0, horizon, dt, &stream.sub(1))?,
    })
}

/// Draws a starting point from the normalized `nu` and returns it with the
/// un-normalized mass.
pub fn sample_initial(spec: ManifoldSpec, nu: &NuSpec, stream: &RngStream) -> Result<(ManifoldPoint, f64)> {
    let mut rng = stream.sub(2).rng();
    match (nu, spec) {
        (NuSpec::PointMass(x), _) => {
            if !spec.contains(x.coords()) {
                return domain("point mass is not on the manifold");
            }
            Ok((*x, 1.0))
        }
        (NuSpec::UniformOnCompact, ManifoldSpec::Sphere2) => {
            let g = Vec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            Ok((spec.point(g.normalize().as_slice())?, 1.0))
        }
        (NuSpec::UniformOnCompact, _) => domain("uniform measure needs a compact manifold"),
        (NuSpec::TruncatedLebesgue { radius }, _) if !(*radius > 0.0) => {
            domain(format!("truncation radius must be positive, got {radius}"))
        }
        (NuSpec::TruncatedLebesgue { radius }, ManifoldSpec::Euclidean { n }) => {
            let r = *radius;
            let mut dir = Vec3::zeros();
            while dir.norm() == 0.0 {
                for c in dir.iter_mut().take(n) {
                    *c = rng.sample(StandardNormal);
                }
            }
            let u: f64 = rng.random();
            let x = dir.normalize() * (r * u.powf(1.0 / n as f64));
            let mass = match n {
                1 => 2.0 * r,
                2 => std::f64::consts::PI * r * r,
                _ => 4.0 / 3.0 * std::f64::consts::PI * r.powi(3),
            };
            Ok((spec.point(&x.as_slice()[..n])?, mass))
        }
        (NuSpec::TruncatedLebesgue { radius }, ManifoldSpec::Hyperbolic2) => {
            let r = *radius;
            // area of a hyperbolic disk of radius r is 2π(cosh r − 1)
            let u: f64 = rng.random();
            let dist = (1.0 + u * (r.cosh() - 1.0)).acosh();
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let o = spec.origin();
            let frame = spec.standard_frame(&o);
            let v = frame.apply(&[dist * angle.cos(), dist * angle.sin()]);
            let x = spec.exp_raw(o.coords(), &v);
            Ok((ManifoldPoint::from_raw(x), std::f64::consts::TAU * (r.cosh() - 1.0)))
        }
        (NuSpec::TruncatedLebesgue { .. }, ManifoldSpec::Sphere2) => {
            domain("use the uniform measure on the sphere")
        }
    }
}

/// `M_{t_k}` solving `M' = −½ M Ric_{U_t}`, `M_0 = I`, with the Ricci
/// operator frozen on each step.
pub fn damping_matrices(path: &FramedPath) -> Vec<DMatrix<f64>> {
    let spec = path.spec();
    let n = spec.dimension();
    let mut out = Vec::with_capacity(path.n_steps() + 1);
    let mut m = DMatrix::<f64>::identity(n, n);
    out.push(m.clone());
    let mut cached: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
    for k in 0..path.n_steps() {
        let ric = spec.ricci_operator(&path.frame(k));
        let step = match &cached {
            Some((r, e)) if *r == ric => e.clone(),
            _ => {
                let e = (&ric * (-0.5 * path.dt())).exp();
                cached = Some((ric, e.clone()));
                e
            }
        };
        m = &m * step;
        out.push(m.clone());
    }
    out
}

/// `κ(T) = e^{−1−2 c₁ T} / (2T)`.
pub fn kappa(horizon: f64, c1: f64) -> f64 {
    (-1.0 - 2.0 * c1 * horizon).exp() / (2.0 * horizon)
}

/// `sup_{t>0} (t sqrt((n−1) K₁) − 2 c₁ t²)` for a constant `K₁ ≥ 0`.
pub fn c2_for_constant(n: usize, k1: f64, c1: f64) -> f64 {
    (n as f64 - 1.0) * k1.max(0.0) / (8.0 * c1)
}

/// `e^{n + c₂ − κ(T) N²}`.
pub fn tail_bound(n: usize, c1: f64, c2: f64, horizon: f64, threshold: f64) -> f64 {
    (n as f64 + c2 - kappa(horizon, c1) * threshold * threshold).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailReport {
    pub threshold: f64,
    pub estimate: MonteCarloEstimate,
    pub bound: f64,
    /// Empirical ≤ bound + 3 s.e.
    pub within_bound: bool,
}

/// Exceedance probabilities of `sup_{s≤T} ρ(x0, γ(s))` over the thresholds,
/// all read off one ensemble.
#[allow(clippy::too_many_arguments)]
pub fn tail_probability(
    spec: ManifoldSpec,
    x0: &ManifoldPoint,
    horizon: f64,
    thresholds: &[f64],
    c1: f64,
    c2: f64,
    ensemble: EnsembleParams,
    experiment: u64,
) -> Result<Vec<TailReport>> {
    if !(c1 > 0.0) {
        return domain(format!("c1 must be positive, got {c1}"));
    }
    let n = steps_for(horizon, ensemble.dt)?;
    let dim = spec.dimension();
    let scale = ensemble.dt.sqrt();
    let frame0 = spec.standard_frame(x0);
    let base = RngStream::new(ensemble.master_seed, experiment, 0);
    let sups = par_map(ensemble.n_paths, |i| {
        let mut rng = base.with_trajectory(i as u64).rng();
        let mut x = *x0.coords();
        let mut cols = frame0.raw_columns();
        let mut sup: f64 = 0.0;
        for _ in 0..n {
            let db = gaussian_increment(&mut rng, dim, scale);
            let v = apply(&cols[..dim], &db);
            x = spec.step_raw(&x, &v, &mut cols[..dim]);
            sup = sup.max(spec.dist_raw(x0.coords(), &x));
        }
        sup
    });
    Ok(thresholds
        .iter()
        .map(|&thr| {
            let hits: Vec<f64> = sups.iter().map(|&s| if s > thr || thr <= 0.0 { 1.0 } else { 0.0 }).collect();
            let estimate = MonteCarloEstimate::from_samples(&hits, ensemble.master_seed);
            let bound = tail_bound(dim, c1, c2, horizon, thr);
            TailReport {
                threshold: thr,
                estimate,
                bound,
                within_bound: estimate.value <= bound + 3.0 * estimate.stderr,
            }
        })
        .collect())
}
