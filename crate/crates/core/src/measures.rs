//! Path-space distances, finite-dimensional densities of the stationary
//! path measure, and sampling tests of its symmetries.

use std::f64::consts::PI;

use crate::brownian::{steps_for, FramedPath, NuSpec};
use crate::error::{domain, Error, Result};
use crate::geometry::{ManifoldPoint, ManifoldSpec, Vec3};
use crate::pathcalc::{PathLegs, Sampler, Start};
use crate::rng::{label_id, RngStream};
use crate::stats::{mean_sd, par_map, z_score, EnsembleParams};

fn check_grid(a: &FramedPath, b: &FramedPath) -> Result<()> {
    if a.spec() != b.spec() {
        return Err(Error::GridMismatch(format!("{} vs {}", a.spec(), b.spec())));
    }
    if a.dt() != b.dt() || a.n_steps() != b.n_steps() {
        return Err(Error::GridMismatch(format!(
            "dt {} with {} steps vs dt {} with {} steps",
            a.dt(),
            a.n_steps(),
            b.dt(),
            b.n_steps()
        )));
    }
    Ok(())
}

/// The legs of both paths, paired up; both must be half-line or both two-sided.
fn legs<'a, P: PathLegs>(a: &'a P, b: &'a P) -> Result<Vec<(&'a FramedPath, &'a FramedPath)>> {
    check_grid(a.forward(), b.forward())?;
    let mut out = vec![(a.forward(), b.forward())];
    match (a.backward(), b.backward()) {
        (None, None) => {}
        (Some(x), Some(y)) => {
            check_grid(x, y)?;
            out.push((x, y));
        }
        _ => return Err(Error::GridMismatch("one path is two-sided and the other is not".into())),
    }
    Ok(out)
}

fn truncated(a: &FramedPath, b: &FramedPath, k: usize) -> f64 {
    a.spec().dist_raw(a.coords(k), b.coords(k)).min(1.0)
}

/// Number of unit blocks touched by `[0, horizon]`.
fn blocks(leg: &FramedPath) -> usize {
    (leg.horizon() - 1e-9).ceil().max(0.0) as usize
}

/// `Σ 2⁻ⁿ sup_{|s| ≤ n} ρ̃(γ(s), σ(s))` over the blocks covered by the paths.
/// A last partial block takes the sup over what was simulated.
pub fn d_infinity<P: PathLegs>(a: &P, b: &P) -> Result<f64> {
    let pairs = legs(a, b)?;
    let (f, _) = pairs[0];
    let nb = blocks(f);
    let mut total = 0.0;
    let mut sup: f64 = 0.0;
    let mut k = 0;
    for n in 1..=nb {
        while k <= f.n_steps() && f.time(k) <= n as f64 + 1e-9 {
            for (x, y) in &pairs {
                sup = sup.max(truncated(x, y, k));
            }
            k += 1;
        }
        total += sup * 0.5f64.powi(n as i32);
    }
    Ok(total)
}

/// `Σ 2⁻ⁿ ∫_{n−1}^{n} ρ̃(γ(s), σ(s)) ds`, plus the mirrored blocks on the
/// negative axis for two-sided paths, by the trapezoid rule.
pub fn d_tilde<P: PathLegs>(a: &P, b: &P) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in legs(a, b)? {
        let dt = x.dt();
        for k in 0..x.n_steps() {
            let mid = x.time(k) + 0.5 * dt;
            let n = mid.floor() as i32 + 1;
            let area = 0.5 * dt * (truncated(x, y, k) + truncated(x, y, k + 1));
            total += area * 0.5f64.powi(n);
        }
    }
    Ok(total)
}

/// Transition density of Brownian motion generated by ½Δ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatKernel {
    spec: ManifoldSpec,
    /// Spectral truncation order on the sphere.
    pub l_max: usize,
    /// Smallest time for which the truncated series is trusted.
    pub t_floor: f64,
}

impl HeatKernel {
    pub fn new(spec: ManifoldSpec) -> Result<Self> {
        Self::with_truncation(spec, 60, 0.01)
    }

    pub fn with_truncation(spec: ManifoldSpec, l_max: usize, t_floor: f64) -> Result<Self> {
        if let ManifoldSpec::Hyperbolic2 = spec {
            return domain("no heat kernel is implemented for the hyperbolic plane");
        }
        if !(t_floor > 0.0) {
            return domain(format!("time floor must be positive, got {t_floor}"));
        }
        Ok(Self { spec, l_max, t_floor })
    }

    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn eval(&self, t: f64, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("heat kernel time must be positive, got {t}"));
        }
        match self.spec {
            ManifoldSpec::Euclidean { n } => {
                let r2 = (x.coords() - y.coords()).norm_squared();
                Ok((2.0 * PI * t).powf(-(n as f64) / 2.0) * (-r2 / (2.0 * t)).exp())
            }
            ManifoldSpec::Sphere2 => {
                if t < self.t_floor {
                    return domain(format!("t = {t} is below the spectral floor {}", self.t_floor));
                }
                let c = x.coords().dot(y.coords()).clamp(-1.0, 1.0);
                Ok(self.zonal(t, c))
            }
            ManifoldSpec::Hyperbolic2 => unreachable!(),
        }
    }

    /// Sphere kernel as a function of `cos ρ`.
    fn zonal(&self, t: f64, c: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, c);
        let mut sum = 1.0;
        for l in 1..=self.l_max {
            let lf = l as f64;
            sum += (2.0 * lf + 1.0) * (-lf * (lf + 1.0) * t / 2.0).exp() * p1;
            let p2 = ((2.0 * lf + 1.0) * c * p1 - lf * p0) / (lf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        sum / (4.0 * PI)
    }
}

pub fn heat_kernel(spec: ManifoldSpec, t: f64, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
    HeatKernel::new(spec)?.eval(t, x, y)
}

/// Density of the normalized `nu` at `y` with respect to volume. Point
/// masses have no density and are handled by the caller.
pub fn nu_density(spec: ManifoldSpec, nu: &NuSpec, y: &ManifoldPoint) -> Result<f64> {
    match (nu, spec) {
        (NuSpec::UniformOnCompact, ManifoldSpec::Sphere2) => Ok(1.0 / (4.0 * PI)),
        (NuSpec::UniformOnCompact, _) => domain("uniform measure needs a compact manifold"),
        (NuSpec::TruncatedLebesgue { radius }, ManifoldSpec::Euclidean { n }) => {
            let r = *radius;
            let vol = match n {
                1 => 2.0 * r,
                2 => PI * r * r,
                _ => 4.0 / 3.0 * PI * r.powi(3),
            };
            Ok(if y.coords().norm() <= r { 1.0 / vol } else { 0.0 })
        }
        (NuSpec::TruncatedLebesgue { .. }, _) => domain("truncated volume density is only available on Euclidean space"),
        (NuSpec::PointMass(_), _) => domain("a point mass has no density"),
    }
}

/// Joint density of `(γ(t_1), …, γ(t_m))` under the two-sided path measure
/// started from `nu`. `times` must be strictly increasing and may straddle 0.
/// The point at time 0, when present, is the starting point; for a point
/// mass it must equal the atom and is then not a free variable. For the
/// uniform start the measure is stationary, so time 0 may be omitted.
pub fn finite_dim_density(spec: ManifoldSpec, nu: &NuSpec, times: &[f64], points: &[ManifoldPoint]) -> Result<f64> {
    if times.len() != points.len() || times.is_empty() {
        return domain("times and points must be non-empty and of equal length");
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("times must be strictly increasing");
    }
    let kernel = HeatKernel::new(spec)?;
    let mut t: Vec<f64> = times.to_vec();
    let mut p: Vec<ManifoldPoint> = points.to_vec();
    let zero = t.iter().position(|&s| s == 0.0);
    let mut density = match nu {
        NuSpec::PointMass(x) => match zero {
            Some(i) if p[i] != *x => return Ok(0.0),
            Some(_) => 1.0,
            None => {
                let i = t.partition_point(|&s| s < 0.0);
                t.insert(i, 0.0);
                p.insert(i, *x);
                1.0
            }
        },
        NuSpec::UniformOnCompact => nu_density(spec, nu, &p[0])?,
        NuSpec::TruncatedLebesgue { .. } => match zero {
            Some(i) => nu_density(spec, nu, &p[i])?,
            None => return domain("the truncated start needs the point at time 0"),
        },
    };
    for i in 1..t.len() {
        density *= kernel.eval(t[i] - t[i - 1], &p[i - 1], &p[i])?;
    }
    Ok(density)
}

/// Point at signed time `t` of a sampled path.
fn point_at<P: PathLegs>(path: &P, t: f64) -> Result<Vec3> {
    let leg = if t >= 0.0 {
        path.forward()
    } else {
        match path.backward() {
            Some(b) => b,
            None => return domain(format!("time {t} needs a two-sided path")),
        }
    };
    let k = steps_for(t.abs(), leg.dt())?;
    if k > leg.n_steps() {
        return domain(format!("time {t} is outside the simulated horizon"));
    }
    Ok(*leg.coords(k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityRow {
    pub time: f64,
    pub statistic: String,
    pub estimate: f64,
    pub stderr: f64,
    pub expected: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityReport {
    pub rows: Vec<StationarityRow>,
    /// Largest `| |γ(t)| − 1 |` seen.
    pub norm_defect: f64,
    pub pass: bool,
}

/// Slack on the pair statistic for the O(dt) bias of the random walk.
pub const PAIR_BIAS_SLACK: f64 = 0.01;

/// Two-sided sphere paths from the uniform start: per time, the first three
/// coordinate moments against the uniform law, and `⟨γ(0), γ(t)⟩` against
/// `e^{−|t|}`.
pub fn stationarity_test(times: &[f64], ensemble: EnsembleParams) -> Result<StationarityReport> {
    let spec = ManifoldSpec::Sphere2;
    let horizon = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let horizon = steps_for(horizon, ensemble.dt)? as f64 * ensemble.dt;
    let sampler = Sampler::two_sided(spec, Start::Nu(NuSpec::UniformOnCompact), horizon);
    let stream = RngStream::new(ensemble.master_seed, label_id("stationarity"), 0);
    let samples: Vec<Vec<Vec3>> = par_map(ensemble.n_paths, |i| -> Result<Vec<Vec3>> {
        let path = sampler.sample(ensemble.dt, &stream.with_trajectory(i as u64))?;
        let mut row = vec![point_at(&path, 0.0)?];
        for &t in times {
            row.push(point_at(&path, t)?);
        }
        Ok(row)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut norm_defect: f64 = 0.0;
    let push = |rows: &mut Vec<StationarityRow>, time: f64, name: String, vals: &[f64], expected: f64, slack: f64| {
        let (m, sd) = mean_sd(vals);
        let se = sd / (vals.len() as f64).sqrt();
        let z = z_score(m - expected, se);
        let pass = (m - expected).abs() <= 3.0 * se + slack;
        rows.push(StationarityRow { time, statistic: name, estimate: m, stderr: se, expected, z, pass });
    };
    for (j, &t) in times.iter().enumerate() {
        let pts: Vec<&Vec3> = samples.iter().map(|r| &r[j + 1]).collect();
        for p in &pts {
            norm_defect = norm_defect.max((p.norm() - 1.0).abs());
        }
        for c in 0..3 {
            let axis = ["x", "y", "z"][c];
            for (power, expected) in [(1, 0.0), (2, 1.0 / 3.0), (3, 0.0)] {
                let vals: Vec<f64> = pts.iter().map(|p| p[c].powi(power)).collect();
                push(&mut rows, t, format!("E[{axis}^{power}]"), &vals, expected, 0.0);
            }
        }
        if t != 0.0 {
            let vals: Vec<f64> = samples.iter().map(|r| r[0].dot(&r[j + 1])).collect();
            push(&mut rows, t, "E<g(0),g(t)>".into(), &vals, (-t.abs()).exp(), PAIR_BIAS_SLACK);
        }
    }
    let pass = norm_defect < 1e-9 && rows.iter().all(|r| r.pass);
    Ok(StationarityReport { rows, norm_defect, pass })
}

/// Bounded and unbounded path statistics on the values at the test times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathStatistic {
    Coordinate { time: usize, axis: usize },
    SquaredNorm { time: usize },
    Inner { a: usize, b: usize },
    TruncatedDistance { a: usize, b: usize },
}

impl PathStatistic {
    fn eval(&self, spec: ManifoldSpec, x: &[Vec3]) -> f64 {
        match *self {
            Self::Coordinate { time, axis } => x[time][axis],
            Self::SquaredNorm { time } => x[time].norm_squared(),
            Self::Inner { a, b } => x[a].dot(&x[b]),
            Self::TruncatedDistance { a, b } => spec.dist_raw(&x[a], &x[b]).min(1.0),
        }
    }

    pub fn label(&self, times: &[f64]) -> String {
        match *self {
            Self::Coordinate { time, axis } => format!("coord{axis}(g({}))", times[time]),
            Self::SquaredNorm { time } => format!("|g({})|^2", times[time]),
            Self::Inner { a, b } => format!("<g({}),g({})>", times[a], times[b]),
            Self::TruncatedDistance { a, b } => format!("rho~(g({}),g({}))", times[a], times[b]),
        }
    }

    /// Exact expected change under the shift on Euclidean space, where the
    /// start is independent of two independent Brownian legs with mean zero.
    fn euclidean_bias(&self, n: usize, base: &[f64], shifted: &[f64]) -> f64 {
        let cov = |a: f64, b: f64| if a * b > 0.0 { a.abs().min(b.abs()) } else { 0.0 };
        let n = n as f64;
        match *self {
            Self::Coordinate { .. } | Self::TruncatedDistance { .. } => 0.0,
            Self::SquaredNorm { time } => n * (shifted[time].abs() - base[time].abs()),
            Self::Inner { a, b } => n * (cov(shifted[a], shifted[b]) - cov(base[a], base[b])),
        }
    }
}

/// Coordinates and pair statistics for `m` times; squared norms only where
/// they are not constant.
pub fn default_battery(spec: ManifoldSpec, m: usize) -> Vec<PathStatistic> {
    let mut out = Vec::new();
    for time in 0..m {
        for axis in 0..spec.ambient_dim() {
            out.push(PathStatistic::Coordinate { time, axis });
        }
        if !spec.is_compact() {
            out.push(PathStatistic::SquaredNorm { time });
        }
    }
    for a in 0..m {
        for b in a + 1..m {
            out.push(PathStatistic::Inner { a, b });
            out.push(PathStatistic::TruncatedDistance { a, b });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftRow {
    pub statistic: String,
    pub base: f64,
    pub shifted: f64,
    /// Standard error of the paired difference.
    pub stderr: f64,
    pub z: f64,
    /// Exact expected difference when it is known in closed form.
    pub bias: Option<f64>,
    pub z_debiased: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftReport {
    pub shift: f64,
    pub times: Vec<f64>,
    pub rows: Vec<ShiftRow>,
    pub pass: bool,
}

/// Paired comparison of statistics of `(γ(t_i))` and `(γ(t_i + s))` on the
/// same two-sided paths. Passes when every `|z| ≤ 3` against zero change.
pub fn shift_invariance_test(
    spec: ManifoldSpec,
    nu: NuSpec,
    shift: f64,
    times: &[f64],
    battery: &[PathStatistic],
    ensemble: EnsembleParams,
) -> Result<ShiftReport> {
    if times.is_empty() {
        return domain("no test times given");
    }
    let shifted: Vec<f64> = times.iter().map(|t| t + shift).collect();
    let horizon = times.iter().chain(&shifted).fold(0.0f64, |m, t| m.max(t.abs()));
    let horizon = steps_for(horizon, ensemble.dt)? as f64 * ensemble.dt;
    let sampler = Sampler::two_sided(spec, Start::Nu(nu), horizon);
    let stream = RngStream::new(ensemble.master_seed, label_id("shift-invariance"), 0);
    let m = times.len();
    let diffs: Vec<Vec<(f64, f64)>> = par_map(ensemble.n_paths, |i| -> Result<Vec<(f64, f64)>> {
        let path = sampler.sample(ensemble.dt, &stream.with_trajectory(i as u64))?;
        let mut x = Vec::with_capacity(m);
        let mut y = Vec::with_capacity(m);
        for (t, s) in times.iter().zip(&shifted) {
            x.push(point_at(&path, *t)?);
            y.push(point_at(&path, *s)?);
        }
        Ok(battery.iter().map(|st| (st.eval(spec, &x), st.eval(spec, &y))).collect())
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let n_paths = diffs.len() as f64;
    let mut rows = Vec::with_capacity(battery.len());
    for (j, st) in battery.iter().enumerate() {
        let base = diffs.iter().map(|r| r[j].0).sum::<f64>() / n_paths;
        let shifted_mean = diffs.iter().map(|r| r[j].1).sum::<f64>() / n_paths;
        let d: Vec<f64> = diffs.iter().map(|r| r[j].1 - r[j].0).collect();
        let (md, sd) = mean_sd(&d);
        let se = sd / n_paths.sqrt();
        let z = z_score(md, se);
        let bias = match (spec, nu) {
            (ManifoldSpec::Euclidean { n }, NuSpec::PointMass(_) | NuSpec::TruncatedLebesgue { .. }) => {
                Some(st.euclidean_bias(n, times, &shifted))
            }
            (ManifoldSpec::Sphere2, NuSpec::UniformOnCompact) => Some(0.0),
            _ => None,
        };
        rows.push(ShiftRow {
            statistic: st.label(times),
            base,
            shifted: shifted_mean,
            stderr: se,
            z,
            bias,
            z_debiased: bias.map(|b| z_score(md - b, se)),
            pass: z.abs() <= 3.0,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ShiftReport { shift, times: times.to_vec(), rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{sample_bm, sample_two_sided};

    fn flat_pair(dist: impl Fn(f64) -> f64, horizon: f64) -> (FramedPath, FramedPath) {
        let spec = ManifoldSpec::Euclidean { n: 1 };
        let dt = 0.01;
        let n = steps_for(horizon, dt).unwrap();
        let zero = FramedPath::from_increments(spec, &spec.standard_frame(&spec.origin()), dt, &vec![[0.0; 3]; n]).unwrap();
        let mut prev = 0.0;
        let incs: Vec<[f64; 3]> = (1..=n)
            .map(|k| {
                let v = dist(k as f64 * dt);
                let d = v - prev;
                prev = v;
                [d, 0.0, 0.0]
            })
            .collect();
        let other = FramedPath::from_increments(spec, &spec.standard_frame(&spec.origin()), dt, &incs).unwrap();
        (zero, other)
    }

    #[test]
    fn identical_paths_are_at_distance_zero() {
        let p = sample_bm(ManifoldSpec::Sphere2, &ManifoldSpec::Sphere2.origin(), 3.0, 0.01, &RngStream::new(1, 1, 1)).unwrap();
        assert_eq!(d_infinity(&p, &p).unwrap(), 0.0);
        assert_eq!(d_tilde(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn far_apart_paths_sum_the_weights() {
        let (a, b) = flat_pair(|_| 5.0, 6.0);
        // the first grid point is shared, every later one is far away
        let d = d_infinity(&a, &b).unwrap();
        assert!((d - (1.0 - 0.5f64.powi(6))).abs() < 1e-15);
    }

    #[test]
    fn half_disagreement_on_the_first_block() {
        let (a, b) = flat_pair(|t| if t <= 1.0 + 1e-9 { 0.5 } else { 0.0 }, 1.0);
        assert!((d_infinity(&a, &b).unwrap() - 0.25).abs() < 1e-12);
        // the trapezoid loses half a step at t = 0 where the paths meet
        assert!((d_tilde(&a, &b).unwrap() - 0.25).abs() <= 0.25 * 0.01 + 1e-12);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let spec = ManifoldSpec::Euclidean { n: 1 };
        let a = sample_bm(spec, &spec.origin(), 1.0, 0.01, &RngStream::new(1, 1, 1)).unwrap();
        let b = sample_bm(spec, &spec.origin(), 1.0, 0.02, &RngStream::new(1, 1, 1)).unwrap();
        let c = sample_bm(spec, &spec.origin(), 2.0, 0.01, &RngStream::new(1, 1, 1)).unwrap();
        assert!(matches!(d_infinity(&a, &b), Err(Error::GridMismatch(_))));
        assert!(matches!(d_tilde(&a, &c), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn whole_line_tilde_is_dominated_by_twice_d_infinity() {
        let spec = ManifoldSpec::Sphere2;
        for i in 0..50 {
            let a = sample_two_sided(spec, &spec.origin(), 3.0, 0.01, &RngStream::new(2, 0, i)).unwrap();
            let b = sample_two_sided(spec, &spec.origin(), 3.0, 0.01, &RngStream::new(3, 0, i)).unwrap();
            let (dt, di) = (d_tilde(&a, &b).unwrap(), d_infinity(&a, &b).unwrap());
            assert!(dt <= 2.0 * di + 1e-12 && di <= 1.0);
        }
    }

    #[test]
    fn euclidean_kernel_at_the_origin() {
        let spec = ManifoldSpec::Euclidean { n: 1 };
        let o = spec.origin();
        let p = heat_kernel(spec, 1.0, &o, &o).unwrap();
        assert!((p - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!(heat_kernel(spec, 0.0, &o, &o).is_err());
    }

    #[test]
    fn sphere_kernel_limits() {
        let spec = ManifoldSpec::Sphere2;
        let x = spec.origin();
        let y = spec.point(&[0.0, 0.6, -0.8]).unwrap();
        let p = heat_kernel(spec, 40.0, &x, &y).unwrap();
        assert!((p - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(heat_kernel(spec, 0.005, &x, &y).is_err());
        assert!(heat_kernel(spec, 0.05, &x, &y).unwrap() > 0.0);
        assert!(HeatKernel::new(ManifoldSpec::Hyperbolic2).is_err());
    }

    #[test]
    fn zonal_normalization() {
        // ∫ p_t(x, ·) = 2π ∫_{-1}^{1} p(c) dc by a composite Simpson rule
        let k = HeatKernel::new(ManifoldSpec::Sphere2).unwrap();
        for t in [0.05, 0.2, 1.0] {
            let n = 20_000;
            let h = 2.0 / n as f64;
            let mut s = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * k.zonal(t, -1.0 + i as f64 * h);
            }
            let mass = 2.0 * PI * s * h / 3.0;
            assert!((mass - 1.0).abs() < 1e-6, "t={t}: {mass}");
        }
    }

    #[test]
    fn density_of_a_single_time() {
        let spec = ManifoldSpec::Euclidean { n: 1 };
        let o = spec.origin();
        let y = spec.point(&[0.7]).unwrap();
        let d = finite_dim_density(spec, &NuSpec::PointMass(o), &[0.5], &[y]).unwrap();
        assert!((d - heat_kernel(spec, 0.5, &o, &y).unwrap()).abs() < 1e-15);
        let d0 = finite_dim_density(spec, &NuSpec::PointMass(o), &[0.0, 0.5], &[o, y]).unwrap();
        assert_eq!(d, d0);
        assert_eq!(finite_dim_density(spec, &NuSpec::PointMass(o), &[0.0, 0.5], &[y, y]).unwrap(), 0.0);
        assert!(finite_dim_density(spec, &NuSpec::PointMass(o), &[0.5, 0.5], &[y, y]).is_err());
    }

    #[test]
    fn density_is_time_reversible() {
        let spec = ManifoldSpec::Sphere2;
        let a = spec.point(&[0.0, 0.6, 0.8]).unwrap();
        let b = spec.point(&[0.6, 0.0, 0.8]).unwrap();
        let c = spec.point(&[0.0, 0.0, -1.0]).unwrap();
        let nu = NuSpec::UniformOnCompact;
        let fwd = finite_dim_density(spec, &nu, &[-0.4, 0.0, 0.4], &[a, b, c]).unwrap();
        let rev = finite_dim_density(spec, &nu, &[-0.4, 0.0, 0.4], &[c, b, a]).unwrap();
        assert!((fwd - rev).abs() <= 1e-12 * fwd);
        // stationarity: dropping time 0 integrates it out
        let marg = finite_dim_density(spec, &nu, &[-0.4, 0.4], &[a, c]).unwrap();
        let direct = heat_kernel(spec, 0.8, &a, &c).unwrap() / (4.0 * PI);
        assert!((marg - direct).abs() < 1e-15);
    }

    #[test]
    fn zero_shift_gives_zero_z() {
        let spec = ManifoldSpec::Sphere2;
        let times = [0.2, 1.0];
        let r = shift_invariance_test(
            spec,
            NuSpec::UniformOnCompact,
            0.0,
            &times,
            &default_battery(spec, 2),
            EnsembleParams::new(50, 0.01, 1),
        )
        .unwrap();
        assert!(r.pass && r.rows.iter().all(|row| row.z == 0.0));
    }
}
