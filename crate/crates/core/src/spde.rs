//! Lattice stochastic heat equation with values in a manifold, and the exact
//! Gaussian solver for the flat half-line case.
//!
//! The lattice has sites `x_j = j h`. With a pinned left end, site 0 is held
//! at the reference point and the right end uses a reflecting ghost site
//! `u_{J+1} = u_J`; with this choice discrete Brownian motion is exactly
//! stationary for the flat equation `∂_t X = ½ ΔX + ξ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::brownian::{gaussian_increment, sample_bm};
use crate::error::{domain, Error, Result};
use crate::geometry::{ManifoldPoint, ManifoldSpec, Vec3};
use crate::rng::{label_id, RngStream};
use crate::stats::{linear_fit, mean_sd, par_map, z_score};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    PinnedLeft(ManifoldPoint),
    /// Reflecting ghost sites at both ends.
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StringState {
    spec: ManifoldSpec,
    spacing: f64,
    boundary: Boundary,
    time: f64,
    points: Vec<Vec3>,
    frames: Vec<[Vec3; 3]>,
}

impl StringState {
    /// Sites `u_0..u_J` with standard frames.
    pub fn from_points(spec: ManifoldSpec, boundary: Boundary, spacing: f64, points: &[ManifoldPoint]) -> Result<Self> {
        if !(spacing > 0.0) {
            return domain(format!("lattice spacing must be positive, got {spacing}"));
        }
        if points.len() < 2 {
            return domain("a lattice needs at least two sites");
        }
        if let Boundary::PinnedLeft(o) = boundary {
            if points[0] != o {
                return domain("site 0 must equal the pinned point");
            }
        }
        for p in points {
            if !spec.contains(p.coords()) {
                return domain("lattice site is not on the manifold");
            }
        }
        let frames = points.iter().map(|p| spec.standard_frame(p).raw_columns()).collect();
        Ok(Self { spec, spacing, boundary, time: 0.0, points: points.iter().map(|p| *p.coords()).collect(), frames })
    }

    /// Pinned lattice on `[0, length]` with `j` free sites, filled with the
    /// geodesic random walk in space (the lattice analogue of Wiener measure).
    pub fn brownian(spec: ManifoldSpec, o: &ManifoldPoint, length: f64, j: usize, stream: &RngStream) -> Result<Self> {
        if j == 0 {
            return domain("need at least one free site");
        }
        let h = length / j as f64;
        let path = sample_bm(spec, o, length, h, stream)?;
        let points = (0..=j).map(|k| *path.coords(k)).collect();
        let frames = (0..=j)
            .map(|k| {
                let mut f = [Vec3::zeros(); 3];
                for (dst, src) in f.iter_mut().zip(path.frame_columns(k)) {
                    *dst = *src;
                }
                f
            })
            .collect();
        Ok(Self { spec, spacing: h, boundary: Boundary::PinnedLeft(*o), time: 0.0, points, frames })
    }

    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn site(&self, j: usize) -> ManifoldPoint {
        ManifoldPoint::from_raw(self.points[j])
    }

    pub fn coords(&self, j: usize) -> &Vec3 {
        &self.points[j]
    }

    pub fn cfl_limit(&self) -> f64 {
        0.5 * self.spacing * self.spacing
    }

    fn first_free(&self) -> usize {
        match self.boundary {
            Boundary::PinnedLeft(_) => 1,
            Boundary::Free => 0,
        }
    }

    /// `(log(u_j, u_{j+1}) + log(u_j, u_{j−1})) / (2h²)` with reflecting
    /// ghosts at free ends.
    pub fn drift(&self, j: usize) -> Result<Vec3> {
        let p = &self.points[j];
        let mut v = Vec3::zeros();
        if j + 1 < self.points.len() {
            v += self.spec.log_raw(p, &self.points[j + 1])?;
        }
        if j > 0 {
            v += self.spec.log_raw(p, &self.points[j - 1])?;
        }
        Ok(v / (2.0 * self.spacing * self.spacing))
    }

    /// One explicit step of the intrinsic scheme; frames follow each update
    /// geodesic by parallel transport.
    pub fn step_mut(&mut self, dt: f64, rng: &mut ChaCha8Rng) -> Result<()> {
        let limit = self.cfl_limit();
        if !(dt > 0.0) || dt > limit {
            return Err(Error::Cfl { dt, limit });
        }
        let start = self.first_free();
        let n = self.spec.dimension();
        let scale = (dt / self.spacing).sqrt();
        let drifts = (start..self.points.len()).map(|j| self.drift(j)).collect::<Result<Vec<_>>>()?;
        for (j, d) in (start..self.points.len()).zip(drifts) {
            let db = gaussian_increment(rng, n, scale);
            let frame = &mut self.frames[j];
            let mut v = d * dt;
            for (e, c) in frame.iter().zip(&db).take(n) {
                v += e * *c;
            }
            self.points[j] = self.spec.step_raw(&self.points[j], &v, &mut frame[..n]);
        }
        self.time += dt;
        Ok(())
    }

    pub fn step(&self, dt: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        let mut next = self.clone();
        next.step_mut(dt, rng)?;
        Ok(next)
    }

    /// Runs whole steps of size `dt` up to `duration` (rounded to the grid).
    pub fn evolve(&self, duration: f64, dt: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        let steps = (duration / dt).round() as usize;
        let mut s = self.clone();
        for _ in 0..steps {
            s.step_mut(dt, rng)?;
        }
        Ok(s)
    }
}

/// `p(t, x, y)` of `½ d²/dx²` killed at 0.
pub fn dirichlet_heat_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    if !(x >= 0.0 && y >= 0.0) {
        return domain("points must lie on the half-line");
    }
    let c = 1.0 / (2.0 * std::f64::consts::PI * t).sqrt();
    Ok(c * ((-(x - y).powi(2) / (2.0 * t)).exp() - (-(x + y).powi(2) / (2.0 * t)).exp()))
}

/// Eigenpairs of `½Δ_h` on sites `1..J` with site 0 pinned and a reflecting
/// right end: `φ_k(j) ∝ sin(j θ_k)`, `θ_k = (2k − 1)π/(2J + 1)`, decay
/// rates `λ_k = (1 − cos θ_k)/h²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PinnedSpectrum {
    pub spacing: f64,
    pub rates: DVector<f64>,
    /// Orthonormal eigenvectors as columns.
    pub basis: DMatrix<f64>,
}

impl PinnedSpectrum {
    pub fn new(length: f64, j: usize) -> Result<Self> {
        if j == 0 || !(length > 0.0) {
            return domain("need a positive window length and at least one site");
        }
        let h = length / j as f64;
        let denom = (2 * j + 1) as f64;
        let norm = (denom / 4.0).sqrt();
        let thetas: Vec<f64> = (1..=j).map(|k| (2 * k - 1) as f64 * std::f64::consts::PI / denom).collect();
        let rates = DVector::from_iterator(j, thetas.iter().map(|t| (1.0 - t.cos()) / (h * h)));
        let basis = DMatrix::from_fn(j, j, |site, k| ((site + 1) as f64 * thetas[k]).sin() / norm);
        Ok(Self { spacing: h, rates, basis })
    }

    pub fn sites(&self) -> usize {
        self.rates.len()
    }

    /// `λ_1`, the slowest decay rate.
    pub fn slowest_rate(&self) -> f64 {
        self.rates[0]
    }

    /// Mode variances `1/(2 h λ_k)` of the stationary law.
    pub fn stationary_mode_variances(&self) -> DVector<f64> {
        self.rates.map(|l| 1.0 / (2.0 * self.spacing * l))
    }

    /// Stationary site covariance from the spectral sum.
    pub fn stationary_covariance(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.stationary_mode_variances());
        &self.basis * d * self.basis.transpose()
    }
}

/// Gaussian law of one coordinate of the flat lattice field on sites
/// `1..J` (coordinates are independent and identically distributed).
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGaussian {
    pub length: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl LatticeGaussian {
    pub fn new(length: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let j = mean.len();
        if cov.nrows() != j || cov.ncols() != j {
            return domain("covariance shape does not match the mean");
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return domain("covariance must be symmetric");
        }
        let min_eig = SymmetricEigen::new(cov.clone()).eigenvalues.min();
        if min_eig < -1e-10 * scale {
            return domain(format!("covariance must be positive semidefinite (eigenvalue {min_eig})"));
        }
        Ok(Self { length, mean, cov })
    }

    /// Deterministic initial data.
    pub fn point(length: f64, values: &[f64]) -> Self {
        let j = values.len();
        Self { length, mean: DVector::from_column_slice(values), cov: DMatrix::zeros(j, j) }
    }

    /// Discrete Brownian motion `x_j = Σ_{i ≤ j} ξ_i`, `ξ_i ~ N(0, h)`.
    pub fn wiener(length: f64, j: usize) -> Self {
        let h = length / j as f64;
        Self { length, mean: DVector::zeros(j), cov: DMatrix::from_fn(j, j, |a, b| h * (a.min(b) + 1) as f64) }
    }

    pub fn sites(&self) -> usize {
        self.mean.len()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.sites() as f64
    }

    /// One draw, via the symmetric eigendecomposition (allows singular laws).
    pub fn sample(&self, stream: &RngStream) -> DVector<f64> {
        let eig = SymmetricEigen::new(self.cov.clone());
        let mut rng = stream.rng();
        let z = DVector::from_fn(self.sites(), |k, _| eig.eigenvalues[k].max(0.0).sqrt() * rng.sample::<f64, _>(StandardNormal));
        &self.mean + eig.eigenvectors * z
    }
}

/// Exact-in-time law of the flat lattice equation after time `t`: each mode
/// is an Ornstein–Uhlenbeck process with rate `λ_k` and noise `1/h`.
pub fn exact_euclidean_evolve(g: &LatticeGaussian, t: f64) -> Result<LatticeGaussian> {
    if !(t >= 0.0) {
        return domain(format!("time must be non-negative, got {t}"));
    }
    if t == 0.0 {
        return Ok(g.clone());
    }
    let sp = PinnedSpectrum::new(g.length, g.sites())?;
    let h = sp.spacing;
    let decay = sp.rates.map(|l| (-l * t).exp());
    let noise = sp.rates.map(|l| -(-2.0 * l * t).exp_m1() / (2.0 * h * l));
    let phi = &sp.basis;
    let a = phi.transpose() * &g.mean;
    let mean = phi * a.component_mul(&decay);
    let mut c = phi.transpose() * &g.cov * phi;
    for r in 0..c.nrows() {
        for s in 0..c.ncols() {
            c[(r, s)] *= decay[r] * decay[s];
        }
        c[(r, r)] += noise[r];
    }
    let mut cov = phi * c * phi.transpose();
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(LatticeGaussian { length: g.length, mean, cov })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceConfig {
    pub length: f64,
    pub sites: usize,
    pub dt: f64,
    pub duration: f64,
    pub n_trajectories: usize,
    pub master_seed: u64,
    /// Allowed systematic drift of each statistic on curved targets.
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceRow {
    pub label: String,
    pub before: f64,
    pub after: f64,
    /// Exact stationary value (flat case only).
    pub expected: Option<f64>,
    pub stderr: f64,
    /// `after` against `expected` (flat) or against `before` (curved).
    pub z: f64,
    /// Paired after-minus-before z-score.
    pub z_drift: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
    pub pass: bool,
}

fn probe_sites(j: usize) -> Vec<usize> {
    let mut s = vec![j / 8, j / 4, j / 2, j];
    s.retain(|&k| k > 0);
    s.dedup();
    s
}

/// Starts an ensemble from the lattice Wiener law, evolves it with the
/// intrinsic stepper and compares pair statistics. Flat targets use
/// `E[x_j x_k]` of the first coordinate against the exact spectral
/// stationary covariance; curved targets use `E[cos ρ(u_j, u_k)]` against
/// the initial ensemble.
pub fn invariance_test(spec: ManifoldSpec, cfg: &InvarianceConfig) -> Result<InvarianceReport> {
    let o = spec.origin();
    let stream = RngStream::new(cfg.master_seed, label_id("spde-invariance"), 0);
    let sites = probe_sites(cfg.sites);
    let mut pairs = Vec::new();
    let flat = matches!(spec, ManifoldSpec::Euclidean { .. });
    for (a, &i) in sites.iter().enumerate() {
        for &k in &sites[a..] {
            if flat || i != k {
                pairs.push((i, k));
            }
        }
    }
    if !flat {
        for &k in &sites {
            pairs.push((0, k));
        }
    }
    let stat = |s: &StringState, i: usize, k: usize| -> f64 {
        if flat {
            s.coords(i)[0] * s.coords(k)[0]
        } else {
            spec.dist_raw(s.coords(i), s.coords(k)).cos()
        }
    };
    let rows = par_map(cfg.n_trajectories, |t| -> Result<(Vec<f64>, Vec<f64>)> {
        let st = stream.with_trajectory(t as u64);
        let s0 = StringState::brownian(spec, &o, cfg.length, cfg.sites, &st)?;
        let mut rng = st.sub(3).rng();
        let s1 = s0.evolve(cfg.duration, cfg.dt, &mut rng)?;
        Ok((pairs.iter().map(|&(i, k)| stat(&s0, i, k)).collect(), pairs.iter().map(|&(i, k)| stat(&s1, i, k)).collect()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let exact = if flat { Some(PinnedSpectrum::new(cfg.length, cfg.sites)?.stationary_covariance()) } else { None };
    let mut out = Vec::new();
    for (c, &(i, k)) in pairs.iter().enumerate() {
        let before: Vec<f64> = rows.iter().map(|r| r.0[c]).collect();
        let after: Vec<f64> = rows.iter().map(|r| r.1[c]).collect();
        let diff: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
        let (mb, _) = mean_sd(&before);
        let (ma, sa) = mean_sd(&after);
        let (md, sd) = mean_sd(&diff);
        let n = (cfg.n_trajectories as f64).sqrt();
        let z_drift = z_score(md, sd / n);
        let (expected, stderr, z, pass) = match &exact {
            Some(cov) => {
                let e = cov[(i - 1, k - 1)];
                let z = z_score(ma - e, sa / n);
                (Some(e), sa / n, z, z.abs() <= 3.0)
            }
            None => (None, sd / n, z_drift, md.abs() <= 3.0 * sd / n + cfg.tolerance),
        };
        let h = cfg.length / cfg.sites as f64;
        let label = if flat {
            format!("E[x({:.4}) x({:.4})]", i as f64 * h, k as f64 * h)
        } else {
            format!("E[cos d(u({:.4}), u({:.4}))]", i as f64 * h, k as f64 * h)
        };
        out.push(InvarianceRow { label, before: mb, after: ma, expected, stderr, z, z_drift, pass });
    }
    let pass = out.iter().all(|r| r.pass);
    Ok(InvarianceReport { rows: out, pass })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub times: Vec<f64>,
    /// `μ(|P_t F − μ(F)|²)` at each time.
    pub values: Vec<f64>,
    pub monotone: bool,
    /// Slope of `−½ log value` fitted on the later half of the times.
    pub fitted_rate: f64,
    pub oracle_rate: f64,
}

/// Decay of `μ(|P_t F − μ(F)|²)` for the linear lattice functional
/// `F(x) = c + Σ_j w_j x_j` under the flat equation started from the
/// stationary lattice Wiener law.
pub fn ergodicity_decay(weights: &[f64], length: f64, times: &[f64]) -> Result<DecayReport> {
    let sp = PinnedSpectrum::new(length, weights.len())?;
    let w = DVector::from_column_slice(weights);
    let coef = sp.basis.transpose() * w;
    let var = sp.stationary_mode_variances();
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0) {
            return domain(format!("time must be non-negative, got {t}"));
        }
        let v: f64 = (0..sp.sites()).map(|k| coef[k].powi(2) * var[k] * (-2.0 * sp.rates[k] * t).exp()).sum();
        values.push(v);
    }
    let monotone = values.windows(2).all(|p| p[1] <= p[0]);
    let half = times.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        times[half..].iter().zip(&values[half..]).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).unzip();
    let fitted_rate = if xs.len() >= 2 { -0.5 * linear_fit(&xs, &ys).0 } else { f64::NAN };
    Ok(DecayReport { times: times.to_vec(), values, monotone, fitted_rate, oracle_rate: sp.slowest_rate() })
}

/// One probe pair of [`covariance_limit`].
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceEntry {
    pub x: f64,
    pub y: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
    pub target: f64,
}

/// Noise part of the flat solution at time `t`: the field started from the
/// zero path, sampled `n` times, with the covariance of each probe pair
/// compared to `min(x, y)`.
pub fn covariance_limit(length: f64, j: usize, t: f64, probes: &[f64], n: usize, master_seed: u64) -> Result<Vec<CovarianceEntry>> {
    let start = LatticeGaussian::point(length, &vec![0.0; j]);
    let law = exact_euclidean_evolve(&start, t)?;
    let h = law.spacing();
    let idx: Vec<usize> = probes
        .iter()
        .map(|&x| {
            let k = (x / h).round() as usize;
            if k == 0 || k > j || ((k as f64) * h - x).abs() > 1e-9 {
                domain(format!("probe {x} is not a lattice site"))
            } else {
                Ok(k - 1)
            }
        })
        .collect::<Result<_>>()?;
    let eig = SymmetricEigen::new(law.cov.clone());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    let stream = RngStream::new(master_seed, label_id("covariance-limit"), 0);
    let samples: Vec<Vec<f64>> = par_map(n, |i| {
        let mut rng = stream.with_trajectory(i as u64).rng();
        let z = DVector::from_fn(j, |_, _| rng.sample::<f64, _>(StandardNormal));
        idx.iter().map(|&k| law.mean[k] + root.row(k).dot(&z.transpose())).collect()
    });
    let mut out = Vec::new();
    for (a, &ka) in idx.iter().enumerate() {
        for (b, &kb) in idx.iter().enumerate().skip(a) {
            let prods: Vec<f64> = samples.iter().map(|s| s[a] * s[b]).collect();
            let (m, sd) = mean_sd(&prods);
            out.push(CovarianceEntry {
                x: probes[a],
                y: probes[b],
                estimate: m,
                stderr: sd / (n as f64).sqrt(),
                exact: law.cov[(ka, kb)],
                target: probes[a].min(probes[b]),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn flat_linear_data_is_harmonic() {
        let spec = ManifoldSpec::Euclidean { n: 1 };
        let o = spec.origin();
        // linear on the pinned part; the reflecting end is not harmonic, so
        // check interior sites only
        let pts: Vec<_> = (0..=10).map(|j| spec.point(&[0.3 * j as f64]).unwrap()).collect();
        let s = StringState::from_points(spec, Boundary::PinnedLeft(o), 0.1, &pts).unwrap();
        for j in 1..10 {
            assert!(s.drift(j).unwrap().norm() < 1e-12 / 0.01);
        }
    }

    #[test]
    fn flat_step_is_finite_difference() {
        let spec = ManifoldSpec::Euclidean { n: 2 };
        let o = spec.origin();
        let s = StringState::brownian(spec, &o, 1.0, 16, &RngStream::new(1, 1, 1)).unwrap();
        let dt = s.cfl_limit() / 2.0;
        let mut rng = RngStream::new(2, 2, 2).rng();
        let next = s.step(dt, &mut rng).unwrap();
        let mut rng = RngStream::new(2, 2, 2).rng();
        let h = s.spacing();
        for j in 1..s.len() {
            let up = if j + 1 < s.len() { s.coords(j + 1) } else { s.coords(j) };
            let lap = (up - 2.0 * s.coords(j) + s.coords(j - 1)) / (h * h);
            let db = gaussian_increment(&mut rng, 2, (dt / h).sqrt());
            let expect = s.coords(j) + lap * (0.5 * dt) + Vec3::new(db[0], db[1], 0.0);
            assert!((next.coords(j) - expect).norm() < 1e-12);
        }
        assert_eq!(next.coords(0), s.coords(0));
    }

    #[test]
    fn sphere_two_site_drift() {
        let spec = ManifoldSpec::Sphere2;
        let o = spec.origin();
        let u1 = spec.point(&[0.6, 0.0, 0.8]).unwrap();
        let s = StringState::from_points(spec, Boundary::PinnedLeft(o), 0.5, &[o, u1]).unwrap();
        let d = s.drift(1).unwrap();
        let rho = spec.distance(&o, &u1);
        assert!((d.norm() - rho / (2.0 * 0.25)).abs() < 1e-12);
        let toward = spec.log_raw(u1.coords(), o.coords()).unwrap();
        assert!((d.normalize() - toward.normalize()).norm() < 1e-12);
    }

    #[test]
    fn cfl_and_cut_locus() {
        let spec = ManifoldSpec::Sphere2;
        let o = spec.origin();
        let s = StringState::brownian(spec, &o, 1.0, 8, &RngStream::new(1, 1, 1)).unwrap();
        let mut rng = RngStream::new(0, 0, 0).rng();
        assert!(matches!(s.step(s.cfl_limit() * 1.01, &mut rng), Err(Error::Cfl { .. })));
        let south = spec.point(&[0.0, 0.0, -1.0]).unwrap();
        let bad = StringState::from_points(spec, Boundary::PinnedLeft(o), 0.1, &[o, south]).unwrap();
        assert!(matches!(bad.step(0.001, &mut rng), Err(Error::CutLocus)));
    }

    #[test]
    fn pinned_end_stays_put() {
        let spec = ManifoldSpec::Hyperbolic2;
        let o = spec.origin();
        let s = StringState::brownian(spec, &o, 1.0, 8, &RngStream::new(1, 1, 1)).unwrap();
        let mut rng = RngStream::new(3, 3, 3).rng();
        let e = s.evolve(0.125, s.cfl_limit() / 2.0, &mut rng).unwrap();
        assert_eq!(e.site(0), o);
        assert!((e.time() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn heat_kernel_examples() {
        assert_eq!(dirichlet_heat_kernel(0.7, 0.0, 1.3).unwrap(), 0.0);
        let p = dirichlet_heat_kernel(1.0, 1.0, 1.0).unwrap();
        let exact = (1.0 - (-2.0f64).exp()) / (2.0 * std::f64::consts::PI).sqrt();
        assert!((p - exact).abs() < 1e-15);
        assert!((p - 0.34492).abs() < 1e-4);
        assert!(dirichlet_heat_kernel(0.0, 1.0, 1.0).is_err());
        assert!(dirichlet_heat_kernel(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn spectrum_is_orthonormal() {
        let sp = PinnedSpectrum::new(2.0, 20).unwrap();
        let g = sp.basis.transpose() * &sp.basis;
        assert!((g - DMatrix::identity(20, 20)).amax() < 1e-12);
    }

    #[test]
    fn exact_solver_examples() {
        let w = LatticeGaussian::wiener(4.0, 32);
        assert_eq!(exact_euclidean_evolve(&w, 0.0).unwrap(), w);
        let e = exact_euclidean_evolve(&w, 3.0).unwrap();
        assert!((e.cov - &w.cov).amax() < 1e-10);
        let d = LatticeGaussian::point(4.0, &[1.0; 32]);
        let e = exact_euclidean_evolve(&d, 200.0).unwrap();
        assert!(e.mean.amax() < 1e-3);
        assert!(LatticeGaussian::new(1.0, DVector::zeros(2), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0])).is_err());
        assert!(LatticeGaussian::new(1.0, DVector::zeros(2), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }

    #[test]
    fn decay_of_constant_is_zero() {
        let r = ergodicity_decay(&[0.0; 16], 2.0, &[0.0, 1.0, 2.0]).unwrap();
        assert!(r.values.iter().all(|v| *v == 0.0));
    }
}
