//! The fourteen acceptance criteria, one PASS/FAIL line each.
//!
//! Criterion 5 is known to be unattainable with the stated window and time:
//! the noise part of the pinned equation at t = 10 has only reached about
//! two thirds of its stationary covariance. It is run faithfully and
//! reported as FAIL; the harness fails if any other criterion fails or if 5
//! starts passing.

use std::collections::BTreeSet;
use std::time::Instant;

use nalgebra::DMatrix;
use pathspace::brownian::{damping_matrices, sample_bm, tail_probability};
use pathspace::inequalities::{
    delta_eps, lsi_check, lsi_constant, nonergodicity_witness, poincare_check, poincare_failure, WitnessConfig,
};
use pathspace::measures::{default_battery, shift_invariance_test, stationarity_test, PathStatistic};
use pathspace::pathcalc::{
    fd_gradient_of_expectation, gradient_of_expectation, ibp_residual, ibp_suite, registry, Sampler,
};
use pathspace::spde::{
    covariance_limit, ergodicity_decay, exact_euclidean_evolve, invariance_test, InvarianceConfig, LatticeGaussian,
    PinnedSpectrum,
};
use pathspace::stats::mean_sd;
use pathspace::{CutoffParams, EnsembleParams, FramedPath, ManifoldSpec, NuSpec, Result, RngStream};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

const SEED: u64 = 2024;
const KNOWN_UNATTAINABLE: [usize; 1] = [5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn se(x: &[f64]) -> (f64, f64) {
    let (m, sd) = mean_sd(x);
    (m, sd / (x.len() as f64).sqrt())
}

fn ibp() -> Result<Outcome> {
    let ens = EnsembleParams::new(100_000, 1e-3, SEED);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut pass = true;
    for spec in [ManifoldSpec::Euclidean { n: 2 }, ManifoldSpec::Sphere2, ManifoldSpec::Hyperbolic2] {
        let fs = registry::ibp_suite(spec)?;
        let hs = registry::direction_ids()
            .iter()
            .map(|id| registry::direction(id, spec.dimension()))
            .collect::<Result<Vec<_>>>()?;
        let cut = match spec {
            ManifoldSpec::Hyperbolic2 => Some(CutoffParams { m: 2.0, horizon: 1.5 }),
            _ => None,
        };
        let sampler = Sampler::half_line(spec, spec.origin(), 2.0);
        for r in ibp_suite(&fs, &hs, cut, &sampler, ens)? {
            worst = worst.max(r.z.abs());
            pass &= r.z.abs() <= 3.0;
            count += 1;
        }
    }
    let spec = ManifoldSpec::Euclidean { n: 1 };
    let r = ibp_residual(
        &registry::cylinder("linear", spec)?,
        &registry::direction("ramp", 1)?,
        None,
        &Sampler::half_line(spec, spec.origin(), 2.0),
        ens,
    )?;
    let analytic = (r.lhs.value - 0.5).abs() < 1e-12 && (r.rhs.value - 0.5).abs() <= 3.0 * r.rhs.stderr;
    outcome(
        pass && analytic && count == 18,
        format!(
            "max |z| = {worst:.3} over {count} pairs; analytic lhs = {:.6}, rhs = {:.5} +- {:.5}",
            r.lhs.value, r.rhs.value, r.rhs.stderr
        ),
    )
}

fn bm_stats() -> Result<Outcome> {
    let spec = ManifoldSpec::Euclidean { n: 2 };
    let grid = [0.25, 0.5, 0.75, 1.0];
    let dt = 1e-3;
    let paths: Vec<FramedPath> = (0..10_000)
        .map(|i| sample_bm(spec, &spec.origin(), 1.0, dt, &RngStream::new(SEED, 2, i)))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for &s in &grid {
        for &t in &grid {
            for i in 0..2 {
                for j in 0..2 {
                    let (ks, kt) = ((s / dt).round() as usize, (t / dt).round() as usize);
                    let prods: Vec<f64> = paths.iter().map(|p| p.coords(ks)[i] * p.coords(kt)[j]).collect();
                    let (m, e) = se(&prods);
                    let target = if i == j { f64::min(s, t) } else { 0.0 };
                    worst = worst.max((m - target).abs() / e);
                    pass &= (m - target).abs() <= 3.0 * e;
                }
            }
        }
    }
    outcome(pass, format!("max |z| = {worst:.3} over 64 covariance entries"))
}

/// Mean of `cos R` for a planar Gaussian step of variance `dt` per axis.
fn rayleigh_cos(dt: f64) -> f64 {
    let n = 200_000;
    let h = 12.0 * dt.sqrt() / n as f64;
    (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            r / dt * (-r * r / (2.0 * dt)).exp() * r.cos() * h
        })
        .sum()
}

fn sphere_decay() -> Result<Outcome> {
    let spec = ManifoldSpec::Sphere2;
    let o = spec.origin();
    let dt = 1e-3;
    let fine = dt / 2.0;
    let frame = spec.standard_frame(&o);
    let mut coarse_vals = vec![Vec::new(); 3];
    let mut diffs = Vec::new();
    let times = [0.25, 0.5, 1.0];
    for i in 0..10_000 {
        let f = sample_bm(spec, &o, 1.0, fine, &RngStream::new(SEED, 3, i))?;
        let incs: Vec<[f64; 3]> =
            f.increments().chunks(2).map(|c| [c[0][0] + c[1][0], c[0][1] + c[1][1], 0.0]).collect();
        let c = FramedPath::from_increments(spec, &frame, dt, &incs)?;
        for (v, &t) in coarse_vals.iter_mut().zip(&times) {
            v.push(c.coords((t / dt).round() as usize).dot(o.coords()));
        }
        diffs.push(c.coords(1000).dot(o.coords()) - f.coords(2000).dot(o.coords()));
    }
    let mut pass = true;
    let mut detail = String::new();
    for (v, &t) in coarse_vals.iter().zip(&times) {
        let (m, e) = se(v);
        let err = (m - f64::exp(-t)).abs();
        pass &= err <= 3.0 * e + 0.01;
        detail += &format!("t={t}: {m:.5} +- {e:.5}; ");
    }
    // the walk oracle: each step multiplies E[cos ρ] by E[cos R]
    let bias = |h: f64| (rayleigh_cos(h).powi((1.0 / h).round() as i32) - (-1.0f64).exp()).abs();
    let (b1, b2) = (bias(dt), bias(fine));
    let expected_gap = rayleigh_cos(dt).powi(1000) - rayleigh_cos(fine).powi(2000);
    let (gap, gap_se) = se(&diffs);
    let coupled = (gap - expected_gap).abs() <= 3.0 * gap_se;
    pass &= b2 < b1 && coupled;
    detail += &format!(
        "scheme bias at t=1 {b1:.2e} -> {b2:.2e} when dt halves; coupled gap {gap:.2e} +- {gap_se:.1e} vs {expected_gap:.2e}"
    );
    outcome(pass, detail)
}

fn damping() -> Result<Outcome> {
    let spec = ManifoldSpec::Sphere2;
    let p = sample_bm(spec, &spec.origin(), 2.0, 1e-3, &RngStream::new(SEED, 4, 0))?;
    let ms = damping_matrices(&p);
    let mut worst_id: f64 = 0.0;
    for (k, m) in ms.iter().enumerate() {
        worst_id = worst_id.max((m - DMatrix::identity(2, 2) * (-p.time(k) / 2.0).exp()).norm());
    }
    let mut rng = RngStream::new(SEED, 4, 1).rng();
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.random_range(0..=p.n_steps());
        let b = rng.random_range(a..=p.n_steps());
        let inv = ms[a].clone().try_inverse().expect("damping matrices are invertible");
        let op = (inv * &ms[b]).singular_values().max();
        worst_ratio = worst_ratio.max(op / (-(p.time(b) - p.time(a)) / 2.0).exp());
    }
    outcome(
        worst_id <= 1e-8 && worst_ratio <= 1.0 + 1e-9,
        format!("max |M_t - e^(-t/2) I| = {worst_id:.2e}; max norm ratio = {worst_ratio:.12}"),
    )
}

fn covariance() -> Result<Outcome> {
    let (len, j) = (8.0, 256);
    let h = len / j as f64;
    let rows = covariance_limit(len, j, 10.0, &[0.5, 1.0, 2.0], 20_000, SEED)?;
    let mut pass = true;
    let mut detail = String::new();
    for r in &rows {
        pass &= (r.estimate - r.target).abs() <= h + 3.0 * r.stderr;
        detail += &format!("C({},{}) = {:.4} (exact {:.4}, target {}); ", r.x, r.y, r.estimate, r.exact, r.target);
    }
    // from the stationary lattice Wiener law the exact covariance is min(x, y) at every t
    let law = exact_euclidean_evolve(&LatticeGaussian::wiener(len, j), 10.0)?;
    let k = |x: f64| (x / h).round() as usize - 1;
    detail += &format!(
        "the noise part at t = 10 is still far from stationary; from a Wiener start C(2,2) = {:.4}",
        law.cov[(k(2.0), k(2.0))]
    );
    outcome(pass, detail)
}

fn spde_invariance() -> Result<Outcome> {
    let (len, j) = (4.0, 64);
    let h = len / j as f64;
    let cfg = InvarianceConfig {
        length: len,
        sites: j,
        dt: h * h / 4.0,
        duration: 1.0,
        n_trajectories: 4000,
        master_seed: SEED,
        tolerance: 0.05,
    };
    let r = invariance_test(ManifoldSpec::Euclidean { n: 1 }, &cfg)?;
    let worst = r.rows.iter().map(|row| row.z.abs()).fold(0.0, f64::max);
    outcome(r.pass, format!("max |z| = {worst:.3} over {} covariance probes", r.rows.len()))
}

fn inequality_line(r: &pathspace::InequalityReport) -> String {
    let worst = r.entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    format!("constant {}, {} functions, largest lhs/rhs = {worst:.3}", r.constant, r.entries.len())
}

fn lsi() -> Result<Outcome> {
    let spec = ManifoldSpec::Sphere2;
    let c = lsi_constant(spec.ricci_constant())?;
    let suite = registry::lsi_suite()?;
    let horizon = suite.iter().map(|f| f.max_window()).fold(0.0, f64::max);
    let r = lsi_check(&suite, &Sampler::half_line(spec, spec.origin(), horizon), 2.0 * c, EnsembleParams::new(10_000, 1e-3, SEED))?;
    outcome(r.pass && suite.len() >= 10 && c == 4.0, inequality_line(&r))
}

fn poincare() -> Result<Outcome> {
    let spec = ManifoldSpec::Sphere2;
    let delta = delta_eps(spec, 0.5)?;
    let suite = registry::lsi_suite()?;
    let horizon = suite.iter().map(|f| f.max_window()).fold(0.0, f64::max);
    let r = poincare_check(&suite, &Sampler::half_line(spec, spec.origin(), horizon), delta, EnsembleParams::new(10_000, 1e-3, SEED))?;
    outcome(r.pass && (delta - 4.0).abs() < 1e-12, inequality_line(&r))
}

fn poincare_fails() -> Result<Outcome> {
    let r = poincare_failure(&[1.0, 2.0, 4.0, 8.0], EnsembleParams::new(20_000, 1e-3, SEED))?;
    let worst = r.rows.iter().map(|row| (row.ratio / row.target_ratio - 1.0).abs()).fold(0.0, f64::max);
    outcome(r.pass, format!("ratio off 2T^2/3 by at most {:.2}%; slope {:.4}", 100.0 * worst, r.slope))
}

fn ergodicity() -> Result<Outcome> {
    let (len, j) = (4.0, 64);
    let sp = PinnedSpectrum::new(len, j)?;
    let mut w = vec![0.0; j];
    w[15] = 1.0;
    let t_end = 2.0 / sp.slowest_rate();
    let times: Vec<f64> = (0..=40).map(|i| t_end * i as f64 / 40.0).collect();
    let r = ergodicity_decay(&w, len, &times)?;
    let last = r.values.last().unwrap() / r.values[0];
    let rate_err = (r.fitted_rate / r.oracle_rate - 1.0).abs();
    outcome(
        r.monotone && last < 0.01 && rate_err <= 0.1,
        format!("value at 2/lambda_1 is {:.3}% of start; fitted rate off by {:.2}%", 100.0 * last, 100.0 * rate_err),
    )
}

fn nonergodicity() -> Result<Outcome> {
    let r = nonergodicity_witness(&WitnessConfig::default(), EnsembleParams::new(4000, 5e-3, SEED))?;
    let var32 = r.rows.last().unwrap().variance.value;
    let mz = r.martingale.iter().map(|m| m.z.abs()).fold(0.0, f64::max);
    outcome(r.pass, format!("energy slope {:.3}; Var(F_32) = {var32:.4}; martingale max |z| = {mz:.3}", r.slope))
}

fn tail() -> Result<Outcome> {
    let ens = EnsembleParams::new(10_000, 1e-3, SEED);
    let mut pass = true;
    let mut detail = String::new();
    for spec in [ManifoldSpec::Euclidean { n: 1 }, ManifoldSpec::Euclidean { n: 2 }, ManifoldSpec::Sphere2] {
        let r = tail_probability(spec, &spec.origin(), 1.0, &[2.0, 3.0], 0.01, 0.0, ens, 12)?;
        pass &= r.iter().all(|t| t.within_bound);
        if let ManifoldSpec::Euclidean { n: 1 } = spec {
            // P(sup_{s<=1} |B_s| > N) = 4 Φ̄(N) up to terms of order Φ̄(3N)
            for t in &r {
                let oracle = 4.0 * (1.0 - Normal::standard().cdf(t.threshold));
                let ok = (t.estimate.value - oracle).abs() <= 3.0 * t.estimate.stderr;
                pass &= ok;
                detail += &format!(
                    "N={}: {:.5} +- {:.5} vs reflection {oracle:.5}; ",
                    t.threshold, t.estimate.value, t.estimate.stderr
                );
            }
        }
    }
    detail += "all below the analytic bound";
    outcome(pass, detail)
}

fn symmetries() -> Result<Outcome> {
    let ens = EnsembleParams::new(10_000, 1e-3, SEED);
    let st = stationarity_test(&[0.0, 0.5, 1.0], ens)?;
    let sphere = ManifoldSpec::Sphere2;
    let times = [0.2, 1.0];
    let sh = shift_invariance_test(sphere, NuSpec::UniformOnCompact, 0.7, &times, &default_battery(sphere, 2), ens)?;
    let flat = ManifoldSpec::Euclidean { n: 1 };
    let control = shift_invariance_test(
        flat,
        NuSpec::PointMass(flat.origin()),
        0.7,
        &times,
        &[PathStatistic::SquaredNorm { time: 0 }, PathStatistic::SquaredNorm { time: 1 }],
        ens,
    )?;
    let zs = st.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let zsh = sh.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let zc = control.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    outcome(
        st.pass && sh.pass && !control.pass,
        format!(
            "stationarity max |z| = {zs:.3}; shift max |z| = {zsh:.3}; point-mass control max |z| = {zc:.1} ({})",
            if control.pass { "passed, unexpected" } else { "fails as it should" }
        ),
    )
}

fn gradient() -> Result<Outcome> {
    let ens = EnsembleParams::new(10_000, 1e-3, SEED);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (spec, x) in [
        (ManifoldSpec::Sphere2, ManifoldSpec::Sphere2.point(&[0.6, 0.0, 0.8])?),
        (ManifoldSpec::Euclidean { n: 2 }, ManifoldSpec::Euclidean { n: 2 }.point(&[0.3, -0.2])?),
    ] {
        let f = registry::cylinder("trig-pair", spec)?;
        let j = gradient_of_expectation(&f, spec, &x, ens)?.components;
        let fd = fd_gradient_of_expectation(&f, spec, &x, 1e-3, ens)?;
        for i in 0..j.value.len() {
            let combined = j.stderr[i].hypot(fd.stderr[i]);
            let z = (j.value[i] - fd.value[i]) / combined;
            worst = worst.max(z.abs());
            pass &= z.abs() <= 3.0;
        }
    }
    outcome(pass, format!("max |z| between estimator and finite differences = {worst:.3}"))
}

fn main() {
    type Criterion = (usize, &'static str, fn() -> Result<Outcome>);
    let criteria: [Criterion; 14] = [
        (1, "integration by parts", ibp),
        (2, "euclidean brownian covariance", bm_stats),
        (3, "sphere eigenfunction decay", sphere_decay),
        (4, "damping matrix", damping),
        (5, "stationary covariance limit", covariance),
        (6, "spde invariance", spde_invariance),
        (7, "log-sobolev", lsi),
        (8, "poincare", poincare),
        (9, "poincare failure", poincare_fails),
        (10, "ergodicity", ergodicity),
        (11, "non-ergodicity", nonergodicity),
        (12, "tail bound", tail),
        (13, "stationarity and shift invariance", symmetries),
        (14, "gradient of expectation", gradient),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = BTreeSet::new();
    let mut ran = BTreeSet::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == id.to_string()) {
            continue;
        }
        ran.insert(id);
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed.insert(id);
        }
        println!(
            "criterion {id:>2} {} {name} ({:.1} s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    let expected: BTreeSet<usize> = KNOWN_UNATTAINABLE.iter().copied().filter(|k| ran.contains(k)).collect();
    if failed != expected {
        println!("unexpected outcome: failed {failed:?}, known unattainable {expected:?}");
        std::process::exit(1);
    }
    println!("acceptance: {} of {} criteria pass; failures limited to the known set {expected:?}", ran.len() - failed.len(), ran.len());
}
