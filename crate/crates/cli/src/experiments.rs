//! The named experiments. Each reads what it needs from the merged config,
//! fills in its own defaults and returns tables, checks and a plot.

use anyhow::{bail, Context, Result};
use pathspace::brownian::{c2_for_constant, sample_bm, tail_probability};
use pathspace::inequalities::{
    delta_eps, lsi_check, lsi_constant, nonergodicity_witness, poincare_check, poincare_failure, time_average_witness,
    WitnessConfig, WitnessReport,
};
use pathspace::measures::{default_battery, shift_invariance_test, stationarity_test};
use pathspace::pathcalc::{energies, fd_gradient_of_expectation, gradient_of_expectation, ibp_suite, registry, Sampler};
use pathspace::rng::label_id;
use pathspace::spde::{
    covariance_limit, ergodicity_decay, exact_euclidean_evolve, invariance_test, InvarianceConfig, LatticeGaussian,
    PinnedSpectrum, StringState,
};
use pathspace::stats::{mean_sd, z_score};
use pathspace::{CutoffParams, EnsembleParams, InequalityReport, ManifoldSpec, RngStream};
use statrs::function::erf::erfc;

use crate::config::ExperimentConfig;
use crate::output::{Check, Report, Table};
use crate::svg::Plot;

type Runner = fn(&ExperimentConfig, u64) -> Result<Report>;

pub const EXPERIMENTS: [(&str, &str); 14] = [
    ("bm-stats", "Brownian motion moments against closed forms"),
    ("ibp", "integration by parts residuals for cylinder functions"),
    ("dirichlet-form", "Dirichlet form E(F,F) of the registered cylinder functions"),
    ("lsi", "log-Sobolev inequality on the unit sphere"),
    ("poincare", "Poincare inequality on the unit sphere"),
    ("poincare-failure", "growth of Var/E for time integrals on the line"),
    ("ergodicity", "L2 decay of the flat string semigroup"),
    ("nonergodicity", "bounded harmonic time averages on the hyperbolic plane"),
    ("spde-invariance", "invariance of the Wiener measure under the string dynamics"),
    ("covariance-limit", "covariance of the flat string noise against min(x,y)"),
    ("tail-bound", "sup-distance exceedance against the analytic tail bound"),
    ("stationarity", "stationary marginals under the uniform start"),
    ("shift-invariance", "time-shift invariance of two-sided path statistics"),
    ("grad-expectation", "gradient of expectation against finite differences"),
];

pub fn runner(id: &str) -> Option<Runner> {
    Some(match id {
        "bm-stats" => bm_stats,
        "ibp" => ibp,
        "dirichlet-form" => dirichlet_form,
        "lsi" => lsi,
        "poincare" => poincare,
        "poincare-failure" => poincare_growth,
        "ergodicity" => ergodicity,
        "nonergodicity" => nonergodicity,
        "spde-invariance" => spde_invariance,
        "covariance-limit" => covariance,
        "tail-bound" => tail,
        "stationarity" => stationarity,
        "shift-invariance" => shift,
        "grad-expectation" => grad_expectation,
        _ => return None,
    })
}

fn ensemble(cfg: &ExperimentConfig, seed: u64, paths: usize, dt: f64) -> EnsembleParams {
    EnsembleParams::new(cfg.paths.unwrap_or(paths), cfg.dt.unwrap_or(dt), seed)
}

fn se(x: &[f64]) -> (f64, f64) {
    let (m, sd) = mean_sd(x);
    (m, sd / (x.len() as f64).sqrt())
}

/// Rounds `t` to the grid and rejects values that are not grid points.
fn grid_index(t: f64, dt: f64) -> Result<usize> {
    let k = (t / dt).round();
    if (k * dt - t).abs() > 1e-9 * t.max(dt) {
        bail!("time {t} is not a multiple of dt = {dt}");
    }
    Ok(k as usize)
}

fn bm_stats(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Euclidean { n: 2 })?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let horizon = cfg.horizon.unwrap_or(1.0);
    let default_times = match spec {
        ManifoldSpec::Euclidean { .. } => (1..=4).map(|i| horizon * i as f64 / 4.0).collect(),
        ManifoldSpec::Sphere2 => vec![0.25, 0.5, 1.0],
        ManifoldSpec::Hyperbolic2 => vec![0.5, 1.0],
    };
    let times = cfg.times.clone().unwrap_or(default_times);
    if times.iter().any(|t| *t < 0.0) {
        bail!("bm-stats needs non-negative times");
    }
    let top = times.iter().cloned().fold(0.0, f64::max);
    let o = spec.origin();
    let stream = RngStream::new(seed, label_id("bm-stats"), 0);
    let idx: Vec<usize> = times.iter().map(|&t| grid_index(t, ens.dt)).collect::<Result<_>>()?;
    let samples: Vec<Vec<pathspace::Vec3>> = pathspace::stats::par_map(ens.n_paths, |i| {
        let p = sample_bm(spec, &o, top, ens.dt, &stream.with_trajectory(i as u64))?;
        Ok(idx.iter().map(|&k| *p.coords(k)).collect())
    })
    .into_iter()
    .collect::<pathspace::Result<_>>()?;
    let tol = cfg.tolerance.unwrap_or(0.01);
    match spec {
        ManifoldSpec::Euclidean { n } => {
            let mut table = Table::new("results.csv", &["s", "t", "i", "j", "estimate", "stderr", "target", "z"]);
            let mut report_checks = Vec::new();
            for (a, &s) in times.iter().enumerate() {
                for (b, &t) in times.iter().enumerate() {
                    for i in 0..n {
                        for j in 0..n {
                            let prods: Vec<f64> = samples.iter().map(|x| x[a][i] * x[b][j]).collect();
                            let (m, e) = se(&prods);
                            let target = if i == j { s.min(t) } else { 0.0 };
                            let z = z_score(m - target, e);
                            table.push(vec![s.into(), t.into(), i.into(), j.into(), m.into(), e.into(), target.into(), z.into()]);
                            report_checks.push(Check::z(format!("cov[{i},{j}]({s},{t})"), z, 3.0));
                        }
                    }
                }
            }
            let mut r = Report::new(table);
            r.checks = report_checks;
            let diag: Vec<(f64, f64)> = times
                .iter()
                .enumerate()
                .map(|(a, &t)| (t, samples.iter().map(|x| x[a][0] * x[a][0]).sum::<f64>() / samples.len() as f64))
                .collect();
            r.plot = Some(
                Plot::new("Var of the first coordinate", "t", "variance")
                    .line("t", times.iter().map(|&t| (t, t)).collect())
                    .scatter("estimate", diag),
            );
            Ok(r)
        }
        ManifoldSpec::Sphere2 | ManifoldSpec::Hyperbolic2 => {
            let sphere = spec == ManifoldSpec::Sphere2;
            let (name, label) = if sphere { ("E[cos rho]", "exp(-t)") } else { ("E[cosh rho]", "exp(t)") };
            let mut table = Table::new("results.csv", &["t", "statistic", "estimate", "stderr", "target", "z"]);
            let mut r_checks = Vec::new();
            let mut est = Vec::new();
            for (a, &t) in times.iter().enumerate() {
                let vals: Vec<f64> = samples
                    .iter()
                    .map(|x| {
                        let d = spec.dist_raw(o.coords(), &x[a]);
                        if sphere { d.cos() } else { d.cosh() }
                    })
                    .collect();
                let (m, e) = se(&vals);
                let target = if sphere { (-t).exp() } else { t.exp() };
                let z = z_score(m - target, e);
                table.push(vec![t.into(), name.into(), m.into(), e.into(), target.into(), z.into()]);
                // the walk carries an O(dt) bias, hence the slack
                let slack = if sphere { tol } else { tol * target };
                r_checks.push(Check { pass: (m - target).abs() <= 3.0 * e + slack, ..Check::z(format!("{name}({t})"), z, 3.0) });
                est.push((t, m));
            }
            let mut r = Report::new(table);
            r.checks = r_checks;
            let fine: Vec<(f64, f64)> = (0..=50)
                .map(|i| {
                    let t = top * i as f64 / 50.0;
                    (t, if sphere { (-t).exp() } else { t.exp() })
                })
                .collect();
            r.plot = Some(Plot::new(name, "t", name).line(label, fine).scatter("estimate", est));
            Ok(r)
        }
    }
}

fn ibp(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Euclidean { n: 2 })?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let fs = registry::ibp_suite(spec)?;
    let hs = registry::direction_ids()
        .iter()
        .map(|id| registry::direction(id, spec.dimension()))
        .collect::<pathspace::Result<Vec<_>>>()?;
    let cut = match (spec, cfg.cutoff_m) {
        (ManifoldSpec::Hyperbolic2, m) => {
            Some(CutoffParams { m: m.unwrap_or(2.0), horizon: cfg.cutoff_horizon.unwrap_or(1.5) })
        }
        (_, Some(m)) => Some(CutoffParams { m, horizon: cfg.cutoff_horizon.unwrap_or(1.5) }),
        _ => None,
    };
    let sampler = Sampler::half_line(spec, spec.origin(), cfg.horizon.unwrap_or(2.0));
    let results = ibp_suite(&fs, &hs, cut, &sampler, ens)?;
    let mut table = Table::new("results.csv", &["function", "direction", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "z"]);
    let mut r_checks = Vec::new();
    let mut pts = Vec::new();
    for (i, res) in results.iter().enumerate() {
        table.push(vec![
            res.function.as_str().into(),
            res.direction.as_str().into(),
            res.lhs.value.into(),
            res.lhs.stderr.into(),
            res.rhs.value.into(),
            res.rhs.stderr.into(),
            res.z.into(),
        ]);
        r_checks.push(Check::z(format!("{}/{}", res.function, res.direction), res.z, 3.0));
        pts.push((i as f64 + 1.0, res.z));
    }
    let mut r = Report::new(table);
    r.checks = r_checks;
    r.notes.push(("manifold".into(), spec.to_string()));
    let n = pts.len() as f64;
    r.plot = Some(
        Plot::new("IBP residual z-scores", "pair", "z")
            .line("+3", vec![(1.0, 3.0), (n, 3.0)])
            .line("-3", vec![(1.0, -3.0), (n, -3.0)])
            .scatter("z", pts),
    );
    Ok(r)
}

fn dirichlet_form(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Sphere2)?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let mut fs = registry::cylinder_ids().iter().map(|id| registry::cylinder(id, spec)).collect::<pathspace::Result<Vec<_>>>()?;
    fs.push(pathspace::CylinderFunction::constant(spec, 1.0));
    let horizon = fs.iter().map(|f| f.max_window()).fold(0.0, f64::max);
    let horizon = (horizon / ens.dt).round() * ens.dt;
    let sampler = Sampler::half_line(spec, spec.origin(), horizon);
    let samples = energies(&fs, &sampler, ens)?;
    let mut table = Table::new("results.csv", &["function", "energy", "energy_stderr", "mean", "variance"]);
    let mut r_checks = Vec::new();
    for s in &samples {
        let (e, ese) = se(&s.energies);
        let (m, sd) = mean_sd(&s.values);
        table.push(vec![s.name.as_str().into(), e.into(), ese.into(), m.into(), (sd * sd).into()]);
        r_checks.push(Check::value(format!("{} energy is finite and non-negative", s.name), e, e.is_finite() && e >= 0.0));
    }
    let constant = samples.last().map(|s| s.energies.iter().all(|e| *e == 0.0)).unwrap_or(false);
    r_checks.push(Check::value("constant function has zero energy", 0.0, constant));
    let mut r = Report::new(table);
    r.checks = r_checks;
    Ok(r)
}

fn inequality_report(r: &InequalityReport, lhs_name: &str) -> Report {
    let mut table = Table::new(
        "results.csv",
        &["function", lhs_name, "lhs_stderr", "rhs", "rhs_stderr", "ratio", "combined_stderr", "clamped", "pass"],
    );
    let mut checks = Vec::new();
    let (mut lhs_pts, mut rhs_pts) = (Vec::new(), Vec::new());
    for (i, e) in r.entries.iter().enumerate() {
        table.push(vec![
            e.name.as_str().into(),
            e.lhs.into(),
            e.lhs_stderr.into(),
            e.rhs.into(),
            e.rhs_stderr.into(),
            e.ratio.into(),
            e.combined_stderr.into(),
            e.clamped.into(),
            e.pass.into(),
        ]);
        checks.push(Check::value(format!("{}: lhs <= rhs + 3 se", e.name), e.ratio, e.pass));
        lhs_pts.push((i as f64 + 1.0, e.lhs));
        rhs_pts.push((i as f64 + 1.0, e.rhs));
    }
    let mut out = Report::new(table);
    out.checks = checks;
    out.notes.push(("constant".into(), format!("{}", r.constant)));
    out.plot = Some(
        Plot::new(&format!("{} inequality, constant {}", r.kind, r.constant), "function", "normalized value")
            .scatter(lhs_name, lhs_pts)
            .scatter("constant x energy", rhs_pts),
    );
    out
}

fn sphere_only(cfg: &ExperimentConfig, what: &str) -> Result<ManifoldSpec> {
    let spec = cfg.spec(ManifoldSpec::Sphere2)?;
    if spec != ManifoldSpec::Sphere2 {
        bail!("{what} runs on the unit sphere only");
    }
    Ok(spec)
}

fn lsi(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = sphere_only(cfg, "lsi")?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let suite = registry::lsi_suite()?;
    let horizon = suite.iter().map(|f| f.max_window()).fold(0.0, f64::max);
    let c = lsi_constant(spec.ricci_constant())?;
    let r = lsi_check(&suite, &Sampler::half_line(spec, spec.origin(), horizon), 2.0 * c, ens)?;
    Ok(inequality_report(&r, "entropy"))
}

fn poincare(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = sphere_only(cfg, "poincare")?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let suite = registry::lsi_suite()?;
    let horizon = suite.iter().map(|f| f.max_window()).fold(0.0, f64::max);
    let delta = delta_eps(spec, cfg.eps.unwrap_or(0.5))?;
    let r = poincare_check(&suite, &Sampler::half_line(spec, spec.origin(), horizon), delta, ens)?;
    Ok(inequality_report(&r, "variance"))
}

fn poincare_growth(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let horizons = cfg.horizons.clone().unwrap_or(vec![1.0, 2.0, 4.0, 8.0]);
    let g = poincare_failure(&horizons, ens)?;
    let mut table = Table::new(
        "results.csv",
        &["T", "variance", "variance_stderr", "energy", "energy_stderr", "ratio", "target_ratio", "variance_floor"],
    );
    let mut checks = Vec::new();
    for row in &g.rows {
        table.push(vec![
            row.horizon.into(),
            row.variance.value.into(),
            row.variance.stderr.into(),
            row.energy.value.into(),
            row.energy.stderr.into(),
            row.ratio.into(),
            row.target_ratio.into(),
            row.variance_floor.into(),
        ]);
        checks.push(Check::value(format!("ratio within 5% of 2T^2/3 at T={}", row.horizon), row.ratio / row.target_ratio, row.ratio_ok));
        checks.push(Check::value(format!("Var >= T^3/6 at T={}", row.horizon), row.variance.value, row.variance_ok));
    }
    checks.push(Check::value("log-log slope of the ratio is 2 +- 0.1", g.slope, g.slope_ok));
    let mut r = Report::new(table);
    r.checks = checks;
    r.plot = Some(
        Plot::new("Var / E for time integrals", "T", "ratio")
            .log_log()
            .line("2T^2/3", g.rows.iter().map(|row| (row.horizon, row.target_ratio)).collect())
            .scatter("estimate", g.rows.iter().map(|row| (row.horizon, row.ratio)).collect()),
    );
    Ok(r)
}

fn ergodicity(cfg: &ExperimentConfig, _seed: u64) -> Result<Report> {
    let length = cfg.length.unwrap_or(4.0);
    let j = cfg.sites.unwrap_or(64);
    let site = cfg.weight_site.unwrap_or(16);
    if site > j {
        bail!("weight_site {site} exceeds the number of sites {j}");
    }
    let sp = PinnedSpectrum::new(length, j)?;
    let mut w = vec![0.0; j];
    w[site - 1] = 1.0;
    let t_end = cfg.horizon.unwrap_or(2.0 / sp.slowest_rate());
    let times: Vec<f64> = (0..=40).map(|i| t_end * i as f64 / 40.0).collect();
    let d = ergodicity_decay(&w, length, &times)?;
    let mut table = Table::new("results.csv", &["t", "variance", "relative", "slowest_mode_envelope"]);
    for (t, v) in d.times.iter().zip(&d.values) {
        table.push(vec![(*t).into(), (*v).into(), (v / d.values[0]).into(), (-2.0 * sp.slowest_rate() * t).exp().into()]);
    }
    let last = d.values.last().unwrap() / d.values[0];
    let rate = d.fitted_rate / d.oracle_rate - 1.0;
    let mut r = Report::new(table);
    r.checks = vec![
        Check::value("decay is monotone", 0.0, d.monotone),
        Check::value("relative variance at the end below 1%", last, last < 0.01),
        Check::value("fitted rate within 10% of the slowest mode", rate, rate.abs() <= 0.1),
    ];
    r.notes.push(("slowest_rate".into(), format!("{:.16e}", sp.slowest_rate())));
    r.plot = Some(
        Plot::new("Decay of mu(|P_t F - mu(F)|^2)", "t", "relative variance")
            .log_y()
            .line("exact", d.times.iter().zip(&d.values).map(|(t, v)| (*t, v / d.values[0])).collect())
            .line("slowest mode", d.times.iter().map(|t| (*t, (-2.0 * sp.slowest_rate() * t).exp())).collect()),
    );
    Ok(r)
}

fn witness_report(w: &WitnessReport) -> Report {
    let mut table = Table::new(
        "results.csv",
        &["T", "variance", "variance_stderr", "energy", "energy_stderr", "energy_ito", "energy_ito_stderr", "z_cross"],
    );
    let mut checks = Vec::new();
    for row in &w.rows {
        table.push(vec![
            row.horizon.into(),
            row.variance.value.into(),
            row.variance.stderr.into(),
            row.energy.value.into(),
            row.energy.stderr.into(),
            row.energy_ito.value.into(),
            row.energy_ito.stderr.into(),
            row.z_cross.into(),
        ]);
        checks.push(Check::z(format!("energy cross-check at T={}", row.horizon), row.z_cross, 3.0));
    }
    let mut mart = Table::new("martingale.csv", &["t", "drift", "drift_stderr", "z"]);
    for m in &w.martingale {
        mart.push(vec![m.horizon.into(), m.drift.value.into(), m.drift.stderr.into(), m.z.into()]);
        checks.push(Check::z(format!("martingale drift at t={}", m.horizon), m.z, 3.0));
    }
    let (lo, hi) = w.slope_band;
    checks.push(Check::value(format!("energy slope in [{lo}, {hi}]"), w.slope, w.slope >= lo && w.slope <= hi));
    if let Some(last) = w.rows.last() {
        checks.push(Check::value(
            format!("Var(F_T) >= {} at T={}", w.variance_floor, last.horizon),
            last.variance.value,
            last.variance.value >= w.variance_floor,
        ));
    }
    let mut r = Report::new(table);
    r.tables.push(mart);
    r.checks = checks;
    r.plot = Some(
        Plot::new("Time averages: variance and energy", "T", "value")
            .log_log()
            .line("variance", w.rows.iter().map(|row| (row.horizon, row.variance.value)).collect())
            .line("energy", w.rows.iter().map(|row| (row.horizon, row.energy.value)).collect()),
    );
    r
}

fn nonergodicity(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Hyperbolic2)?;
    let ens = ensemble(cfg, seed, 4000, 5e-3);
    let mut wc = WitnessConfig::default();
    if let Some(h) = &cfg.horizons {
        wc.horizons = h.clone();
    }
    let w = match spec {
        ManifoldSpec::Hyperbolic2 => nonergodicity_witness(&wc, ens)?,
        // no bounded harmonic function here; the bump is the comparison case
        _ => time_average_witness(spec, &registry::gaussian_bump(), &wc, ens)?,
    };
    let mut r = witness_report(&w);
    r.notes.push(("manifold".into(), spec.to_string()));
    Ok(r)
}

fn spde_invariance(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Euclidean { n: 1 })?;
    let flat = matches!(spec, ManifoldSpec::Euclidean { .. });
    let length = cfg.length.unwrap_or(if flat { 4.0 } else { 1.0 });
    let sites = cfg.sites.unwrap_or(if flat { 64 } else { 32 });
    let h = length / sites as f64;
    let dt = cfg.dt.unwrap_or(h * h / 4.0);
    let duration = cfg.duration.unwrap_or(if flat { 1.0 } else { 0.5 });
    let ic = InvarianceConfig {
        length,
        sites,
        dt,
        duration,
        n_trajectories: cfg.paths.unwrap_or(if flat { 4000 } else { 1000 }),
        master_seed: seed,
        tolerance: cfg.tolerance.unwrap_or(0.05),
    };
    let rep = invariance_test(spec, &ic)?;
    let mut table = Table::new("results.csv", &["statistic", "before", "after", "expected", "stderr", "z", "z_drift", "pass"]);
    let mut checks = Vec::new();
    for row in &rep.rows {
        table.push(vec![
            row.label.as_str().into(),
            row.before.into(),
            row.after.into(),
            row.expected.into(),
            row.stderr.into(),
            row.z.into(),
            row.z_drift.into(),
            row.pass.into(),
        ]);
        checks.push(Check { pass: row.pass, ..Check::z(row.label.as_str(), row.z, 3.0) });
    }
    let mut r = Report::new(table);
    r.checks = checks;
    r.tables.push(snapshots(spec, length, sites, dt, duration, cfg.snapshots.unwrap_or(4), seed)?);
    r.notes.push(("manifold".into(), spec.to_string()));
    r.notes.push(("dt".into(), format!("{dt:.16e}")));
    Ok(r)
}

/// A few string trajectories recorded at five equally spaced times.
fn snapshots(spec: ManifoldSpec, length: f64, sites: usize, dt: f64, duration: f64, n: usize, seed: u64) -> Result<Table> {
    let dim = spec.ambient_dim();
    let mut header: Vec<String> = vec!["trajectory".into(), "time".into(), "site_index".into()];
    header.extend((0..dim).map(|c| format!("coord_{c}")));
    let mut table = Table { file: "snapshots.csv".into(), header, rows: Vec::new() };
    let o = spec.origin();
    let stream = RngStream::new(seed, label_id("spde-snapshots"), 0);
    let chunk = duration / 4.0;
    for traj in 0..n {
        let st = stream.with_trajectory(traj as u64);
        let mut s = StringState::brownian(spec, &o, length, sites, &st)?;
        let mut rng = st.sub(3).rng();
        for step in 0..=4 {
            if step > 0 {
                s = s.evolve(chunk, dt, &mut rng)?;
            }
            for j in 0..s.len() {
                let mut row = vec![traj.into(), s.time().into(), j.into()];
                row.extend((0..dim).map(|c| s.coords(j)[c].into()));
                table.rows.push(row);
            }
        }
    }
    Ok(table)
}

fn covariance(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let length = cfg.length.unwrap_or(8.0);
    let j = cfg.sites.unwrap_or(256);
    let t = cfg.time.unwrap_or(10.0);
    let probes = cfg.probes.clone().unwrap_or(vec![0.5, 1.0, 2.0]);
    let h = length / j as f64;
    let rows = covariance_limit(length, j, t, &probes, cfg.paths.unwrap_or(20_000), seed)?;
    let stationary = exact_euclidean_evolve(&LatticeGaussian::wiener(length, j), t)?;
    let idx = |x: f64| (x / h).round() as usize - 1;
    let mut table =
        Table::new("results.csv", &["x", "y", "estimate", "stderr", "exact", "target", "stationary_start"]);
    let mut checks = Vec::new();
    for r in &rows {
        let st = stationary.cov[(idx(r.x), idx(r.y))];
        table.push(vec![r.x.into(), r.y.into(), r.estimate.into(), r.stderr.into(), r.exact.into(), r.target.into(), st.into()]);
        let err = (r.estimate - r.target).abs();
        checks.push(Check::value(format!("|C({},{}) - min| <= h + 3 se", r.x, r.y), err, err <= h + 3.0 * r.stderr));
        checks.push(Check::z(format!("sampled vs exact C({},{})", r.x, r.y), z_score(r.estimate - r.exact, r.stderr), 3.0).informational());
    }
    let mut r = Report::new(table);
    r.checks = checks;
    r.notes.push(("spacing".into(), format!("{h:.16e}")));
    Ok(r)
}

fn tail(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Euclidean { n: 1 })?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let thresholds = cfg.thresholds.clone().unwrap_or(vec![2.0, 3.0]);
    let horizon = cfg.horizon.unwrap_or(1.0);
    let c1 = cfg.c1.unwrap_or(0.01);
    let n = spec.dimension();
    let c2 = c2_for_constant(n, (-spec.ricci_constant()).max(0.0), c1);
    let reports = tail_probability(spec, &spec.origin(), horizon, &thresholds, c1, c2, ens, label_id("tail-bound"))?;
    let mut table = Table::new("results.csv", &["threshold", "estimate", "stderr", "bound", "reflection"]);
    let mut checks = Vec::new();
    for t in &reports {
        // P(sup_{s<=T} |B_s| > N) = 4 Φ̄(N/√T) up to terms of order Φ̄(3N/√T)
        let reflection = match spec {
            ManifoldSpec::Euclidean { n: 1 } => Some(2.0 * erfc(t.threshold / (2.0 * horizon).sqrt())),
            _ => None,
        };
        table.push(vec![t.threshold.into(), t.estimate.value.into(), t.estimate.stderr.into(), t.bound.into(), reflection.into()]);
        checks.push(Check::value(format!("estimate <= bound + 3 se at N={}", t.threshold), t.estimate.value, t.within_bound));
        if let Some(p) = reflection {
            // score test: rare thresholds can see no hits at all
            let sd = (p * (1.0 - p) / t.estimate.n_samples as f64).sqrt();
            checks.push(Check::z(format!("reflection principle at N={}", t.threshold), z_score(t.estimate.value - p, sd), 3.0));
        }
    }
    let mut r = Report::new(table);
    r.checks = checks;
    r.notes.push(("c2".into(), format!("{c2:.16e}")));
    r.plot = Some(
        Plot::new("Sup-distance exceedance", "N", "probability")
            .log_y()
            .line("bound", reports.iter().map(|t| (t.threshold, t.bound.min(1.0))).collect())
            .scatter("estimate", reports.iter().map(|t| (t.threshold, t.estimate.value)).collect()),
    );
    Ok(r)
}

fn stationarity(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    sphere_only(cfg, "stationarity")?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let times = cfg.times.clone().unwrap_or(vec![0.0, 0.5, 1.0]);
    let rep = stationarity_test(&times, ens)?;
    let mut table = Table::new("results.csv", &["time", "statistic", "estimate", "stderr", "expected", "z", "pass"]);
    let mut checks = Vec::new();
    for row in &rep.rows {
        table.push(vec![
            row.time.into(),
            row.statistic.as_str().into(),
            row.estimate.into(),
            row.stderr.into(),
            row.expected.into(),
            row.z.into(),
            row.pass.into(),
        ]);
        checks.push(Check { pass: row.pass, ..Check::z(format!("{} at t={}", row.statistic, row.time), row.z, 3.0) });
    }
    checks.push(Check::value("paths stay on the sphere", rep.norm_defect, rep.norm_defect < 1e-9));
    let mut r = Report::new(table);
    r.checks = checks;
    Ok(r)
}

fn shift(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Sphere2)?;
    let nu = cfg.nu_spec(spec)?;
    let ens = ensemble(cfg, seed, 10_000, 1e-3);
    let times = cfg.times.clone().unwrap_or(vec![0.2, 1.0]);
    let s = cfg.shift.unwrap_or(0.7);
    let rep = shift_invariance_test(spec, nu, s, &times, &default_battery(spec, times.len()), ens)?;
    let mut table =
        Table::new("results.csv", &["statistic", "base", "shifted", "stderr", "z", "bias", "z_debiased", "pass"]);
    let mut checks = Vec::new();
    for row in &rep.rows {
        table.push(vec![
            row.statistic.as_str().into(),
            row.base.into(),
            row.shifted.into(),
            row.stderr.into(),
            row.z.into(),
            row.bias.into(),
            row.z_debiased.into(),
            row.pass.into(),
        ]);
        checks.push(Check::z(row.statistic.as_str(), row.z, 3.0));
        if let Some(zd) = row.z_debiased {
            checks.push(Check::z(format!("{} after the known bias", row.statistic), zd, 3.0).informational());
        }
    }
    let mut r = Report::new(table);
    r.checks = checks;
    r.notes.push(("manifold".into(), spec.to_string()));
    r.notes.push(("nu".into(), format!("{nu:?}")));
    Ok(r)
}

fn grad_expectation(cfg: &ExperimentConfig, seed: u64) -> Result<Report> {
    let spec = cfg.spec(ManifoldSpec::Sphere2)?;
    let ens = ensemble(cfg, seed, 5000, 1e-3);
    let id = cfg.function.as_deref().unwrap_or("trig-pair");
    let f = registry::cylinder(id, spec).with_context(|| format!("unknown cylinder function '{id}'"))?;
    let coords = match &cfg.point {
        Some(p) => p.clone(),
        None => match spec {
            ManifoldSpec::Sphere2 => vec![0.6, 0.0, 0.8],
            ManifoldSpec::Hyperbolic2 => vec![0.3, 1.2],
            ManifoldSpec::Euclidean { n } => [0.3, -0.2, 0.1][..n].to_vec(),
        },
    };
    let x = spec.point(&coords)?;
    let j = gradient_of_expectation(&f, spec, &x, ens)?.components;
    let fd = fd_gradient_of_expectation(&f, spec, &x, cfg.eps.unwrap_or(1e-3), ens)?;
    let mut table = Table::new("results.csv", &["component", "estimator", "estimator_stderr", "finite_difference", "fd_stderr", "z"]);
    let mut checks = Vec::new();
    for i in 0..j.value.len() {
        let z = z_score(j.value[i] - fd.value[i], j.stderr[i].hypot(fd.stderr[i]));
        table.push(vec![i.into(), j.value[i].into(), j.stderr[i].into(), fd.value[i].into(), fd.stderr[i].into(), z.into()]);
        checks.push(Check::z(format!("component {i}"), z, 3.0));
    }
    let mut r = Report::new(table);
    r.checks = checks;
    r.notes.push(("function".into(), id.into()));
    r.notes.push(("manifold".into(), spec.to_string()));
    Ok(r)
}
