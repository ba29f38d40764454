//! Log-Sobolev and Poincaré checks on path space, the flat Poincaré failure
//! and the hyperbolic non-ergodicity witness.

use crate::brownian::NuSpec;
use crate::error::{domain, Result};
use crate::geometry::{ManifoldPoint, ManifoldSpec};
use crate::pathcalc::registry::{self, ScalarField};
use crate::pathcalc::{energies, CylinderFunction, PathLegs, Sampler, Start};
use crate::rng::{label_id, RngStream};
use crate::stats::{linear_fit, mean_sd, par_map, z_score, EnsembleParams, MonteCarloEstimate};

const ENTROPY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityEntry {
    pub name: String,
    /// Entropy or variance of the function normalized to `μ(F²) = 1`.
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// Constant times the Dirichlet form, same normalization.
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// `lhs / rhs`, or 0 when both vanish.
    pub ratio: f64,
    /// Standard error of `lhs − rhs` from paired samples.
    pub combined_stderr: f64,
    pub clamped: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub kind: String,
    pub constant: f64,
    pub entries: Vec<InequalityEntry>,
    pub pass: bool,
}

/// `C(K) = 4/K²`.
pub fn lsi_constant(k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return domain(format!("curvature bound must be positive, got {k}"));
    }
    Ok(4.0 / (k * k))
}

/// `8/K² + 2C₁/K`.
pub fn whole_line_constant(k: f64, c1: f64) -> Result<f64> {
    if !(k > 0.0) || !(c1 >= 0.0) {
        return domain(format!("need K > 0 and C₁ ≥ 0, got K = {k}, C₁ = {c1}"));
    }
    Ok(8.0 / (k * k) + 2.0 * c1 / k)
}

/// `η(s) = sup_x E^x[exp(−∫₀^s K(γ(r)) dr)]`, exact for constant curvature.
pub fn eta(spec: ManifoldSpec, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("time must be non-negative, got {s}"));
    }
    Ok((-spec.ricci_constant() * s).exp())
}

/// `δ_ε(T) = ε⁻¹(1 − e^{−εT}) ∫₀^T e^{εs} η(s) ds`.
pub fn delta_eps_at(spec: ManifoldSpec, eps: f64, horizon: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("ε must lie in (0, 1), got {eps}"));
    }
    if !(horizon >= 0.0) {
        return domain(format!("horizon must be non-negative, got {horizon}"));
    }
    let rate = eps - spec.ricci_constant();
    let integral = if rate.abs() < 1e-12 { horizon } else { (rate * horizon).exp_m1() / rate };
    Ok(-(-eps * horizon).exp_m1() / eps * integral)
}

/// `δ_ε = sup_T δ_ε(T)`: `1/(ε(K − ε))` when `K > ε`, otherwise infinite.
pub fn delta_eps(spec: ManifoldSpec, eps: f64) -> Result<f64> {
    delta_eps_at(spec, eps, 0.0)?;
    let k = spec.ricci_constant();
    Ok(if k > eps { 1.0 / (eps * (k - eps)) } else { f64::INFINITY })
}

fn finish(kind: &str, constant: f64, entries: Vec<InequalityEntry>) -> InequalityReport {
    let pass = entries.iter().all(|e| e.pass);
    InequalityReport { kind: kind.to_string(), constant, entries, pass }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `Ent(F²) ≤ constant · E(F, F)` for each function, with `constant = 2C`.
/// Both sides are divided by the empirical `μ(F²)`; the verdict uses the
/// paired delta-method error of `Ent − constant·E`.
pub fn lsi_check(
    suite: &[CylinderFunction],
    sampler: &Sampler,
    constant: f64,
    ensemble: EnsembleParams,
) -> Result<InequalityReport> {
    let samples = energies(suite, sampler, ensemble)?;
    let n = ensemble.n_paths as f64;
    let entries = samples
        .into_iter()
        .map(|s| {
            let mut clamped = 0;
            let sq: Vec<f64> = s
                .values
                .iter()
                .map(|f| {
                    let a = f.abs();
                    if a < ENTROPY_FLOOR {
                        clamped += 1;
                    }
                    a.max(ENTROPY_FLOOR).powi(2)
                })
                .collect();
            let m = sq.iter().sum::<f64>() / n;
            let lm = m.ln();
            let infl: Vec<f64> = sq.iter().map(|q| q * q.ln() - (lm + 1.0) * q).collect();
            let ent = sq.iter().map(|q| q * q.ln()).sum::<f64>() / n - m * lm;
            let (_, sd_ent) = mean_sd(&infl);
            let (e, sd_e) = mean_sd(&s.energies);
            let diff: Vec<f64> = infl.iter().zip(&s.energies).map(|(a, b)| a - constant * b).collect();
            let (_, sd_diff) = mean_sd(&diff);
            let root = n.sqrt();
            let (lhs, rhs) = (ent / m, constant * e / m);
            let combined = sd_diff / root / m;
            InequalityEntry {
                name: s.name,
                lhs,
                lhs_stderr: sd_ent / root / m,
                rhs,
                rhs_stderr: constant * sd_e / root / m,
                ratio: ratio(lhs, rhs),
                combined_stderr: combined,
                clamped,
                pass: lhs <= rhs + 3.0 * combined,
            }
        })
        .collect();
    Ok(finish("log-sobolev", constant, entries))
}

/// `Var(F) ≤ constant · E(F, F)`, normalized and paired like [`lsi_check`].
pub fn poincare_check(
    suite: &[CylinderFunction],
    sampler: &Sampler,
    constant: f64,
    ensemble: EnsembleParams,
) -> Result<InequalityReport> {
    let samples = energies(suite, sampler, ensemble)?;
    let n = ensemble.n_paths as f64;
    let entries = samples
        .into_iter()
        .map(|s| {
            let m2 = s.values.iter().map(|f| f * f).sum::<f64>() / n;
            let (mean, _) = mean_sd(&s.values);
            let dev: Vec<f64> = s.values.iter().map(|f| (f - mean).powi(2)).collect();
            let var = dev.iter().sum::<f64>() / n;
            let (_, sd_var) = mean_sd(&dev);
            let (e, sd_e) = mean_sd(&s.energies);
            let diff: Vec<f64> = dev.iter().zip(&s.energies).map(|(a, b)| a - constant * b).collect();
            let (_, sd_diff) = mean_sd(&diff);
            let root = n.sqrt();
            let scale = if m2 > 0.0 { m2 } else { 1.0 };
            let (lhs, rhs) = (var / scale, constant * e / scale);
            let combined = sd_diff / root / scale;
            InequalityEntry {
                name: s.name,
                lhs,
                lhs_stderr: sd_var / root / scale,
                rhs,
                rhs_stderr: constant * sd_e / root / scale,
                ratio: ratio(lhs, rhs),
                combined_stderr: combined,
                clamped: 0,
                pass: lhs <= rhs + 3.0 * combined,
            }
        })
        .collect();
    Ok(finish("poincare", constant, entries))
}

/// Log-Sobolev check for the whole-line measure started from the normalized
/// volume `ν` of the sphere, with constant `8/K² + 2C₁/K`.
pub fn whole_line_inequality_check(
    suite: &[CylinderFunction],
    c1: f64,
    ensemble: EnsembleParams,
) -> Result<InequalityReport> {
    let spec = ManifoldSpec::Sphere2;
    let constant = whole_line_constant(spec.ricci_constant(), c1)?;
    let horizon = suite.iter().map(|f| f.max_window()).fold(0.0, f64::max);
    let horizon = (horizon / ensemble.dt).round() * ensemble.dt;
    let sampler = Sampler::two_sided(spec, Start::Nu(NuSpec::UniformOnCompact), horizon);
    let mut r = lsi_check(suite, &sampler, constant, ensemble)?;
    r.kind = "whole-line log-sobolev".to_string();
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub horizon: f64,
    pub variance: MonteCarloEstimate,
    pub energy: MonteCarloEstimate,
    pub ratio: f64,
    pub target_ratio: f64,
    /// `T³/6`.
    pub variance_floor: f64,
    pub variance_ok: bool,
    pub ratio_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub slope: f64,
    pub slope_ok: bool,
    pub pass: bool,
}

/// `Var(F_T) / E(F_T, F_T)` for `F_T = ∫₀^T γ₁` on the line, all horizons
/// on one ensemble. Ratios are checked against `2T²/3` within 5%.
pub fn poincare_failure(horizons: &[f64], ensemble: EnsembleParams) -> Result<GrowthReport> {
    if horizons.is_empty() {
        return domain("need at least one horizon");
    }
    let fs = horizons.iter().map(|&t| registry::time_integral(1, t)).collect::<Result<Vec<_>>>()?;
    let spec = ManifoldSpec::Euclidean { n: 1 };
    let top = horizons.iter().cloned().fold(0.0, f64::max);
    let sampler = Sampler::half_line(spec, spec.origin(), top);
    let samples = energies(&fs, &sampler, ensemble)?;
    let mut rows = Vec::new();
    for (s, &t) in samples.iter().zip(horizons) {
        let (mean, _) = mean_sd(&s.values);
        let dev: Vec<f64> = s.values.iter().map(|f| (f - mean).powi(2)).collect();
        let variance = MonteCarloEstimate::from_samples(&dev, ensemble.master_seed);
        let energy = MonteCarloEstimate::from_samples(&s.energies, ensemble.master_seed);
        let ratio = variance.value / energy.value;
        let target = 2.0 * t * t / 3.0;
        let floor = t.powi(3) / 6.0;
        rows.push(GrowthRow {
            horizon: t,
            variance,
            energy,
            ratio,
            target_ratio: target,
            variance_floor: floor,
            variance_ok: variance.value + 3.0 * variance.stderr >= floor,
            ratio_ok: (ratio / target - 1.0).abs() <= 0.05,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.horizon.ln(), r.ratio.ln())).unzip();
    let slope = if rows.len() >= 2 { linear_fit(&xs, &ys).0 } else { f64::NAN };
    let slope_ok = (slope - 2.0).abs() <= 0.1;
    let pass = slope_ok && rows.iter().all(|r| r.variance_ok && r.ratio_ok);
    Ok(GrowthReport { rows, slope, slope_ok, pass })
}

/// `u(x, y) = atan2(y, x)/π` on the upper half-plane.
pub fn harmonic_h2(p: &ManifoldPoint) -> Result<f64> {
    let c = p.coords();
    if !(c[1] > 0.0) || c[2] != 0.0 {
        return domain("point is not in the upper half-plane");
    }
    Ok(registry::harmonic_u(c))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessRow {
    pub horizon: f64,
    pub variance: MonteCarloEstimate,
    /// `½ E|DF_T|²` from the path gradient.
    pub energy: MonteCarloEstimate,
    /// `E|u(γ_T) − u(γ_0)|² / (2T²)`.
    pub energy_ito: MonteCarloEstimate,
    pub z_cross: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleRow {
    pub horizon: f64,
    pub drift: MonteCarloEstimate,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub rows: Vec<WitnessRow>,
    pub martingale: Vec<MartingaleRow>,
    pub slope: f64,
    pub variance_floor: f64,
    pub slope_band: (f64, f64),
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessConfig {
    pub horizons: Vec<f64>,
    pub martingale_times: Vec<f64>,
    pub variance_floor: f64,
    pub slope_band: (f64, f64),
}

impl Default for WitnessConfig {
    fn default() -> Self {
        // floor and band come from pilot runs, not from theory
        Self {
            horizons: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            martingale_times: vec![1.0, 4.0, 16.0],
            variance_floor: 0.005,
            slope_band: (-2.4, -1.6),
        }
    }
}

/// Time averages `F_T = T⁻¹∫₀^T u(γ)` of a scalar field along Brownian paths
/// from the reference point: variance, Dirichlet form, its Itô-isometry
/// twin and the martingale drift of `u(γ_t)`. All horizons share one
/// ensemble. Pass requires the energy slope in the band, the variance at the
/// longest horizon above the floor, and all martingale and cross-check
/// z-scores within ±3.
pub fn time_average_witness(
    spec: ManifoldSpec,
    u: &ScalarField,
    cfg: &WitnessConfig,
    ensemble: EnsembleParams,
) -> Result<WitnessReport> {
    let fs = cfg.horizons.iter().map(|&t| registry::time_average(spec, t, u)).collect::<Result<Vec<_>>>()?;
    let top = cfg.horizons.iter().chain(&cfg.martingale_times).cloned().fold(0.0, f64::max);
    let top = (top / ensemble.dt).round() * ensemble.dt;
    let sampler = Sampler::half_line(spec, spec.origin(), top);
    let stream = RngStream::new(ensemble.master_seed, label_id("time-average"), 0);
    let times: Vec<f64> = cfg.horizons.iter().chain(&cfg.martingale_times).cloned().collect();
    let rows = par_map(ensemble.n_paths, |i| -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
        let path = sampler.sample(ensemble.dt, &stream.with_trajectory(i as u64))?;
        let leg = path.forward();
        let u0 = (u.phi)(leg.coords(0));
        let vals = fs
            .iter()
            .map(|f| {
                let (v, g) = f.value_and_gradient(&path)?;
                Ok((v, 0.5 * g.norm_sq()))
            })
            .collect::<Result<Vec<_>>>()?;
        let incs = times
            .iter()
            .map(|&t| {
                let k = (t / ensemble.dt).round() as usize;
                (u.phi)(leg.coords(k)) - u0
            })
            .collect();
        Ok((vals, incs))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let seed = ensemble.master_seed;
    let nh = cfg.horizons.len();
    let mut out = Vec::new();
    for (j, &t) in cfg.horizons.iter().enumerate() {
        let vals: Vec<f64> = rows.iter().map(|r| r.0[j].0).collect();
        let (mean, _) = mean_sd(&vals);
        let dev: Vec<f64> = vals.iter().map(|v| (v - mean).powi(2)).collect();
        let en: Vec<f64> = rows.iter().map(|r| r.0[j].1).collect();
        let ito: Vec<f64> = rows.iter().map(|r| r.1[j].powi(2) / (2.0 * t * t)).collect();
        let diff: Vec<f64> = en.iter().zip(&ito).map(|(a, b)| a - b).collect();
        let d = MonteCarloEstimate::from_samples(&diff, seed);
        out.push(WitnessRow {
            horizon: t,
            variance: MonteCarloEstimate::from_samples(&dev, seed),
            energy: MonteCarloEstimate::from_samples(&en, seed),
            energy_ito: MonteCarloEstimate::from_samples(&ito, seed),
            z_cross: z_score(d.value, d.stderr),
        });
    }
    let martingale: Vec<MartingaleRow> = cfg
        .martingale_times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let inc: Vec<f64> = rows.iter().map(|r| r.1[nh + j]).collect();
            let drift = MonteCarloEstimate::from_samples(&inc, seed);
            MartingaleRow { horizon: t, z: drift.z_against(0.0), drift }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = out.iter().map(|r| (r.horizon.ln(), r.energy.value.ln())).unzip();
    let slope = if out.len() >= 2 { linear_fit(&xs, &ys).0 } else { f64::NAN };
    let last_var = out.last().map_or(f64::NAN, |r| r.variance.value);
    let pass = slope >= cfg.slope_band.0
        && slope <= cfg.slope_band.1
        && last_var >= cfg.variance_floor
        && martingale.iter().all(|m| m.z.abs() <= 3.0)
        && out.iter().all(|r| r.z_cross.abs() <= 3.0);
    Ok(WitnessReport { rows: out, martingale, slope, variance_floor: cfg.variance_floor, slope_band: cfg.slope_band, pass })
}

/// [`time_average_witness`] for the harmonic `u = arg(z)/π` on the
/// hyperbolic plane.
pub fn nonergodicity_witness(cfg: &WitnessConfig, ensemble: EnsembleParams) -> Result<WitnessReport> {
    time_average_witness(ManifoldSpec::Hyperbolic2, &registry::harmonic_field(), cfg, ensemble)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(lsi_constant(1.0).unwrap(), 4.0);
        assert_eq!(lsi_constant(2.0).unwrap(), 1.0);
        assert!(lsi_constant(0.0).is_err());
        assert_eq!(whole_line_constant(1.0, 2.0).unwrap(), 12.0);
        assert_eq!(delta_eps(ManifoldSpec::Sphere2, 0.5).unwrap(), 4.0);
        assert_eq!(delta_eps(ManifoldSpec::Euclidean { n: 2 }, 0.5).unwrap(), f64::INFINITY);
        assert!(delta_eps(ManifoldSpec::Sphere2, 1.0).is_err());
        assert!(delta_eps(ManifoldSpec::Sphere2, 0.0).is_err());
    }

    #[test]
    fn eta_examples() {
        assert!((eta(ManifoldSpec::Sphere2, 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(eta(ManifoldSpec::Euclidean { n: 3 }, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn delta_closed_form() {
        for t in [0.1, 1.0, 5.0, 40.0] {
            let q = 1.0 - (-t / 2.0f64).exp();
            let v = delta_eps_at(ManifoldSpec::Sphere2, 0.5, t).unwrap();
            assert!((v - 4.0 * q * q).abs() < 1e-12);
        }
        let flat = delta_eps_at(ManifoldSpec::Euclidean { n: 1 }, 0.5, 50.0).unwrap();
        assert!(flat > 50.0);
    }

    #[test]
    fn harmonic_examples() {
        let h = ManifoldSpec::Hyperbolic2;
        for y in [0.1, 1.0, 7.0] {
            assert!((harmonic_h2(&h.point(&[0.0, y]).unwrap()).unwrap() - 0.5).abs() < 1e-15);
            let a = harmonic_h2(&h.point(&[1.3, y]).unwrap()).unwrap();
            let b = harmonic_h2(&h.point(&[-1.3, y]).unwrap()).unwrap();
            assert!((a + b - 1.0).abs() < 1e-15);
        }
        let flat = ManifoldSpec::Euclidean { n: 2 }.point(&[1.0, -1.0]).unwrap();
        assert!(harmonic_h2(&flat).is_err());
    }
}
