use super::{cutoff, CutoffParams, CylinderFunction, DirectionField, GradientField, PathLegs, Sampler};
use crate::brownian::{damping_matrices, sample_bm_framed, sample_two_sided_framed, FramedPath};
use crate::error::{domain, Error, Result};
use crate::geometry::{ManifoldPoint, ManifoldSpec, OrthonormalFrame, TangentVector};
use crate::rng::{label_id, RngStream};
use crate::stats::{par_map, z_score, EnsembleParams, MonteCarloEstimate, VectorEstimate};

#[derive(Clone, Debug, PartialEq)]
pub struct IbpResult {
    pub function: String,
    pub direction: String,
    /// `E⟨DF, l h⟩`.
    pub lhs: MonteCarloEstimate,
    /// `E[F Θ]`.
    pub rhs: MonteCarloEstimate,
    pub z: f64,
}

/// Per-path values `F(γ_i)` and energies `½|DF(γ_i)|²_H` of one function.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteSample {
    pub name: String,
    pub values: Vec<f64>,
    pub energies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientEstimate {
    pub tangent: TangentVector,
    /// Components in the standard frame at the base point.
    pub components: VectorEstimate,
}

fn collect<T>(rows: Vec<Result<T>>) -> Result<Vec<T>> {
    rows.into_iter().collect()
}

/// Grid samples of `l h` on one leg and the Itô sum
/// `Σ_k ⟨(l h)′(t_k) + ½ Ric (l h)(t_k), Δβ_k⟩`.
fn weighted_leg(
    h: &DirectionField,
    leg: &FramedPath,
    sign: f64,
    cut: Option<CutoffParams>,
) -> Result<(Vec<[f64; 3]>, f64)> {
    let n = leg.n_steps();
    let l = match cut {
        Some(c) => Some(cutoff(leg, c.m, c.horizon)?.values),
        None => None,
    };
    let lh: Vec<[f64; 3]> = (0..=n)
        .map(|k| {
            let v = h.at(sign * leg.time(k));
            let c = l.as_ref().map_or(1.0, |l| l[k]);
            [v[0] * c, v[1] * c, v[2] * c]
        })
        .collect();
    if lh[n].iter().any(|v| v.abs() > 1e-12) {
        return domain(format!(
            "path horizon {} is too short: the cut-off direction does not vanish at its end",
            leg.horizon()
        ));
    }
    let dt = leg.dt();
    let half_k = 0.5 * leg.spec().ricci_constant();
    let mut theta = 0.0;
    for k in 0..n {
        let db = leg.increment(k);
        for (i, d) in db.iter().enumerate() {
            theta += ((lh[k + 1][i] - lh[k][i]) / dt + half_k * lh[k][i]) * d;
        }
    }
    Ok((lh, theta))
}

/// IBP residuals for every pair of `fs × hs` on one shared ensemble.
/// With `cut = None` the cut-off is identically 1.
pub fn ibp_suite(
    fs: &[CylinderFunction],
    hs: &[DirectionField],
    cut: Option<CutoffParams>,
    sampler: &Sampler,
    ensemble: EnsembleParams,
) -> Result<Vec<IbpResult>> {
    let stream = RngStream::new(ensemble.master_seed, label_id("ibp"), 0);
    let rows = collect(par_map(ensemble.n_paths, |i| -> Result<Vec<f64>> {
        let path = sampler.sample(ensemble.dt, &stream.with_trajectory(i as u64))?;
        let mut dirs = Vec::with_capacity(hs.len());
        for h in hs {
            let (fwd, theta_f) = weighted_leg(h, path.forward(), 1.0, cut)?;
            let (bwd, theta_b) = match path.backward() {
                Some(b) => weighted_leg(h, b, -1.0, cut)?,
                None => (Vec::new(), 0.0),
            };
            let field = GradientField { dt: ensemble.dt, dim: sampler.spec.dimension(), forward: fwd, backward: bwd };
            dirs.push((field, theta_f + theta_b));
        }
        let mut row = Vec::with_capacity(2 * fs.len() * hs.len());
        for f in fs {
            let (value, grad) = f.value_and_gradient(&path)?;
            for (field, theta) in &dirs {
                row.push(grad.inner(field));
                row.push(value * theta);
            }
        }
        Ok(row)
    }))?;
    let mut out = Vec::new();
    let mut col = 0;
    for f in fs {
        for h in hs {
            let lhs: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            let rhs: Vec<f64> = rows.iter().map(|r| r[col + 1]).collect();
            col += 2;
            let lhs = MonteCarloEstimate::from_samples(&lhs, ensemble.master_seed);
            let rhs = MonteCarloEstimate::from_samples(&rhs, ensemble.master_seed);
            let se = (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt();
            out.push(IbpResult {
                function: f.name().to_string(),
                direction: h.name().to_string(),
                z: z_score(lhs.value - rhs.value, se),
                lhs,
                rhs,
            });
        }
    }
    Ok(out)
}

pub fn ibp_residual(
    f: &CylinderFunction,
    h: &DirectionField,
    cut: Option<CutoffParams>,
    sampler: &Sampler,
    ensemble: EnsembleParams,
) -> Result<IbpResult> {
    Ok(ibp_suite(std::slice::from_ref(f), std::slice::from_ref(h), cut, sampler, ensemble)?.remove(0))
}

/// Values and energies of each function on one shared ensemble.
pub fn energies(fs: &[CylinderFunction], sampler: &Sampler, ensemble: EnsembleParams) -> Result<Vec<SuiteSample>> {
    let stream = RngStream::new(ensemble.master_seed, label_id("energies"), 0);
    let rows = collect(par_map(ensemble.n_paths, |i| -> Result<Vec<(f64, f64)>> {
        let path = sampler.sample(ensemble.dt, &stream.with_trajectory(i as u64))?;
        fs.iter()
            .map(|f| {
                let (v, g) = f.value_and_gradient(&path)?;
                Ok((v, 0.5 * g.norm_sq()))
            })
            .collect()
    }))?;
    Ok(fs
        .iter()
        .enumerate()
        .map(|(j, f)| SuiteSample {
            name: f.name().to_string(),
            values: rows.iter().map(|r| r[j].0).collect(),
            energies: rows.iter().map(|r| r[j].1).collect(),
        })
        .collect())
}

/// `E(F, G) = ½ E⟨DF, DG⟩_H`.
pub fn dirichlet_form(
    f: &CylinderFunction,
    g: &CylinderFunction,
    sampler: &Sampler,
    ensemble: EnsembleParams,
) -> Result<MonteCarloEstimate> {
    let stream = RngStream::new(ensemble.master_seed, label_id("dirichlet-form"), 0);
    let samples = collect(par_map(ensemble.n_paths, |i| -> Result<f64> {
        let path = sampler.sample(ensemble.dt, &stream.with_trajectory(i as u64))?;
        Ok(0.5 * f.gradient(&path)?.inner(&g.gradient(&path)?))
    }))?;
    Ok(MonteCarloEstimate::from_samples(&samples, ensemble.master_seed))
}

fn grid_horizon(f: &CylinderFunction, dt: f64) -> f64 {
    (f.max_window() / dt).round() * dt
}

/// `∫ M_s DF(γ)(s) ds` over both legs.
fn j_estimator<P: PathLegs>(f: &CylinderFunction, path: &P) -> Result<Vec<f64>> {
    let grad = f.gradient(path)?;
    let n = grad.dim;
    let mut j = vec![0.0; n];
    let mut leg_sum = |leg: &FramedPath, df: &[[f64; 3]]| {
        let ms = damping_matrices(leg);
        for (m, d) in ms.iter().zip(df) {
            for a in 0..n {
                for b in 0..n {
                    j[a] += grad.dt * m[(a, b)] * d[b];
                }
            }
        }
    };
    leg_sum(path.forward(), &grad.forward);
    if let Some(b) = path.backward() {
        leg_sum(b, &grad.backward);
    }
    Ok(j)
}

fn needs_two_sided(f: &CylinderFunction) -> bool {
    !f.backward_windows().is_empty()
}

/// `∇_x E^x[F] = E[U_0 J(γ)]` with the damped gradient estimator `J`. Uses
/// the whole-line measure when `F` has backward windows.
pub fn gradient_of_expectation(
    f: &CylinderFunction,
    spec: ManifoldSpec,
    x: &ManifoldPoint,
    ensemble: EnsembleParams,
) -> Result<GradientEstimate> {
    if spec != f.spec() {
        return Err(Error::Domain(format!("{} is defined on {}, not {spec}", f.name(), f.spec())));
    }
    let frame = spec.standard_frame(x);
    let horizon = grid_horizon(f, ensemble.dt);
    let two = needs_two_sided(f);
    let stream = RngStream::new(ensemble.master_seed, label_id("grad-expectation"), 0);
    let rows = collect(par_map(ensemble.n_paths, |i| -> Result<Vec<f64>> {
        let s = stream.with_trajectory(i as u64);
        if two {
            j_estimator(f, &sample_two_sided_framed(spec, &frame, horizon, ensemble.dt, &s)?)
        } else {
            j_estimator(f, &sample_bm_framed(spec, &frame, horizon, ensemble.dt, &s)?)
        }
    }))?;
    let components = VectorEstimate::from_rows(&rows, ensemble.master_seed);
    let tangent = TangentVector::from_raw(*x, frame.apply(&components.value));
    Ok(GradientEstimate { tangent, components })
}

/// Central finite differences of `x ↦ E^x[F]` along each frame vector, with
/// the restarted ensembles driven by the same increments.
pub fn fd_gradient_of_expectation(
    f: &CylinderFunction,
    spec: ManifoldSpec,
    x: &ManifoldPoint,
    eps: f64,
    ensemble: EnsembleParams,
) -> Result<VectorEstimate> {
    if !(eps > 0.0) {
        return domain(format!("finite-difference step must be positive, got {eps}"));
    }
    let frame = spec.standard_frame(x);
    let horizon = grid_horizon(f, ensemble.dt);
    let two = needs_two_sided(f);
    let n = spec.dimension();
    let mut shifted: Vec<(OrthonormalFrame, OrthonormalFrame)> = Vec::with_capacity(n);
    for e in frame.columns() {
        let mut pair = Vec::with_capacity(2);
        for s in [eps, -eps] {
            let q = spec.exp_raw(x.coords(), &(e * s));
            let mut cols = frame.raw_columns();
            for c in cols.iter_mut().take(n) {
                *c = spec.transport_raw(x.coords(), &q, c)?;
            }
            spec.orthonormalize_raw(&q, &mut cols[..n]);
            pair.push(OrthonormalFrame::from_raw(ManifoldPoint::from_raw(q), n, cols));
        }
        shifted.push((pair[0].clone(), pair[1].clone()));
    }
    let stream = RngStream::new(ensemble.master_seed, label_id("grad-expectation"), 0);
    let eval = |fr: &OrthonormalFrame, s: &RngStream| -> Result<f64> {
        if two {
            f.eval(&sample_two_sided_framed(spec, fr, horizon, ensemble.dt, s)?)
        } else {
            f.eval(&sample_bm_framed(spec, fr, horizon, ensemble.dt, s)?)
        }
    };
    let rows = collect(par_map(ensemble.n_paths, |i| -> Result<Vec<f64>> {
        let s = stream.with_trajectory(i as u64);
        shifted.iter().map(|(p, m)| Ok((eval(p, &s)? - eval(m, &s)?) / (2.0 * eps))).collect()
    }))?;
    Ok(VectorEstimate::from_rows(&rows, ensemble.master_seed))
}
