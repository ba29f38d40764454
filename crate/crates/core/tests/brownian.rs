use nalgebra::DMatrix;
use pathspace::brownian::{damping_matrices, sample_bm, sample_initial, sample_two_sided, tail_probability};
use pathspace::stats::mean_sd;
use pathspace::{ManifoldSpec, NuSpec, RngStream};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn se(x: &[f64]) -> (f64, f64) {
    let (m, sd) = mean_sd(x);
    (m, sd / (x.len() as f64).sqrt())
}

#[test]
fn euclidean_covariance_is_min() {
    let spec = ManifoldSpec::Euclidean { n: 2 };
    let grid = [0.25, 0.5, 0.75, 1.0];
    let dt = 1e-3;
    let paths: Vec<_> = (0..10_000)
        .map(|i| sample_bm(spec, &spec.origin(), 1.0, dt, &RngStream::new(21, 0, i)).unwrap())
        .collect();
    // 40 checks on one ensemble: Bonferroni at 1% family-wise
    let z_max = Normal::standard().inverse_cdf(1.0 - 0.01 / 80.0);
    for (a, &s) in grid.iter().enumerate() {
        for &t in &grid[a..] {
            for i in 0..2 {
                for j in 0..2 {
                    let prods: Vec<f64> = paths
                        .iter()
                        .map(|p| p.coords((s / dt).round() as usize)[i] * p.coords((t / dt).round() as usize)[j])
                        .collect();
                    let (m, e) = se(&prods);
                    let target = if i == j { s.min(t) } else { 0.0 };
                    assert!((m - target).abs() <= z_max * e, "({s},{t},{i},{j}): {m} ± {e}");
                }
            }
        }
    }
}

#[test]
fn two_sided_legs_are_independent() {
    let spec = ManifoldSpec::Euclidean { n: 1 };
    let prods: Vec<f64> = (0..10_000)
        .map(|i| {
            let p = sample_two_sided(spec, &spec.origin(), 1.0, 1e-2, &RngStream::new(22, 0, i)).unwrap();
            p.point_at(-1.0).unwrap().coords()[0] * p.point_at(0.5).unwrap().coords()[0]
        })
        .collect();
    let (m, e) = se(&prods);
    assert!(m.abs() <= 3.0 * e);
}

/// `E[cos R]` for a 2-d Gaussian step of variance `dt` per axis, by quadrature
/// of the Rayleigh density.
fn rayleigh_cos(dt: f64) -> f64 {
    let s = dt.sqrt();
    let n = 200_000;
    let top = 12.0 * s;
    let h = top / n as f64;
    (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            r / dt * (-r * r / (2.0 * dt)).exp() * r.cos() * h
        })
        .sum()
}

#[test]
fn sphere_cosine_decays_like_the_walk() {
    // cos ρ(x₀, ·) is a first spherical harmonic, so each isotropic geodesic
    // step multiplies its mean by E[cos R] exactly
    let spec = ManifoldSpec::Sphere2;
    let o = spec.origin();
    for dt in [1e-3, 2e-3] {
        let q = rayleigh_cos(dt);
        let paths: Vec<_> = (0..10_000)
            .map(|i| sample_bm(spec, &o, 1.0, dt, &RngStream::new(23, 0, i)).unwrap())
            .collect();
        for t in [0.25, 0.5, 1.0] {
            let k = (t / dt).round() as usize;
            let vals: Vec<f64> = paths.iter().map(|p| p.coords(k).dot(o.coords())).collect();
            let (m, e) = se(&vals);
            let walk = q.powi(k as i32);
            assert!((m - walk).abs() <= 3.0 * e, "dt={dt} t={t}: {m} vs {walk} ± {e}");
            assert!((m - (-t).exp()).abs() <= 3.0 * e + 0.01);
        }
    }
    // the scheme bias is first order in dt
    let bias = |dt: f64| (rayleigh_cos(dt).powi((1.0 / dt).round() as i32) - (-1.0f64).exp()).abs();
    let ratio = bias(2e-3) / bias(1e-3);
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
}

#[test]
fn hyperbolic_cosh_grows_like_e_to_t() {
    // ½Δ cosh ρ = cosh ρ on the hyperbolic plane
    let spec = ManifoldSpec::Hyperbolic2;
    let o = spec.origin();
    let paths: Vec<_> = (0..10_000)
        .map(|i| sample_bm(spec, &o, 1.0, 1e-3, &RngStream::new(24, 0, i)).unwrap())
        .collect();
    for t in [0.5f64, 1.0] {
        let k = (t / 1e-3) as usize;
        let vals: Vec<f64> = paths.iter().map(|p| spec.distance(&o, &p.point(k)).cosh()).collect();
        let (m, e) = se(&vals);
        let target = t.exp();
        assert!((m - target).abs() <= 3.0 * e + 0.01 * target, "t={t}: {m} ± {e} vs {target}");
    }
}

#[test]
fn damping_norm_bound_on_random_pairs() {
    let spec = ManifoldSpec::Sphere2;
    let p = sample_bm(spec, &spec.origin(), 2.0, 1e-3, &RngStream::new(25, 0, 0)).unwrap();
    let ms = damping_matrices(&p);
    let mut rng = RngStream::new(25, 1, 0).rng();
    for _ in 0..1000 {
        let a = rng.random_range(0..=p.n_steps());
        let b = rng.random_range(a..=p.n_steps());
        let (s, r) = (p.time(a), p.time(b));
        assert!((&ms[a] - DMatrix::identity(2, 2) * (-s / 2.0).exp()).norm() <= 1e-8);
        let prod = ms[a].clone().try_inverse().unwrap() * &ms[b];
        let op = prod.singular_values().max();
        assert!(op <= (-(r - s) / 2.0).exp() * (1.0 + 1e-9), "{s} {r}: {op}");
    }
    let h = ManifoldSpec::Hyperbolic2;
    let p = sample_bm(h, &h.origin(), 1.0, 1e-3, &RngStream::new(25, 2, 0)).unwrap();
    let last = damping_matrices(&p).pop().unwrap();
    assert!((last - DMatrix::identity(2, 2) * 0.5f64.exp()).amax() < 1e-10);
}

#[test]
fn tail_matches_reflection_and_stays_below_bound() {
    let ens = pathspace::EnsembleParams::new(20_000, 1e-3, 26);
    let flat = ManifoldSpec::Euclidean { n: 1 };
    let r = tail_probability(flat, &flat.origin(), 1.0, &[2.0, 3.0], 0.01, 0.0, ens, 0).unwrap();
    // P(sup |B| > 3) = 4 Φ̄(3) up to terms of order Φ̄(9)
    let oracle = 4.0 * (1.0 - Normal::standard().cdf(3.0));
    let e = r[1].estimate;
    assert!((e.value - oracle).abs() <= 3.0 * e.stderr, "{e:?} vs {oracle}");
    for spec in [flat, ManifoldSpec::Euclidean { n: 2 }, ManifoldSpec::Sphere2] {
        let r = tail_probability(spec, &spec.origin(), 1.0, &[2.0, 3.0], 0.01, 0.0, ens, 1).unwrap();
        assert!(r.iter().all(|t| t.within_bound), "{spec}: {r:?}");
    }
}

#[test]
fn initial_samplers_follow_their_laws() {
    let s = ManifoldSpec::Sphere2;
    let zs: Vec<f64> = (0..20_000)
        .map(|i| sample_initial(s, &NuSpec::UniformOnCompact, &RngStream::new(27, 0, i)).unwrap().0.coords()[2])
        .collect();
    // uniform on the sphere: the height is uniform on [−1, 1]
    let (m, e) = se(&zs);
    assert!(m.abs() <= 3.0 * e);
    let sq: Vec<f64> = zs.iter().map(|z| z * z).collect();
    let (m, e) = se(&sq);
    assert!((m - 1.0 / 3.0).abs() <= 3.0 * e);
    // hyperbolic disk: P(ρ ≤ a) = (cosh a − 1)/(cosh r − 1)
    let h = ManifoldSpec::Hyperbolic2;
    let r = 1.5;
    let a = 1.0;
    let inside: Vec<f64> = (0..20_000)
        .map(|i| {
            let (p, _) = sample_initial(h, &NuSpec::TruncatedLebesgue { radius: r }, &RngStream::new(28, 0, i)).unwrap();
            if h.distance(&h.origin(), &p) <= a {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let (m, e) = se(&inside);
    let target = (a.cosh() - 1.0) / (r.cosh() - 1.0);
    assert!((m - target).abs() <= 3.0 * e, "{m} ± {e} vs {target}");
}
