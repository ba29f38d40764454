//! Monte Carlo summaries and small statistical helpers.

use rayon::prelude::*;

/// Mean of i.i.d. samples with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub master_seed: u64,
}

/// Per-component version of [`MonteCarloEstimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorEstimate {
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
    pub master_seed: u64,
}

/// Ensemble size, time step and seed shared by the Monte Carlo routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleParams {
    pub n_paths: usize,
    pub dt: f64,
    pub master_seed: u64,
}

impl EnsembleParams {
    pub fn new(n_paths: usize, dt: f64, master_seed: u64) -> Self {
        Self { n_paths, dt, master_seed }
    }
}

/// Sample mean and sample standard deviation (n − 1 denominator).
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

impl MonteCarloEstimate {
    pub fn from_samples(x: &[f64], master_seed: u64) -> Self {
        let (value, sd) = mean_sd(x);
        Self { value, stderr: sd / (x.len() as f64).sqrt(), n_samples: x.len(), master_seed }
    }

    pub fn exact(value: f64, n_samples: usize, master_seed: u64) -> Self {
        Self { value, stderr: 0.0, n_samples, master_seed }
    }

    /// `(value − target)/stderr`, with 0/0 read as 0.
    pub fn z_against(&self, target: f64) -> f64 {
        z_score(self.value - target, self.stderr)
    }
}

impl VectorEstimate {
    /// Component-wise summary of `rows`, each a sample of equal length.
    pub fn from_rows(rows: &[Vec<f64>], master_seed: u64) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let mut value = Vec::with_capacity(dim);
        let mut stderr = Vec::with_capacity(dim);
        let mut col = vec![0.0; rows.len()];
        for i in 0..dim {
            for (c, r) in col.iter_mut().zip(rows) {
                *c = r[i];
            }
            let e = MonteCarloEstimate::from_samples(&col, master_seed);
            value.push(e.value);
            stderr.push(e.stderr);
        }
        Self { value, stderr, n_samples: rows.len(), master_seed }
    }
}

pub fn z_score(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        diff.signum() * f64::INFINITY
    } else {
        diff / se
    }
}

/// Two independent estimates: `(a − b)/sqrt(se_a² + se_b²)`.
pub fn z_between(a: &MonteCarloEstimate, b: &MonteCarloEstimate) -> f64 {
    z_score(a.value - b.value, a.stderr.hypot(b.stderr))
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Evaluates `f(0..n)` in parallel and returns results in index order, so
/// any later reduction is independent of scheduling.
pub fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_from_samples() {
        let e = MonteCarloEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 9);
        assert_eq!(e.value, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.stderr - sd / 2.0).abs() < 1e-15);
        assert_eq!(e.n_samples, 4);
        assert_eq!(e.master_seed, 9);
        assert_eq!(MonteCarloEstimate::from_samples(&[3.0; 10], 0).stderr, 0.0);
    }

    #[test]
    fn z_scores() {
        let e = MonteCarloEstimate { value: 1.0, stderr: 0.5, n_samples: 4, master_seed: 0 };
        assert_eq!(e.z_against(0.0), 2.0);
        assert_eq!(MonteCarloEstimate::exact(1.0, 1, 0).z_against(1.0), 0.0);
        assert!(MonteCarloEstimate::exact(1.0, 1, 0).z_against(0.0).is_infinite());
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let (s, c) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (c + 1.0).abs() < 1e-14);
    }

    #[test]
    fn par_map_keeps_order() {
        let v = par_map(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn vector_estimate_columns() {
        let rows = vec![vec![1.0, 10.0], vec![3.0, 10.0]];
        let e = VectorEstimate::from_rows(&rows, 1);
        assert_eq!(e.value, vec![2.0, 10.0]);
        assert_eq!(e.stderr[1], 0.0);
        assert!((e.stderr[0] - 1.0).abs() < 1e-15);
    }
}
