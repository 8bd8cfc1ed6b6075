//! Ridge regression with an unpenalized intercept.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{validate_xy, LearnerError, Regressor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RidgeFitReport {
    /// Diagonal jitter that made the system factorizable, if any was needed.
    pub jitter: Option<f64>,
    /// Solved through the n×n kernel system instead of the p×p normal equations.
    pub dual: bool,
}

impl Regressor for RidgeModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .zip(x)
                .map(|(w, v)| w * v)
                .sum::<f64>()
    }
}

/// Solves `A z = b` for symmetric `A` (row-major, n×n) by Cholesky.
/// Returns `None` when a pivot falls below `1e-12 · max diag`.
fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max);
    let tol = 1e-12 * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > tol) || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] -= l[i * n + k] * z[k];
        }
        z[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            z[i] -= l[k * n + i] * z[k];
        }
        z[i] /= l[i * n + i];
    }
    Some(z)
}

/// Factorizes `a`, retrying with diagonal jitter `δ = 1e-10·trace/p`
/// (growing tenfold) when a pivot collapses.
fn solve_with_jitter(mut a: Vec<f64>, n: usize, b: &[f64], trace_per_dim: f64) -> (Vec<f64>, Option<f64>) {
    if let Some(z) = cholesky_solve(&a, n, b) {
        return (z, None);
    }
    let mut delta = if trace_per_dim > 0.0 { 1e-10 * trace_per_dim } else { 1e-10 };
    let mut added = 0.0;
    loop {
        for i in 0..n {
            a[i * n + i] += delta - added;
        }
        added = delta;
        if let Some(z) = cholesky_solve(&a, n, b) {
            return (z, Some(delta));
        }
        delta *= 10.0;
    }
}

/// Minimizes ‖y − Xw − b‖² + λ‖w‖² on centered data.
pub fn fit_ridge(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    lambda: f64,
) -> Result<(RidgeModel, RidgeFitReport), LearnerError> {
    validate_xy(x, y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(LearnerError::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
    }
    let (n, p) = x.dim();
    let x_mean = x.mean_axis(Axis(0)).expect("non-empty");
    let y_mean = y.sum() / n as f64;
    let xc = &x - &x_mean;
    let yc: Array1<f64> = y.mapv(|v| v - y_mean);
    let trace: f64 = xc.iter().map(|v| v * v).sum();
    let trace_per_dim = if p > 0 { trace / p as f64 } else { 0.0 };

    let mut report = RidgeFitReport::default();
    let weights: Vec<f64> = if p == 0 {
        Vec::new()
    } else if p <= n {
        let g = xc.t().dot(&xc);
        let mut a: Vec<f64> = g.iter().copied().collect();
        for i in 0..p {
            a[i * p + i] += lambda;
        }
        let b: Vec<f64> = xc.t().dot(&yc).to_vec();
        let (w, jitter) = solve_with_jitter(a, p, &b, trace_per_dim);
        report.jitter = jitter;
        w
    } else {
        report.dual = true;
        let k = xc.dot(&xc.t());
        let mut a: Vec<f64> = k.iter().copied().collect();
        for i in 0..n {
            a[i * n + i] += lambda;
        }
        let (alpha, jitter) = solve_with_jitter(a, n, yc.as_slice().expect("contiguous"), trace_per_dim);
        report.jitter = jitter;
        xc.t().dot(&Array1::from(alpha)).to_vec()
    };
    let intercept = y_mean - weights.iter().zip(x_mean.iter()).map(|(w, m)| w * m).sum::<f64>();
    if report.jitter.is_some() {
        log::debug!("ridge (lambda={lambda}) needed jitter {:?}", report.jitter);
    }
    Ok((
        RidgeModel {
            weights,
            intercept,
            lambda,
        },
        report,
    ))
}

/// Ridge with all weights constrained to be non-negative; the intercept is
/// free. Exact: every support set is solved and the best feasible one kept,
/// so `p` is limited to 16.
pub fn fit_ridge_nonneg(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    lambda: f64,
) -> Result<RidgeModel, LearnerError> {
    validate_xy(x, y)?;
    let p = x.ncols();
    if p > 16 {
        return Err(LearnerError::InvalidConfig(format!(
            "non-negative ridge supports at most 16 features, got {p}"
        )));
    }
    let mut best: Option<(f64, RidgeModel)> = None;
    for mask in 0u32..(1 << p) {
        let cols: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
        let (sub, _) = fit_ridge(x.select(Axis(1), &cols).view(), y, lambda)?;
        if sub.weights.iter().any(|&w| w < 0.0) {
            continue;
        }
        let mut weights = vec![0.0; p];
        for (&j, &w) in cols.iter().zip(&sub.weights) {
            weights[j] = w;
        }
        let model = RidgeModel {
            weights,
            intercept: sub.intercept,
            lambda,
        };
        let sse: f64 = x
            .rows()
            .into_iter()
            .zip(y)
            .map(|(r, &t)| {
                let e = t - model.intercept - r.dot(&ndarray::ArrayView1::from(&model.weights[..]));
                e * e
            })
            .sum();
        let objective = sse + lambda * model.weights.iter().map(|w| w * w).sum::<f64>();
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, model));
        }
    }
    Ok(best.expect("the empty support is always feasible").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn exact_line() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![2.0, 4.0, 6.0];
        let (m, r) = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-8);
        assert!(m.intercept.abs() < 1e-8);
        assert_eq!(r.jitter, None);
    }

    #[test]
    fn heavy_penalty_shrinks_to_mean() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![2.0, 4.0, 6.0];
        let (m, _) = fit_ridge(x.view(), y.view(), 1e12).unwrap();
        assert!(m.weights[0].abs() < 1e-9);
        assert!((m.intercept - 4.0).abs() < 1e-8);
    }

    #[test]
    fn hand_solve() {
        let x = array![[1.0], [2.0]];
        let y = array![1.0, 2.0];
        let (m, _) = fit_ridge(x.view(), y.view(), 1.0).unwrap();
        assert!((m.weights[0] - 0.5 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn collinear_gets_jitter() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let y = array![1.0, 2.0, 3.0];
        let (m, r) = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        assert!(r.jitter.is_some());
        assert!((m.predict_row(&[4.0, 8.0]) - 4.0).abs() < 1e-6);
    }

    #[test]
    fn dual_matches_primal_when_wide() {
        // p > n: dual path; compare against primal on the same data with lambda > 0.
        let x = array![[1.0, 0.5, -1.0, 2.0], [0.0, 1.5, 2.0, -1.0], [3.0, -0.5, 0.0, 1.0]];
        let y = array![1.0, -1.0, 2.0];
        let (m, r) = fit_ridge(x.view(), y.view(), 0.3).unwrap();
        assert!(r.dual);
        // Primal solve by hand through the same Cholesky routine.
        let xm = x.mean_axis(Axis(0)).unwrap();
        let xc = &x - &xm;
        let yc = y.mapv(|v| v - y.mean().unwrap());
        let mut a: Vec<f64> = xc.t().dot(&xc).iter().copied().collect();
        for i in 0..4 {
            a[i * 4 + i] += 0.3;
        }
        let w = cholesky_solve(&a, 4, &xc.t().dot(&yc).to_vec()).unwrap();
        for (p, q) in w.iter().zip(&m.weights) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_features() {
        let x = ndarray::Array2::<f64>::zeros((3, 0));
        let y = array![1.0, 2.0, 6.0];
        let (m, _) = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        assert_eq!(m.predict_row(&[]), 3.0);
    }

    #[test]
    fn nonneg_matches_unconstrained_when_feasible() {
        let x = array![[1.0, 0.5], [2.0, 0.1], [3.0, 0.9], [4.0, 0.3]];
        let y = array![1.0, 2.1, 3.2, 3.9];
        let (free, _) = fit_ridge(x.view(), y.view(), 0.1).unwrap();
        assert!(free.weights.iter().all(|&w| w >= 0.0));
        let nn = fit_ridge_nonneg(x.view(), y.view(), 0.1).unwrap();
        for (a, b) in free.weights.iter().zip(&nn.weights) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn nonneg_clamps_negative_direction() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![3.0, 2.0, 1.0];
        let nn = fit_ridge_nonneg(x.view(), y.view(), 0.0).unwrap();
        assert_eq!(nn.weights, vec![0.0]);
        assert_eq!(nn.intercept, 2.0);
    }
}
