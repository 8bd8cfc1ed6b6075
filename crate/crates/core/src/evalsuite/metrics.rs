//! Regression metrics.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// R² reported when the targets have zero variance but residuals do not.
pub const R2_SENTINEL: f64 = -1e30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    /// Pearson correlation; 0 when undefined.
    pub r: f64,
    pub r2: f64,
    pub r_undefined: bool,
    pub r2_sentinel: bool,
}

pub fn compute_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = y_true.len() as f64;
    let mut abs = 0.0;
    let mut sse = 0.0;
    for (t, p) in y_true.iter().zip(y_pred) {
        abs += (t - p).abs();
        sse += (t - p) * (t - p);
    }
    let mean_t = y_true.iter().sum::<f64>() / n;
    let mean_p = y_pred.iter().sum::<f64>() / n;
    let (mut sst, mut spp, mut stp) = (0.0, 0.0, 0.0);
    for (t, p) in y_true.iter().zip(y_pred) {
        sst += (t - mean_t) * (t - mean_t);
        spp += (p - mean_p) * (p - mean_p);
        stp += (t - mean_t) * (p - mean_p);
    }
    let (r, r_undefined) = if sst > 0.0 && spp > 0.0 {
        ((stp / (sst * spp).sqrt()).clamp(-1.0, 1.0), false)
    } else {
        (0.0, true)
    };
    let (r2, r2_sentinel) = if sst > 0.0 {
        (1.0 - sse / sst, false)
    } else if sse == 0.0 {
        (1.0, false)
    } else {
        (R2_SENTINEL, true)
    };
    let mse = sse / n;
    Ok(Metrics {
        n: y_true.len(),
        mae: abs / n,
        mse,
        rmse: mse.sqrt(),
        r,
        r2,
        r_undefined,
        r2_sentinel,
    })
}

pub fn mae(y_true: &[f64], y_pred: &[f64]) -> f64 {
    y_true.iter().zip(y_pred).map(|(t, p)| (t - p).abs()).sum::<f64>() / y_true.len() as f64
}

pub fn mse(y_true: &[f64], y_pred: &[f64]) -> f64 {
    y_true.iter().zip(y_pred).map(|(t, p)| (t - p) * (t - p)).sum::<f64>() / y_true.len() as f64
}

/// Mean and population standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let v = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let m = compute_metrics(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!((m.mae, m.mse, m.r, m.r2), (0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn mean_predictor() {
        let m = compute_metrics(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.r2, 0.0);
        assert!(m.r_undefined);
    }

    #[test]
    fn hand_example() {
        let m = compute_metrics(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]).unwrap();
        assert!((m.mae - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.mse - 4.0 / 3.0).abs() < 1e-12);
        assert!((m.r2 + 1.0).abs() < 1e-12);
        assert!((m.rmse - m.mse.sqrt()).abs() < 1e-15);
        assert!(m.mae <= m.rmse);
    }

    #[test]
    fn degenerate_targets() {
        let m = compute_metrics(&[2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert_eq!(m.r2, 1.0);
        assert!(m.r_undefined);
        let m = compute_metrics(&[2.0, 2.0], &[1.0, 3.0]).unwrap();
        assert!(m.r2_sentinel && m.r2 == R2_SENTINEL);
        assert!(compute_metrics(&[], &[]).is_err());
        assert!(compute_metrics(&[1.0], &[]).is_err());
    }
}
