//! Per-feature z-scoring with population standard deviation.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::DatasetError;

/// Column means and scales fitted on training rows.
///
/// NaN cells are treated as missing: they are ignored when fitting and map to
/// 0 (the column mean) when transforming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: ArrayView2<'_, f64>) -> Scaler {
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let vals: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
            if vals.is_empty() {
                mean.push(0.0);
                scale.push(1.0);
                continue;
            }
            if vals.iter().all(|&v| v == vals[0]) {
                mean.push(vals[0]);
                scale.push(1.0);
                continue;
            }
            let n = vals.len() as f64;
            let m = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(m);
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Scaler { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, got: usize) -> Result<(), DatasetError> {
        if got != self.dim() {
            return Err(DatasetError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, DatasetError> {
        self.check(x.ncols())?;
        let mut out = x.to_owned();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.scale_value(j, *v);
            }
        }
        Ok(out)
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, DatasetError> {
        self.check(row.len())?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.scale_value(j, v))
            .collect())
    }

    fn scale_value(&self, j: usize, v: f64) -> f64 {
        if v.is_nan() {
            0.0
        } else {
            (v - self.mean[j]) / self.scale[j]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn hand_z_score() {
        let x = array![[1.0], [2.0], [3.0]];
        let s = Scaler::fit(x.view());
        assert_eq!(s.mean[0], 2.0);
        assert!((s.scale[0] - 0.816496580927726).abs() < 1e-12);
        let z = s.transform(x.view()).unwrap();
        for (got, want) in z.iter().zip([-1.224744871391589, 0.0, 1.224744871391589]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_and_mean_row() {
        let x = array![[5.0, 1.0], [5.0, 2.0], [5.0, 6.0]];
        let s = Scaler::fit(x.view());
        let z = s.transform(x.view()).unwrap();
        assert!(z.column(0).iter().all(|&v| v == 0.0));
        assert_eq!(s.transform_row(&s.mean.clone()).unwrap(), vec![0.0, 0.0]);
        let m = z.column(1).mean().unwrap();
        let sd = z.column(1).std(0.0);
        assert!(m.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_and_missing() {
        let x = array![[1.0, f64::NAN], [3.0, 4.0], [5.0, 8.0]];
        let s = Scaler::fit(x.view());
        assert_eq!(s.mean[1], 6.0);
        assert_eq!(s.transform_row(&[1.0, f64::NAN]).unwrap()[1], 0.0);
        assert!(matches!(
            s.transform_row(&[1.0]),
            Err(DatasetError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
