//! Base regressors: ridge, CART random forest and gradient-boosted trees.

mod forest;
mod gbt;
mod ridge;
mod search;
mod tree;

pub use forest::{fit_forest, ForestConfig, ForestModel};
pub use gbt::{fit_gbt, GbtConfig, GbtFit, GbtModel};
pub use ridge::{fit_ridge, fit_ridge_nonneg, RidgeConfig, RidgeFitReport, RidgeModel};
pub use search::{grid_search, Candidate, ModelSize, SearchReport};
pub use tree::{fit_tree, Node, RegressionTree, TreeConfig};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::Fnv1a;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("no training rows")]
    Empty,
    #[error("{rows} rows in X but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty hyperparameter grid")]
    EmptyGrid,
}

/// The three base learner families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Lr,
    Rf,
    Gbt,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::Lr, LearnerKind::Rf, LearnerKind::Gbt];

    pub fn label(self) -> &'static str {
        match self {
            LearnerKind::Lr => "LR",
            LearnerKind::Rf => "RF",
            LearnerKind::Gbt => "XGB",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "ridge" => Ok(LearnerKind::Lr),
            "rf" | "forest" => Ok(LearnerKind::Rf),
            "gbt" | "xgb" => Ok(LearnerKind::Gbt),
            _ => Err(format!("unknown learner '{s}'")),
        }
    }
}

pub trait Regressor {
    fn predict_row(&self, x: &[f64]) -> f64;

    fn predict(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        x.rows()
            .into_iter()
            .map(|r| match r.as_slice() {
                Some(s) => self.predict_row(s),
                None => self.predict_row(&r.to_vec()),
            })
            .collect()
    }
}

pub(crate) fn validate_xy(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<(), LearnerError> {
    if x.nrows() != y.len() {
        return Err(LearnerError::LengthMismatch {
            rows: x.nrows(),
            targets: y.len(),
        });
    }
    if x.nrows() == 0 {
        return Err(LearnerError::Empty);
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(LearnerError::NonFinite);
    }
    Ok(())
}

/// Row permutation that depends only on row contents, so tree ensembles are
/// invariant to the order training rows arrive in.
pub(crate) fn canonical_order(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Vec<usize> {
    let keys: Vec<u64> = (0..x.nrows())
        .map(|i| {
            let mut h = Fnv1a::new();
            for v in x.row(i) {
                h.write_u64(v.to_bits());
            }
            h.write_u64(y[i].to_bits());
            h.finish()
        })
        .collect();
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    order.sort_by(|&a, &b| {
        keys[a].cmp(&keys[b]).then_with(|| {
            x.row(a)
                .iter()
                .zip(x.row(b))
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then(y[a].total_cmp(&y[b]))
        })
    });
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Axis};

    #[test]
    fn canonical_order_ignores_input_order() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [0.5, 9.0]];
        let y = array![1.0, 2.0, 3.0];
        let o = canonical_order(x.view(), y.view());
        let perm = [2, 0, 1];
        let xp = x.select(Axis(0), &perm);
        let yp = y.select(Axis(0), &perm);
        let op = canonical_order(xp.view(), yp.view());
        let a: Vec<f64> = o.iter().map(|&i| y[i]).collect();
        let b: Vec<f64> = op.iter().map(|&i| yp[i]).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn kind_parse() {
        assert_eq!("xgb".parse::<LearnerKind>().unwrap(), LearnerKind::Gbt);
        assert!("svm".parse::<LearnerKind>().is_err());
    }
}
