//! Per-category ensembles (stacking and inverse-error weighting), the
//! length-routed model and its JSON artifact.

mod category;
mod model;
mod pipeline;

pub use category::{
    fit_category, fit_meta, kfold_assignment, BaseModels, CategoryFitReport, CategoryModel,
};
pub use model::{LengthLogDModel, Prediction, TrainingMetadata, FORMAT_NAME, FORMAT_VERSION};
pub use pipeline::{
    build_table, evaluate_rows, fit_base, fit_model, predict_table, train_pipeline, BaseModel, CategoryReport,
    LearnerGrids, ModeMetrics, PipelineConfig, TestEvaluation, TrainOutput, TrainReport,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetError;
use crate::descriptors::DescriptorError;
use crate::evalsuite::EvalError;
use crate::learners::LearnerError;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid SMILES: {0}")]
    Smiles(#[from] crate::smiles::SmilesError),
    #[error("model artifact: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported model format '{0}' version {1}")]
    UnsupportedVersion(String, u32),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{what}: need at least {needed} rows, got {got}")]
    TooFewRows {
        what: String,
        needed: usize,
        got: usize,
    },
}

/// Active combination rule at prediction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    Stacking,
    Fixed,
}

impl EnsembleMode {
    pub const ALL: [EnsembleMode; 2] = [EnsembleMode::Stacking, EnsembleMode::Fixed];

    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleMode::Stacking => "stacking",
            EnsembleMode::Fixed => "fixed",
        }
    }
}

impl fmt::Display for EnsembleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnsembleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stacking" => Ok(EnsembleMode::Stacking),
            "fixed" => Ok(EnsembleMode::Fixed),
            _ => Err(format!("mode must be 'stacking' or 'fixed', got '{s}'")),
        }
    }
}

/// Training-time mode choice; `Both` fits both and activates whichever has
/// the better validation R² per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Stacking,
    Fixed,
    Both,
}

impl fmt::Display for ModeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeSelection::Stacking => "stacking",
            ModeSelection::Fixed => "fixed",
            ModeSelection::Both => "both",
        })
    }
}

impl FromStr for ModeSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stacking" => Ok(ModeSelection::Stacking),
            "fixed" => Ok(ModeSelection::Fixed),
            "both" => Ok(ModeSelection::Both),
            _ => Err(format!("mode must be 'stacking', 'fixed' or 'both', got '{s}'")),
        }
    }
}

/// Convex weights over (LR, RF, XGB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedWeights {
    pub w_lr: f64,
    pub w_rf: f64,
    pub w_xgb: f64,
}

impl FixedWeights {
    pub fn as_array(&self) -> [f64; 3] {
        [self.w_lr, self.w_rf, self.w_xgb]
    }

    pub fn from_array(w: [f64; 3]) -> FixedWeights {
        FixedWeights {
            w_lr: w[0],
            w_rf: w[1],
            w_xgb: w[2],
        }
    }

    /// `w_lr·ŷ_lr + w_rf·ŷ_rf + w_xgb·ŷ_xgb`.
    pub fn combine(&self, base: [f64; 3]) -> f64 {
        self.w_lr * base[0] + self.w_rf * base[1] + self.w_xgb * base[2]
    }
}

/// Inverse-error weights from validation errors. Any zero error takes all
/// the weight, split equally among the zero-error models.
pub fn inverse_error_weights(errors: [f64; 3]) -> Result<FixedWeights, EnsembleError> {
    if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(EnsembleError::Config(format!("invalid validation errors {errors:?}")));
    }
    let zeros = errors.iter().filter(|&&e| e == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return Ok(FixedWeights::from_array(errors.map(|e| if e == 0.0 { share } else { 0.0 })));
    }
    let inv = errors.map(|e| 1.0 / e);
    let total: f64 = inv.iter().sum();
    Ok(FixedWeights::from_array(inv.map(|v| v / total)))
}

/// Boosts the LR weight by `alpha` and renormalizes.
pub fn apply_adaptive(w: FixedWeights, alpha: f64) -> FixedWeights {
    if alpha == 1.0 {
        return w;
    }
    let boosted = [alpha * w.w_lr, w.w_rf, w.w_xgb];
    let total: f64 = boosted.iter().sum();
    FixedWeights::from_array(boosted.map(|v| v / total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_error_examples() {
        let w = inverse_error_weights([0.2, 0.2, 0.2]).unwrap();
        assert_eq!(w.as_array(), [1.0 / 3.0; 3]);
        let w = inverse_error_weights([0.1, 0.2, 0.2]).unwrap();
        assert_eq!(w.as_array(), [0.5, 0.25, 0.25]);
        let w = inverse_error_weights([0.0, 0.3, 0.3]).unwrap();
        assert_eq!(w.as_array(), [1.0, 0.0, 0.0]);
        let w = inverse_error_weights([0.0, 0.0, 0.3]).unwrap();
        assert_eq!(w.as_array(), [0.5, 0.5, 0.0]);
        assert!(inverse_error_weights([f64::NAN, 0.1, 0.1]).is_err());
    }

    #[test]
    fn adaptive_examples() {
        let u = FixedWeights::from_array([1.0 / 3.0; 3]);
        assert_eq!(apply_adaptive(u, 1.0), u);
        assert_eq!(apply_adaptive(u, 2.0).as_array(), [0.5, 0.25, 0.25]);
        let one = FixedWeights::from_array([1.0, 0.0, 0.0]);
        assert_eq!(apply_adaptive(one, 7.0), one);
    }

    #[test]
    fn combine_examples() {
        let w = FixedWeights::from_array([0.5, 0.25, 0.25]);
        assert_eq!(w.combine([1.0, 2.0, 3.0]), 1.75);
        let one = FixedWeights::from_array([1.0, 0.0, 0.0]);
        assert_eq!(one.combine([0.123456789, 5.0, -2.0]), 0.123456789);
    }

    #[test]
    fn modes_parse() {
        assert_eq!("both".parse::<ModeSelection>().unwrap(), ModeSelection::Both);
        assert!("mix".parse::<EnsembleMode>().is_err());
    }
}
