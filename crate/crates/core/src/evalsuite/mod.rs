//! Metrics, repeated cross-validation, ablation, baseline comparison and
//! feature importance.

pub mod ablation;
pub mod cv;
pub mod importance;
pub mod metrics;
pub mod report;

pub use ablation::{
    run_ablation, run_baseline_comparison, AblationPreset, AblationReport, AblationRow, ComparisonReport,
    ComparisonRow, PIPELINE_LABEL,
};
pub use cv::{cross_validate, CvReport, FoldResult, RepeatResult, Summary};
pub use importance::{
    feature_importance, permutation_importance, pooled_importance, FeatureImportance, FeatureSource,
    ImportanceReport, SourceShare,
};
pub use metrics::{compute_metrics, Metrics, R2_SENTINEL};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {0} targets, {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("no rows to evaluate")]
    Empty,
    #[error("leakage check failed: {0}")]
    Leakage(String),
}
