//! End-to-end training: stratify, featurize, scale, fit bases and ensembles,
//! evaluate on the held-out split.

use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::category::{fit_category, CategoryFitReport, CategoryModel};
use super::model::{LengthLogDModel, Prediction, TrainingMetadata, FORMAT_NAME, FORMAT_VERSION};
use super::{EnsembleError, EnsembleMode, FixedWeights, ModeSelection};
use crate::dataset::{
    categorize, split, Category, CleanedDataset, FeatureTable, LengthThresholds, MissingPolicy,
    Scaler, Split, SplitRatios, StratifiedDataset, ThresholdPolicy,
};
use crate::descriptors::{FeatureGroup, FeatureSchema, DEFAULT_BITS, DEFAULT_RADIUS};
use crate::evalsuite::metrics::{compute_metrics, Metrics};
use crate::hash::derive_seed;
use crate::learners::{
    fit_forest, fit_gbt, fit_ridge, grid_search, ForestConfig, ForestModel, GbtConfig, GbtModel,
    LearnerKind, Regressor, RidgeConfig, RidgeModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerGrids {
    pub ridge_lambdas: Vec<f64>,
    /// Seeds in these configs are ignored; they are derived from the run seed.
    pub forest: Vec<ForestConfig>,
    pub gbt: Vec<GbtConfig>,
}

impl Default for LearnerGrids {
    fn default() -> Self {
        LearnerGrids {
            ridge_lambdas: vec![0.0, 0.01, 0.1, 1.0, 10.0],
            forest: vec![ForestConfig::default()],
            gbt: vec![GbtConfig::default()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub ratios: SplitRatios,
    pub thresholds_on: ThresholdPolicy,
    pub missing: MissingPolicy,
    pub morgan_radius: usize,
    pub morgan_bits: usize,
    pub grids: LearnerGrids,
    pub stacking_folds: usize,
    pub meta_lambdas: Vec<f64>,
    /// Constrains stacking weights to be non-negative.
    pub meta_nonneg: bool,
    /// LR boost for the Long category in fixed mode.
    pub alpha: f64,
    pub mode: ModeSelection,
    /// Feature groups removed before scaling.
    pub exclude: Vec<FeatureGroup>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            ratios: SplitRatios::default(),
            thresholds_on: ThresholdPolicy::Train,
            missing: MissingPolicy::Reject,
            morgan_radius: DEFAULT_RADIUS,
            morgan_bits: DEFAULT_BITS,
            grids: LearnerGrids::default(),
            stacking_folds: 5,
            meta_lambdas: vec![0.01, 0.1, 1.0],
            meta_nonneg: true,
            alpha: 1.5,
            mode: ModeSelection::Both,
            exclude: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |m: String| Err(EnsembleError::Config(m));
        self.ratios.validate()?;
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if self.stacking_folds < 2 {
            return bad(format!("stacking folds must be >= 2, got {}", self.stacking_folds));
        }
        if self.morgan_bits == 0 {
            return bad("morgan bits must be >= 1".into());
        }
        let lambdas = self.grids.ridge_lambdas.iter().chain(&self.meta_lambdas);
        if self.grids.ridge_lambdas.is_empty() || self.meta_lambdas.is_empty() {
            return bad("lambda grids must not be empty".into());
        }
        if lambdas.into_iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return bad("lambdas must be finite and >= 0".into());
        }
        if self.grids.forest.is_empty() || self.grids.gbt.is_empty() {
            return bad("learner grids must not be empty".into());
        }
        for f in &self.grids.forest {
            if f.n_trees == 0 || f.min_leaf == 0 || f.m_features == Some(0) {
                return bad(format!("invalid forest config {f:?}"));
            }
        }
        for g in &self.grids.gbt {
            if g.rounds == 0 || !(g.eta > 0.0 && g.eta <= 1.0) || !(g.subsample > 0.0 && g.subsample <= 1.0) {
                return bad(format!("invalid gbt config {g:?}"));
            }
        }
        Ok(())
    }
}

/// Any single fitted base learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseModel {
    Lr(RidgeModel),
    Rf(ForestModel),
    Gbt(GbtModel),
}

impl Regressor for BaseModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            BaseModel::Lr(m) => m.predict_row(x),
            BaseModel::Rf(m) => m.predict_row(x),
            BaseModel::Gbt(m) => m.predict_row(x),
        }
    }
}

/// Fits one learner family with its grid on unscaled data; returns the
/// fitted scaler, the selected model and its validation MAE.
pub fn fit_base(
    kind: LearnerKind,
    x_train: ArrayView2<'_, f64>,
    y_train: ArrayView1<'_, f64>,
    x_val: ArrayView2<'_, f64>,
    y_val: ArrayView1<'_, f64>,
    cfg: &PipelineConfig,
    stage: &str,
) -> Result<(Scaler, BaseModel, f64), EnsembleError> {
    let scaler = Scaler::fit(x_train);
    let xt = scaler.transform(x_train)?;
    let xv = scaler.transform(x_val)?;
    let seed = derive_seed(cfg.seed, stage);
    let (model, mae) = match kind {
        LearnerKind::Lr => {
            let grid: Vec<RidgeConfig> = cfg.grids.ridge_lambdas.iter().map(|&lambda| RidgeConfig { lambda }).collect();
            let (m, r) = grid_search(&grid, |c| Ok(fit_ridge(xt.view(), y_train, c.lambda)?.0), xv.view(), y_val)?;
            (BaseModel::Lr(m), r.best().val_mae)
        }
        LearnerKind::Rf => {
            let grid: Vec<ForestConfig> = cfg.grids.forest.iter().map(|c| ForestConfig { seed, ..*c }).collect();
            let (m, r) = grid_search(&grid, |c| fit_forest(xt.view(), y_train, c), xv.view(), y_val)?;
            (BaseModel::Rf(m), r.best().val_mae)
        }
        LearnerKind::Gbt => {
            let grid: Vec<GbtConfig> = cfg.grids.gbt.iter().map(|c| GbtConfig { seed, ..*c }).collect();
            let (m, r) = grid_search(&grid, |c| fit_gbt(xt.view(), y_train, c).map(|f| f.model), xv.view(), y_val)?;
            (BaseModel::Gbt(m), r.best().val_mae)
        }
    };
    Ok((scaler, model, mae))
}

/// Fits the three category models on the given train/validation rows of an
/// (already masked) feature table. Categories with too few rows fall back to
/// all training and validation rows.
pub fn fit_model(
    table: &FeatureTable,
    train: &[usize],
    val: &[usize],
    thresholds: LengthThresholds,
    cfg: &PipelineConfig,
    fingerprint: u64,
) -> Result<(LengthLogDModel, Vec<CategoryFitReport>, Vec<String>), EnsembleError> {
    cfg.validate()?;
    if table.schema.is_empty() {
        return Err(EnsembleError::Config("feature mask removes every feature".into()));
    }
    let cat_of = |i: usize| categorize(table.lengths[i], &thresholds);
    let min_train = cfg.stacking_folds.max(3);
    let mut warnings = Vec::new();
    let mut plans = Vec::new();
    for c in Category::ALL {
        let tr: Vec<usize> = train.iter().copied().filter(|&i| cat_of(i) == c).collect();
        let va: Vec<usize> = val.iter().copied().filter(|&i| cat_of(i) == c).collect();
        if tr.len() < min_train || va.is_empty() {
            warnings.push(format!(
                "{c} category has {} train / {} validation rows; fitted on pooled data",
                tr.len(),
                va.len()
            ));
            plans.push((c, train.to_vec(), val.to_vec(), true));
        } else {
            plans.push((c, tr, va, false));
        }
    }
    if train.len() < min_train || val.is_empty() {
        return Err(EnsembleError::TooFewRows {
            what: "training split".into(),
            needed: min_train,
            got: train.len(),
        });
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let fitted: Vec<(CategoryModel, CategoryFitReport)> = plans
        .par_iter()
        .map(|(c, tr, va, pooled)| {
            let (xt, yt) = table.rows(tr);
            let (xv, yv) = table.rows(va);
            fit_category(*c, xt.view(), yt.view(), xv.view(), yv.view(), cfg, *pooled)
        })
        .collect::<Result<_, _>>()?;
    let (categories, reports): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
    let model = LengthLogDModel {
        format: FORMAT_NAME.to_string(),
        format_version: FORMAT_VERSION,
        schema: table.schema.clone(),
        thresholds,
        missing_policy: cfg.missing,
        categories,
        metadata: TrainingMetadata {
            seed: cfg.seed,
            dataset_fingerprint: format!("{fingerprint:016x}"),
            n_train: train.len(),
            n_val: val.len(),
            config: cfg.clone(),
        },
    };
    Ok((model, reports, warnings))
}

/// Test-split metrics of one category (or pooled) for both ensemble modes and
/// each base learner. `None` where there are no rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMetrics {
    pub n: usize,
    pub stacking: Option<Metrics>,
    pub fixed: Option<Metrics>,
    /// LR, RF, XGB.
    pub bases: [Option<Metrics>; 3],
}

impl ModeMetrics {
    fn from_predictions(y: &[f64], preds: &[(Prediction, Prediction)]) -> ModeMetrics {
        let m = |p: Vec<f64>| compute_metrics(y, &p).ok();
        let base = |j: usize| m(preds.iter().map(|(s, _)| s.base[j]).collect());
        ModeMetrics {
            n: y.len(),
            stacking: m(preds.iter().map(|(s, _)| s.logd).collect()),
            fixed: m(preds.iter().map(|(_, f)| f.logd).collect()),
            bases: [base(0), base(1), base(2)],
        }
    }

    pub fn mode(&self, mode: EnsembleMode) -> Option<&Metrics> {
        match mode {
            EnsembleMode::Stacking => self.stacking.as_ref(),
            EnsembleMode::Fixed => self.fixed.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub category: Category,
    pub fit: CategoryFitReport,
    pub active_mode: EnsembleMode,
    /// Fixed-mode weights with the adaptive boost applied.
    pub weights: FixedWeights,
    pub meta_weights: Vec<f64>,
    pub meta_intercept: f64,
    pub test: ModeMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub thresholds: LengthThresholds,
    pub categories: Vec<CategoryReport>,
    /// All test rows, each predicted by its routed category model.
    pub pooled: ModeMetrics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: LengthLogDModel,
    pub strat: StratifiedDataset,
    /// Masked feature table of every cleaned record.
    pub table: FeatureTable,
    pub report: TrainReport,
    /// Stacking and fixed predictions for every record, in record order.
    pub predictions: Vec<(Prediction, Prediction)>,
}

/// Metrics of a set of rows, per routed category and pooled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEvaluation {
    /// Category, its active mode and its metrics; Short, Medium, Long.
    pub categories: Vec<(Category, EnsembleMode, ModeMetrics)>,
    pub pooled: ModeMetrics,
}

/// Scores `rows` of `table` given `predict_table` output for the whole table.
pub fn evaluate_rows(
    model: &LengthLogDModel,
    table: &FeatureTable,
    rows: &[usize],
    predictions: &[(Prediction, Prediction)],
) -> TestEvaluation {
    let eval = |rows: &[usize]| {
        let y: Vec<f64> = rows.iter().map(|&i| table.y[i]).collect();
        let p: Vec<(Prediction, Prediction)> = rows.iter().map(|&i| predictions[i]).collect();
        ModeMetrics::from_predictions(&y, &p)
    };
    let categories = model
        .categories
        .iter()
        .map(|m| {
            let sub: Vec<usize> = rows.iter().copied().filter(|&i| predictions[i].0.category == m.category).collect();
            (m.category, m.mode, eval(&sub))
        })
        .collect();
    TestEvaluation {
        categories,
        pooled: eval(rows),
    }
}

/// Builds the full feature table for a cleaned dataset under `cfg`.
pub fn build_table(
    dataset: &CleanedDataset,
    cfg: &PipelineConfig,
) -> Result<(FeatureTable, Vec<String>), EnsembleError> {
    let (externals, dropped) = dataset.resolve_externals(cfg.missing);
    let warnings: Vec<String> = dropped
        .iter()
        .map(|c| format!("external column '{c}' has missing values; dropped"))
        .collect();
    let schema = FeatureSchema::standard(cfg.morgan_radius, cfg.morgan_bits, &externals)?;
    let table = FeatureTable::build(
        &dataset.records,
        schema,
        cfg.missing == MissingPolicy::MeanImpute,
    )?;
    Ok((table, warnings))
}

pub fn predict_table(model: &LengthLogDModel, table: &FeatureTable) -> Result<Vec<(Prediction, Prediction)>, EnsembleError> {
    (0..table.len())
        .map(|i| {
            let row = table.x.row(i).to_vec();
            let s = model.predict_features(&row, table.lengths[i], Some(EnsembleMode::Stacking))?;
            let f = model.predict_features(&row, table.lengths[i], Some(EnsembleMode::Fixed))?;
            Ok((s, f))
        })
        .collect()
}

/// Clean → stratify → split → featurize → scale → fit → evaluate on test.
pub fn train_pipeline(dataset: &CleanedDataset, cfg: &PipelineConfig) -> Result<TrainOutput, EnsembleError> {
    cfg.validate()?;
    let strat = split(&dataset.lengths(), cfg.ratios, cfg.seed, cfg.thresholds_on)?;
    let (full, mut warnings) = build_table(dataset, cfg)?;
    warnings.extend(strat.warnings.iter().cloned());
    let table = full.without_groups(&cfg.exclude);
    let train = strat.indices(None, Split::Train);
    let val = strat.indices(None, Split::Val);
    let (model, fits, fit_warnings) = fit_model(&table, &train, &val, strat.thresholds, cfg, dataset.fingerprint)?;
    warnings.extend(fit_warnings);

    let predictions = predict_table(&model, &table)?;
    let test = strat.indices(None, Split::Test);
    let eval = evaluate_rows(&model, &table, &test, &predictions);
    let categories = fits
        .into_iter()
        .zip(&model.categories)
        .zip(eval.categories)
        .map(|((fit, m), (_, _, test))| CategoryReport {
            category: m.category,
            active_mode: m.mode,
            weights: m.weights(),
            meta_weights: m.meta.weights.clone(),
            meta_intercept: m.meta.intercept,
            test,
            fit,
        })
        .collect();
    let report = TrainReport {
        thresholds: strat.thresholds,
        categories,
        pooled: eval.pooled,
        warnings,
    };
    Ok(TrainOutput {
        model,
        strat,
        table,
        report,
        predictions,
    })
}

