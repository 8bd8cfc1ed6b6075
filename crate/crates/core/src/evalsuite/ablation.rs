//! Feature-group ablation grid and the non-stratified baseline comparison.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, Metrics};
use crate::dataset::{split, Category, CleanedDataset, FeatureTable, Split, StratifiedDataset};
use crate::descriptors::FeatureGroup;
use crate::ensemble::{build_table, fit_base, train_pipeline, EnsembleError, EnsembleMode, PipelineConfig, TrainOutput};
use crate::learners::{LearnerKind, Regressor};

/// Named feature masks; each lists the groups it removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationPreset {
    Full,
    NoGraph,
    NoExternal,
    BaseOnly,
}

impl AblationPreset {
    pub const ALL: [AblationPreset; 4] = [
        AblationPreset::Full,
        AblationPreset::NoGraph,
        AblationPreset::NoExternal,
        AblationPreset::BaseOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AblationPreset::Full => "full",
            AblationPreset::NoGraph => "no_graph",
            AblationPreset::NoExternal => "no_external",
            AblationPreset::BaseOnly => "base_only",
        }
    }

    pub fn excluded(self) -> Vec<FeatureGroup> {
        match self {
            AblationPreset::Full => vec![],
            AblationPreset::NoGraph => vec![FeatureGroup::Graph],
            AblationPreset::NoExternal => vec![FeatureGroup::External],
            AblationPreset::BaseOnly => vec![FeatureGroup::Graph, FeatureGroup::External],
        }
    }
}

impl fmt::Display for AblationPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AblationPreset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset '{s}' (expected full, no_graph, no_external or base_only)"))
    }
}

pub const PIPELINE_LABEL: &str = "LengthLogD";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub preset: AblationPreset,
    /// `LR`, `RF`, `XGB` or the full pipeline.
    pub model: String,
    pub n_features: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub warnings: Vec<String>,
}

impl AblationReport {
    pub fn row(&self, preset: AblationPreset, model: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.preset == preset && r.model == model)
    }
}

/// Fits one learner on the pooled train split (no length stratification)
/// and scores it on the pooled test split.
fn pooled_cell(
    table: &FeatureTable,
    strat: &StratifiedDataset,
    kind: LearnerKind,
    cfg: &PipelineConfig,
    stage: &str,
) -> Result<Metrics, EnsembleError> {
    let (xt, yt) = table.rows(&strat.indices(None, Split::Train));
    let (xv, yv) = table.rows(&strat.indices(None, Split::Val));
    let (xs, ys) = table.rows(&strat.indices(None, Split::Test));
    let (scaler, model, _) = fit_base(kind, xt.view(), yt.view(), xv.view(), yv.view(), cfg, stage)?;
    let pred = model.predict(scaler.transform(xs.view())?.view());
    Ok(compute_metrics(ys.as_slice().expect("contiguous"), pred.as_slice().expect("contiguous"))?)
}

/// Preset × learner grid on the held-out test split, plus one row for the
/// stratified pipeline in fixed-weight (adaptive) mode when `Full` is among
/// the presets.
pub fn run_ablation(
    dataset: &CleanedDataset,
    cfg: &PipelineConfig,
    presets: &[AblationPreset],
    kinds: &[LearnerKind],
) -> Result<AblationReport, EnsembleError> {
    cfg.validate()?;
    let strat = split(&dataset.lengths(), cfg.ratios, cfg.seed, cfg.thresholds_on)?;
    let (full, mut warnings) = build_table(dataset, cfg)?;
    warnings.extend(strat.warnings.iter().cloned());
    let tables: Vec<FeatureTable> = presets
        .iter()
        .map(|p| {
            let t = full.without_groups(&p.excluded());
            if t.schema.is_empty() {
                Err(EnsembleError::Config(format!("preset {p} removes every feature")))
            } else {
                Ok(t)
            }
        })
        .collect::<Result<_, _>>()?;
    let cells: Vec<(usize, LearnerKind)> = (0..presets.len())
        .flat_map(|p| kinds.iter().map(move |&k| (p, k)))
        .collect();
    let mut rows: Vec<AblationRow> = cells
        .par_iter()
        .map(|&(p, kind)| {
            let stage = format!("ablation/{}/{}", presets[p], kind.label());
            let metrics = pooled_cell(&tables[p], &strat, kind, cfg, &stage)?;
            Ok(AblationRow {
                preset: presets[p],
                model: kind.label().to_string(),
                n_features: tables[p].schema.len(),
                metrics,
            })
        })
        .collect::<Result<_, EnsembleError>>()?;

    if presets.contains(&AblationPreset::Full) {
        let pipeline_cfg = PipelineConfig {
            exclude: Vec::new(),
            ..cfg.clone()
        };
        let out = train_pipeline(dataset, &pipeline_cfg)?;
        warnings.extend(out.report.warnings.iter().cloned());
        let metrics = out
            .report
            .pooled
            .fixed
            .ok_or_else(|| EnsembleError::TooFewRows {
                what: "test split".into(),
                needed: 1,
                got: 0,
            })?;
        rows.push(AblationRow {
            preset: AblationPreset::Full,
            model: PIPELINE_LABEL.to_string(),
            n_features: out.table.schema.len(),
            metrics,
        });
    }
    Ok(AblationReport { rows, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    /// `None` for pooled baselines.
    pub category: Option<Category>,
    /// Active ensemble mode for pipeline rows.
    pub mode: Option<EnsembleMode>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

/// Pooled LR/RF/XGB baselines against the per-category pipeline, all on the
/// same test split. Reuses `trained` when given.
pub fn run_baseline_comparison(
    dataset: &CleanedDataset,
    cfg: &PipelineConfig,
    trained: Option<&TrainOutput>,
) -> Result<ComparisonReport, EnsembleError> {
    cfg.validate()?;
    let owned;
    let out = match trained {
        Some(t) => t,
        None => {
            owned = train_pipeline(dataset, cfg)?;
            &owned
        }
    };
    let mut warnings = out.report.warnings.clone();
    let (full, _) = build_table(dataset, cfg)?;
    let table = full.without_groups(&cfg.exclude);
    let mut rows: Vec<ComparisonRow> = LearnerKind::ALL
        .par_iter()
        .map(|&kind| {
            let stage = format!("baseline/{}", kind.label());
            Ok(ComparisonRow {
                model: kind.label().to_string(),
                category: None,
                mode: None,
                metrics: pooled_cell(&table, &out.strat, kind, cfg, &stage)?,
            })
        })
        .collect::<Result<_, EnsembleError>>()?;
    for c in &out.report.categories {
        match c.test.mode(c.active_mode) {
            Some(m) => rows.push(ComparisonRow {
                model: PIPELINE_LABEL.to_string(),
                category: Some(c.category),
                mode: Some(c.active_mode),
                metrics: *m,
            }),
            None => warnings.push(format!("{} category has no test rows", c.category)),
        }
    }
    Ok(ComparisonReport { rows, warnings })
}
