//! Impurity and permutation importance of a fitted forest, grouped by
//! feature source.

use std::fmt;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::mse;
use crate::dataset::{split, CleanedDataset, Split};
use crate::descriptors::{FeatureGroup, FeatureSchema};
use crate::ensemble::{build_table, fit_base, BaseModel, EnsembleError, PipelineConfig};
use crate::hash::derive_seed;
use crate::learners::{ForestModel, LearnerKind, Regressor};

pub const PERMUTATION_REPEATS: usize = 10;

/// Coarse feature origin used for the cumulative-share breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    Fingerprint,
    Global,
    External,
    Graph,
}

impl FeatureSource {
    pub const ALL: [FeatureSource; 4] = [
        FeatureSource::Fingerprint,
        FeatureSource::Global,
        FeatureSource::External,
        FeatureSource::Graph,
    ];

    pub fn of(group: FeatureGroup) -> FeatureSource {
        match group {
            FeatureGroup::Morgan | FeatureGroup::Maccs => FeatureSource::Fingerprint,
            FeatureGroup::RdkitGlobal | FeatureGroup::SmilesLen => FeatureSource::Global,
            FeatureGroup::External => FeatureSource::External,
            FeatureGroup::Graph => FeatureSource::Graph,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSource::Fingerprint => "fingerprint",
            FeatureSource::Global => "global",
            FeatureSource::External => "external",
            FeatureSource::Graph => "graph",
        }
    }
}

impl fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub index: usize,
    pub name: String,
    pub group: FeatureGroup,
    pub source: FeatureSource,
    pub impurity: f64,
    pub permutation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceShare {
    pub source: FeatureSource,
    /// Features of this source among the top k.
    pub count: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Every feature, in schema order.
    pub features: Vec<FeatureImportance>,
    /// Indices into `features`, by decreasing impurity importance.
    pub top: Vec<usize>,
    pub shares: Vec<SourceShare>,
}

impl ImportanceReport {
    pub fn top_features(&self) -> impl Iterator<Item = &FeatureImportance> {
        self.top.iter().map(|&i| &self.features[i])
    }
}

/// Mean increase in MSE over seeded shuffles of each column. Features no
/// tree splits on score exactly zero.
pub fn permutation_importance(
    forest: &ForestModel,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    repeats: usize,
    seed: u64,
) -> Vec<f64> {
    let yv = y.to_vec();
    let base = mse(&yv, &forest.predict(x).to_vec());
    let used = forest.used_features();
    let mut xp: Array2<f64> = x.to_owned();
    (0..x.ncols())
        .map(|j| {
            if !used[j] || repeats == 0 {
                return 0.0;
            }
            let original = x.column(j).to_vec();
            let mut col = original.clone();
            let mut total = 0.0;
            for r in 0..repeats {
                col.copy_from_slice(&original);
                col.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("permute/{j}/{r}"))));
                xp.column_mut(j).iter_mut().zip(&col).for_each(|(d, s)| *d = *s);
                total += mse(&yv, &forest.predict(xp.view()).to_vec()) - base;
            }
            xp.column_mut(j).iter_mut().zip(&original).for_each(|(d, s)| *d = *s);
            total / repeats as f64
        })
        .collect()
}

/// Ranks features by impurity importance (ties to the lower index) and
/// splits the top-k importance mass across the four sources. When the top-k
/// importance is all zero the shares fall back to feature counts.
pub fn feature_importance(
    forest: &ForestModel,
    schema: &FeatureSchema,
    x_val: ArrayView2<'_, f64>,
    y_val: ArrayView1<'_, f64>,
    top_k: usize,
    seed: u64,
) -> ImportanceReport {
    let perm = permutation_importance(forest, x_val, y_val, PERMUTATION_REPEATS, seed);
    let features: Vec<FeatureImportance> = schema
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| FeatureImportance {
            index: i,
            name: e.name.clone(),
            group: e.group,
            source: FeatureSource::of(e.group),
            impurity: forest.importance[i],
            permutation: perm[i],
        })
        .collect();
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| features[b].impurity.total_cmp(&features[a].impurity).then(a.cmp(&b)));
    order.truncate(top_k.min(features.len()));

    let mass: f64 = order.iter().map(|&i| features[i].impurity).sum();
    let shares = FeatureSource::ALL
        .into_iter()
        .map(|s| {
            let members: Vec<usize> = order.iter().copied().filter(|&i| features[i].source == s).collect();
            let share = if mass > 0.0 {
                members.iter().map(|&i| features[i].impurity).sum::<f64>() / mass
            } else if order.is_empty() {
                0.0
            } else {
                members.len() as f64 / order.len() as f64
            };
            SourceShare {
                source: s,
                count: members.len(),
                share,
            }
        })
        .collect();
    ImportanceReport {
        features,
        top: order,
        shares,
    }
}

/// Fits a pooled forest on the train split and analyses it on the
/// validation split.
pub fn pooled_importance(
    dataset: &CleanedDataset,
    cfg: &PipelineConfig,
    top_k: usize,
) -> Result<ImportanceReport, EnsembleError> {
    cfg.validate()?;
    let strat = split(&dataset.lengths(), cfg.ratios, cfg.seed, cfg.thresholds_on)?;
    let (full, _) = build_table(dataset, cfg)?;
    let table = full.without_groups(&cfg.exclude);
    let (xt, yt) = table.rows(&strat.indices(None, Split::Train));
    let (xv, yv) = table.rows(&strat.indices(None, Split::Val));
    let (scaler, model, _) = fit_base(LearnerKind::Rf, xt.view(), yt.view(), xv.view(), yv.view(), cfg, "importance/rf")?;
    let BaseModel::Rf(forest) = model else {
        unreachable!("random forest requested")
    };
    let xv = scaler.transform(xv.view())?;
    Ok(feature_importance(
        &forest,
        &table.schema,
        xv.view(),
        yv.view(),
        top_k,
        derive_seed(cfg.seed, "importance/permutation"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::FeatureEntry;
    use crate::learners::{fit_forest, ForestConfig};
    use ndarray::Array1;

    fn single_factor() -> (Array2<f64>, Array1<f64>) {
        let x = Array2::from_shape_fn((60, 4), |(i, j)| match j {
            0 => i as f64,
            1 => ((i * 7) % 13) as f64,
            2 => 5.0,
            _ => ((i * 3) % 5) as f64,
        });
        let y = x.column(0).mapv(|v| (v / 10.0).floor());
        (x, y)
    }

    fn schema(p: usize) -> FeatureSchema {
        let entries = (0..p)
            .map(|i| FeatureEntry {
                name: format!("MOE_{i}"),
                group: FeatureGroup::External,
            })
            .collect();
        FeatureSchema::from_entries(0, entries).unwrap()
    }

    #[test]
    fn signal_feature_ranks_first() {
        let (x, y) = single_factor();
        let cfg = ForestConfig {
            n_trees: 40,
            seed: 3,
            ..Default::default()
        };
        let f = fit_forest(x.view(), y.view(), &cfg).unwrap();
        let rep = feature_importance(&f, &schema(4), x.view(), y.view(), 3, 1);
        assert_eq!(rep.top[0], 0);
        assert_eq!(rep.top.len(), 3);
        assert_eq!(rep.features[2].permutation, 0.0);
        assert!(rep.features[0].permutation > 0.0);
        let s: f64 = rep.shares.iter().map(|s| s.share).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(rep.shares[2].count, 3);
    }

    #[test]
    fn sources_cover_groups() {
        assert_eq!(FeatureSource::of(FeatureGroup::Maccs), FeatureSource::Fingerprint);
        assert_eq!(FeatureSource::of(FeatureGroup::SmilesLen), FeatureSource::Global);
    }
}
