//! Repeated k-fold cross-validation of the full pipeline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, mean_sd, Metrics};
use super::EvalError;
use crate::dataset::{
    categorize, compute_thresholds, Category, CleanedDataset, FeatureTable, LengthThresholds, Scaler,
};
use crate::ensemble::{
    build_table, fit_model, kfold_assignment, EnsembleError, EnsembleMode, LengthLogDModel, PipelineConfig,
};
use crate::hash::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub thresholds: LengthThresholds,
    /// Each category's active mode.
    pub metrics: Metrics,
    pub stacking: Metrics,
    pub fixed: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    /// Out-of-fold predictions of every record, scored together.
    pub pooled: Metrics,
    pub mean_fold_r2: f64,
}

/// Mean and population standard deviation over folds × repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub per_repeat: Vec<RepeatResult>,
    pub r2: Summary,
    pub mae: Summary,
    pub mse: Summary,
    pub rmse: Summary,
    pub r: Summary,
    pub warnings: Vec<String>,
}

/// Splits training-fold rows into inner train and validation rows within
/// length bands computed from those rows alone.
fn inner_split(
    rows: &[usize],
    lengths: &[usize],
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), EnsembleError> {
    let fold_lengths: Vec<usize> = rows.iter().map(|&i| lengths[i]).collect();
    let bands = compute_thresholds(&fold_lengths)?;
    let mut train = Vec::new();
    let mut val = Vec::new();
    for c in Category::ALL {
        let mut members: Vec<usize> = rows.iter().copied().filter(|&i| categorize(lengths[i], &bands) == c).collect();
        members.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("val/{c}"))));
        let n_val = if members.len() >= 2 {
            ((members.len() as f64 * val_fraction).round() as usize).clamp(1, members.len() - 1)
        } else {
            0
        };
        val.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Recomputes thresholds and per-category scalers from the training rows and
/// checks that the fitted model holds exactly those values.
fn assert_no_leakage(
    model: &LengthLogDModel,
    table: &FeatureTable,
    train: &[usize],
    held_out: &[usize],
) -> Result<(), EvalError> {
    let lengths: Vec<usize> = train.iter().map(|&i| table.lengths[i]).collect();
    let t = compute_thresholds(&lengths).map_err(|e| EvalError::Leakage(e.to_string()))?;
    if t != model.thresholds {
        return Err(EvalError::Leakage(format!(
            "thresholds {:?} differ from training-fold recomputation {t:?}",
            model.thresholds
        )));
    }
    if let Some(i) = held_out.iter().find(|i| train.binary_search(i).is_ok()) {
        return Err(EvalError::Leakage(format!("row {i} is both held out and used for training")));
    }
    for cm in &model.categories {
        let rows: Vec<usize> = if cm.pooled_fallback {
            train.to_vec()
        } else {
            train.iter().copied().filter(|&i| model.route(table.lengths[i]) == cm.category).collect()
        };
        let (x, _) = table.rows(&rows);
        if Scaler::fit(x.view()) != cm.scaler {
            return Err(EvalError::Leakage(format!(
                "{} scaler does not match its training rows",
                cm.category
            )));
        }
    }
    Ok(())
}

fn summarize(values: impl Iterator<Item = f64>) -> Summary {
    let v: Vec<f64> = values.collect();
    let (mean, sd) = mean_sd(&v);
    Summary { mean, sd }
}

/// Repeated k-fold CV. Every fold refits thresholds, scalers and models on
/// its training folds (with an inner validation split) and is scored on the
/// held-out fold.
pub fn cross_validate(
    dataset: &CleanedDataset,
    cfg: &PipelineConfig,
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<CvReport, EnsembleError> {
    cfg.validate()?;
    if repeats == 0 {
        return Err(EnsembleError::Config("repeats must be >= 1".into()));
    }
    let (full, mut warnings) = build_table(dataset, cfg)?;
    let table = full.without_groups(&cfg.exclude);
    let n = table.len();
    let val_fraction = cfg.ratios.val / (cfg.ratios.train + cfg.ratios.val);
    let mut folds_out = Vec::new();
    let mut per_repeat = Vec::new();

    for r in 0..repeats {
        let assignment = kfold_assignment(n, k, derive_seed(seed, &format!("cv/repeat/{r}")))?;
        let mut oof = vec![f64::NAN; n];
        let mut fold_r2 = Vec::with_capacity(k);
        for f in 0..k {
            let (train_all, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| assignment[i] != f);
            let stage = derive_seed(seed, &format!("cv/{r}/{f}"));
            let (train, val) = inner_split(&train_all, &table.lengths, val_fraction, stage)?;
            let train_lengths: Vec<usize> = train.iter().map(|&i| table.lengths[i]).collect();
            let thresholds = compute_thresholds(&train_lengths)?;
            let fold_cfg = PipelineConfig {
                seed: stage,
                ..cfg.clone()
            };
            let (model, _, fit_warnings) = fit_model(&table, &train, &val, thresholds, &fold_cfg, dataset.fingerprint)?;
            warnings.extend(fit_warnings.into_iter().map(|w| format!("repeat {r} fold {f}: {w}")));
            let held_out: Vec<usize> = test.iter().chain(&val).copied().collect();
            assert_no_leakage(&model, &table, &train, &held_out)?;

            let y: Vec<f64> = test.iter().map(|&i| table.y[i]).collect();
            let (mut active, mut stacking, mut fixed) = (Vec::new(), Vec::new(), Vec::new());
            for &i in &test {
                let row = table.x.row(i).to_vec();
                let len = table.lengths[i];
                let cm = model.category(model.route(len));
                let (s, base) = cm.predict_raw(&row, EnsembleMode::Stacking)?;
                let fx = cm.combine(base, EnsembleMode::Fixed);
                let a = match cm.mode {
                    EnsembleMode::Stacking => s,
                    EnsembleMode::Fixed => fx,
                };
                oof[i] = a;
                active.push(a);
                stacking.push(s);
                fixed.push(fx);
            }
            let metrics = compute_metrics(&y, &active)?;
            fold_r2.push(metrics.r2);
            folds_out.push(FoldResult {
                repeat: r,
                fold: f,
                n_train: train.len(),
                n_val: val.len(),
                n_test: test.len(),
                thresholds,
                metrics,
                stacking: compute_metrics(&y, &stacking)?,
                fixed: compute_metrics(&y, &fixed)?,
            });
        }
        let y: Vec<f64> = table.y.to_vec();
        per_repeat.push(RepeatResult {
            repeat: r,
            pooled: compute_metrics(&y, &oof)?,
            mean_fold_r2: fold_r2.iter().sum::<f64>() / k as f64,
        });
    }

    let m = |g: fn(&Metrics) -> f64| summarize(folds_out.iter().map(|f| g(&f.metrics)));
    Ok(CvReport {
        k,
        repeats,
        seed,
        r2: m(|x| x.r2),
        mae: m(|x| x.mae),
        mse: m(|x| x.mse),
        rmse: m(|x| x.rmse),
        r: m(|x| x.r),
        folds: folds_out,
        per_repeat,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_split_partitions_rows() {
        let lengths: Vec<usize> = (0..40).map(|i| 10 + i).collect();
        let rows: Vec<usize> = (0..40).filter(|i| i % 4 != 0).collect();
        let (tr, va) = inner_split(&rows, &lengths, 0.2, 7).unwrap();
        assert_eq!(tr.len() + va.len(), rows.len());
        assert!(va.iter().all(|i| rows.contains(i) && !tr.contains(i)));
        assert!(va.len() >= 3);
        assert_eq!(inner_split(&rows, &lengths, 0.2, 7).unwrap(), (tr, va));
    }
}
