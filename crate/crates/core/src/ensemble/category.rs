//! One length category: scaler, three base learners and both ensembles.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pipeline::PipelineConfig;
use super::{apply_adaptive, inverse_error_weights, EnsembleError, EnsembleMode, FixedWeights};
use crate::dataset::{Category, Scaler};
use crate::evalsuite::metrics::compute_metrics;
use crate::hash::derive_seed;
use crate::learners::{
    fit_forest, fit_gbt, fit_ridge, fit_ridge_nonneg, grid_search, ForestConfig, ForestModel, GbtConfig, GbtModel,
    Regressor, RidgeConfig, RidgeModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModels {
    pub lr: RidgeModel,
    pub rf: ForestModel,
    pub gbt: GbtModel,
}

impl BaseModels {
    /// `[ŷ_LR, ŷ_RF, ŷ_XGB]` for one scaled row.
    pub fn predict_row(&self, x: &[f64]) -> [f64; 3] {
        [
            self.lr.predict_row(x),
            self.rf.predict_row(x),
            self.gbt.predict_row(x),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryModel {
    pub category: Category,
    pub scaler: Scaler,
    pub bases: BaseModels,
    /// Ridge over the three base predictions (unscaled).
    pub meta: RidgeModel,
    /// Inverse validation-MAE weights before any adaptive boost.
    pub fixed: FixedWeights,
    /// LR boost; 1 for every category except Long.
    pub adaptive_alpha: f64,
    pub mode: EnsembleMode,
    /// Fitted on pooled data because the category was too small.
    pub pooled_fallback: bool,
}

impl CategoryModel {
    /// Fixed-mode weights with the adaptive boost applied.
    pub fn weights(&self) -> FixedWeights {
        apply_adaptive(self.fixed, self.adaptive_alpha)
    }

    pub fn combine(&self, base: [f64; 3], mode: EnsembleMode) -> f64 {
        match mode {
            EnsembleMode::Fixed => self.weights().combine(base),
            EnsembleMode::Stacking => self.meta.predict_row(&base),
        }
    }

    /// Prediction and base outputs for an already scaled row.
    pub fn predict_scaled(&self, x: &[f64], mode: EnsembleMode) -> (f64, [f64; 3]) {
        let base = self.bases.predict_row(x);
        (self.combine(base, mode), base)
    }

    pub fn predict_raw(&self, raw: &[f64], mode: EnsembleMode) -> Result<(f64, [f64; 3]), EnsembleError> {
        let x = self.scaler.transform_row(raw)?;
        Ok(self.predict_scaled(&x, mode))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFitReport {
    pub category: Category,
    pub n_train: usize,
    pub n_val: usize,
    pub pooled_fallback: bool,
    pub ridge_lambda: f64,
    pub ridge_jitter: bool,
    pub forest: ForestConfig,
    pub gbt: GbtConfig,
    pub meta_lambda: f64,
    /// Validation MAE of LR, RF, XGB.
    pub val_mae: [f64; 3],
    pub val_r2_stacking: f64,
    pub val_r2_fixed: f64,
}

/// Seeded fold id per row, sizes differing by at most one.
pub fn kfold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>, EnsembleError> {
    if k < 2 {
        return Err(EnsembleError::Config(format!("k_folds must be >= 2, got {k}")));
    }
    if n < k {
        return Err(EnsembleError::TooFewRows {
            what: format!("{k}-fold split"),
            needed: k,
            got: n,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        folds[i] = pos % k;
    }
    Ok(folds)
}

fn fold_rows(folds: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != f)
}

/// Meta ridge over out-of-fold base predictions. λ is chosen by CV on the
/// OOF matrix with the same folds (lowest MSE; ties to the larger λ), then
/// refit on all rows.
pub fn fit_meta(
    oof: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    folds: &[usize],
    lambdas: &[f64],
    nonneg: bool,
) -> Result<(RidgeModel, f64), EnsembleError> {
    let fit = |x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, lambda: f64| -> Result<RidgeModel, EnsembleError> {
        Ok(if nonneg {
            fit_ridge_nonneg(x, y, lambda)?
        } else {
            fit_ridge(x, y, lambda)?.0
        })
    };
    if lambdas.is_empty() {
        return Err(EnsembleError::Config("empty meta lambda grid".into()));
    }
    let k = folds.iter().max().map_or(0, |m| m + 1);
    let mut best: Option<(f64, f64)> = None;
    for &lambda in lambdas {
        let mut sse = 0.0;
        for f in 0..k {
            let (tr, te) = fold_rows(folds, f);
            if tr.is_empty() || te.is_empty() {
                return Err(EnsembleError::TooFewRows {
                    what: format!("meta fold {f}"),
                    needed: 1,
                    got: 0,
                });
            }
            let m = fit(oof.select(Axis(0), &tr).view(), y.select(Axis(0), &tr).view(), lambda)?;
            for &i in &te {
                let e = m.predict_row(&oof.row(i).to_vec()) - y[i];
                sse += e * e;
            }
        }
        let better = match best {
            None => true,
            Some((b_sse, b_lambda)) => sse < b_sse || (sse == b_sse && lambda > b_lambda),
        };
        if better {
            best = Some((sse, lambda));
        }
    }
    let (_, lambda) = best.expect("non-empty grid");
    Ok((fit(oof, y, lambda)?, lambda))
}

fn stage_seed(seed: u64, stage: &str, category: Category) -> u64 {
    derive_seed(seed, &format!("{stage}/{category}"))
}

/// Fits the scaler, grid-searched base learners, inverse-error weights and the
/// stacking meta-learner for one category. Inputs are unscaled.
#[allow(clippy::too_many_arguments)]
pub fn fit_category(
    category: Category,
    x_train: ArrayView2<'_, f64>,
    y_train: ArrayView1<'_, f64>,
    x_val: ArrayView2<'_, f64>,
    y_val: ArrayView1<'_, f64>,
    cfg: &PipelineConfig,
    pooled_fallback: bool,
) -> Result<(CategoryModel, CategoryFitReport), EnsembleError> {
    if y_val.is_empty() {
        return Err(EnsembleError::TooFewRows {
            what: format!("{category} validation split"),
            needed: 1,
            got: 0,
        });
    }
    let scaler = Scaler::fit(x_train);
    let xt = scaler.transform(x_train)?;
    let xv = scaler.transform(x_val)?;

    let ridge_grid: Vec<RidgeConfig> = cfg.grids.ridge_lambdas.iter().map(|&lambda| RidgeConfig { lambda }).collect();
    let mut jitter = false;
    let (lr, lr_search) = grid_search(
        &ridge_grid,
        |c| {
            let (m, r) = fit_ridge(xt.view(), y_train, c.lambda)?;
            jitter |= r.jitter.is_some();
            Ok(m)
        },
        xv.view(),
        y_val,
    )?;
    let rf_seed = stage_seed(cfg.seed, "rf", category);
    let rf_grid: Vec<ForestConfig> = cfg.grids.forest.iter().map(|c| ForestConfig { seed: rf_seed, ..*c }).collect();
    let (rf, rf_search) = grid_search(&rf_grid, |c| fit_forest(xt.view(), y_train, c), xv.view(), y_val)?;
    let gbt_seed = stage_seed(cfg.seed, "gbt", category);
    let gbt_grid: Vec<GbtConfig> = cfg.grids.gbt.iter().map(|c| GbtConfig { seed: gbt_seed, ..*c }).collect();
    let (gbt, gbt_search) = grid_search(
        &gbt_grid,
        |c| fit_gbt(xt.view(), y_train, c).map(|f| f.model),
        xv.view(),
        y_val,
    )?;
    let lambda = lr_search.best().config.lambda;
    let forest_cfg = rf_search.best().config;
    let gbt_cfg = gbt_search.best().config;
    let val_mae = [
        lr_search.best().val_mae,
        rf_search.best().val_mae,
        gbt_search.best().val_mae,
    ];
    let fixed = inverse_error_weights(val_mae)?;

    // Out-of-fold base predictions for the meta-learner.
    let n = y_train.len();
    let folds = kfold_assignment(n, cfg.stacking_folds, stage_seed(cfg.seed, "stacking", category))?;
    let mut oof = Array2::zeros((n, 3));
    for f in 0..cfg.stacking_folds {
        let (tr, te) = fold_rows(&folds, f);
        let xf = xt.select(Axis(0), &tr);
        let yf = y_train.select(Axis(0), &tr);
        let bases = BaseModels {
            lr: fit_ridge(xf.view(), yf.view(), lambda)?.0,
            rf: fit_forest(xf.view(), yf.view(), &forest_cfg)?,
            gbt: fit_gbt(xf.view(), yf.view(), &gbt_cfg)?.model,
        };
        for &i in &te {
            let p = bases.predict_row(&xt.row(i).to_vec());
            for (j, v) in p.into_iter().enumerate() {
                oof[[i, j]] = v;
            }
        }
    }
    let (meta, meta_lambda) = fit_meta(oof.view(), y_train, &folds, &cfg.meta_lambdas, cfg.meta_nonneg)?;

    let adaptive_alpha = if category == Category::Long { cfg.alpha } else { 1.0 };
    let mut model = CategoryModel {
        category,
        scaler,
        bases: BaseModels { lr, rf, gbt },
        meta,
        fixed,
        adaptive_alpha,
        mode: EnsembleMode::Stacking,
        pooled_fallback,
    };

    let yv: Vec<f64> = y_val.to_vec();
    let mut val_r2 = [0.0; 2];
    for (slot, mode) in EnsembleMode::ALL.into_iter().enumerate() {
        let pred: Vec<f64> = xv.rows().into_iter().map(|r| model.predict_scaled(&r.to_vec(), mode).0).collect();
        val_r2[slot] = compute_metrics(&yv, &pred)?.r2;
    }
    model.mode = match cfg.mode {
        super::ModeSelection::Stacking => EnsembleMode::Stacking,
        super::ModeSelection::Fixed => EnsembleMode::Fixed,
        super::ModeSelection::Both if val_r2[1] > val_r2[0] => EnsembleMode::Fixed,
        super::ModeSelection::Both => EnsembleMode::Stacking,
    };

    let report = CategoryFitReport {
        category,
        n_train: n,
        n_val: y_val.len(),
        pooled_fallback,
        ridge_lambda: lambda,
        ridge_jitter: jitter,
        forest: forest_cfg,
        gbt: gbt_cfg,
        meta_lambda,
        val_mae,
        val_r2_stacking: val_r2[0],
        val_r2_fixed: val_r2[1],
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};
    use rand::Rng;

    #[test]
    fn folds_are_balanced_and_seeded() {
        let f = kfold_assignment(11, 5, 3).unwrap();
        let mut counts = [0; 5];
        f.iter().for_each(|&i| counts[i] += 1);
        assert!(counts.iter().all(|&c| c == 2 || c == 3));
        assert_eq!(f, kfold_assignment(11, 5, 3).unwrap());
        assert!(kfold_assignment(3, 5, 0).is_err());
        assert!(kfold_assignment(3, 1, 0).is_err());
    }

    fn targets(n: usize, seed: u64) -> Array1<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-3.0..-1.0)).collect()
    }

    #[test]
    fn perfect_bases_reproduce_targets() {
        let y = targets(40, 1);
        let oof = Array2::from_shape_fn((40, 3), |(i, _)| y[i]);
        let folds = kfold_assignment(40, 5, 0).unwrap();
        let (meta, _) = fit_meta(oof.view(), y.view(), &folds, &[0.01, 0.1, 1.0], false).unwrap();
        let mse: f64 = (0..40)
            .map(|i| (meta.predict_row(&oof.row(i).to_vec()) - y[i]).powi(2))
            .sum::<f64>()
            / 40.0;
        assert!(mse < 1e-4, "{mse}");
    }

    #[test]
    fn noisy_base_gets_small_weight() {
        let y = targets(60, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let oof = Array2::from_shape_fn((60, 3), |(i, j)| if j == 1 { rng.random_range(-3.0..-1.0) } else { y[i] });
        let folds = kfold_assignment(60, 5, 1).unwrap();
        let (meta, _) = fit_meta(oof.view(), y.view(), &folds, &[0.01, 0.1, 1.0], false).unwrap();
        assert!(meta.weights[1].abs() < meta.weights[0].abs());
        assert!(meta.weights[1].abs() < meta.weights[2].abs());
    }

    #[test]
    fn leave_one_out_meta() {
        let y = targets(6, 3);
        let oof = Array2::from_shape_fn((6, 3), |(i, j)| y[i] + 0.01 * j as f64);
        let folds = kfold_assignment(6, 6, 0).unwrap();
        let (meta, _) = fit_meta(oof.view(), y.view(), &folds, &[0.01, 0.1, 1.0], false).unwrap();
        assert!(meta.weights.iter().all(|w| w.is_finite()));
    }
}
