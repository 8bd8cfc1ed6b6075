//! Gradient-boosted regression trees with squared loss, shrinkage and row
//! subsampling.

use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Columns, Grower};
use super::{canonical_order, validate_xy, LearnerError, RegressionTree, Regressor, TreeConfig};
use crate::hash::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub rounds: usize,
    pub eta: f64,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Fraction of rows drawn (without replacement) to grow each tree.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            rounds: 300,
            eta: 0.05,
            max_depth: Some(4),
            min_leaf: 5,
            subsample: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub eta: f64,
    pub trees: Vec<RegressionTree>,
}

impl Regressor for GbtModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        let s: f64 = self.trees.iter().map(|t| t.predict_row(x)).sum();
        self.base_score + self.eta * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtFit {
    pub model: GbtModel,
    /// Training MSE before the first round and after each round.
    pub train_mse: Vec<f64>,
}

/// Each round grows a tree on a subsample of the current residuals, then
/// sets every leaf to the mean residual of all training rows it holds.
pub fn fit_gbt(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    cfg: &GbtConfig,
) -> Result<GbtFit, LearnerError> {
    validate_xy(x, y)?;
    if cfg.rounds == 0 {
        return Err(LearnerError::InvalidConfig("rounds must be >= 1".into()));
    }
    if !(cfg.eta > 0.0 && cfg.eta <= 1.0) {
        return Err(LearnerError::InvalidConfig(format!("eta must be in (0, 1], got {}", cfg.eta)));
    }
    if !(cfg.subsample > 0.0 && cfg.subsample <= 1.0) {
        return Err(LearnerError::InvalidConfig(format!(
            "subsample must be in (0, 1], got {}",
            cfg.subsample
        )));
    }
    let order = canonical_order(x, y);
    let xs = x.select(Axis(0), &order);
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let n = ys.len();
    let cols = Columns::new(xs.view());
    let active = cols.varying();
    let tree_cfg = TreeConfig {
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
        m_features: None,
    };
    let k = ((n as f64 * cfg.subsample).round() as usize).clamp(1, n);

    let base_score = ys.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mse = |pred: &[f64]| ys.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64;
    let mut train_mse = vec![mse(&pred)];
    let mut trees = Vec::with_capacity(cfg.rounds);
    let mut resid = vec![0.0; n];
    let mut leaf_of = vec![0usize; n];
    let rows: Vec<Vec<f64>> = xs.rows().into_iter().map(|r| r.to_vec()).collect();

    for round in 0..cfg.rounds {
        for i in 0..n {
            resid[i] = ys[i] - pred[i];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("gbt/round/{round}")));
        let samples: Vec<(usize, f64)> = if k == n {
            (0..n).map(|r| (r, 1.0)).collect()
        } else {
            let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|r| (r, 1.0)).collect()
        };
        let grower = Grower {
            cols: &cols,
            y: &resid,
            active: &active,
            cfg: tree_cfg,
        };
        let mut tree = grower.grow(samples, &mut rng).tree;

        let mut sums = vec![(0.0f64, 0usize); tree.nodes.len()];
        for i in 0..n {
            leaf_of[i] = tree.leaf_of(&rows[i]);
            sums[leaf_of[i]].0 += resid[i];
            sums[leaf_of[i]].1 += 1;
        }
        for (id, &(s, c)) in sums.iter().enumerate() {
            if c > 0 {
                tree.set_leaf_value(id, s / c as f64);
            }
        }
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let (s, c) = sums[leaf_of[i]];
                pred[i] + cfg.eta * (s / c as f64)
            })
            .collect();
        let loss = mse(&next);
        let prev = *train_mse.last().expect("seeded with the base loss");
        if loss <= prev {
            pred = next;
            train_mse.push(loss);
        } else {
            // Only reachable through rounding once residuals are ~0.
            for id in 0..tree.nodes.len() {
                tree.set_leaf_value(id, 0.0);
            }
            train_mse.push(prev);
        }
        trees.push(tree);
    }
    Ok(GbtFit {
        model: GbtModel {
            base_score,
            eta: cfg.eta,
            trees,
        },
        train_mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::fit_tree;
    use ndarray::{Array1, Array2};
    use rand::Rng;

    fn linear(n: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-2.0..2.0));
        let y = x.column(0).mapv(|v| 2.0 * v) - x.column(1) + 0.5;
        (x, y)
    }

    #[test]
    fn one_round_equals_cart_plus_base() {
        let (x, y) = linear(40, 1);
        let cfg = GbtConfig {
            rounds: 1,
            eta: 1.0,
            max_depth: None,
            min_leaf: 1,
            subsample: 1.0,
            seed: 3,
        };
        let g = fit_gbt(x.view(), y.view(), &cfg).unwrap().model;
        let t = fit_tree(x.view(), y.view(), TreeConfig::default(), 0).unwrap();
        for r in x.rows() {
            let r = r.to_vec();
            assert!((g.predict_row(&r) - t.predict_row(&r)).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_training_loss() {
        for seed in 0..5 {
            let (x, y) = linear(80, seed);
            let fit = fit_gbt(x.view(), y.view(), &GbtConfig { rounds: 50, seed, ..Default::default() }).unwrap();
            assert!(fit.train_mse.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn fits_linear_data() {
        let (x, y) = linear(200, 7);
        let cfg = GbtConfig { rounds: 200, eta: 0.1, ..Default::default() };
        let fit = fit_gbt(x.view(), y.view(), &cfg).unwrap();
        let var = y.var(0.0);
        assert!(1.0 - fit.train_mse.last().unwrap() / var >= 0.95);
    }

    #[test]
    fn interpolates_distinct_inputs() {
        let (x, y) = linear(30, 2);
        let cfg = GbtConfig {
            rounds: 30,
            eta: 1.0,
            max_depth: None,
            min_leaf: 1,
            subsample: 1.0,
            seed: 0,
        };
        let fit = fit_gbt(x.view(), y.view(), &cfg).unwrap();
        assert!(*fit.train_mse.last().unwrap() < 1e-20);
    }

    #[test]
    fn rejects_bad_eta() {
        let (x, y) = linear(10, 0);
        assert!(fit_gbt(x.view(), y.view(), &GbtConfig { eta: 1.5, ..Default::default() }).is_err());
    }
}
