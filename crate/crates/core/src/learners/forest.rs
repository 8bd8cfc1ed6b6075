//! Bagged CART forest with per-node feature subsampling.

use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Columns, Grower};
use super::{canonical_order, validate_xy, LearnerError, RegressionTree, Regressor, TreeConfig};
use crate::hash::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features drawn per node; `None` means ⌈p/3⌉.
    pub m_features: Option<usize>,
    /// Draw a bootstrap sample per tree; otherwise every tree sees all rows.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 300,
            max_depth: None,
            min_leaf: 2,
            m_features: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub m_features: usize,
    pub n_features: usize,
    pub tree_seeds: Vec<u64>,
    /// Impurity importance summed over trees, normalized to sum 1
    /// (all zero when no tree split).
    pub importance: Vec<f64>,
}

impl Regressor for ForestModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        let s: f64 = self.trees.iter().map(|t| t.predict_row(x)).sum();
        s / self.trees.len() as f64
    }
}

impl ForestModel {
    pub fn used_features(&self) -> Vec<bool> {
        let mut used = vec![false; self.n_features];
        for t in &self.trees {
            for f in t.used_features() {
                used[f] = true;
            }
        }
        used
    }
}

pub fn tree_seed(seed: u64, tree: usize) -> u64 {
    derive_seed(seed, &format!("forest/tree/{tree}"))
}

pub fn fit_forest(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    cfg: &ForestConfig,
) -> Result<ForestModel, LearnerError> {
    validate_xy(x, y)?;
    let p = x.ncols();
    if cfg.n_trees == 0 {
        return Err(LearnerError::InvalidConfig("n_trees must be >= 1".into()));
    }
    let m = match cfg.m_features {
        Some(m) if m == 0 || m > p.max(1) => {
            return Err(LearnerError::InvalidConfig(format!(
                "m_features must be in 1..={p}, got {m}"
            )))
        }
        Some(m) => m,
        None => p.div_ceil(3).max(1),
    };
    let order = canonical_order(x, y);
    let xs = x.select(Axis(0), &order);
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let cols = Columns::new(xs.view());
    let active = cols.varying();
    let grower = Grower {
        cols: &cols,
        y: &ys,
        active: &active,
        cfg: TreeConfig {
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf,
            m_features: Some(m),
        },
    };
    let n = ys.len();
    let tree_seeds: Vec<u64> = (0..cfg.n_trees).map(|t| tree_seed(cfg.seed, t)).collect();
    let grown: Vec<_> = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let samples: Vec<(usize, f64)> = if cfg.bootstrap {
                let mut counts = vec![0u32; n];
                for _ in 0..n {
                    counts[rng.random_range(0..n)] += 1;
                }
                counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(r, &c)| (r, f64::from(c)))
                    .collect()
            } else {
                (0..n).map(|r| (r, 1.0)).collect()
            };
            grower.grow(samples, &mut rng)
        })
        .collect();

    let mut importance = vec![0.0; p];
    let mut trees = Vec::with_capacity(grown.len());
    for g in grown {
        for (acc, v) in importance.iter_mut().zip(&g.importance) {
            *acc += v;
        }
        trees.push(g.tree);
    }
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        importance.iter_mut().for_each(|v| *v /= total);
    }
    Ok(ForestModel {
        trees,
        m_features: m,
        n_features: p,
        tree_seeds,
        importance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};

    fn data(n: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(-1.0..1.0));
        let y = x.column(0).mapv(|v| 3.0 * v) + x.column(1).mapv(|v| v * v);
        (x, y)
    }

    #[test]
    fn constant_target() {
        let (x, _) = data(30, 1);
        let y = Array1::from_elem(30, 2.5);
        let f = fit_forest(x.view(), y.view(), &ForestConfig { n_trees: 5, ..Default::default() }).unwrap();
        assert!(f.predict(x.view()).iter().all(|&v| v == 2.5));
        assert!(f.importance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_target_without_bootstrap() {
        let x = Array2::from_shape_fn((50, 1), |(i, _)| i as f64);
        let y: Array1<f64> = (0..50).map(|i| if i < 20 { 0.0 } else { 1.0 }).collect();
        let cfg = ForestConfig {
            n_trees: 3,
            min_leaf: 1,
            bootstrap: false,
            ..Default::default()
        };
        let f = fit_forest(x.view(), y.view(), &cfg).unwrap();
        assert_eq!(f.predict(x.view()), y);
    }

    #[test]
    fn deterministic_and_order_invariant() {
        let (x, y) = data(60, 2);
        let cfg = ForestConfig { n_trees: 20, seed: 9, ..Default::default() };
        let a = fit_forest(x.view(), y.view(), &cfg).unwrap();
        let b = fit_forest(x.view(), y.view(), &cfg).unwrap();
        assert_eq!(a, b);
        let perm: Vec<usize> = (0..60).rev().collect();
        let c = fit_forest(x.select(Axis(0), &perm).view(), y.select(Axis(0), &perm).view(), &cfg).unwrap();
        assert_eq!(a.predict(x.view()), c.predict(x.view()));
    }

    #[test]
    fn importance_finds_the_signal() {
        let (x, y) = data(200, 3);
        let f = fit_forest(x.view(), y.view(), &ForestConfig { n_trees: 30, ..Default::default() }).unwrap();
        let s: f64 = f.importance.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(f.importance[0] > f.importance[2] && f.importance[0] > f.importance[3]);
        assert_eq!(f.m_features, 2);
    }

    #[test]
    fn bad_config() {
        let (x, y) = data(10, 4);
        assert!(fit_forest(x.view(), y.view(), &ForestConfig { n_trees: 0, ..Default::default() }).is_err());
        assert!(fit_forest(x.view(), y.view(), &ForestConfig { m_features: Some(5), ..Default::default() }).is_err());
    }
}
