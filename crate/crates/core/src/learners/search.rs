//! Exhaustive validation-MAE grid search.

use ndarray::{ArrayView1, ArrayView2};

use super::{ForestConfig, GbtConfig, LearnerError, Regressor, RidgeConfig};

/// Size ordering used to break ties in validation error; smaller keys win.
pub trait ModelSize {
    /// `(tree count, -lambda)`.
    fn size_key(&self) -> (usize, f64);
}

impl ModelSize for RidgeConfig {
    fn size_key(&self) -> (usize, f64) {
        (0, -self.lambda)
    }
}

impl ModelSize for ForestConfig {
    fn size_key(&self) -> (usize, f64) {
        (self.n_trees, 0.0)
    }
}

impl ModelSize for GbtConfig {
    fn size_key(&self) -> (usize, f64) {
        (self.rounds, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<C> {
    pub config: C,
    pub val_mae: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport<C> {
    pub candidates: Vec<Candidate<C>>,
    pub best: usize,
}

impl<C> SearchReport<C> {
    pub fn best(&self) -> &Candidate<C> {
        &self.candidates[self.best]
    }
}

/// Fits every config, scores it on the validation rows and returns the
/// winner with its model. Ties on MAE go to the smaller model.
pub fn grid_search<C, M, F>(
    grid: &[C],
    mut fit: F,
    x_val: ArrayView2<'_, f64>,
    y_val: ArrayView1<'_, f64>,
) -> Result<(M, SearchReport<C>), LearnerError>
where
    C: Clone + ModelSize,
    M: Regressor,
    F: FnMut(&C) -> Result<M, LearnerError>,
{
    if grid.is_empty() {
        return Err(LearnerError::EmptyGrid);
    }
    if y_val.is_empty() {
        return Err(LearnerError::Empty);
    }
    let mut best: Option<(usize, M)> = None;
    let mut candidates = Vec::with_capacity(grid.len());
    for (i, cfg) in grid.iter().enumerate() {
        let model = fit(cfg)?;
        let pred = model.predict(x_val);
        let mae = pred
            .iter()
            .zip(y_val)
            .map(|(p, y)| (p - y).abs())
            .sum::<f64>()
            / y_val.len() as f64;
        candidates.push(Candidate {
            config: cfg.clone(),
            val_mae: mae,
        });
        let better = match &best {
            None => true,
            Some((b, _)) => {
                let cur = &candidates[*b];
                mae < cur.val_mae
                    || (mae == cur.val_mae
                        && cfg.size_key().partial_cmp(&cur.config.size_key())
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((i, model));
        }
    }
    let (b, model) = best.expect("non-empty grid");
    Ok((model, SearchReport { candidates, best: b }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{fit_ridge, RidgeModel};
    use ndarray::array;

    fn fit_const(c: &RidgeConfig) -> Result<RidgeModel, LearnerError> {
        // Predicts the constant `lambda`, which makes MAE easy to control.
        Ok(RidgeModel {
            weights: vec![0.0],
            intercept: c.lambda,
            lambda: c.lambda,
        })
    }

    #[test]
    fn single_and_better() {
        let xv = array![[0.0], [0.0]];
        let yv = array![1.0, 1.0];
        let (_, r) = grid_search(&[RidgeConfig { lambda: 3.0 }], fit_const, xv.view(), yv.view()).unwrap();
        assert_eq!(r.best, 0);
        let grid = [RidgeConfig { lambda: 3.0 }, RidgeConfig { lambda: 1.5 }];
        let (m, r) = grid_search(&grid, fit_const, xv.view(), yv.view()).unwrap();
        assert_eq!(r.best, 1);
        assert_eq!(m.lambda, 1.5);
    }

    #[test]
    fn tie_prefers_smaller_model() {
        let xv = array![[0.0], [0.0]];
        let yv = array![1.0, 1.0];
        // MAE 1 for both lambda 0 and 2: the larger lambda wins.
        let grid = [RidgeConfig { lambda: 0.0 }, RidgeConfig { lambda: 2.0 }];
        let (_, r) = grid_search(&grid, fit_const, xv.view(), yv.view()).unwrap();
        assert_eq!(r.best().config.lambda, 2.0);
        let trees = [
            ForestConfig { n_trees: 50, ..Default::default() },
            ForestConfig { n_trees: 10, ..Default::default() },
        ];
        let fit = |_: &ForestConfig| fit_ridge(xv.view(), yv.view(), 0.0).map(|m| m.0);
        let (_, r) = grid_search(&trees, fit, xv.view(), yv.view()).unwrap();
        assert_eq!(r.best().config.n_trees, 10);
    }

    #[test]
    fn empty_grid() {
        let xv = array![[0.0]];
        let yv = array![1.0];
        let grid: [RidgeConfig; 0] = [];
        assert!(matches!(
            grid_search(&grid, fit_const, xv.view(), yv.view()),
            Err(LearnerError::EmptyGrid)
        ));
    }
}
