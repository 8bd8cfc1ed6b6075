//! CART regression trees on squared error.

use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{canonical_order, validate_xy, LearnerError, Regressor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    /// Minimum (multiplicity-weighted) sample count per leaf.
    pub min_leaf: usize,
    /// Features drawn per node; `None` considers all of them.
    pub m_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_leaf: 1,
            m_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node array; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub(crate) fn set_leaf_value(&mut self, id: usize, v: f64) {
        if let Node::Leaf { value } = &mut self.nodes[id] {
            *value = v;
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &RegressionTree, id: usize) -> usize {
            match t.nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Features used by at least one split.
    pub fn used_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }
}

impl Regressor for RegressionTree {
    fn predict_row(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_of(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }
}

/// Training matrix stored column-major for split scans.
pub(crate) struct Columns {
    pub n: usize,
    pub p: usize,
    data: Vec<f64>,
}

impl Columns {
    pub fn new(x: ArrayView2<'_, f64>) -> Columns {
        let (n, p) = x.dim();
        let mut data = Vec::with_capacity(n * p);
        for j in 0..p {
            data.extend(x.column(j).iter());
        }
        Columns { n, p, data }
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    /// Features that are not constant over all rows.
    pub fn varying(&self) -> Vec<usize> {
        (0..self.p)
            .filter(|&j| {
                let c = self.col(j);
                c.iter().any(|&v| v != c[0])
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Best {
    fn improved_by(&self, gain: f64, feature: usize, threshold: f64, tol: f64) -> bool {
        if gain > self.gain + tol {
            return true;
        }
        if gain >= self.gain - tol {
            return (feature, threshold) < (self.feature, self.threshold);
        }
        false
    }
}

pub(crate) struct Grower<'a> {
    pub cols: &'a Columns,
    pub y: &'a [f64],
    pub active: &'a [usize],
    pub cfg: TreeConfig,
}

pub(crate) struct Grown {
    pub tree: RegressionTree,
    /// Squared-error reduction per feature.
    pub importance: Vec<f64>,
}

impl Grower<'_> {
    /// Grows one tree over `(row, weight)` samples, which must be in
    /// ascending row order.
    pub fn grow(&self, mut samples: Vec<(usize, f64)>, rng: &mut ChaCha8Rng) -> Grown {
        let min_leaf = self.cfg.min_leaf.max(1) as f64;
        let mut nodes = vec![Node::Leaf { value: 0.0 }];
        let mut importance = vec![0.0; self.cols.p];
        let mut stack = vec![(0usize, 0usize, samples.len(), 0usize, self.active.to_vec())];
        let mut buf: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
        let mut dead = vec![false; self.cols.p];
        let mut scratch: Vec<(usize, f64)> = Vec::with_capacity(samples.len());

        while let Some((id, lo, hi, depth, mut pool)) = stack.pop() {
            let node = &samples[lo..hi];
            let (mut w_sum, mut s_sum, mut sq_sum) = (0.0, 0.0, 0.0);
            for &(r, w) in node {
                let v = self.y[r];
                w_sum += w;
                s_sum += w * v;
                sq_sum += w * v * v;
            }
            let mean = s_sum / w_sum;
            nodes[id] = Node::Leaf { value: mean };
            let first_y = self.y[node[0].0];
            if self.cfg.max_depth.is_some_and(|d| depth >= d)
                || w_sum < 2.0 * min_leaf
                || node.iter().all(|&(r, _)| self.y[r] == first_y)
            {
                continue;
            }

            let tol = 1e-12 * (1.0 + sq_sum);
            let base = s_sum * s_sum / w_sum;
            let mut best = Best {
                gain: f64::NEG_INFINITY,
                feature: usize::MAX,
                threshold: f64::INFINITY,
            };
            let m = self.cfg.m_features.unwrap_or(pool.len()).min(pool.len());
            let mut found = 0;
            let mut k = 0;
            while k < pool.len() && found < m {
                if m < pool.len() {
                    let j = rng.random_range(k..pool.len());
                    pool.swap(k, j);
                }
                let f = pool[k];
                k += 1;
                let col = self.cols.col(f);
                let v0 = col[node[0].0];
                let mut v1 = v0;
                let mut binary = true;
                let (mut w0, mut s0, mut w1, mut s1) = (0.0, 0.0, 0.0, 0.0);
                for &(r, w) in node {
                    let v = col[r];
                    if v == v0 {
                        w0 += w;
                        s0 += w * self.y[r];
                        continue;
                    }
                    if v1 == v0 {
                        v1 = v;
                    } else if v != v1 {
                        binary = false;
                        break;
                    }
                    w1 += w;
                    s1 += w * self.y[r];
                }
                if v1 == v0 {
                    dead[f] = true;
                    continue;
                }
                found += 1;
                if binary {
                    let (lo_v, hi_v, wl, sl) = if v0 < v1 { (v0, v1, w0, s0) } else { (v1, v0, w1, s1) };
                    let wr = w_sum - wl;
                    if wl >= min_leaf && wr >= min_leaf {
                        let sr = s_sum - sl;
                        let gain = sl * sl / wl + sr * sr / wr - base;
                        let mut thr = 0.5 * (lo_v + hi_v);
                        if thr >= hi_v {
                            thr = lo_v;
                        }
                        if gain > tol && best.improved_by(gain, f, thr, tol) {
                            best = Best {
                                gain,
                                feature: f,
                                threshold: thr,
                            };
                        }
                    }
                    continue;
                }
                buf.clear();
                buf.extend(node.iter().enumerate().map(|(i, &(r, _))| (col[r], i)));
                buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let (mut wl, mut sl) = (0.0, 0.0);
                for t in 0..buf.len() - 1 {
                    let (v, i) = buf[t];
                    let (r, w) = node[i];
                    wl += w;
                    sl += w * self.y[r];
                    let next = buf[t + 1].0;
                    if next == v || wl < min_leaf {
                        continue;
                    }
                    let wr = w_sum - wl;
                    if wr < min_leaf {
                        break;
                    }
                    let sr = s_sum - sl;
                    let gain = sl * sl / wl + sr * sr / wr - base;
                    let mut thr = 0.5 * (v + next);
                    if thr >= next {
                        thr = v;
                    }
                    if gain > tol && best.improved_by(gain, f, thr, tol) {
                        best = Best {
                            gain,
                            feature: f,
                            threshold: thr,
                        };
                    }
                }
            }
            // Features constant here stay constant in every descendant.
            pool.retain(|&f| !std::mem::replace(&mut dead[f], false));
            if best.feature == usize::MAX {
                continue;
            }

            let col = self.cols.col(best.feature);
            scratch.clear();
            scratch.extend(samples[lo..hi].iter().filter(|&&(r, _)| col[r] <= best.threshold));
            let mid = lo + scratch.len();
            scratch.extend(samples[lo..hi].iter().filter(|&&(r, _)| col[r] > best.threshold));
            samples[lo..hi].copy_from_slice(&scratch);

            importance[best.feature] += best.gain.max(0.0);
            let left = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            let right = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[id] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
            };
            stack.push((right, mid, hi, depth + 1, pool.clone()));
            stack.push((left, lo, mid, depth + 1, pool));
        }
        Grown {
            tree: RegressionTree { nodes },
            importance,
        }
    }
}

/// Fits a single CART tree on all rows (unit weights).
pub fn fit_tree(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    cfg: TreeConfig,
    seed: u64,
) -> Result<RegressionTree, LearnerError> {
    validate_xy(x, y)?;
    let order = canonical_order(x, y);
    let xs = x.select(ndarray::Axis(0), &order);
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let cols = Columns::new(xs.view());
    let active = cols.varying();
    let grower = Grower {
        cols: &cols,
        y: &ys,
        active: &active,
        cfg,
    };
    let samples = (0..ys.len()).map(|r| (r, 1.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(grower.grow(samples, &mut rng).tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};

    #[test]
    fn step_function_is_learned_exactly() {
        let x = Array2::from_shape_fn((40, 2), |(i, j)| if j == 0 { i as f64 } else { (i * 7 % 5) as f64 });
        let y: Array1<f64> = (0..40).map(|i| if i < 17 { 1.0 } else { 3.0 }).collect();
        let t = fit_tree(x.view(), y.view(), TreeConfig::default(), 0).unwrap();
        assert_eq!(t.predict(x.view()), y);
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(
            t.nodes[0],
            Node::Split {
                feature: 0,
                threshold: 16.5,
                left: 1,
                right: 2
            }
        );
    }

    #[test]
    fn constant_target_is_single_leaf() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![4.0, 4.0, 4.0];
        let t = fit_tree(x.view(), y.view(), TreeConfig::default(), 0).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 4.0 }]);
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // Two identical columns: the split must use feature 0.
        let x = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]];
        let y = array![0.0, 0.0, 1.0, 1.0];
        let t = fit_tree(x.view(), y.view(), TreeConfig::default(), 0).unwrap();
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 2.5));
    }

    #[test]
    fn limits_are_respected() {
        let x = Array2::from_shape_fn((64, 1), |(i, _)| i as f64);
        let y: Array1<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        let cfg = TreeConfig {
            max_depth: Some(3),
            min_leaf: 5,
            m_features: None,
        };
        let t = fit_tree(x.view(), y.view(), cfg, 0).unwrap();
        assert!(t.depth() <= 3);
        let mut counts = vec![0usize; t.nodes.len()];
        for i in 0..64 {
            counts[t.leaf_of(&[i as f64])] += 1;
        }
        for (id, n) in t.nodes.iter().enumerate() {
            if matches!(n, Node::Leaf { .. }) {
                assert!(counts[id] >= 5);
            }
        }
    }

    #[test]
    fn leaves_hold_target_means() {
        let x = array![[0.0], [0.0], [1.0], [1.0]];
        let y = array![1.0, 2.0, 10.0, 20.0];
        let t = fit_tree(x.view(), y.view(), TreeConfig::default(), 0).unwrap();
        assert_eq!(t.predict_row(&[0.0]), 1.5);
        assert_eq!(t.predict_row(&[1.0]), 15.0);
    }
}
