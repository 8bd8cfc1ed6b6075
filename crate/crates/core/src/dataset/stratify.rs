//! Length thresholds, Short/Medium/Long categorization and seeded stratified splits.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::hash::derive_seed;

/// SMILES-length cut points at the 33rd and 66th percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthThresholds {
    pub q33: f64,
    pub q66: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Short,
    Medium,
    Long,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Short, Category::Medium, Category::Long];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Short => "short",
            Category::Medium => "medium",
            Category::Long => "long",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which records the length percentiles are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdPolicy {
    Train,
    All,
}

impl FromStr for ThresholdPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(ThresholdPolicy::Train),
            "all" => Ok(ThresholdPolicy::All),
            _ => Err(format!("thresholds policy must be 'train' or 'all', got '{s}'")),
        }
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdPolicy::Train => "train",
            ThresholdPolicy::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, DatasetError> {
        let r = SplitRatios { train, val, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0)
            || ((self.train + self.val + self.test) - 1.0).abs() > 1e-9
        {
            return Err(DatasetError::InvalidRatios(format!(
                "{},{},{}",
                self.train, self.val, self.test
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SplitRatios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.train, self.val, self.test)
    }
}

impl FromStr for SplitRatios {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| DatasetError::InvalidRatios(s.to_string()))?;
        match parts.as_slice() {
            [a, b, c] => SplitRatios::new(*a, *b, *c),
            _ => Err(DatasetError::InvalidRatios(s.to_string())),
        }
    }
}

/// Percentile by linear interpolation between closest ranks: rank
/// `r = 1 + p(n-1)/100` over the ascending values.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = 1.0 + p * (sorted.len() - 1) as f64 / 100.0;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if lo >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
}

pub fn compute_thresholds(lengths: &[usize]) -> Result<LengthThresholds, DatasetError> {
    if lengths.len() < 3 {
        return Err(DatasetError::TooFewRecords {
            needed: 3,
            got: lengths.len(),
        });
    }
    let mut sorted: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(LengthThresholds {
        q33: percentile(&sorted, 33.0),
        q66: percentile(&sorted, 66.0),
    })
}

pub fn categorize(length: usize, t: &LengthThresholds) -> Category {
    let l = length as f64;
    if l <= t.q33 {
        Category::Short
    } else if l <= t.q66 {
        Category::Medium
    } else {
        Category::Long
    }
}

/// Category and split assignment for every record of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedDataset {
    pub categories: Vec<Category>,
    pub splits: Vec<Split>,
    pub thresholds: LengthThresholds,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl StratifiedDataset {
    pub fn indices(&self, category: Option<Category>, split: Split) -> Vec<usize> {
        (0..self.splits.len())
            .filter(|&i| self.splits[i] == split && category.is_none_or(|c| self.categories[i] == c))
            .collect()
    }
}

/// Seeded split within length bands.
///
/// Bands for the split are taken from percentiles over all records (the
/// sampling design only; no targets are involved). The thresholds stored for
/// routing follow `policy`: with `Train` they are recomputed from the
/// training partition alone and every record is re-categorized with them.
pub fn split(
    lengths: &[usize],
    ratios: SplitRatios,
    seed: u64,
    policy: ThresholdPolicy,
) -> Result<StratifiedDataset, DatasetError> {
    ratios.validate()?;
    let sampling = compute_thresholds(lengths)?;
    let mut splits = vec![Split::Train; lengths.len()];
    let mut warnings = Vec::new();

    for cat in Category::ALL {
        let mut members: Vec<usize> = (0..lengths.len())
            .filter(|&i| categorize(lengths[i], &sampling) == cat)
            .collect();
        let n = members.len();
        if n < 3 {
            if n > 0 {
                warnings.push(format!(
                    "{cat} band has {n} record(s); all assigned to train"
                ));
            }
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("split/{cat}")));
        members.shuffle(&mut rng);
        let n_val = ((n as f64 * ratios.val).round() as usize).max(1);
        let n_test = ((n as f64 * ratios.test).round() as usize).max(1);
        let n_train = n.saturating_sub(n_val + n_test).max(1);
        let n_val = n_val.min(n - n_train - 1);
        for (k, &i) in members.iter().enumerate() {
            splits[i] = if k < n_train {
                Split::Train
            } else if k < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }

    let thresholds = match policy {
        ThresholdPolicy::All => sampling,
        ThresholdPolicy::Train => {
            let train: Vec<usize> = (0..lengths.len())
                .filter(|&i| splits[i] == Split::Train)
                .map(|i| lengths[i])
                .collect();
            compute_thresholds(&train)?
        }
    };
    let categories = lengths.iter().map(|&l| categorize(l, &thresholds)).collect();
    Ok(StratifiedDataset {
        categories,
        splits,
        thresholds,
        seed,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_examples() {
        let t = compute_thresholds(&[10, 20, 30]).unwrap();
        assert!((t.q33 - 16.6).abs() < 1e-12);
        assert!((t.q66 - 23.2).abs() < 1e-12);
        let t = compute_thresholds(&[50; 7]).unwrap();
        assert_eq!((t.q33, t.q66), (50.0, 50.0));
        let lengths: Vec<usize> = (38..=108).collect();
        let t = compute_thresholds(&lengths).unwrap();
        assert!(t.q33 < t.q66);
        assert!(compute_thresholds(&[1, 2]).is_err());
    }

    #[test]
    fn boundaries_use_less_or_equal() {
        let t = LengthThresholds { q33: 50.0, q66: 70.0 };
        assert_eq!(categorize(50, &t), Category::Short);
        assert_eq!(categorize(51, &t), Category::Medium);
        assert_eq!(categorize(70, &t), Category::Medium);
        assert_eq!(categorize(71, &t), Category::Long);
    }

    fn three_bands() -> Vec<usize> {
        let mut l = vec![10; 100];
        l.extend(vec![20; 100]);
        l.extend(vec![30; 100]);
        l
    }

    #[test]
    fn split_counts_per_band() {
        let l = three_bands();
        let s = split(&l, SplitRatios::default(), 3, ThresholdPolicy::All).unwrap();
        for cat in Category::ALL {
            assert_eq!(s.indices(Some(cat), Split::Train).len(), 70);
            assert_eq!(s.indices(Some(cat), Split::Val).len(), 15);
            assert_eq!(s.indices(Some(cat), Split::Test).len(), 15);
        }
    }

    #[test]
    fn seeds() {
        let l = three_bands();
        let a = split(&l, SplitRatios::default(), 11, ThresholdPolicy::Train).unwrap();
        let b = split(&l, SplitRatios::default(), 11, ThresholdPolicy::Train).unwrap();
        let c = split(&l, SplitRatios::default(), 12, ThresholdPolicy::Train).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.splits, c.splits);
        assert_eq!(
            a.indices(None, Split::Test).len(),
            c.indices(None, Split::Test).len()
        );
    }

    #[test]
    fn tiny_band_goes_to_train() {
        let s = split(&[10, 20, 30], SplitRatios::default(), 1, ThresholdPolicy::Train).unwrap();
        assert!(s.splits.iter().all(|&x| x == Split::Train));
        assert_eq!(s.warnings.len(), 3);
        let s = split(&[10, 20, 30, 30, 30], SplitRatios::default(), 1, ThresholdPolicy::All).unwrap();
        assert_eq!(s.splits[0], Split::Train);
    }

    #[test]
    fn ratios_parse_and_validate() {
        assert!("0.7,0.15,0.15".parse::<SplitRatios>().is_ok());
        assert!("0.7,0.2,0.2".parse::<SplitRatios>().is_err());
        assert!("0.7,0.3".parse::<SplitRatios>().is_err());
        assert!("1,0,0".parse::<SplitRatios>().is_err());
    }
}
