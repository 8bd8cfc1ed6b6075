//! Run configuration in a `key = value` text format. The same format is read
//! from `--config` files and written as the echo of every run.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dataset::{MissingPolicy, SplitRatios, ThresholdPolicy};
use crate::descriptors::{FeatureGroup, DEFAULT_BITS, DEFAULT_RADIUS};
use crate::ensemble::{LearnerGrids, ModeSelection, PipelineConfig};
use crate::evalsuite::AblationPreset;
use crate::learners::{ForestConfig, GbtConfig};

use super::CliError;

pub const ECHO_FILE: &str = "run_config.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub model: Option<PathBuf>,
    pub smiles: Option<String>,
    pub seed: u64,
    pub ratios: SplitRatios,
    pub thresholds_on: ThresholdPolicy,
    pub mode: ModeSelection,
    pub alpha: f64,
    pub missing: MissingPolicy,
    pub morgan_radius: usize,
    pub morgan_bits: usize,
    pub exclude: Vec<FeatureGroup>,
    pub ridge_lambdas: Vec<f64>,
    pub rf_trees: Vec<usize>,
    /// `None` is unbounded.
    pub rf_max_depth: Vec<Option<usize>>,
    pub rf_min_leaf: Vec<usize>,
    /// `None` is ⌈p/3⌉.
    pub rf_m_features: Vec<Option<usize>>,
    pub rf_bootstrap: bool,
    pub gbt_rounds: Vec<usize>,
    pub gbt_eta: Vec<f64>,
    pub gbt_max_depth: Vec<Option<usize>>,
    pub gbt_min_leaf: Vec<usize>,
    pub gbt_subsample: Vec<f64>,
    pub stacking_folds: usize,
    pub meta_lambdas: Vec<f64>,
    pub meta_nonneg: bool,
    pub kfolds: usize,
    pub repeats: usize,
    pub presets: Vec<AblationPreset>,
    pub top_k: usize,
    pub figures: bool,
    pub synth_n_per_band: usize,
    pub synth_noise: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rf = ForestConfig::default();
        let gbt = GbtConfig::default();
        let p = PipelineConfig::default();
        RunConfig {
            command: String::new(),
            input: None,
            output: PathBuf::from("out"),
            model: None,
            smiles: None,
            seed: p.seed,
            ratios: p.ratios,
            thresholds_on: p.thresholds_on,
            mode: p.mode,
            alpha: p.alpha,
            missing: p.missing,
            morgan_radius: DEFAULT_RADIUS,
            morgan_bits: DEFAULT_BITS,
            exclude: Vec::new(),
            ridge_lambdas: p.grids.ridge_lambdas,
            rf_trees: vec![rf.n_trees],
            rf_max_depth: vec![rf.max_depth],
            rf_min_leaf: vec![rf.min_leaf],
            rf_m_features: vec![rf.m_features],
            rf_bootstrap: rf.bootstrap,
            gbt_rounds: vec![gbt.rounds],
            gbt_eta: vec![gbt.eta],
            gbt_max_depth: vec![gbt.max_depth],
            gbt_min_leaf: vec![gbt.min_leaf],
            gbt_subsample: vec![gbt.subsample],
            stacking_folds: p.stacking_folds,
            meta_lambdas: p.meta_lambdas,
            meta_nonneg: p.meta_nonneg,
            kfolds: 5,
            repeats: 3,
            presets: AblationPreset::ALL.to_vec(),
            top_k: 20,
            figures: false,
            synth_n_per_band: 200,
            synth_noise: 0.1,
        }
    }
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| CliError::Config(format!("{key}: cannot parse '{v}': {e}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_one(key, s)).collect()
}

fn parse_opt(key: &str, v: &str, none: &str) -> Result<Option<usize>, CliError> {
    let v = v.trim();
    if v == none {
        Ok(None)
    } else {
        parse_one(key, v).map(Some)
    }
}

fn parse_opt_list(key: &str, v: &str, none: &str) -> Result<Vec<Option<usize>>, CliError> {
    v.split(',').map(|s| parse_opt(key, s, none)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn path_opt(v: &str) -> Option<PathBuf> {
    let v = v.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn join_opt(v: &[Option<usize>], none: &str) -> String {
    v.iter()
        .map(|o| o.map_or(none.to_string(), |x| x.to_string()))
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "command" => self.command = v.to_string(),
            "input" => self.input = path_opt(v),
            "output" => {
                self.output = path_opt(v).ok_or_else(|| CliError::Config("output must not be empty".into()))?
            }
            "model" => self.model = path_opt(v),
            "smiles" => self.smiles = (!v.is_empty()).then(|| v.to_string()),
            "seed" => self.seed = parse_one(key, v)?,
            "ratios" => self.ratios = parse_one(key, v)?,
            "thresholds_on" => self.thresholds_on = parse_one(key, v)?,
            "mode" => self.mode = parse_one(key, v)?,
            "alpha" => self.alpha = parse_one(key, v)?,
            "missing" => self.missing = parse_one(key, v)?,
            "morgan_radius" => self.morgan_radius = parse_one(key, v)?,
            "morgan_bits" => self.morgan_bits = parse_one(key, v)?,
            "exclude" => self.exclude = parse_list(key, v)?,
            "ridge_lambdas" => self.ridge_lambdas = parse_list(key, v)?,
            "rf_trees" => self.rf_trees = parse_list(key, v)?,
            "rf_max_depth" => self.rf_max_depth = parse_opt_list(key, v, "none")?,
            "rf_min_leaf" => self.rf_min_leaf = parse_list(key, v)?,
            "rf_m_features" => self.rf_m_features = parse_opt_list(key, v, "auto")?,
            "rf_bootstrap" => self.rf_bootstrap = parse_bool(key, v)?,
            "gbt_rounds" => self.gbt_rounds = parse_list(key, v)?,
            "gbt_eta" => self.gbt_eta = parse_list(key, v)?,
            "gbt_max_depth" => self.gbt_max_depth = parse_opt_list(key, v, "none")?,
            "gbt_min_leaf" => self.gbt_min_leaf = parse_list(key, v)?,
            "gbt_subsample" => self.gbt_subsample = parse_list(key, v)?,
            "stacking_folds" => self.stacking_folds = parse_one(key, v)?,
            "meta_lambdas" => self.meta_lambdas = parse_list(key, v)?,
            "meta_nonneg" => self.meta_nonneg = parse_bool(key, v)?,
            "kfolds" => self.kfolds = parse_one(key, v)?,
            "repeats" => self.repeats = parse_one(key, v)?,
            "presets" => self.presets = parse_list(key, v)?,
            "top_k" => self.top_k = parse_one(key, v)?,
            "figures" => self.figures = parse_bool(key, v)?,
            "synth_n_per_band" => self.synth_n_per_band = parse_one(key, v)?,
            "synth_noise" => self.synth_noise = parse_one(key, v)?,
            _ => return Err(CliError::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a config file: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", no + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Every effective value, in the format `apply_text` reads.
    pub fn echo(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        let pairs: Vec<(&str, String)> = vec![
            ("command", self.command.clone()),
            ("input", path(&self.input)),
            ("output", self.output.display().to_string()),
            ("model", path(&self.model)),
            ("smiles", self.smiles.clone().unwrap_or_default()),
            ("seed", self.seed.to_string()),
            ("ratios", self.ratios.to_string()),
            ("thresholds_on", self.thresholds_on.to_string()),
            ("mode", self.mode.to_string()),
            ("alpha", self.alpha.to_string()),
            ("missing", self.missing.to_string()),
            ("morgan_radius", self.morgan_radius.to_string()),
            ("morgan_bits", self.morgan_bits.to_string()),
            ("exclude", join(&self.exclude)),
            ("ridge_lambdas", join(&self.ridge_lambdas)),
            ("rf_trees", join(&self.rf_trees)),
            ("rf_max_depth", join_opt(&self.rf_max_depth, "none")),
            ("rf_min_leaf", join(&self.rf_min_leaf)),
            ("rf_m_features", join_opt(&self.rf_m_features, "auto")),
            ("rf_bootstrap", self.rf_bootstrap.to_string()),
            ("gbt_rounds", join(&self.gbt_rounds)),
            ("gbt_eta", join(&self.gbt_eta)),
            ("gbt_max_depth", join_opt(&self.gbt_max_depth, "none")),
            ("gbt_min_leaf", join(&self.gbt_min_leaf)),
            ("gbt_subsample", join(&self.gbt_subsample)),
            ("stacking_folds", self.stacking_folds.to_string()),
            ("meta_lambdas", join(&self.meta_lambdas)),
            ("meta_nonneg", self.meta_nonneg.to_string()),
            ("kfolds", self.kfolds.to_string()),
            ("repeats", self.repeats.to_string()),
            ("presets", join(&self.presets)),
            ("top_k", self.top_k.to_string()),
            ("figures", self.figures.to_string()),
            ("synth_n_per_band", self.synth_n_per_band.to_string()),
            ("synth_noise", self.synth_noise.to_string()),
        ];
        let mut s = String::from("# lengthlogd run configuration\n");
        for (k, v) in pairs {
            let _ = if v.is_empty() { writeln!(s, "{k} =") } else { writeln!(s, "{k} = {v}") };
        }
        s
    }

    /// Cartesian learner grids, in declaration order.
    pub fn grids(&self) -> LearnerGrids {
        let mut forest = Vec::new();
        for &n_trees in &self.rf_trees {
            for &max_depth in &self.rf_max_depth {
                for &min_leaf in &self.rf_min_leaf {
                    for &m_features in &self.rf_m_features {
                        forest.push(ForestConfig {
                            n_trees,
                            max_depth,
                            min_leaf,
                            m_features,
                            bootstrap: self.rf_bootstrap,
                            seed: 0,
                        });
                    }
                }
            }
        }
        let mut gbt = Vec::new();
        for &rounds in &self.gbt_rounds {
            for &eta in &self.gbt_eta {
                for &max_depth in &self.gbt_max_depth {
                    for &min_leaf in &self.gbt_min_leaf {
                        for &subsample in &self.gbt_subsample {
                            gbt.push(GbtConfig {
                                rounds,
                                eta,
                                max_depth,
                                min_leaf,
                                subsample,
                                seed: 0,
                            });
                        }
                    }
                }
            }
        }
        LearnerGrids {
            ridge_lambdas: self.ridge_lambdas.clone(),
            forest,
            gbt,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            seed: self.seed,
            ratios: self.ratios,
            thresholds_on: self.thresholds_on,
            missing: self.missing,
            morgan_radius: self.morgan_radius,
            morgan_bits: self.morgan_bits,
            grids: self.grids(),
            stacking_folds: self.stacking_folds,
            meta_lambdas: self.meta_lambdas.clone(),
            meta_nonneg: self.meta_nonneg,
            alpha: self.alpha,
            mode: self.mode,
            exclude: self.exclude.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig {
            command: "train".into(),
            input: Some("data/in.csv".into()),
            seed: 17,
            alpha: 1.1 + 0.2,
            rf_max_depth: vec![None, Some(8)],
            rf_m_features: vec![None, Some(3)],
            exclude: vec![FeatureGroup::Graph, FeatureGroup::External],
            ..Default::default()
        };
        c.presets = vec![AblationPreset::NoGraph];
        let mut back = RunConfig::default();
        back.apply_text(&c.echo()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.echo(), c.echo());
        assert_eq!(c.grids().forest.len(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("nonsense"), Err(CliError::Config(_))));
        assert!(matches!(c.apply_text("colour = red"), Err(CliError::Config(_))));
        assert!(matches!(c.set("ratios", "0.5,0.5,0.5"), Err(CliError::Config(_))));
        assert!(matches!(c.set("figures", "maybe"), Err(CliError::Config(_))));
    }

    #[test]
    fn defaults_match_pipeline() {
        assert_eq!(RunConfig::default().pipeline(), PipelineConfig::default());
    }
}
