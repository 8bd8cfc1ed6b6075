//! Command-line interface. `run` parses arguments, merges the optional
//! config file with flag overrides, executes one subcommand and returns the
//! process exit code.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{RunConfig, ECHO_FILE};

use crate::dataset::DatasetError;
use crate::ensemble::EnsembleError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            CliError::Io(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(e) => CliError::Io(e.to_string()),
            DatasetError::Csv(e) => e.into(),
            DatasetError::InvalidRatios(_) => CliError::Config(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::Config(_) => CliError::Config(e.to_string()),
            EnsembleError::Io(e) => CliError::Io(e.to_string()),
            EnsembleError::Dataset(e) => e.into(),
            e => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lengthlogd", version, about = "Length-stratified ensemble logD regression for peptides")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Write a synthetic pseudo-peptide dataset (fixture.csv).
    Synth,
    /// Clean a CSV and write its feature matrix and schema sidecar.
    Featurize,
    /// Train the length-routed ensemble and evaluate it on the test split.
    Train,
    /// Predict logD for a CSV of SMILES or a single --smiles.
    Predict,
    /// Evaluate a trained model (--model) or train then evaluate.
    Evaluate,
    /// Feature-group ablation grid.
    Ablate,
    /// Random-forest feature importance grouped by source.
    Importance,
    /// Repeated k-fold cross-validation.
    Cv,
    /// Pooled baselines against the stratified pipeline.
    Compare,
    /// Re-run the command recorded in a config file.
    Run,
}

/// Every flag maps to the config key of the same name with `-` as `_`.
#[derive(Debug, Default, Args)]
struct Options {
    /// key = value configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    input: Option<String>,
    #[arg(long, global = true)]
    output: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    smiles: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// train,val,test fractions.
    #[arg(long, global = true)]
    ratios: Option<String>,
    /// train or all.
    #[arg(long, global = true)]
    thresholds_on: Option<String>,
    /// stacking, fixed or both.
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// reject or mean_impute.
    #[arg(long, global = true)]
    missing: Option<String>,
    #[arg(long, global = true)]
    morgan_radius: Option<String>,
    #[arg(long, global = true)]
    morgan_bits: Option<String>,
    /// Comma-separated feature groups to drop.
    #[arg(long, global = true)]
    exclude: Option<String>,
    #[arg(long, global = true)]
    ridge_lambdas: Option<String>,
    #[arg(long, global = true)]
    rf_trees: Option<String>,
    #[arg(long, global = true)]
    rf_max_depth: Option<String>,
    #[arg(long, global = true)]
    rf_min_leaf: Option<String>,
    #[arg(long, global = true)]
    rf_m_features: Option<String>,
    #[arg(long, global = true)]
    rf_bootstrap: Option<String>,
    #[arg(long, global = true)]
    gbt_rounds: Option<String>,
    #[arg(long, global = true)]
    gbt_eta: Option<String>,
    #[arg(long, global = true)]
    gbt_max_depth: Option<String>,
    #[arg(long, global = true)]
    gbt_min_leaf: Option<String>,
    #[arg(long, global = true)]
    gbt_subsample: Option<String>,
    #[arg(long, global = true)]
    stacking_folds: Option<String>,
    #[arg(long, global = true)]
    meta_lambdas: Option<String>,
    #[arg(long, global = true)]
    meta_nonneg: Option<String>,
    #[arg(long, global = true)]
    kfolds: Option<String>,
    #[arg(long, global = true)]
    repeats: Option<String>,
    /// Comma-separated ablation presets.
    #[arg(long = "preset", global = true)]
    presets: Option<String>,
    #[arg(long, global = true)]
    top_k: Option<String>,
    /// Also write figure data files.
    #[arg(long, global = true)]
    figures: bool,
    #[arg(long, global = true)]
    synth_n_per_band: Option<String>,
    #[arg(long, global = true)]
    synth_noise: Option<String>,
}

impl Options {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("input", &self.input),
            ("output", &self.output),
            ("model", &self.model),
            ("smiles", &self.smiles),
            ("seed", &self.seed),
            ("ratios", &self.ratios),
            ("thresholds_on", &self.thresholds_on),
            ("mode", &self.mode),
            ("alpha", &self.alpha),
            ("missing", &self.missing),
            ("morgan_radius", &self.morgan_radius),
            ("morgan_bits", &self.morgan_bits),
            ("exclude", &self.exclude),
            ("ridge_lambdas", &self.ridge_lambdas),
            ("rf_trees", &self.rf_trees),
            ("rf_max_depth", &self.rf_max_depth),
            ("rf_min_leaf", &self.rf_min_leaf),
            ("rf_m_features", &self.rf_m_features),
            ("rf_bootstrap", &self.rf_bootstrap),
            ("gbt_rounds", &self.gbt_rounds),
            ("gbt_eta", &self.gbt_eta),
            ("gbt_max_depth", &self.gbt_max_depth),
            ("gbt_min_leaf", &self.gbt_min_leaf),
            ("gbt_subsample", &self.gbt_subsample),
            ("stacking_folds", &self.stacking_folds),
            ("meta_lambdas", &self.meta_lambdas),
            ("meta_nonneg", &self.meta_nonneg),
            ("kfolds", &self.kfolds),
            ("repeats", &self.repeats),
            ("presets", &self.presets),
            ("top_k", &self.top_k),
            ("synth_n_per_band", &self.synth_n_per_band),
            ("synth_noise", &self.synth_noise),
        ]
    }
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Featurize => "featurize",
            Command::Train => "train",
            Command::Predict => "predict",
            Command::Evaluate => "evaluate",
            Command::Ablate => "ablate",
            Command::Importance => "importance",
            Command::Cv => "cv",
            Command::Compare => "compare",
            Command::Run => "run",
        }
    }
}

/// Builds the effective configuration: defaults, then the config file, then
/// flags.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.options.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    match cli.command {
        Command::Run if cli.options.config.is_none() => {
            return Err(CliError::Config("run needs --config".into()))
        }
        Command::Run => {}
        c => cfg.command = c.name().to_string(),
    }
    for (key, value) in cli.options.overrides() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if cli.options.figures {
        cfg.figures = true;
    }
    Ok(cfg)
}

/// Executes a parsed configuration and returns a text summary.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    commands::execute(cfg)
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match resolve(&cli).and_then(|cfg| execute(&cfg)) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("lengthlogd: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
        resolve(&cli)
    }

    #[test]
    fn flags_set_config_keys() {
        let c = parse(&["lengthlogd", "train", "--seed", "9", "--preset", "full,no_graph", "--figures"]).unwrap();
        assert_eq!(c.command, "train");
        assert_eq!(c.seed, 9);
        assert_eq!(c.presets.len(), 2);
        assert!(c.figures);
    }

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(parse(&["lengthlogd", "train", "--ratios", "0.5,0.3,0.3"]).unwrap_err().exit_code(), EXIT_CONFIG);
        assert_eq!(parse(&["lengthlogd", "run"]).unwrap_err().exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::from(DatasetError::Empty).exit_code(), EXIT_DATA);
        assert_eq!(CliError::from(std::io::Error::other("x")).exit_code(), EXIT_IO);
        assert_eq!(run(["lengthlogd", "bogus"]), 2);
    }
}
