use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{RunConfig, ECHO_FILE};
use super::CliError;
use crate::dataset::{load_and_clean, split, CleanedDataset, Split};
use crate::ensemble::{
    build_table, evaluate_rows, predict_table, train_pipeline, EnsembleMode, LengthLogDModel, ModeSelection,
    PipelineConfig, Prediction,
};
use crate::evalsuite::{cross_validate, pooled_importance, report, run_ablation, run_baseline_comparison};
use crate::learners::LearnerKind;
use crate::synth::{generate, SynthConfig};

/// What a command leaves for the caller: warnings and a text summary.
#[derive(Debug, Default)]
struct Done {
    warnings: Vec<String>,
    summary: String,
}

impl Done {
    fn new(warnings: Vec<String>, tables: &[&report::Table]) -> Done {
        Done {
            warnings,
            summary: tables.iter().map(|t| t.to_text()).collect::<Vec<_>>().join("\n"),
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    let pipeline = cfg.pipeline();
    pipeline.validate()?;
    std::fs::create_dir_all(&cfg.output)?;
    std::fs::write(cfg.output.join(ECHO_FILE), cfg.echo())?;
    log::info!("{} -> {}", cfg.command, cfg.output.display());
    let done = match cfg.command.as_str() {
        "synth" => synth(cfg)?,
        "featurize" => featurize(cfg, &pipeline)?,
        "train" => train(cfg, &pipeline)?,
        "predict" => predict(cfg)?,
        "evaluate" => evaluate(cfg, &pipeline)?,
        "ablate" => ablate(cfg, &pipeline)?,
        "importance" => importance(cfg, &pipeline)?,
        "cv" => cv(cfg, &pipeline)?,
        "compare" => compare(cfg, &pipeline)?,
        "" => return Err(CliError::Config("no command given".into())),
        other => return Err(CliError::Config(format!("unknown command '{other}'"))),
    };
    for w in &done.warnings {
        log::warn!("{w}");
    }
    if !done.warnings.is_empty() {
        std::fs::write(cfg.output.join("warnings.txt"), done.warnings.join("\n") + "\n")?;
    }
    Ok(done.summary)
}

fn input(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.input
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("{} needs --input", cfg.command)))
}

fn load(cfg: &RunConfig) -> Result<CleanedDataset, CliError> {
    let path = input(cfg)?;
    let ds = load_and_clean(path).map_err(|e| match CliError::from(e) {
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })?;
    ds.report.write_csv(std::fs::File::create(cfg.output.join("cleaning_report.csv"))?)?;
    Ok(ds)
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.join(name)
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn synth(cfg: &RunConfig) -> Result<Done, CliError> {
    let sc = SynthConfig {
        n_per_band: cfg.synth_n_per_band,
        noise_sd: cfg.synth_noise,
        seed: cfg.seed,
        ..Default::default()
    };
    if sc.n_per_band == 0 || !(sc.noise_sd >= 0.0) {
        return Err(CliError::Config("synth_n_per_band must be > 0 and synth_noise >= 0".into()));
    }
    let data = generate(&sc);
    std::fs::write(out(cfg, "fixture.csv"), data.to_csv_bytes())?;
    Ok(Done {
        summary: format!("{} records written\n", data.records.len()),
        ..Default::default()
    })
}

fn featurize(cfg: &RunConfig, p: &PipelineConfig) -> Result<Done, CliError> {
    let ds = load(cfg)?;
    let (full, warnings) = build_table(&ds, p)?;
    let table = full.without_groups(&p.exclude);
    table.write_csv(std::fs::File::create(out(cfg, "features.csv"))?)?;
    std::fs::write(out(cfg, "features.schema"), table.schema.to_sidecar())?;
    Ok(Done {
        warnings,
        summary: format!("{} rows, {} features\n", table.len(), table.schema.len()),
    })
}

fn train(cfg: &RunConfig, p: &PipelineConfig) -> Result<Done, CliError> {
    let ds = load(cfg)?;
    let trained = train_pipeline(&ds, p)?;
    trained.model.save(&out(cfg, "model.json"))?;
    ds.write_splits(&trained.strat, std::fs::File::create(out(cfg, "splits.csv"))?)?;
    let perf = report::train_performance_table(&trained.report);
    perf.save(&cfg.output, "performance")?;
    report::weights_table(&trained.report).save(&cfg.output, "weights")?;
    write_json(out(cfg, "train_report.json"), &trained.report)?;
    if cfg.figures {
        report::write_figure_data(&cfg.output, Some(&trained), None)?;
    }
    Ok(Done::new(trained.report.warnings, &[&perf]))
}

fn active_mode(mode: ModeSelection) -> Option<EnsembleMode> {
    match mode {
        ModeSelection::Stacking => Some(EnsembleMode::Stacking),
        ModeSelection::Fixed => Some(EnsembleMode::Fixed),
        ModeSelection::Both => None,
    }
}

struct Query {
    row: usize,
    id: String,
    smiles: String,
    external: BTreeMap<String, f64>,
}

fn read_queries(path: &Path) -> Result<Vec<Query>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::from(e).with_path(path))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let smiles_col = find("smiles").ok_or_else(|| CliError::Data(format!("{}: no 'smiles' column", path.display())))?;
    let id_col = find("id");
    let mut queries = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let external = headers
            .iter()
            .zip(rec.iter())
            .enumerate()
            .filter(|&(j, _)| j != smiles_col && Some(j) != id_col)
            .filter_map(|(_, (h, v))| v.parse::<f64>().ok().filter(|x| x.is_finite()).map(|x| (h.to_string(), x)))
            .collect();
        queries.push(Query {
            row,
            id: id_col.map_or_else(|| format!("row{}", row + 1), |j| rec[j].to_string()),
            smiles: rec[smiles_col].to_string(),
            external,
        });
    }
    Ok(queries)
}

impl CliError {
    fn with_path(self, path: &Path) -> CliError {
        match self {
            CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

fn predict(cfg: &RunConfig) -> Result<Done, CliError> {
    let model_path = cfg
        .model
        .as_deref()
        .ok_or_else(|| CliError::Config("predict needs --model".into()))?;
    let model = LengthLogDModel::load(model_path).map_err(|e| CliError::from(e).with_path(model_path))?;
    let queries = match (&cfg.smiles, &cfg.input) {
        (Some(s), _) => vec![Query {
            row: 0,
            id: "query".into(),
            smiles: s.clone(),
            external: BTreeMap::new(),
        }],
        (None, Some(path)) => read_queries(path)?,
        (None, None) => return Err(CliError::Config("predict needs --input or --smiles".into())),
    };
    let mode = active_mode(cfg.mode);
    let mut preds = csv::Writer::from_path(out(cfg, "predictions.csv"))?;
    preds.write_record(["id", "smiles_length", "category", "mode", "logd_pred", "y_lr", "y_rf", "y_xgb"])?;
    let mut errors = csv::Writer::from_path(out(cfg, "errors.csv"))?;
    errors.write_record(["row", "id", "error"])?;
    let mut ok = 0usize;
    let mut warnings = Vec::new();
    for q in &queries {
        match model.predict_logd(&q.smiles, &q.external, mode) {
            Ok(Prediction {
                category,
                smiles_length,
                mode,
                logd,
                base,
            }) => {
                ok += 1;
                preds.write_record([
                    q.id.clone(),
                    smiles_length.to_string(),
                    category.to_string(),
                    mode.to_string(),
                    logd.to_string(),
                    base[0].to_string(),
                    base[1].to_string(),
                    base[2].to_string(),
                ])?;
            }
            Err(e) => {
                warnings.push(format!("row {} ({}): {e}", q.row, q.id));
                errors.write_record([q.row.to_string(), q.id.clone(), e.to_string()])?;
            }
        }
    }
    preds.flush()?;
    errors.flush()?;
    if ok == 0 {
        return Err(CliError::Data(format!("no row could be predicted ({} errors)", queries.len())));
    }
    Ok(Done {
        warnings,
        summary: format!("{ok} of {} rows predicted\n", queries.len()),
    })
}

fn evaluate(cfg: &RunConfig, p: &PipelineConfig) -> Result<Done, CliError> {
    let Some(model_path) = cfg.model.as_deref() else {
        return train(cfg, p);
    };
    let model = LengthLogDModel::load(model_path).map_err(|e| CliError::from(e).with_path(model_path))?;
    let ds = load(cfg)?;
    let mcfg = &model.metadata.config;
    let (full, mut warnings) = build_table(&ds, mcfg)?;
    let table = full.without_groups(&mcfg.exclude);
    if table.schema != model.schema {
        return Err(CliError::Data("input features do not match the model schema".into()));
    }
    let rows = if format!("{:016x}", ds.fingerprint) == model.metadata.dataset_fingerprint {
        let strat = split(&ds.lengths(), mcfg.ratios, mcfg.seed, mcfg.thresholds_on)?;
        strat.indices(None, Split::Test)
    } else {
        warnings.push("input is not the training file; evaluating every row".into());
        (0..table.len()).collect()
    };
    let predictions = predict_table(&model, &table)?;
    let eval = evaluate_rows(&model, &table, &rows, &predictions);
    let perf = report::performance_table(&eval.categories);
    perf.save(&cfg.output, "performance")?;
    write_json(out(cfg, "evaluation.json"), &eval)?;
    Ok(Done::new(warnings, &[&perf]))
}

fn ablate(cfg: &RunConfig, p: &PipelineConfig) -> Result<Done, CliError> {
    let ds = load(cfg)?;
    let rep = run_ablation(&ds, p, &cfg.presets, &LearnerKind::ALL)?;
    let table = report::ablation_table(&rep);
    table.save(&cfg.output, "ablation")?;
    write_json(out(cfg, "ablation.json"), &rep)?;
    Ok(Done::new(rep.warnings, &[&table]))
}

fn importance(cfg: &RunConfig, p: &PipelineConfig) -> Result<Done, CliError> {
    let ds = load(cfg)?;
    let rep = pooled_importance(&ds, p, cfg.top_k)?;
    let (top, shares) = report::importance_tables(&rep);
    top.save(&cfg.output, "importance_top")?;
    shares.save(&cfg.output, "importance_shares")?;
    report::importance_all_table(&rep).save(&cfg.output, "importance_all")?;
    if cfg.figures {
        report::write_figure_data(&cfg.output, None, Some(&rep))?;
    }
    Ok(Done::new(Vec::new(), &[&top, &shares]))
}

fn cv(cfg: &RunConfig, p: &PipelineConfig) -> Result<Done, CliError> {
    let ds = load(cfg)?;
    let rep = cross_validate(&ds, p, cfg.kfolds, cfg.repeats, cfg.seed)?;
    let (folds, summary) = report::cv_tables(&rep);
    folds.save(&cfg.output, "cv_folds")?;
    summary.save(&cfg.output, "cv_summary")?;
    write_json(out(cfg, "cv.json"), &rep)?;
    Ok(Done::new(rep.warnings, &[&summary]))
}

fn compare(cfg: &RunConfig, p: &PipelineConfig) -> Result<Done, CliError> {
    let ds = load(cfg)?;
    let rep = run_baseline_comparison(&ds, p, None)?;
    let table = report::comparison_table(&rep);
    table.save(&cfg.output, "comparison")?;
    write_json(out(cfg, "comparison.json"), &rep)?;
    Ok(Done::new(rep.warnings, &[&table]))
}
