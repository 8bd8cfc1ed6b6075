use std::fs;
use std::path::Path;

use lengthlogd::cli::{run, EXIT_CONFIG, EXIT_DATA, EXIT_IO, EXIT_OK};
use lengthlogd::dataset::clean_csv;
use lengthlogd::ensemble::{train_pipeline, LengthLogDModel};
use lengthlogd::synth::{generate, SynthConfig};
use tempfile::TempDir;

const FAST: &[&str] = &["--rf-trees", "20", "--gbt-rounds", "30", "--gbt-eta", "0.1", "--stacking-folds", "3"];

fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["lengthlogd"];
    full.extend_from_slice(args);
    run(full)
}

fn fast(cmd: &str, dir: &Path, extra: &[&str]) -> i32 {
    let out = dir.display().to_string();
    let mut args = vec![cmd, "--output", out.as_str()];
    args.extend_from_slice(FAST);
    args.extend_from_slice(extra);
    cli(&args)
}

fn fixture(dir: &Path) -> String {
    let cfg = SynthConfig {
        n_per_band: 40,
        seed: 5,
        ..Default::default()
    };
    let path = dir.join("fixture.csv");
    fs::write(&path, generate(&cfg).to_csv_bytes()).unwrap();
    path.display().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

const SMALL: &str = "id,smiles,logd\nP1,NCC(=O)NCC(=O)O,-1.2\nP2,NC(C)C(=O)NCC(=O)O,-0.8\nP3,NC(CC(C)C)C(=O)O,0.4\n";

#[test]
fn featurize_writes_matrix_schema_and_report() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("small.csv");
    fs::write(&input, SMALL).unwrap();
    let inp = input.display().to_string();
    let a = tmp.path().join("a");
    assert_eq!(cli(&["featurize", "--input", &inp, "--output", a.to_str().unwrap()]), EXIT_OK);
    assert_eq!(csv_rows(&a.join("features.csv")).len(), 3);
    assert!(fs::read_to_string(a.join("features.schema")).unwrap().contains("WienerIndex"));

    let b = tmp.path().join("b");
    assert_eq!(cli(&["featurize", "--input", &inp, "--output", b.to_str().unwrap()]), EXIT_OK);
    assert_eq!(fs::read(a.join("features.csv")).unwrap(), fs::read(b.join("features.csv")).unwrap());

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, SMALL.replace("NC(C)C(=O)NCC(=O)O", "NC(C(=O")).unwrap();
    let c = tmp.path().join("c");
    assert_eq!(cli(&["featurize", "--input", bad.to_str().unwrap(), "--output", c.to_str().unwrap()]), EXIT_OK);
    assert_eq!(csv_rows(&c.join("features.csv")).len(), 2);
    let report = csv_rows(&c.join("cleaning_report.csv"));
    assert!(report.iter().any(|r| r[1] == "P2" && r[2] == "dropped"));
}

#[test]
fn train_is_deterministic_and_reproducible_from_echo() {
    let tmp = TempDir::new().unwrap();
    let input = fixture(tmp.path());
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert_eq!(fast("train", &a, &["--input", &input, "--seed", "3"]), EXIT_OK);
    assert_eq!(fast("train", &b, &["--input", &input, "--seed", "3"]), EXIT_OK);
    let model = fs::read(a.join("model.json")).unwrap();
    assert_eq!(model, fs::read(b.join("model.json")).unwrap());

    let echo = a.join("run_config.txt");
    assert_eq!(cli(&["run", "--config", echo.to_str().unwrap(), "--output", c.to_str().unwrap()]), EXIT_OK);
    assert_eq!(model, fs::read(c.join("model.json")).unwrap());
    for f in ["performance.csv", "weights.csv", "splits.csv", "train_report.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(c.join(f)).unwrap(), "{f}");
    }
    let perf = csv_rows(&a.join("performance.csv"));
    assert_eq!(perf.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["short", "medium", "long"]);
}

#[test]
fn bad_ratios_fail_before_any_work() {
    let tmp = TempDir::new().unwrap();
    let input = fixture(tmp.path());
    let out = tmp.path().join("out");
    assert_eq!(fast("train", &out, &["--input", &input, "--ratios", "0.6,0.3,0.3"]), EXIT_CONFIG);
    assert!(!out.join("model.json").exists());
    assert!(!out.join("run_config.txt").exists());
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let missing = tmp.path().join("missing.csv");
    assert_eq!(fast("train", &out, &["--input", missing.to_str().unwrap()]), EXIT_IO);
    let junk = tmp.path().join("junk.csv");
    fs::write(&junk, "name,value\na,1\n").unwrap();
    assert_eq!(fast("train", &out, &["--input", junk.to_str().unwrap()]), EXIT_DATA);
    assert_eq!(fast("train", &out, &["--colour", "red"]), 2);
    let conf = tmp.path().join("bad.conf");
    fs::write(&conf, "colour = red\n").unwrap();
    assert_eq!(cli(&["train", "--config", conf.to_str().unwrap()]), EXIT_CONFIG);
}

#[test]
fn predict_matches_training_and_reports_bad_rows() {
    let tmp = TempDir::new().unwrap();
    let input = fixture(tmp.path());
    let bytes = fs::read(&input).unwrap();
    let ds = clean_csv(&bytes).unwrap();
    let cfg = {
        let mut c = lengthlogd::cli::RunConfig::default();
        for pair in FAST.chunks(2) {
            c.set(&pair[0][2..].replace('-', "_"), pair[1]).unwrap();
        }
        c.pipeline()
    };
    let trained = train_pipeline(&ds, &cfg).unwrap();
    let model_path = tmp.path().join("model.json");
    trained.model.save(&model_path).unwrap();
    let reloaded = LengthLogDModel::load(&model_path).unwrap();
    assert_eq!(reloaded, trained.model);

    let mut text = String::from_utf8(bytes).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let broken = lines[2].replacen(",N", ",N(", 1);
    text = text.replace(lines[2], &broken);
    let batch = tmp.path().join("batch.csv");
    fs::write(&batch, &text).unwrap();

    let out = tmp.path().join("pred");
    let code = cli(&[
        "predict",
        "--model",
        model_path.to_str().unwrap(),
        "--input",
        batch.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let preds = csv_rows(&out.join("predictions.csv"));
    let errors = csv_rows(&out.join("errors.csv"));
    assert_eq!(preds.len(), ds.records.len() - 1);
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0][1], ds.records[1].id);

    for row in &preds {
        let i = ds.records.iter().position(|r| r.id == row[0]).unwrap();
        let (s, f) = &trained.predictions[i];
        let active = if row[3] == "stacking" { s } else { f };
        assert_eq!(row[4].parse::<f64>().unwrap().to_bits(), active.logd.to_bits());
        assert_eq!(row[2], active.category.to_string());
    }

    let none = tmp.path().join("none");
    let all_bad = tmp.path().join("all_bad.csv");
    fs::write(&all_bad, "id,smiles\nX,C1CC\n").unwrap();
    let code = cli(&[
        "predict",
        "--model",
        model_path.to_str().unwrap(),
        "--input",
        all_bad.to_str().unwrap(),
        "--output",
        none.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn report_shapes() {
    let tmp = TempDir::new().unwrap();
    let input = fixture(tmp.path());
    let train = tmp.path().join("train");
    assert_eq!(fast("train", &train, &["--input", &input]), EXIT_OK);

    let eval = tmp.path().join("eval");
    let model = train.join("model.json");
    assert_eq!(fast("evaluate", &eval, &["--input", &input, "--model", model.to_str().unwrap()]), EXIT_OK);
    let perf = csv_rows(&eval.join("performance.csv"));
    assert_eq!(perf.len(), 3);
    assert_eq!(fs::read(eval.join("performance.csv")).unwrap(), fs::read(train.join("performance.csv")).unwrap());

    let abl = tmp.path().join("abl");
    assert_eq!(fast("ablate", &abl, &["--input", &input]), EXIT_OK);
    assert_eq!(csv_rows(&abl.join("ablation.csv")).len(), 13);

    let imp = tmp.path().join("imp");
    assert_eq!(fast("importance", &imp, &["--input", &input, "--top-k", "20", "--figures"]), EXIT_OK);
    assert_eq!(csv_rows(&imp.join("importance_top.csv")).len(), 20);
    assert_eq!(csv_rows(&imp.join("importance_shares.csv")).len(), 4);
    assert!(imp.join("fig_source_shares.csv").exists());
}
