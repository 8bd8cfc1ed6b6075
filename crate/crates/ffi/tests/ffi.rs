use std::ffi::{c_char, CStr, CString};
use std::ptr;

use lengthlogd::cli::RunConfig;
use lengthlogd::dataset::clean_csv;
use lengthlogd::ensemble::train_pipeline;
use lengthlogd::synth::{generate, SynthConfig};
use lengthlogd_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { ll_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn descriptors_and_routing() {
    let smiles = CString::new("CCC").unwrap();
    let mut mol = ptr::null_mut();
    assert_eq!(unsafe { ll_molecule_parse(smiles.as_ptr(), &mut mol) }, LlStatus::Ok);
    let mut d = LlDescriptors::default();
    assert_eq!(unsafe { ll_molecule_descriptors(mol, &mut d) }, LlStatus::Ok);
    unsafe { ll_molecule_free(mol) };
    assert_eq!((d.atom_count, d.bond_count, d.wiener), (3, 2, 4));
    assert!((d.chi0 - (2.0 + 0.5f64.sqrt())).abs() < 1e-12);

    let mut len = 0;
    let s = CString::new("[NH3+]CC(=O)O").unwrap();
    assert_eq!(unsafe { ll_smiles_length(s.as_ptr(), &mut len) }, LlStatus::Ok);
    assert_eq!(len, 13);

    let mut c = LlCategory::Long;
    assert_eq!(unsafe { ll_categorize(40, 40.0, 60.0, &mut c) }, LlStatus::Ok);
    assert_eq!(c, LlCategory::Short);
    assert_eq!(unsafe { ll_categorize(60, 40.0, 60.0, &mut c) }, LlStatus::Ok);
    assert_eq!(c, LlCategory::Medium);
    assert_eq!(unsafe { ll_categorize(61, 40.0, 60.0, &mut c) }, LlStatus::Ok);
    assert_eq!(c, LlCategory::Long);
    assert_eq!(unsafe { ll_categorize(1, 60.0, 40.0, &mut c) }, LlStatus::InvalidArgument);
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("C1CC").unwrap();
    let mut mol = ptr::null_mut();
    assert_eq!(unsafe { ll_molecule_parse(bad.as_ptr(), &mut mol) }, LlStatus::ParseError);
    assert!(mol.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { ll_molecule_parse(ptr::null(), &mut mol) }, LlStatus::NullPointer);
    assert_eq!(unsafe { ll_molecule_descriptors(ptr::null(), ptr::null_mut()) }, LlStatus::NullPointer);

    let dir = tempfile::TempDir::new().unwrap();
    let missing = CString::new(dir.path().join("none.json").to_str().unwrap()).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { ll_model_load(missing.as_ptr(), &mut model) }, LlStatus::IoError);
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"format\": \"other\", \"format_version\": 1}").unwrap();
    let junk = CString::new(junk.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ll_model_load(junk.as_ptr(), &mut model) }, LlStatus::ModelError);
    assert!(last_error().contains("other"));
    unsafe { ll_model_free(ptr::null_mut()) };
    unsafe { ll_molecule_free(ptr::null_mut()) };
}

#[test]
fn model_predictions_match_library() {
    let fixture = generate(&SynthConfig {
        n_per_band: 30,
        seed: 2,
        ..Default::default()
    });
    let ds = clean_csv(&fixture.to_csv_bytes()).unwrap();
    let mut cfg = RunConfig::default();
    for (k, v) in [("rf_trees", "15"), ("gbt_rounds", "20"), ("stacking_folds", "3")] {
        cfg.set(k, v).unwrap();
    }
    let trained = train_pipeline(&ds, &cfg.pipeline()).unwrap();
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("model.json");
    trained.model.save(&path).unwrap();

    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { ll_model_load(cpath.as_ptr(), &mut model) }, LlStatus::Ok);

    let mut n_ext = 0;
    assert_eq!(unsafe { ll_model_external_count(model, &mut n_ext) }, LlStatus::Ok);
    let mut names = Vec::new();
    for i in 0..n_ext {
        let mut needed = 0;
        assert_eq!(
            unsafe { ll_model_external_name(model, i, ptr::null_mut(), 0, &mut needed) },
            LlStatus::BufferTooSmall
        );
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            unsafe { ll_model_external_name(model, i, buf.as_mut_ptr(), needed, ptr::null_mut()) },
            LlStatus::Ok
        );
        names.push(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_owned());
    }
    let name_ptrs: Vec<*const c_char> = names.iter().map(|n| n.as_ptr()).collect();

    for (i, rec) in ds.records.iter().enumerate().step_by(7) {
        let values: Vec<f64> = names.iter().map(|n| rec.external[n.to_str().unwrap()]).collect();
        let smiles = CString::new(rec.smiles.as_str()).unwrap();
        let mut p = LlPrediction::default();
        let status = unsafe {
            ll_model_predict(model, smiles.as_ptr(), name_ptrs.as_ptr(), values.as_ptr(), n_ext, 2, &mut p)
        };
        assert_eq!(status, LlStatus::Ok, "{}", last_error());
        let (_, fixed) = trained.predictions[i];
        assert_eq!(p.logd.to_bits(), fixed.logd.to_bits());
        assert_eq!(p.y_rf.to_bits(), fixed.base[1].to_bits());
        assert_eq!(p.mode, LlMode::Fixed as i32);
        assert_eq!(p.smiles_length, fixed.smiles_length);
    }

    let smiles = CString::new(ds.records[0].smiles.as_str()).unwrap();
    let mut p = LlPrediction::default();
    let status = unsafe { ll_model_predict(model, smiles.as_ptr(), ptr::null(), ptr::null(), 0, 0, &mut p) };
    assert_eq!(status, LlStatus::PredictError);
    let status = unsafe { ll_model_predict(model, smiles.as_ptr(), ptr::null(), ptr::null(), 0, 7, &mut p) };
    assert_eq!(status, LlStatus::InvalidArgument);
    unsafe { ll_model_free(model) };
}
