//! C ABI over the lengthlogd library.
//!
//! Models and parsed molecules are opaque handles created by `*_load` or
//! `*_parse` and released with the matching `*_free`. Every function returns
//! an [`LlStatus`]; on failure a message is kept per thread and can be read
//! with [`ll_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use lengthlogd::dataset::{categorize, Category, LengthThresholds};
use lengthlogd::descriptors::{balaban_j, chi0, chi1, global_descriptors, kappa_indices, wiener_index};
use lengthlogd::ensemble::{EnsembleError, EnsembleMode, LengthLogDModel};
use lengthlogd::smiles::{parse_smiles, smiles_length, MolecularGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    IoError = 5,
    ModelError = 6,
    PredictError = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlCategory {
    Short = 0,
    Medium = 1,
    Long = 2,
}

/// Ensemble selector for [`ll_model_predict`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlMode {
    /// The mode chosen for the routed category at training time.
    Active = 0,
    Stacking = 1,
    Fixed = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LlPrediction {
    /// An `LlCategory` value.
    pub category: i32,
    /// `LL_MODE_STACKING` or `LL_MODE_FIXED`.
    pub mode: i32,
    pub smiles_length: usize,
    pub logd: f64,
    pub y_lr: f64,
    pub y_rf: f64,
    pub y_xgb: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LlDescriptors {
    pub atom_count: usize,
    pub bond_count: usize,
    pub ring_count: usize,
    pub smiles_length: usize,
    pub mol_wt: f64,
    pub exact_mol_wt: f64,
    pub num_h_donors: usize,
    pub num_h_acceptors: usize,
    pub num_rotatable_bonds: usize,
    pub fraction_csp3: f64,
    pub wiener: u64,
    pub chi0: f64,
    pub chi1: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub balaban_j: f64,
}

/// Opaque trained model.
pub struct LlModel(LengthLogDModel);

/// Opaque parsed molecule.
pub struct LlMolecule(MolecularGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (LlStatus, String);

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            LlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (LlStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (LlStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn category_code(c: Category) -> LlCategory {
    match c {
        Category::Short => LlCategory::Short,
        Category::Medium => LlCategory::Medium,
        Category::Long => LlCategory::Long,
    }
}

fn mode_code(m: EnsembleMode) -> LlMode {
    match m {
        EnsembleMode::Stacking => LlMode::Stacking,
        EnsembleMode::Fixed => LlMode::Fixed,
    }
}

/// Copies `s` with a trailing NUL; `needed` receives the full size.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    let bytes = s.as_bytes();
    if let Some(n) = needed.as_mut() {
        *n = bytes.len() + 1;
    }
    if buf.is_null() || len < bytes.len() + 1 {
        return Err((LlStatus::BufferTooSmall, format!("buffer needs {} bytes", bytes.len() + 1)));
    }
    std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
    *buf.add(bytes.len()) = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ll_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated to
/// `len` bytes, always NUL-terminated when `len > 0`). Returns the size
/// needed for the whole message including the NUL, or 0 when there is none.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ll_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len) - 1;
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Loads a model artifact from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ll_model_load(path: *const c_char, out: *mut *mut LlModel) -> LlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let path = str_arg(path, "path")?;
        let model = LengthLogDModel::load(Path::new(path)).map_err(|e| match e {
            EnsembleError::Io(io) => (LlStatus::IoError, format!("{path}: {io}")),
            e => (LlStatus::ModelError, e.to_string()),
        })?;
        *out = Box::into_raw(Box::new(LlModel(model)));
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from [`ll_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ll_model_free(model: *mut LlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of external descriptor columns the model expects.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ll_model_external_count(model: *const LlModel, out: *mut usize) -> LlStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *out_arg(out, "out")? = m.0.schema.external_names().count();
        Ok(())
    })
}

/// Name of external column `index`, copied into `buf`. `needed` (optional)
/// receives the buffer size required.
///
/// # Safety
/// `model` must be a live handle; `buf` NULL or `len` writable bytes;
/// `needed` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ll_model_external_name(
    model: *const LlModel,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> LlStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let name = m
            .0
            .schema
            .external_names()
            .nth(index)
            .ok_or_else(|| (LlStatus::InvalidArgument, format!("no external column {index}")))?;
        write_str(name, buf, len, needed)
    })
}

/// Predicts logD for one SMILES. `names`/`values` hold `n_external` external
/// descriptor values (both may be NULL when `n_external` is 0). `mode` is an
/// `LlMode` value.
///
/// # Safety
/// `model` must be a live handle, `smiles` a NUL-terminated string, `names`
/// and `values` arrays of `n_external` elements, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ll_model_predict(
    model: *const LlModel,
    smiles: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    n_external: usize,
    mode: i32,
    out: *mut LlPrediction,
) -> LlStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out_arg(out, "out")?;
        let smiles = str_arg(smiles, "smiles")?;
        let mode = match mode {
            0 => None,
            1 => Some(EnsembleMode::Stacking),
            2 => Some(EnsembleMode::Fixed),
            other => return Err((LlStatus::InvalidArgument, format!("unknown mode {other}"))),
        };
        let mut external = BTreeMap::new();
        if n_external > 0 {
            if names.is_null() || values.is_null() {
                return Err(null("names or values"));
            }
            let names = std::slice::from_raw_parts(names, n_external);
            let values = std::slice::from_raw_parts(values, n_external);
            for (&n, &v) in names.iter().zip(values) {
                external.insert(str_arg(n, "external name")?.to_string(), v);
            }
        }
        let p = m.0.predict_logd(smiles, &external, mode).map_err(|e| match e {
            EnsembleError::Smiles(e) => (LlStatus::ParseError, e.to_string()),
            e => (LlStatus::PredictError, e.to_string()),
        })?;
        *out = LlPrediction {
            category: category_code(p.category) as i32,
            mode: mode_code(p.mode) as i32,
            smiles_length: p.smiles_length,
            logd: p.logd,
            y_lr: p.base[0],
            y_rf: p.base[1],
            y_xgb: p.base[2],
        };
        Ok(())
    })
}

/// Character length of a SMILES string as used for routing.
///
/// # Safety
/// `smiles` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ll_smiles_length(smiles: *const c_char, out: *mut usize) -> LlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = smiles_length(str_arg(smiles, "smiles")?);
        Ok(())
    })
}

/// Routes a SMILES length given the two percentile cut points.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ll_categorize(length: usize, q33: f64, q66: f64, out: *mut LlCategory) -> LlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if !(q33 <= q66) {
            return Err((LlStatus::InvalidArgument, format!("thresholds out of order: {q33} > {q66}")));
        }
        *out = category_code(categorize(length, &LengthThresholds { q33, q66 }));
        Ok(())
    })
}

/// Parses a SMILES string into a molecule handle.
///
/// # Safety
/// `smiles` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ll_molecule_parse(smiles: *const c_char, out: *mut *mut LlMolecule) -> LlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let g = parse_smiles(str_arg(smiles, "smiles")?).map_err(|e| (LlStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(LlMolecule(g)));
        Ok(())
    })
}

/// Releases a molecule. NULL is ignored.
///
/// # Safety
/// `mol` must come from [`ll_molecule_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ll_molecule_free(mol: *mut LlMolecule) {
    if !mol.is_null() {
        drop(Box::from_raw(mol));
    }
}

/// Scalar topological and physicochemical descriptors of a molecule.
///
/// # Safety
/// `mol` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ll_molecule_descriptors(mol: *const LlMolecule, out: *mut LlDescriptors) -> LlStatus {
    guard(|| {
        let g = &mol.as_ref().ok_or_else(|| null("mol"))?.0;
        let out = out_arg(out, "out")?;
        let fail = |e: lengthlogd::descriptors::DescriptorError| (LlStatus::InvalidArgument, e.to_string());
        let glob = global_descriptors(g);
        let k = kappa_indices(g);
        *out = LlDescriptors {
            atom_count: g.atom_count(),
            bond_count: g.bond_count(),
            ring_count: g.ring_count(),
            smiles_length: g.smiles_length,
            mol_wt: glob.mol_wt,
            exact_mol_wt: glob.exact_mol_wt,
            num_h_donors: glob.num_h_donors,
            num_h_acceptors: glob.num_h_acceptors,
            num_rotatable_bonds: glob.num_rotatable_bonds,
            fraction_csp3: glob.fraction_csp3,
            wiener: wiener_index(g).map_err(fail)?,
            chi0: chi0(g),
            chi1: chi1(g),
            kappa1: k.kappa1,
            kappa2: k.kappa2,
            kappa3: k.kappa3,
            balaban_j: balaban_j(g).map_err(fail)?,
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_message_round_trip() {
        let mut len = 0usize;
        assert_eq!(unsafe { ll_smiles_length(std::ptr::null(), &mut len) }, LlStatus::NullPointer);
        let needed = unsafe { ll_last_error_message(std::ptr::null_mut(), 0) };
        let mut buf = vec![0 as c_char; needed];
        unsafe { ll_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert_eq!(msg, "smiles is NULL");

        let mut small = [0 as c_char; 4];
        unsafe { ll_last_error_message(small.as_mut_ptr(), small.len()) };
        assert_eq!(unsafe { CStr::from_ptr(small.as_ptr()) }.to_bytes(), b"smi");
    }

    #[test]
    fn version_is_terminated() {
        let v = unsafe { CStr::from_ptr(ll_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
