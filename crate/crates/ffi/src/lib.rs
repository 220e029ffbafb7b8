//! C ABI over the leafshap explainer.
//!
//! Every fallible call returns an [`LsStatus`]; on failure the message is
//! available from [`ls_last_error`] on the same thread. Handles are opaque and
//! read-only after loading, so one handle may serve several threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use leafshap::data::read_dataset;
use leafshap::tree::read_model;
use leafshap::{explain_batch, Algorithm, Error, ErrorClass, Estimator, ExplainOptions, Explainer};

/// Status codes; the numbering follows the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    /// Unexpected failure, including a caught panic.
    Internal = 1,
    /// Bad argument, unknown estimator or algorithm, missing file.
    Config = 2,
    /// Malformed model or data, or mismatched dimensions.
    Validation = 3,
    /// The estimator is undefined at a query row.
    Degenerate = 4,
    /// A required pointer was null.
    NullPointer = 6,
}

/// A loaded model with its reference data.
pub struct LsExplainer {
    inner: Explainer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> LsStatus {
    match e.class() {
        ErrorClass::Config | ErrorClass::Io => LsStatus::Config,
        ErrorClass::Validation => LsStatus::Validation,
        ErrorClass::Degenerate => LsStatus::Degenerate,
    }
}

fn fail(e: Error) -> LsStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

/// Runs `f`, turning panics into [`LsStatus::Internal`].
fn guard(f: impl FnOnce() -> Result<(), LsStatus>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            LsStatus::Internal
        }
    }
}

fn null_pointer(what: &str) -> LsStatus {
    set_error(format!("{what} must not be null"));
    LsStatus::NullPointer
}

unsafe fn opt_str<'a>(p: *const c_char) -> Result<Option<&'a str>, LsStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| {
        set_error("string argument is not valid UTF-8");
        LsStatus::Config
    })
}

unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, LsStatus> {
    opt_str(p)?.ok_or_else(|| null_pointer(what))
}

/// Loads a model JSON and, optionally, a CSV dataset with its schema file.
///
/// `data_path` and `schema_path` may both be null, which allows only the
/// `shap_path` estimator. On success `*out` owns a handle to release with
/// [`ls_explainer_free`].
///
/// # Safety
/// Path arguments must be null or NUL-terminated strings; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_explainer_load(
    model_path: *const c_char,
    data_path: *const c_char,
    schema_path: *const c_char,
    out: *mut *mut LsExplainer,
) -> LsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        *out = ptr::null_mut();
        let model = read_model(req_str(model_path, "model_path")?).map_err(fail)?;
        let data = match (opt_str(data_path)?, opt_str(schema_path)?) {
            (None, None) => None,
            (Some(d), Some(s)) => Some(read_dataset(Path::new(d), Path::new(s)).map_err(fail)?),
            _ => return Err(fail(Error::Config("data_path and schema_path go together".into()))),
        };
        let inner = Explainer::with_singletons(model, data).map_err(fail)?;
        *out = Box::into_raw(Box::new(LsExplainer { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from [`ls_explainer_load`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ls_explainer_free(handle: *mut LsExplainer) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of model columns a query row must have; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_explainer_n_columns(handle: *const LsExplainer) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.n_columns())
}

/// Number of attributions per row; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_explainer_n_players(handle: *const LsExplainer) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.n_players())
}

/// Explains `n_rows` row-major query rows of `n_cols` values each.
///
/// `estimator` is one of `shap_path`, `discrete`, `leaf`, `leaf_raw` and
/// `algorithm` one of `brute_force`, `multi_games`, `tree_shap`. Writes
/// `n_rows * n_players` attributions to `phi_out` and, when not null, one base
/// value per row to `base_out`. With `strict` nonzero rows are evaluated in
/// order on the calling thread. When a row fails and `failed_row` is not
/// null, its index is stored there.
///
/// # Safety
/// `rows` must hold `n_rows * n_cols` doubles, `phi_out` room for
/// `n_rows * n_players` and `base_out`, if given, room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn ls_explain(
    handle: *const LsExplainer,
    estimator: *const c_char,
    algorithm: *const c_char,
    rows: *const f64,
    n_rows: usize,
    n_cols: usize,
    strict: i32,
    phi_out: *mut f64,
    base_out: *mut f64,
    failed_row: *mut usize,
) -> LsStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null_pointer("handle"))?;
        let est: Estimator = req_str(estimator, "estimator")?.parse().map_err(fail)?;
        let alg: Algorithm = req_str(algorithm, "algorithm")?.parse().map_err(fail)?;
        if n_cols != h.inner.n_columns() {
            return Err(fail(Error::Dimension {
                expected: h.inner.n_columns(),
                got: n_cols,
            }));
        }
        if n_rows == 0 {
            return Ok(());
        }
        if rows.is_null() || phi_out.is_null() {
            return Err(null_pointer("rows and phi_out"));
        }
        let flat = std::slice::from_raw_parts(rows, n_rows * n_cols);
        let batch: Vec<Vec<f64>> = if n_cols == 0 {
            vec![Vec::new(); n_rows]
        } else {
            flat.chunks(n_cols).map(<[f64]>::to_vec).collect()
        };
        let ids: Vec<usize> = (0..n_rows).collect();
        let options = ExplainOptions {
            strict: strict != 0,
            ..ExplainOptions::default()
        };
        let reports = explain_batch(&h.inner, &batch, &ids, est, alg, &options).map_err(|e| {
            if let (Some(i), false) = (e.instance(), failed_row.is_null()) {
                *failed_row = i;
            }
            fail(e)
        })?;
        let p = h.inner.n_players();
        for (i, r) in reports.iter().enumerate() {
            for (j, v) in r.phi.values().enumerate() {
                *phi_out.add(i * p + j) = *v;
            }
            if !base_out.is_null() {
                *base_out.add(i) = r.base_value;
            }
        }
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
