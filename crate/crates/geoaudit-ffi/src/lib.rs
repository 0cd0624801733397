//! C ABI for the auditing library.
//!
//! Handles are opaque pointers; every fallible call returns a `GeoauditStatus`
//! and the last error message is retrievable per thread via
//! `geoaudit_last_error`. Strings returned by the library must be released
//! with `geoaudit_string_free`, handles with their matching `_free` function.

use geoaudit::auditor::run_audit;
use geoaudit::config::ExperimentConfig;
use geoaudit::dataprep::{drop_features, gen_xor_shortcut, DatasetMatrix};
use geoaudit::nncore::TrainConfig;
use geoaudit::pipeline::{run_pipeline, Stage};
use geoaudit::report::to_json;
use libc::{c_char, c_double, c_int};
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::ptr;

/// Status codes mirrored into the generated header.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeoauditStatus {
    Ok = 0,
    InvalidArgument = 1,
    DataError = 2,
    NumericError = 3,
    NullPointer = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(err: &geoaudit::Error) -> GeoauditStatus {
    let message = CString::new(err.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
    match err.exit_code() {
        1 => GeoauditStatus::InvalidArgument,
        3 => GeoauditStatus::NumericError,
        _ => GeoauditStatus::DataError,
    }
}

/// Opaque dataset handle.
pub struct GeoauditDataset {
    inner: DatasetMatrix,
}

/// Last error message for the calling thread, or NULL if none. The pointer
/// stays valid until the next failing call on this thread; do not free it.
#[no_mangle]
pub extern "C" fn geoaudit_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn geoaudit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Generate the synthetic XOR-with-shortcut dataset.
///
/// # Safety
/// `out` must be a valid pointer to a dataset handle slot.
#[no_mangle]
pub unsafe extern "C" fn geoaudit_dataset_xor(
    n: usize,
    leak_rate: c_double,
    noise_std: c_double,
    seed: u64,
    out: *mut *mut GeoauditDataset,
) -> GeoauditStatus {
    if out.is_null() {
        return GeoauditStatus::NullPointer;
    }
    match gen_xor_shortcut(n, leak_rate, noise_std, seed) {
        Ok(data) => {
            *out = Box::into_raw(Box::new(GeoauditDataset { inner: data }));
            GeoauditStatus::Ok
        }
        Err(err) => set_error(&err),
    }
}

/// Number of rows in a dataset, or -1 on NULL.
#[no_mangle]
pub extern "C" fn geoaudit_dataset_rows(dataset: *const GeoauditDataset) -> c_int {
    if dataset.is_null() {
        return -1;
    }
    unsafe { (*dataset).inner.n() as c_int }
}

/// Number of feature columns in a dataset, or -1 on NULL.
#[no_mangle]
pub extern "C" fn geoaudit_dataset_dim(dataset: *const GeoauditDataset) -> c_int {
    if dataset.is_null() {
        return -1;
    }
    unsafe { (*dataset).inner.d() as c_int }
}

/// Drop one named feature column, producing a new dataset handle.
///
/// # Safety
/// `dataset` must be a live handle, `name` a NUL-terminated string and
/// `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn geoaudit_dataset_drop_feature(
    dataset: *const GeoauditDataset,
    name: *const c_char,
    out: *mut *mut GeoauditDataset,
) -> GeoauditStatus {
    if dataset.is_null() || name.is_null() || out.is_null() {
        return GeoauditStatus::NullPointer;
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        return GeoauditStatus::InvalidArgument;
    };
    match drop_features(&(*dataset).inner, &[name.to_string()]) {
        Ok(pruned) => {
            *out = Box::into_raw(Box::new(GeoauditDataset { inner: pruned }));
            GeoauditStatus::Ok
        }
        Err(err) => set_error(&err),
    }
}

/// Release a dataset handle. NULL is a no-op.
#[no_mangle]
pub extern "C" fn geoaudit_dataset_free(dataset: *mut GeoauditDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Train the linear probe on a dataset and return the audit report as a
/// JSON string (sorted keys, 6 significant digits).
///
/// # Safety
/// `dataset` must be a live handle and `out_json` a valid slot; release the
/// string with `geoaudit_string_free`.
#[no_mangle]
pub unsafe extern "C" fn geoaudit_audit_json(
    dataset: *const GeoauditDataset,
    seed: u64,
    out_json: *mut *mut c_char,
) -> GeoauditStatus {
    if dataset.is_null() || out_json.is_null() {
        return GeoauditStatus::NullPointer;
    }
    let result = run_audit(&(*dataset).inner, &TrainConfig::probe(seed))
        .and_then(|report| to_json(&report));
    match result {
        Ok(json) => match CString::new(json) {
            Ok(text) => {
                *out_json = text.into_raw();
                GeoauditStatus::Ok
            }
            Err(_) => GeoauditStatus::NumericError,
        },
        Err(err) => set_error(&err),
    }
}

/// Run the full pipeline from a TOML configuration string; artifacts are
/// written to the configured output directory.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn geoaudit_run_pipeline(config_toml: *const c_char) -> GeoauditStatus {
    if config_toml.is_null() {
        return GeoauditStatus::NullPointer;
    }
    let Ok(text) = CStr::from_ptr(config_toml).to_str() else {
        return GeoauditStatus::InvalidArgument;
    };
    let result =
        ExperimentConfig::from_toml(text).and_then(|cfg| run_pipeline(&cfg, &Stage::ALL));
    match result {
        Ok(_) => GeoauditStatus::Ok,
        Err(err) => set_error(&err),
    }
}

/// Release a string returned by this library. NULL is a no-op.
#[no_mangle]
pub extern "C" fn geoaudit_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}
