//! C interface to the codesieve toolkit: stripping, analysis, repetition
//! scoring, and the n-gram model lifecycle (train, save, load, generate).
//!
//! Conventions:
//! - Every function returns a `cs_status`; out-parameters are written only
//!   when the status is `CS_OK`.
//! - Strings returned through out-parameters are heap-allocated and must be
//!   released with `cs_string_free`; models with `cs_model_free`.
//! - `CsModel` is an opaque handle. Nothing about its layout is part of the
//!   interface.
//! - No call unwinds across the boundary; a Rust panic is reported as
//!   `CS_ERR_INTERNAL`.

#![allow(non_camel_case_types)]

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use codesieve::corpus::read_samples_jsonl;
use codesieve::ngram::{NgramError, DEFAULT_BANNED};
use codesieve::{analyze, catalog_default, parse, repetition_score, strip, tokenize};
use codesieve::{NgramModel, SamplerConfig};

/// Result of every call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum cs_status {
    CS_OK = 0,
    /// An input string was not valid UTF-8.
    CS_ERR_UTF8 = 1,
    /// The source text failed to tokenize.
    CS_ERR_LEX = 2,
    /// The token stream failed structural validation (brackets, dedents).
    CS_ERR_PARSE = 3,
    /// A file could not be read, written, or decoded.
    CS_ERR_IO = 4,
    /// A null pointer or out-of-range argument.
    CS_ERR_BAD_ARG = 5,
    /// The corpus contained no usable training samples.
    CS_ERR_EMPTY = 6,
    /// An unexpected internal failure.
    CS_ERR_INTERNAL = 7,
}

/// Opaque handle to a trained n-gram model.
pub struct CsModel {
    inner: NgramModel,
}

// ---------------------------------------------------------------------------
// internal plumbing
// ---------------------------------------------------------------------------

fn guarded(f: impl FnOnce() -> cs_status) -> cs_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => cs_status::CS_ERR_INTERNAL,
    }
}

unsafe fn input_str<'a>(ptr: *const c_char) -> Result<&'a str, cs_status> {
    if ptr.is_null() {
        return Err(cs_status::CS_ERR_BAD_ARG);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| cs_status::CS_ERR_UTF8)
}

unsafe fn export_string(text: String, out: *mut *mut c_char) -> cs_status {
    match CString::new(text) {
        Ok(cstring) => {
            *out = cstring.into_raw();
            cs_status::CS_OK
        }
        Err(_) => cs_status::CS_ERR_INTERNAL,
    }
}

fn model_error(err: &NgramError) -> cs_status {
    match err {
        NgramError::EmptyCorpus => cs_status::CS_ERR_EMPTY,
        NgramError::InvalidOrder(_) => cs_status::CS_ERR_BAD_ARG,
        NgramError::Format(_) | NgramError::Io(_) => cs_status::CS_ERR_IO,
    }
}

// ---------------------------------------------------------------------------
// text functions
// ---------------------------------------------------------------------------

/// Interface version as a static string. Never freed by the caller.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Remove comments and docstrings from `source`, writing the stripped text
/// to `*out`.
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` a valid pointer.
/// On `CS_OK` the caller owns `*out` and must release it with
/// `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_strip(source: *const c_char, out: *mut *mut c_char) -> cs_status {
    guarded(|| {
        if out.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let text = match input_str(source) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match strip(text) {
            Ok(stripped) => export_string(stripped, out),
            Err(_) => cs_status::CS_ERR_LEX,
        }
    })
}

/// Run the full rule catalog over `source` and write the findings to `*out`
/// as a JSON array (empty array when the code is clean).
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` a valid pointer.
/// On `CS_OK` the caller owns `*out` and must release it with
/// `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_analyze_json(
    source: *const c_char,
    out: *mut *mut c_char,
) -> cs_status {
    guarded(|| {
        if out.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let text = match input_str(source) {
            Ok(t) => t,
            Err(status) => return status,
        };
        if tokenize(text).is_err() {
            return cs_status::CS_ERR_LEX;
        }
        if parse(text).is_err() {
            return cs_status::CS_ERR_PARSE;
        }
        let findings = analyze(text, &catalog_default());
        let json = serde_json::to_string(&findings).expect("findings always serialize");
        export_string(json, out)
    })
}

/// Write the duplicate-line fraction of `source` to `*out` (0.0 through
/// 1.0). Works on any text, parseable or not.
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_repetition_score(source: *const c_char, out: *mut f64) -> cs_status {
    guarded(|| {
        if out.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let text = match input_str(source) {
            Ok(t) => t,
            Err(status) => return status,
        };
        *out = repetition_score(text);
        cs_status::CS_OK
    })
}

// ---------------------------------------------------------------------------
// model lifecycle
// ---------------------------------------------------------------------------

/// Train an order-`order` model named `label` on the JSONL corpus at
/// `path`, writing the handle to `*out`.
///
/// # Safety
/// `path` and `label` must be valid NUL-terminated strings and `out` a
/// valid pointer. On `CS_OK` the caller owns `*out` and must release it
/// with `cs_model_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_model_train_jsonl(
    path: *const c_char,
    order: usize,
    label: *const c_char,
    out: *mut *mut CsModel,
) -> cs_status {
    guarded(|| {
        if out.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let path = match input_str(path) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let label = match input_str(label) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let samples = match read_samples_jsonl(Path::new(path)) {
            Ok(samples) => samples,
            Err(_) => return cs_status::CS_ERR_IO,
        };
        let codes: Vec<String> = samples.into_iter().map(|s| s.code).collect();
        match NgramModel::train(&codes, order, label) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(CsModel { inner: model }));
                cs_status::CS_OK
            }
            Err(err) => model_error(&err),
        }
    })
}

/// Load a model previously written by `cs_model_save` (or the CLI),
/// writing the handle to `*out`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
/// On `CS_OK` the caller owns `*out` and must release it with
/// `cs_model_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_model_load(path: *const c_char, out: *mut *mut CsModel) -> cs_status {
    guarded(|| {
        if out.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let path = match input_str(path) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match NgramModel::load(Path::new(path)) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(CsModel { inner: model }));
                cs_status::CS_OK
            }
            Err(err) => model_error(&err),
        }
    })
}

/// Serialize `model` to `path`.
///
/// # Safety
/// `model` must be a live handle from this interface and `path` a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cs_model_save(model: *const CsModel, path: *const c_char) -> cs_status {
    guarded(|| {
        if model.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let path = match input_str(path) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match (*model).inner.save(Path::new(path)) {
            Ok(()) => cs_status::CS_OK,
            Err(err) => model_error(&err),
        }
    })
}

/// Sample from `model`, writing the generated source text to `*out`.
/// `temperature` at or below zero decodes greedily; `max_tokens` bounds the
/// output length.
///
/// # Safety
/// `model` must be a live handle, `prompt` a valid NUL-terminated string,
/// and `out` a valid pointer. On `CS_OK` the caller owns `*out` and must
/// release it with `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_generate(
    model: *const CsModel,
    prompt: *const c_char,
    seed: u64,
    temperature: f64,
    max_tokens: usize,
    out: *mut *mut c_char,
) -> cs_status {
    guarded(|| {
        if model.is_null() || out.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let prompt = match input_str(prompt) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let cfg = SamplerConfig { seed, temperature, max_tokens };
        let text = (*model).inner.generate(prompt, &cfg);
        export_string(text, out)
    })
}

/// Write the fraction of the curation-banned identifiers (`eval`, `exec`,
/// `pickle`, `marshal`, `md5`, `system`) present in the model's vocabulary
/// to `*out`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_banned_token_rate(model: *const CsModel, out: *mut f64) -> cs_status {
    guarded(|| {
        if model.is_null() || out.is_null() {
            return cs_status::CS_ERR_BAD_ARG;
        }
        let banned: Vec<String> = DEFAULT_BANNED.iter().map(|t| t.to_string()).collect();
        *out = (*model).inner.banned_token_rate(&banned);
        cs_status::CS_OK
    })
}

// ---------------------------------------------------------------------------
// releases
// ---------------------------------------------------------------------------

/// Release a string returned by this interface. Null is a no-op.
///
/// # Safety
/// `s` must be null or a pointer previously returned through an
/// out-parameter here, released at most once.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be null or a pointer previously returned through an
/// out-parameter here, released at most once.
#[no_mangle]
pub unsafe extern "C" fn cs_model_free(model: *mut CsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
