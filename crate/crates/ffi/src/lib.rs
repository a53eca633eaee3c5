//! C ABI over the `mcted` crate.
//!
//! Models are opaque handles. Every fallible function returns an
//! [`MctedStatus`]; on failure, [`mcted_last_error_message`] describes the
//! error for the calling thread. Strings returned through out-parameters are
//! owned by the caller and must be released with [`mcted_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mcted::corpus::{generate_synthetic, parse_sentence_file, write_sentence_file, GeneratorConfig};
use mcted::model::{load_checkpoint, Model};
use mcted::training::evaluate;
use mcted::Error;

/// Opaque trained model.
pub struct MctedModel {
    inner: Model,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MctedStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Invalid = 5,
    Runtime = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MctedStatus {
    match e {
        Error::Io { .. } => MctedStatus::Io,
        Error::Parse { .. } | Error::Checkpoint(_) | Error::Json(_) => MctedStatus::Parse,
        Error::Validation(_)
        | Error::UnknownType { .. }
        | Error::UnknownLabel(_)
        | Error::EmbeddingDimension { .. }
        | Error::EmptyCorpus
        | Error::Config(_)
        | Error::Dimension { .. } => MctedStatus::Invalid,
        _ => MctedStatus::Runtime,
    }
}

/// Runs `f`, turning errors and panics into a status plus a thread-local message.
fn guard(f: impl FnOnce() -> Result<(), (MctedStatus, String)>) -> MctedStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MctedStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MctedStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (MctedStatus, String) {
    (status_of(&e), e.to_string())
}

/// # Safety
/// `s` must be NULL or point to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (MctedStatus, String)> {
    if s.is_null() {
        return Err((MctedStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (MctedStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn into_c_string(text: String) -> Result<*mut c_char, (MctedStatus, String)> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| (MctedStatus::Runtime, "output contains a NUL byte".into()))
}

/// Loads a checkpoint written by `mcted train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcted_model_load(path: *const c_char, out: *mut *mut MctedModel) -> MctedStatus {
    guard(|| {
        if out.is_null() {
            return Err((MctedStatus::NullPointer, "out is NULL".into()));
        }
        let path = read_str(path, "path")?;
        let model = load_checkpoint(Path::new(path)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MctedModel { inner: model }));
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from `mcted_model_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mcted_model_free(model: *mut MctedModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Labels every token of a sentence file; `out` receives the same file with
/// the LABEL column replaced by predictions.
///
/// # Safety
/// `model` must be a live handle, `sentences` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcted_predict(
    model: *const MctedModel,
    sentences: *const c_char,
    out: *mut *mut c_char,
) -> MctedStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return Err((MctedStatus::NullPointer, "model or out is NULL".into()));
        }
        let model = &(*model).inner;
        let corpus = parse_sentence_file(read_str(sentences, "sentences")?).map_err(lib_err)?;
        let labelled = corpus
            .iter()
            .map(|s| s.with_labels(model.predict(s)?.labels))
            .collect::<Result<Vec<_>, _>>()
            .map_err(lib_err)?;
        *out = into_c_string(write_sentence_file(&labelled).map_err(lib_err)?)?;
        Ok(())
    })
}

/// Scores a gold-labelled sentence file; `out` receives the report as JSON.
///
/// # Safety
/// Same contract as `mcted_predict`.
#[no_mangle]
pub unsafe extern "C" fn mcted_evaluate(
    model: *const MctedModel,
    sentences: *const c_char,
    out: *mut *mut c_char,
) -> MctedStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return Err((MctedStatus::NullPointer, "model or out is NULL".into()));
        }
        let corpus = parse_sentence_file(read_str(sentences, "sentences")?).map_err(lib_err)?;
        let report = evaluate(&(*model).inner, &corpus).map_err(lib_err)?;
        let json = serde_json::to_string(&report).map_err(|e| lib_err(e.into()))?;
        *out = into_c_string(json)?;
        Ok(())
    })
}

/// Generates a seeded synthetic corpus in sentence-file format.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcted_generate_synthetic(sentences: usize, seed: u64, out: *mut *mut c_char) -> MctedStatus {
    guard(|| {
        if out.is_null() {
            return Err((MctedStatus::NullPointer, "out is NULL".into()));
        }
        let config = GeneratorConfig::default().with_sentences(sentences);
        let corpus = generate_synthetic(&config, seed).map_err(lib_err)?;
        *out = into_c_string(write_sentence_file(&corpus).map_err(lib_err)?)?;
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mcted_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn mcted_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mcted_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
