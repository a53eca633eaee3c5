use std::ffi::{CStr, CString};
use std::ptr;

use mcted::corpus::{generate_synthetic, parse_sentence_file, GeneratorConfig};
use mcted::model::{save_checkpoint, Model};
use mcted::training::Hyperparameters;
use mcted_ffi::*;

fn tiny_checkpoint(dir: &std::path::Path) -> (CString, String) {
    let corpus = generate_synthetic(&GeneratorConfig::default().with_sentences(12), 4).unwrap();
    let hyper = Hyperparameters {
        d_word: 4,
        d_model: 4,
        d_r: 2,
        d_w: 2,
        ..Hyperparameters::synthetic()
    };
    let model = Model::for_corpus(hyper, &corpus, &corpus, None).unwrap();
    let path = dir.join("tiny.ckpt");
    save_checkpoint(&model, &path).unwrap();
    let text = mcted::corpus::write_sentence_file(&corpus).unwrap();
    (CString::new(path.to_str().unwrap()).unwrap(), text)
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let owned = CStr::from_ptr(s).to_str().unwrap().to_string();
    mcted_string_free(s);
    owned
}

#[test]
fn load_predict_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let (path, text) = tiny_checkpoint(dir.path());
    let text = CString::new(text).unwrap();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(mcted_model_load(path.as_ptr(), &mut model), MctedStatus::Ok);
        assert!(!model.is_null());

        let mut out = ptr::null_mut();
        assert_eq!(mcted_predict(model, text.as_ptr(), &mut out), MctedStatus::Ok);
        let predicted = parse_sentence_file(&take(out)).unwrap();
        assert_eq!(predicted.len(), 12);

        let mut json = ptr::null_mut();
        assert_eq!(mcted_evaluate(model, text.as_ptr(), &mut json), MctedStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert!(report["classification"]["f1"].is_number());

        mcted_model_free(model);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut model = ptr::null_mut();
        let missing = CString::new("/nonexistent/model.ckpt").unwrap();
        assert_eq!(mcted_model_load(missing.as_ptr(), &mut model), MctedStatus::Io);
        assert!(model.is_null());
        let msg = CStr::from_ptr(mcted_last_error_message()).to_str().unwrap();
        assert!(msg.contains("/nonexistent/model.ckpt"), "{msg}");

        assert_eq!(mcted_model_load(ptr::null(), &mut model), MctedStatus::NullPointer);
        let bad_utf8 = [0xffu8, 0];
        assert_eq!(mcted_model_load(bad_utf8.as_ptr().cast(), &mut model), MctedStatus::InvalidUtf8);

        let dir = tempfile::tempdir().unwrap();
        let (path, _) = tiny_checkpoint(dir.path());
        assert_eq!(mcted_model_load(path.as_ptr(), &mut model), MctedStatus::Ok);
        let garbage = CString::new("0\tx\n").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(mcted_predict(model, garbage.as_ptr(), &mut out), MctedStatus::Parse);
        assert!(out.is_null());
        assert_eq!(mcted_predict(ptr::null(), garbage.as_ptr(), &mut out), MctedStatus::NullPointer);
        mcted_model_free(model);

        // a successful call clears the message
        let mut corpus = ptr::null_mut();
        assert_eq!(mcted_generate_synthetic(3, 1, &mut corpus), MctedStatus::Ok);
        assert!(mcted_last_error_message().is_null());
        mcted_string_free(corpus);
    }
}

#[test]
fn synthetic_corpus_matches_library() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(mcted_generate_synthetic(20, 7, &mut out), MctedStatus::Ok);
        let text = take(out);
        let expected = generate_synthetic(&GeneratorConfig::default().with_sentences(20), 7).unwrap();
        assert_eq!(parse_sentence_file(&text).unwrap(), expected);
    }
}

#[test]
fn null_frees_are_ignored_and_version_is_set() {
    unsafe {
        mcted_model_free(ptr::null_mut());
        mcted_string_free(ptr::null_mut());
        let v = CStr::from_ptr(mcted_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
