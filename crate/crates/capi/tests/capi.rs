//! Exercises the C ABI through the exported extern "C" functions, the same
//! way a foreign caller would.

use std::ffi::{CStr, CString};
use std::ptr;

use asp_distill_capi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn read_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let s = CStr::from_ptr(ptr).to_str().unwrap().to_string();
    asp_string_free(ptr);
    s
}

#[test]
fn parse_inspect_mutate_free() {
    unsafe {
        let text = cstr("ans(X) :- query(X). q :- r. holds(1,2).");
        let mut program: *mut AspProgram = ptr::null_mut();
        assert_eq!(asp_program_parse(text.as_ptr(), &mut program), AspStatus::Ok);
        assert_eq!(asp_program_rule_count(program), 3);

        let preds = read_string(asp_program_predicates(program));
        assert!(preds.contains("ans/1"));
        assert!(preds.contains("holds/2"));

        let pred = cstr("query");
        let mut mutated: *mut AspProgram = ptr::null_mut();
        assert_eq!(
            asp_program_remove_mentioning(program, pred.as_ptr(), &mut mutated),
            AspStatus::Ok
        );
        assert_eq!(asp_program_rule_count(mutated), 2);
        let out = read_string(asp_program_to_text(mutated));
        assert!(!out.contains("query"));

        asp_program_free(mutated);
        asp_program_free(program);
    }
}

#[test]
fn syntax_error_sets_message() {
    unsafe {
        let text = cstr("a :- b");
        let mut program: *mut AspProgram = ptr::null_mut();
        assert_eq!(asp_program_parse(text.as_ptr(), &mut program), AspStatus::SyntaxError);
        assert!(program.is_null());
        let msg = asp_last_error_message();
        assert!(!msg.is_null());
        let msg = CStr::from_ptr(msg).to_str().unwrap();
        assert!(msg.contains("syntax error"), "{msg}");
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        let mut program: *mut AspProgram = ptr::null_mut();
        assert_eq!(asp_program_parse(ptr::null(), &mut program), AspStatus::NullArgument);
        assert_eq!(asp_program_rule_count(ptr::null()), 0);
        assert!(asp_program_to_text(ptr::null()).is_null());
        asp_program_free(ptr::null_mut());
        asp_string_free(ptr::null_mut());
    }
}

#[test]
fn answer_sets_as_json() {
    unsafe {
        let text = cstr("a :- not b. b :- not a.");
        let mut program: *mut AspProgram = ptr::null_mut();
        assert_eq!(asp_program_parse(text.as_ptr(), &mut program), AspStatus::Ok);
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(asp_program_answer_sets(program, 16, &mut out), AspStatus::Ok);
        let json = read_string(out);
        let sets: Vec<Vec<String>> = serde_json::from_str(&json).unwrap();
        assert_eq!(sets, vec![vec!["a".to_string()], vec!["b".to_string()]]);
        asp_program_free(program);
    }
}

#[test]
fn budget_overflow_is_reported() {
    unsafe {
        let atoms: String = (0..20).map(|i| format!("p({i}). ")).collect();
        let text = cstr(&atoms);
        let mut program: *mut AspProgram = ptr::null_mut();
        assert_eq!(asp_program_parse(text.as_ptr(), &mut program), AspStatus::Ok);
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(asp_program_answer_sets(program, 16, &mut out), AspStatus::CapacityExceeded);
        assert!(out.is_null());
        asp_program_free(program);
    }
}

#[test]
fn extract_rules_over_ffi() {
    unsafe {
        let response = cstr("Here you go:\n```\nans(V) :- end(T), val(T,V).\n```\nfact(1).");
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(asp_extract_rules(response.as_ptr(), 1, &mut out), AspStatus::Ok);
        let rules = read_string(out);
        assert_eq!(rules, "ans(V) :- end(T), val(T,V).");
    }
}

#[test]
fn functional_tree_translation_over_ffi() {
    unsafe {
        let tree = cstr(
            r#"{"op":"exist","inputs":[{"op":"filter_red","inputs":[{"op":"scene","inputs":[]}]}]}"#,
        );
        let mut out: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(asp_functional_to_facts(tree.as_ptr(), &mut out), AspStatus::Ok);
        let facts = read_string(out);
        assert!(facts.contains("scene(0)."));
        assert!(facts.contains("filter_red(1,0)."));
        assert!(facts.contains("exist(2,1)."));
        assert!(facts.contains("end(2)."));
    }
}

#[test]
fn version_is_exposed() {
    unsafe {
        let v = CStr::from_ptr(asp_version()).to_str().unwrap();
        assert!(!v.is_empty());
    }
}

#[test]
fn header_is_generated() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/asp_distill.h");
    let text = std::fs::read_to_string(header).expect("cbindgen header exists");
    for symbol in [
        "typedef struct AspProgram AspProgram;",
        "asp_program_parse",
        "asp_program_answer_sets",
        "asp_last_error_message",
        "ASP_DISTILL_H",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
