//! C ABI for the asp-distill core: parse, serialize, and mutate ASP
//! programs, enumerate answer sets with the brute-force checker, extract
//! rules from model responses, and translate functional question trees.
//!
//! Conventions:
//! - `AspProgram` is an opaque handle; release it with [`asp_program_free`].
//! - Functions that produce strings return ownership; release with
//!   [`asp_string_free`].
//! - Fallible functions return an [`AspStatus`]; on failure a human-readable
//!   message is available via [`asp_last_error_message`] until the next
//!   failing call on the same thread.
//!
//! The generated header is written to `include/asp_distill.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

use asp_distill::asp::{self, AspError, Program};
use asp_distill::dataset::{translate_functional_to_asp, FunctionalNode};
use asp_distill::llm::extract_rules;

/// Status codes returned by fallible functions.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AspStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    SyntaxError = 3,
    NotGround = 4,
    CapacityExceeded = 5,
    Unsupported = 6,
    IoError = 7,
    FormatError = 8,
}

/// Opaque handle around a parsed program.
pub struct AspProgram {
    inner: Program,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(message).expect("nul bytes stripped"));
    });
}

fn status_of(err: &AspError) -> AspStatus {
    match err {
        AspError::Syntax { .. } => AspStatus::SyntaxError,
        AspError::NotGround { .. } => AspStatus::NotGround,
        AspError::CapacityExceeded { .. } => AspStatus::CapacityExceeded,
        AspError::Unsupported { .. } => AspStatus::Unsupported,
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, AspStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(AspStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        AspStatus::InvalidUtf8
    })
}

fn string_out(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " ")).expect("nul bytes stripped").into_raw()
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn asp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn asp_last_error_message() -> *const c_char {
    LAST_ERROR
        .with(|slot| slot.borrow().as_ref().map(|s| s.as_ptr()).unwrap_or(ptr::null()))
}

/// Parse program text into a new handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asp_program_parse(
    text: *const c_char,
    out: *mut *mut AspProgram,
) -> AspStatus {
    if out.is_null() {
        set_error("null output pointer");
        return AspStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let text = match cstr_arg(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match asp::parse_program(text) {
        Ok(program) => {
            *out = Box::into_raw(Box::new(AspProgram { inner: program }));
            AspStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Parse a `.lp` file into a new handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asp_program_parse_file(
    path: *const c_char,
    out: *mut *mut AspProgram,
) -> AspStatus {
    if out.is_null() {
        set_error("null output pointer");
        return AspStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let path = match cstr_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            set_error(format!("cannot read {path}: {e}"));
            return AspStatus::IoError;
        }
    };
    match asp::parse_program(&text) {
        Ok(program) => {
            *out = Box::into_raw(Box::new(AspProgram { inner: program }));
            AspStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Release a program handle. Null is a no-op.
///
/// # Safety
/// `program` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn asp_program_free(program: *mut AspProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Number of statements in the program; 0 for null.
///
/// # Safety
/// `program` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn asp_program_rule_count(program: *const AspProgram) -> usize {
    program.as_ref().map(|p| p.inner.len()).unwrap_or(0)
}

/// Serialize the program, one statement per line.
///
/// # Safety
/// `program` must be a live handle or null (which yields null).
#[no_mangle]
pub unsafe extern "C" fn asp_program_to_text(program: *const AspProgram) -> *mut c_char {
    match program.as_ref() {
        Some(p) => string_out(p.inner.to_text()),
        None => ptr::null_mut(),
    }
}

/// Predicates of the program, one `name/arity` per line.
///
/// # Safety
/// `program` must be a live handle or null (which yields null).
#[no_mangle]
pub unsafe extern "C" fn asp_program_predicates(program: *const AspProgram) -> *mut c_char {
    match program.as_ref() {
        Some(p) => {
            let lines: Vec<String> = asp::predicates_of(&p.inner)
                .into_iter()
                .map(|(name, arity)| format!("{name}/{arity}"))
                .collect();
            string_out(lines.join("\n"))
        }
        None => ptr::null_mut(),
    }
}

/// New program without any rule mentioning `predicate`.
///
/// # Safety
/// `program` must be a live handle; `predicate` a valid string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn asp_program_remove_mentioning(
    program: *const AspProgram,
    predicate: *const c_char,
    out: *mut *mut AspProgram,
) -> AspStatus {
    if out.is_null() || program.is_null() {
        set_error("null argument");
        return AspStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let predicate = match cstr_arg(predicate) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let mutated = asp::remove_rules_mentioning(&(*program).inner, predicate);
    *out = Box::into_raw(Box::new(AspProgram { inner: mutated }));
    AspStatus::Ok
}

/// New program with `percent`% of rules removed by a seeded generator.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asp_program_remove_random(
    program: *const AspProgram,
    percent: u32,
    seed: u64,
    out: *mut *mut AspProgram,
) -> AspStatus {
    if out.is_null() || program.is_null() {
        set_error("null argument");
        return AspStatus::NullArgument;
    }
    *out = ptr::null_mut();
    if percent > 100 {
        set_error("percent must be within 0..=100");
        return AspStatus::FormatError;
    }
    let mutated = asp::remove_random_fraction(&(*program).inner, percent, seed);
    *out = Box::into_raw(Box::new(AspProgram { inner: mutated }));
    AspStatus::Ok
}

/// Enumerate the answer sets of a ground normal program with the built-in
/// brute-force checker. The result is a JSON array of arrays of atom strings.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asp_program_answer_sets(
    program: *const AspProgram,
    atom_budget: usize,
    out: *mut *mut c_char,
) -> AspStatus {
    if out.is_null() || program.is_null() {
        set_error("null argument");
        return AspStatus::NullArgument;
    }
    *out = ptr::null_mut();
    match asp::enumerate_with_budget(&(*program).inner, atom_budget) {
        Ok(sets) => {
            let rendered: Vec<Vec<String>> = sets.into_iter().map(|i| i.atom_names()).collect();
            let json = serde_json::to_string(&rendered).expect("model sets serialize");
            *out = string_out(json);
            AspStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Salvage ASP statements from a free-form model response, one per line.
/// `no_facts_guard != 0` drops facts.
///
/// # Safety
/// `response` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asp_extract_rules(
    response: *const c_char,
    no_facts_guard: c_int,
    out: *mut *mut c_char,
) -> AspStatus {
    if out.is_null() {
        set_error("null output pointer");
        return AspStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let response = match cstr_arg(response) {
        Ok(r) => r,
        Err(status) => return status,
    };
    let rules = extract_rules(response, no_facts_guard != 0);
    *out = string_out(rules.join("\n"));
    AspStatus::Ok
}

/// Translate a functional question tree, given as JSON
/// (`{"op": "count", "inputs": [...]}` with `scene` leaves), into indexed
/// ASP facts.
///
/// # Safety
/// `tree_json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asp_functional_to_facts(
    tree_json: *const c_char,
    out: *mut *mut c_char,
) -> AspStatus {
    if out.is_null() {
        set_error("null output pointer");
        return AspStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let text = match cstr_arg(tree_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let tree: FunctionalNode = match serde_json::from_str(text) {
        Ok(t) => t,
        Err(e) => {
            set_error(format!("tree JSON: {e}"));
            return AspStatus::FormatError;
        }
    };
    match translate_functional_to_asp(&tree) {
        Ok(program) => {
            *out = string_out(program.to_text());
            AspStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            AspStatus::FormatError
        }
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `text` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn asp_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
