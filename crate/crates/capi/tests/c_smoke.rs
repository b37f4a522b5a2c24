//! Compiles and runs a small C program against the generated header and the
//! static library, proving the ABI from the consumer side. Skips quietly on
//! hosts without a C compiler or the staticlib artifact.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include "asp_distill.h"
#include <stdio.h>
#include <string.h>

int main(void) {
    AspProgram *p = NULL;
    if (asp_program_parse("a :- not b. b :- not a.", &p) != ASP_STATUS_OK) return 1;
    if (asp_program_rule_count(p) != 2) return 2;
    char *sets = NULL;
    if (asp_program_answer_sets(p, 16, &sets) != ASP_STATUS_OK) return 3;
    if (strstr(sets, "\"a\"") == NULL || strstr(sets, "\"b\"") == NULL) return 4;
    asp_string_free(sets);

    AspProgram *bad = NULL;
    if (asp_program_parse("a :- b", &bad) != ASP_STATUS_SYNTAX_ERROR) return 5;
    if (asp_last_error_message() == NULL) return 6;

    asp_program_free(p);
    printf("capi smoke ok\n");
    return 0;
}
"#;

fn find_compiler() -> Option<&'static str> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
        {
            return Some(cc);
        }
    }
    None
}

#[test]
fn c_consumer_links_and_runs() {
    let Some(cc) = find_compiler() else {
        eprintln!("skipping: no C compiler found");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    // `cargo test` links the lib as an rlib; the staticlib artifact has to be
    // produced (and kept fresh) explicitly.
    let build = Command::new(env!("CARGO"))
        .args(["build", "-p", "asp-distill-capi", "--lib"])
        .current_dir(&manifest)
        .output()
        .expect("cargo runs");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let target_dir = std::env::var("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| manifest.join("../../target"));
    let staticlib = target_dir.join("debug").join("libasp_distill_capi.a");
    if !staticlib.is_file() {
        eprintln!("skipping: staticlib not built at {}", staticlib.display());
        return;
    }

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.path().join("smoke");
    let compile = Command::new(cc)
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("compiler runs");
    assert!(
        compile.status.success(),
        "C compilation failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&exe).output().expect("smoke binary runs");
    assert!(run.status.success(), "smoke exited {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).contains("capi smoke ok"));
}
