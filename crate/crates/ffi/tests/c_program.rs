//! Compiles a small C program against the generated header and links it to
//! the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "kickback.h"

int main(void) {
    const double re[4] = {1.0, 0.0, 0.0, cos(1.0)};
    const double im[4] = {0.0, 0.0, 0.0, sin(1.0)};
    const double psi[2] = {0.0, 1.0};
    KbUnitary *u = NULL;
    KbState *s = NULL;
    if (kb_unitary_new(1, re, im, &u) != KB_STATUS_OK) return 10;
    if (kb_state_new(1, psi, NULL, &s) != KB_STATUS_OK) return 11;
    KbRng *rng = kb_rng_new(5);
    KbPhaseResult out;
    if (kb_phase_estimate(u, s, 1.0 / 64.0, 0.9, rng, &out) != KB_STATUS_OK) return 12;
    if (out.ledger.state_preps < 1 || out.n_bits != 6) return 13;
    if (fabs(out.phase - 1.0) > 0.1) return 14;
    if (kb_phase_estimate(u, s, -1.0, 0.9, rng, &out) != KB_STATUS_INVALID_OPERAND) return 15;
    printf("%s\n", kb_last_error());
    kb_rng_free(rng);
    kb_state_free(s);
    kb_unitary_free(u);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests live in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

#[test]
fn c_program_links_and_runs() {
    if !have("cc") {
        eprintln!("cc not found; skipping");
        return;
    }
    let lib_dir = target_dir();
    assert!(
        lib_dir.join("libkickback_ffi.a").exists(),
        "static library missing from {}",
        lib_dir.display()
    );
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("main.c");
    let bin = work.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();

    let compile = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(lib_dir.join("libkickback_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(compile.status.success(), "{}", String::from_utf8_lossy(&compile.stderr));

    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("invalid operand"));
}
