//! Compiles a small C program against the generated header and the static
//! library. Skipped when no C compiler is on PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "rankin_lab.h"

int main(void) {
    RlEigenforms *h = NULL;
    if (rl_eigenforms_new(12, 100, 128, &h) != RL_STATUS_OK) return 1;
    double v = 0.0;
    if (rl_eigenforms_lambda(h, 0, 3, &v) != RL_STATUS_OK) return 2;
    if (rl_eigenforms_lambda(h, 5, 3, &v) != RL_STATUS_RANGE) return 3;
    if (rl_last_error() == NULL) return 4;
    rl_eigenforms_free(h);
    printf("%.15f\n", v);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/c_smoke-xxxx
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let lib = target_dir().join("librankin_lab_ffi.a");
    if !lib.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "-p", "rankin-lab-ffi", "--lib"]);
        if target_dir().file_name().is_some_and(|p| p == "release") {
            cmd.arg("--release");
        }
        assert!(cmd.status().unwrap().success(), "static library build failed");
    }
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I", include])
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    // τ(3) / 3^{11/2}
    assert!((v - 252.0 / 3f64.powf(5.5)).abs() < 1e-12);
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("rankin-lab-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
