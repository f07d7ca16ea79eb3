//! Compiles a C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn target_profile_dir() -> PathBuf {
    // tests run from target/<profile>/deps/
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/unilrt.h")).unwrap();
    assert!(header.starts_with("#ifndef UNILRT_H"));
    for sym in [
        "typedef struct UnilrtSample UnilrtSample;",
        "typedef struct UnilrtSplits UnilrtSplits;",
        "UNILRT_STATUS_NULL_POINTER = 5",
        "UnilrtStatus unilrt_chi2_upper_quantile(",
        "void unilrt_sample_free(UnilrtSample *sample);",
        "UnilrtStatus unilrt_power_monte_carlo(",
        "const char *unilrt_last_error_message(void);",
    ] {
        assert!(header.contains(sym), "header lacks `{sym}`");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    if !have_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let header = manifest_dir().join("include/unilrt.h");
    for lang in ["c", "c++"] {
        let status = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .status()
            .unwrap();
        assert!(status.success(), "header fails to compile as {lang}");
    }
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let lib = target_profile_dir().join("libunilrt_ffi.a");
    if !Path::new(&lib).exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let out = Command::new("cc")
        .arg("-Wall")
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "link failed:\n{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "smoke program failed:\n{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
