//! Compiles a C program against the generated header and links it to the
//! static library.

use std::env;
use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

/// Directory holding `libvortical_ffi.a`: two levels above the test binary.
fn artifact_dir() -> PathBuf {
    let exe = env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn cc() -> String {
    env::var("CC").unwrap_or_else(|_| "cc".into())
}

#[test]
fn header_compiles_as_strict_c99() {
    let status = Command::new(cc())
        .args([
            "-std=c99",
            "-Wall",
            "-Wextra",
            "-Werror",
            "-pedantic",
            "-fsyntax-only",
            "-I",
        ])
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .status()
        .expect("C compiler available");
    assert!(status.success());
}

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("libvortical_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("vortical_smoke");
    let status = Command::new(cc())
        .args(["-std=c99", "-O1", "-I"])
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
