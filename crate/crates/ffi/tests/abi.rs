use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use leafshap::data::read_dataset;
use leafshap::tree::read_model;
use leafshap::{explain_batch, Algorithm, Estimator, ExplainOptions, Explainer};
use leafshap_ffi::*;
use tempfile::TempDir;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn c_path(p: &Path) -> CString {
    c(p.to_str().unwrap())
}

fn last_error() -> String {
    let p = ls_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// Two-feature tree whose `a > 0` side has no data.
fn fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let model = r#"{"n_features": 2, "trees": [{"nodes": [
        {"id": 0, "feature": 0, "threshold": 0.0, "left": 1, "right": 2, "count": 6},
        {"id": 1, "feature": 1, "threshold": 0.5, "left": 3, "right": 4, "count": 6},
        {"id": 2, "value": 10.0, "count": 0},
        {"id": 3, "value": -1.0, "count": 3},
        {"id": 4, "value": 2.0, "count": 3}]}]}"#;
    let paths = (dir.join("m.json"), dir.join("d.csv"), dir.join("s.txt"));
    std::fs::write(&paths.0, model).unwrap();
    std::fs::write(&paths.1, "a,b\n-1,0\n-2,0\n-0.5,0\n-1,1\n-3,1\n-0.1,1\n").unwrap();
    std::fs::write(&paths.2, "a = continuous\nb = continuous\n").unwrap();
    paths
}

fn load(m: &Path, d: Option<(&Path, &Path)>) -> (LsStatus, *mut LsExplainer) {
    let m = c_path(m);
    let (d, s) = match d {
        Some((d, s)) => (Some(c_path(d)), Some(c_path(s))),
        None => (None, None),
    };
    let mut h = ptr::null_mut();
    let status = unsafe {
        ls_explainer_load(
            m.as_ptr(),
            d.as_ref().map_or(ptr::null(), |x| x.as_ptr()),
            s.as_ref().map_or(ptr::null(), |x| x.as_ptr()),
            &mut h,
        )
    };
    (status, h)
}

fn explain(h: *const LsExplainer, est: &str, alg: &str, rows: &[f64], n_cols: usize) -> (LsStatus, Vec<f64>, usize) {
    let n_rows = rows.len() / n_cols.max(1);
    let p = unsafe { ls_explainer_n_players(h) };
    let mut phi = vec![f64::NAN; n_rows * p];
    let mut failed = usize::MAX;
    let (e, a) = (c(est), c(alg));
    let status = unsafe {
        ls_explain(
            h,
            e.as_ptr(),
            a.as_ptr(),
            rows.as_ptr(),
            n_rows,
            n_cols,
            1,
            phi.as_mut_ptr(),
            ptr::null_mut(),
            &mut failed,
        )
    };
    (status, phi, failed)
}

#[test]
fn matches_library_output_exactly() {
    let dir = TempDir::new().unwrap();
    let (m, d, s) = fixture(dir.path());
    let (status, h) = load(&m, Some((&d, &s)));
    assert_eq!(status, LsStatus::Ok);
    assert_eq!(unsafe { ls_explainer_n_columns(h) }, 2);
    assert_eq!(unsafe { ls_explainer_n_players(h) }, 2);

    let rows = [-1.0, 0.0, -0.3, 1.0, -2.0, 0.7];
    let explainer = Explainer::with_singletons(read_model(&m).unwrap(), Some(read_dataset(&d, &s).unwrap())).unwrap();
    let batch: Vec<Vec<f64>> = rows.chunks(2).map(<[f64]>::to_vec).collect();
    let options = ExplainOptions {
        strict: true,
        ..ExplainOptions::default()
    };
    for (est, alg) in [
        ("leaf", "brute_force"),
        ("leaf_raw", "multi_games"),
        ("shap_path", "tree_shap"),
    ] {
        let (status, phi, _) = explain(h, est, alg, &rows, 2);
        assert_eq!(status, LsStatus::Ok, "{}", last_error());
        let lib = explain_batch(
            &explainer,
            &batch,
            &[0, 1, 2],
            est.parse::<Estimator>().unwrap(),
            alg.parse::<Algorithm>().unwrap(),
            &options,
        )
        .unwrap();
        let expected: Vec<f64> = lib.iter().flat_map(|r| r.values()).collect();
        assert_eq!(phi, expected);
    }
    unsafe { ls_explainer_free(h) };
}

#[test]
fn errors_map_to_status_codes() {
    let dir = TempDir::new().unwrap();
    let (m, d, s) = fixture(dir.path());
    let (_, h) = load(&m, Some((&d, &s)));

    let (status, _, _) = explain(h, "leaf", "multi_games", &[-1.0, 0.0], 2);
    assert_eq!(status, LsStatus::Config);
    assert!(last_error().contains("multi_games"));
    assert_eq!(explain(h, "nope", "brute_force", &[-1.0, 0.0], 2).0, LsStatus::Config);
    assert_eq!(
        explain(h, "leaf", "brute_force", &[-1.0, 0.0, 1.0], 3).0,
        LsStatus::Validation
    );

    let (status, _, failed) = explain(h, "leaf", "brute_force", &[-1.0, 0.0, 1.0, 0.0], 2);
    assert_eq!(status, LsStatus::Degenerate);
    assert_eq!(failed, 1);
    assert!(last_error().contains("instance 1"));

    // Zero rows succeed without touching the buffers.
    assert_eq!(explain(h, "leaf", "brute_force", &[], 2).0, LsStatus::Ok);
    unsafe { ls_explainer_free(h) };

    let (status, h) = load(&dir.path().join("missing.json"), None);
    assert_eq!(status, LsStatus::Config);
    assert!(h.is_null());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n_features\": 1}").unwrap();
    assert_eq!(load(&bad, None).0, LsStatus::Validation);
}

#[test]
fn null_arguments_are_rejected() {
    let mut h = ptr::null_mut();
    let status = unsafe { ls_explainer_load(ptr::null(), ptr::null(), ptr::null(), &mut h) };
    assert_eq!(status, LsStatus::NullPointer);
    let e = c("leaf");
    let a = c("brute_force");
    let status = unsafe {
        ls_explain(
            ptr::null(),
            e.as_ptr(),
            a.as_ptr(),
            ptr::null(),
            0,
            0,
            0,
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, LsStatus::NullPointer);
    assert_eq!(unsafe { ls_explainer_n_players(ptr::null()) }, 0);
    unsafe { ls_explainer_free(ptr::null_mut()) };
}

#[test]
fn model_without_data_supports_shap_path_only() {
    let dir = TempDir::new().unwrap();
    let (m, _, _) = fixture(dir.path());
    let (status, h) = load(&m, None);
    assert_eq!(status, LsStatus::Ok);
    assert_eq!(explain(h, "shap_path", "tree_shap", &[-1.0, 0.0], 2).0, LsStatus::Ok);
    assert_eq!(explain(h, "leaf", "brute_force", &[-1.0, 0.0], 2).0, LsStatus::Config);
    unsafe { ls_explainer_free(h) };
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(ls_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/leafshap.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "ls_explainer_load",
        "ls_explainer_free",
        "ls_explainer_n_columns",
        "ls_explainer_n_players",
        "ls_explain",
        "ls_last_error",
        "ls_version",
        "typedef struct LsExplainer LsExplainer",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    // Check the header with a C compiler when one is installed.
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "leafshap.h"

int main(int argc, char **argv) {
    LsExplainer *h = NULL;
    if (ls_explainer_load(argv[1], argv[2], argv[3], &h) != LS_STATUS_OK) {
        fprintf(stderr, "%s\n", ls_last_error());
        return 10;
    }
    double rows[4] = {-1.0, 0.0, -0.3, 1.0};
    double phi[4], base[2];
    size_t failed = 0;
    LsStatus s = ls_explain(h, "leaf", "brute_force", rows, 2, 2, 1, phi, base, &failed);
    if (s != LS_STATUS_OK) return 11;
    printf("%.17g %.17g %.17g %.17g %.17g\n", phi[0], phi[1], phi[2], phi[3], base[0]);
    double bad[2] = {1.0, 0.0};
    s = ls_explain(h, "leaf", "brute_force", bad, 1, 2, 1, phi, NULL, &failed);
    ls_explainer_free(h);
    return s == LS_STATUS_DEGENERATE ? 0 : 12;
}
"#;

#[test]
fn c_program_links_against_the_shared_library() {
    // target/<profile>/deps/abi-* -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(Path::parent).unwrap().to_path_buf();
    if !lib_dir.join("libleafshap_ffi.so").exists() {
        eprintln!("shared library not built; skipping");
        return;
    }
    let dir = TempDir::new().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let Ok(build) = std::process::Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lleafshap_ffi", "-o"])
        .arg(&bin)
        .output()
    else {
        return;
    };
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));

    let (m, d, s) = fixture(dir.path());
    let run = std::process::Command::new(&bin)
        .args([&m, &d, &s])
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status,
        String::from_utf8_lossy(&run.stderr)
    );

    let explainer = Explainer::with_singletons(read_model(&m).unwrap(), Some(read_dataset(&d, &s).unwrap())).unwrap();
    let lib = explain_batch(
        &explainer,
        &[vec![-1.0, 0.0], vec![-0.3, 1.0]],
        &[0, 1],
        Estimator::Leaf,
        Algorithm::BruteForce,
        &ExplainOptions::default(),
    )
    .unwrap();
    let printed: Vec<f64> = String::from_utf8(run.stdout)
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    let mut expected: Vec<f64> = lib.iter().flat_map(|r| r.values()).collect();
    expected.push(lib[0].base_value);
    assert_eq!(printed, expected);
}
