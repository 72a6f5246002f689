use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use evofs_ffi::*;

fn last_error() -> String {
    let p = evofs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn toy_dataset() -> *mut EvofsDataset {
    // Feature 0 decides the label; feature 1 is noise.
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for i in 0..40u32 {
        let x = f64::from(i) / 40.0;
        features.push(x);
        features.push(f64::from((i * 7919) % 13));
        labels.push(u8::from(x >= 0.3));
    }
    let mut ds = ptr::null_mut();
    let status = unsafe { evofs_dataset_from_arrays(features.as_ptr(), 40, 2, labels.as_ptr(), &mut ds) };
    assert_eq!(status, EvofsStatus::Ok);
    ds
}

#[test]
fn dataset_shape_counts_and_baseline() {
    let ds = toy_dataset();
    let (mut rows, mut cols) = (0, 0);
    let mut counts = [0usize; 2];
    let mut baseline = 0.0;
    unsafe {
        assert_eq!(evofs_dataset_shape(ds, &mut rows, &mut cols), EvofsStatus::Ok);
        assert_eq!(evofs_dataset_class_counts(ds, counts.as_mut_ptr()), EvofsStatus::Ok);
        assert_eq!(evofs_dataset_majority_baseline(ds, &mut baseline), EvofsStatus::Ok);
        evofs_dataset_free(ds);
    }
    assert_eq!((rows, cols), (40, 2));
    assert_eq!(counts, [12, 28]);
    assert!((baseline - 0.7).abs() < 1e-15);
}

#[test]
fn errors_carry_status_and_message() {
    let mut ds = ptr::null_mut();
    let path = CString::new("/nonexistent/data.csv").unwrap();
    let status = unsafe { evofs_dataset_load_csv(path.as_ptr(), ptr::null(), &mut ds) };
    assert_eq!(status, EvofsStatus::Io);
    assert!(last_error().contains("/nonexistent/data.csv"));
    assert!(ds.is_null());

    let status = unsafe { evofs_dataset_shape(ptr::null(), ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(status, EvofsStatus::NullPointer);

    let mut out = 0.0;
    let status = unsafe { evofs_fitness_eq1(0.9, 3, 10, 1.5, &mut out) };
    assert_eq!(status, EvofsStatus::InvalidArgument);

    let labels = [0u8, 2, 1];
    let features = [1.0, 2.0, 3.0];
    let status = unsafe { evofs_dataset_from_arrays(features.as_ptr(), 3, 1, labels.as_ptr(), &mut ds) };
    assert_ne!(status, EvofsStatus::Ok);
    assert!(!last_error().is_empty());

    unsafe {
        evofs_dataset_free(ptr::null_mut());
        evofs_selection_free(ptr::null_mut());
    }
}

#[test]
fn fitness_worked_values() {
    let (mut e1, mut e2) = (0.0, 0.0);
    unsafe {
        assert_eq!(evofs_fitness_eq1(0.9, 10, 100, 0.3, &mut e1), EvofsStatus::Ok);
        assert_eq!(evofs_fitness_eq2(0.9, 0.01, 10, 100, 0.3, &mut e2), EvofsStatus::Ok);
    }
    assert!((e1 - (0.7 * 0.9 + 0.3 * 0.9)).abs() < 1e-12);
    assert!((e2 - (0.7 * 0.89 + 0.3 * 0.9)).abs() < 1e-12);
}

#[test]
fn csv_round_trip_through_handle() {
    let dir = tempdir();
    let path = dir.join("toy.csv");
    std::fs::write(&path, "a,b,label\n0.1,1,yes\n0.2,2,no\n0.3,3,yes\n").unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let label = CString::new("label").unwrap();
    let mut ds = ptr::null_mut();
    let mut counts = [0usize; 2];
    unsafe {
        assert_eq!(evofs_dataset_load_csv(c_path.as_ptr(), label.as_ptr(), &mut ds), EvofsStatus::Ok);
        assert_eq!(evofs_dataset_class_counts(ds, counts.as_mut_ptr()), EvofsStatus::Ok);
        evofs_dataset_free(ds);
    }
    assert_eq!(counts, [2, 1]);
}

#[test]
fn evaluate_and_select() {
    let ds = toy_dataset();
    let mut clf = unsafe { std::mem::zeroed::<EvofsClassifierSpec>() };
    let mut ga = unsafe { std::mem::zeroed::<EvofsGaConfig>() };
    unsafe {
        assert_eq!(evofs_classifier_default(EvofsClassifierKind::Dtc, &mut clf), EvofsStatus::Ok);
        assert_eq!(evofs_ga_config_default(&mut ga), EvofsStatus::Ok);
    }
    assert_eq!(clf.kind, EvofsClassifierKind::Dtc);
    assert_eq!(clf.max_depth, 0);
    assert_eq!(ga.population, 50);
    assert_eq!(ga.generations, 300);

    let fit = EvofsFitnessConfig {
        alpha: 0.5,
        variance_penalty: false,
        inner_folds: 5,
        classifier: clf,
        fold_seed: 3,
    };
    let mut report = unsafe { std::mem::zeroed::<EvofsFitnessReport>() };
    let genotype = [1u8, 0];
    unsafe {
        assert_eq!(evofs_evaluate(ds, genotype.as_ptr(), 2, &fit, &mut report), EvofsStatus::Ok);
    }
    assert!(report.effectiveness > 0.9);
    assert_eq!((report.num_selected, report.num_total), (1, 2));
    assert!((report.fitness - (0.5 * report.effectiveness + 0.25)).abs() < 1e-12);

    ga.population = 6;
    ga.generations = 4;
    ga.seed = 9;
    let mut sel = ptr::null_mut();
    unsafe {
        assert_eq!(evofs_ga_select(ds, &ga, &fit, &mut sel), EvofsStatus::Ok);
        let mut len = 0;
        let feats = evofs_selection_features(sel, &mut len);
        assert_eq!(std::slice::from_raw_parts(feats, len), &[0]);
        let mut fitness = 0.0;
        assert_eq!(evofs_selection_score(sel, &mut fitness, ptr::null_mut()), EvofsStatus::Ok);
        assert_eq!(fitness, report.fitness);
        assert_eq!(evofs_selection_log_len(sel), 5);
        let mut prev = f64::NEG_INFINITY;
        for g in 0..5 {
            let mut row = std::mem::zeroed::<EvofsGenerationStats>();
            assert_eq!(evofs_selection_log_row(sel, g, &mut row), EvofsStatus::Ok);
            assert_eq!(row.generation, g);
            assert!(row.best_fitness >= prev);
            prev = row.best_fitness;
        }
        let mut row = std::mem::zeroed::<EvofsGenerationStats>();
        assert_eq!(evofs_selection_log_row(sel, 5, &mut row), EvofsStatus::InvalidArgument);
        evofs_selection_free(sel);
        evofs_dataset_free(ds);
    }
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("evofs-ffi-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/capi-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "evofs.h"

int main(void) {
    double x[8] = {0.0, 5.0, 0.1, 3.0, 0.8, 4.0, 0.9, 1.0};
    unsigned char y[4] = {0, 0, 1, 1};
    EvofsDataset *ds = NULL;
    if (evofs_dataset_from_arrays(x, 4, 2, y, &ds) != EVOFS_STATUS_OK) return 1;
    double b = 0.0;
    if (evofs_dataset_majority_baseline(ds, &b) != EVOFS_STATUS_OK) return 2;
    EvofsDataset *bad = NULL;
    if (evofs_dataset_load_csv("/nonexistent.csv", NULL, &bad) != EVOFS_STATUS_IO) return 3;
    printf("baseline=%.3f version=%s\n", b, evofs_version());
    evofs_dataset_free(ds);
    return 0;
}
"#;

#[test]
fn header_compiles_and_links_from_c() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("cc not available; skipping C link test");
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib_dir = target_dir();
    if !lib_dir.join("libevofs_ffi.so").exists() {
        eprintln!("shared library not found in {}; skipping C link test", lib_dir.display());
        return;
    }
    let dir = tempdir();
    let src = dir.join("main.c");
    let bin = dir.join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-levofs_ffi")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("baseline=0.500 version="), "{text}");
}
