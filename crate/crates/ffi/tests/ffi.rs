use oprenewal_ffi::*;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let p = opr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn operator_lifecycle() {
    let mut op = ptr::null_mut();
    let s = unsafe { opr_operator_new(OprFamily::Lsv, 2.0, 64, 400, &mut op) };
    assert_eq!(s, OprStatus::Ok);
    assert_eq!(unsafe { opr_operator_cells(op) }, 64);
    let mut h = vec![0.0; 64];
    assert_eq!(unsafe { opr_operator_density(op, h.as_mut_ptr(), h.len()) }, OprStatus::Ok);
    let mass: f64 = h.iter().sum::<f64>() * 0.5 / 64.0;
    assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
    let mut deficit = 0.0;
    assert_eq!(unsafe { opr_operator_mass_deficit(op, &mut deficit) }, OprStatus::Ok);
    assert!(deficit > 0.0 && deficit < 0.05);

    let v = vec![1.0; 64];
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { opr_renewal_new(op, v.as_ptr(), v.len(), 50, &mut r) }, OprStatus::Ok);
    let mut t0 = vec![0.0; 64];
    assert_eq!(unsafe { opr_renewal_tn(r, 0, t0.as_mut_ptr(), 64) }, OprStatus::Ok);
    assert!(t0.iter().all(|x| (x - 1.0).abs() < 1e-12));
    let mut s50 = vec![0.0; 64];
    assert_eq!(unsafe { opr_renewal_partial_sum(r, 50, s50.as_mut_ptr(), 64) }, OprStatus::Ok);
    assert!(s50.iter().all(|x| *x > 1.0));
    assert_eq!(unsafe { opr_renewal_tn(r, 51, t0.as_mut_ptr(), 64) }, OprStatus::InvalidArgument);
    assert!(last_error().contains("exceeds"));
    unsafe {
        opr_renewal_free(r);
        opr_operator_free(op);
    }
}

#[test]
fn errors_are_reported() {
    let mut op = ptr::null_mut();
    let s = unsafe { opr_operator_new(OprFamily::Lsv, 0.5, 64, 400, &mut op) };
    assert_eq!(s, OprStatus::InvalidArgument);
    assert!(op.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { opr_operator_new(OprFamily::Lsv, 2.0, 64, 400, ptr::null_mut()) }, OprStatus::NullPointer);
    let mut x = 0.0;
    assert_eq!(unsafe { opr_gamma(0.0, &mut x) }, OprStatus::Numeric);
    assert_eq!(unsafe { opr_operator_mass_deficit(ptr::null(), &mut x) }, OprStatus::NullPointer);
    assert_eq!(unsafe { opr_operator_cells(ptr::null()) }, 0);
    unsafe {
        opr_operator_free(ptr::null_mut());
        opr_renewal_free(ptr::null_mut());
    }
    let msg = unsafe { CStr::from_ptr(opr_status_message(OprStatus::BufferTooSmall)) };
    assert_eq!(msg.to_str().unwrap(), "output buffer too small");
}

#[test]
fn buffer_too_small() {
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { opr_operator_new(OprFamily::Lsv0, 0.0, 32, 200, &mut op) }, OprStatus::Ok);
    let mut h = vec![0.0; 16];
    assert_eq!(unsafe { opr_operator_density(op, h.as_mut_ptr(), h.len()) }, OprStatus::BufferTooSmall);
    unsafe { opr_operator_free(op) };
}

#[test]
fn scalar_and_tauberian_entry_points() {
    let mut u = vec![0.0; 11];
    assert_eq!(unsafe { opr_scalar_renewal([0.5, 0.5].as_ptr(), 2, 10, u.as_mut_ptr()) }, OprStatus::Ok);
    // u_n = (2 + (−1/2)^n)/3 for f = (1/2, 1/2).
    for (n, x) in u.iter().enumerate() {
        let exact = (2.0 + (-0.5f64).powi(n as i32)) / 3.0;
        assert!((x - exact).abs() < 1e-14);
    }
    let (mut v, mut e) = (0.0, 0.0);
    assert_eq!(unsafe { opr_contour_b2(0.5, &mut v, &mut e) }, OprStatus::Ok);
    assert!((v - 4.0 * std::f64::consts::PI.sqrt() / std::f64::consts::E).abs() < 1e-9);
    let ones = vec![1.0; 4000];
    let (mut est, mut bar) = (0.0, 0.0);
    assert_eq!(unsafe { opr_kernel_extract(ones.as_ptr(), ones.len(), 100, 0.4, 1.0, &mut est, &mut bar) }, OprStatus::Ok);
    assert!((est - 97.0).abs() <= bar);
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let header_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(header_dir.join("oprenewal.h").exists());
    let lib = target_dir().join("liboprenewal_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "oprenewal.h"
int main(void) {
    double g = 0.0;
    if (opr_gamma(0.5, &g) != OPR_STATUS_OK) return 1;
    if (fabs(g * g - 3.141592653589793) > 1e-12) return 2;
    OprOperator *op = NULL;
    if (opr_operator_new(OPR_FAMILY_LSV, 0.5, 64, 100, &op) != OPR_STATUS_INVALID_ARGUMENT) return 3;
    if (opr_last_error() == NULL) return 4;
    if (opr_operator_new(OPR_FAMILY_LSV, 2.0, 32, 100, &op) != OPR_STATUS_OK) return 5;
    double h[32];
    if (opr_operator_density(op, h, 32) != OPR_STATUS_OK) return 6;
    opr_operator_free(op);
    printf("%.6f\n", h[0]);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
}
