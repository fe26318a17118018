use std::ffi::{CStr, CString};
use std::ptr;

use saoovqe::integrals::{write_aoint, write_fcidump};
use saoovqe::synthetic::{molecule_like, SyntheticSpec};
use saoovqe_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(saoovqe_last_error()) }.to_string_lossy().into_owned()
}

fn fixture_file(dir: &tempfile::TempDir) -> CString {
    let f = molecule_like(&SyntheticSpec::new(3, 5, 6));
    let p = dir.path().join("m.aoint");
    std::fs::write(&p, write_aoint(&f)).unwrap();
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn gate_count_matches_library() {
    let (mut t, mut s, mut d) = (0, 0, 0);
    let st = unsafe { saoovqe_gate_count(3, &mut t, &mut s, &mut d) };
    assert_eq!(st, SaoovqeStatus::Ok);
    assert_eq!((t, s, d), (3904, 2080, 1824));
}

#[test]
fn null_pointers_are_rejected() {
    let st = unsafe { saoovqe_gate_count(3, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, SaoovqeStatus::NullPointer);
    assert!(!last_error().is_empty());
    let mut out = ptr::null_mut();
    let st = unsafe { saoovqe_fixture_load_aoint(ptr::null(), &mut out) };
    assert_eq!(st, SaoovqeStatus::NullPointer);
    assert!(out.is_null());
    unsafe { saoovqe_fixture_free(ptr::null_mut()) };
    unsafe { saoovqe_run_free(ptr::null_mut()) };
}

#[test]
fn missing_file_reports_load_error() {
    let path = CString::new("/nonexistent/x.aoint").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { saoovqe_fixture_load_aoint(path.as_ptr(), &mut out) };
    assert_eq!(st, SaoovqeStatus::Load);
    assert!(last_error().contains("nonexistent"));
}

#[test]
fn malformed_fcidump_reports_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.fcidump");
    std::fs::write(&p, "garbage\n").unwrap();
    let path = CString::new(p.to_str().unwrap()).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { saoovqe_fixture_load_fcidump(path.as_ptr(), &mut out) };
    assert_eq!(st, SaoovqeStatus::Parse);
}

#[test]
fn casci_and_run_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture_file(&dir);
    let mut fx = ptr::null_mut();
    assert_eq!(unsafe { saoovqe_fixture_load_aoint(path.as_ptr(), &mut fx) }, SaoovqeStatus::Ok);
    assert!(last_error().is_empty());

    let (mut n_mo, mut n_elec) = (0, 0);
    assert_eq!(unsafe { saoovqe_fixture_dims(fx, &mut n_mo, &mut n_elec) }, SaoovqeStatus::Ok);
    assert_eq!((n_mo, n_elec), (5, 6));

    let mut e = [0.0; 2];
    let mut count = 0;
    let st = unsafe { saoovqe_casci(fx, 4, 3, 2, 1, e.as_mut_ptr(), &mut count) };
    assert_eq!(st, SaoovqeStatus::Ok);
    assert_eq!(count, 2);
    assert!(e[0] <= e[1]);

    let mut opts = saoovqe_run_options_default();
    opts.no_oo = 1;
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { saoovqe_run(fx, &opts, &mut run) }, SaoovqeStatus::Ok);
    let (mut ea, mut eb, mut esa, mut nc, mut conv) = (0.0, 0.0, 0.0, 0, 0);
    let st = unsafe { saoovqe_run_energies(run, &mut ea, &mut eb, &mut esa, &mut nc, &mut conv) };
    assert_eq!(st, SaoovqeStatus::Ok);
    assert!((esa - 0.5 * (ea + eb)).abs() < 1e-12);
    // variational with respect to the exact ensemble energy in the same orbitals
    assert!(esa >= 0.5 * (e[0] + e[1]) - 1e-9);

    let mut len = 0;
    let st = unsafe { saoovqe_run_theta(run, ptr::null_mut(), 0, &mut len) };
    assert_eq!(st, SaoovqeStatus::BufferTooSmall);
    assert_eq!(len, 12);
    let mut theta = vec![0.0; len];
    assert_eq!(unsafe { saoovqe_run_theta(run, theta.as_mut_ptr(), len, &mut len) }, SaoovqeStatus::Ok);
    assert!(theta.iter().all(|t| t.is_finite()));

    unsafe {
        saoovqe_run_free(run);
        saoovqe_fixture_free(fx);
    }
}

#[test]
fn invalid_active_space_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture_file(&dir);
    let mut fx = ptr::null_mut();
    assert_eq!(unsafe { saoovqe_fixture_load_aoint(path.as_ptr(), &mut fx) }, SaoovqeStatus::Ok);
    let mut opts = saoovqe_run_options_default();
    opts.n_active_elec = 5;
    let mut run = ptr::null_mut();
    let st = unsafe { saoovqe_run(fx, &opts, &mut run) };
    assert_ne!(st, SaoovqeStatus::Ok);
    assert!(run.is_null());
    assert!(!last_error().is_empty());
    unsafe { saoovqe_fixture_free(fx) };
}

#[test]
fn fcidump_loads_with_identity_orbitals() {
    let f = molecule_like(&SyntheticSpec::new(4, 4, 4));
    let mo = saoovqe::integrals::transform_to_mo(&f.integrals, &f.coeffs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.fcidump");
    std::fs::write(&p, write_fcidump(&mo)).unwrap();
    let path = CString::new(p.to_str().unwrap()).unwrap();
    let mut fx = ptr::null_mut();
    assert_eq!(unsafe { saoovqe_fixture_load_fcidump(path.as_ptr(), &mut fx) }, SaoovqeStatus::Ok);
    let (mut n_mo, mut n_elec) = (0, 0);
    unsafe { saoovqe_fixture_dims(fx, &mut n_mo, &mut n_elec) };
    assert_eq!((n_mo, n_elec), (4, 4));
    unsafe { saoovqe_fixture_free(fx) };
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/saoovqe.h")).unwrap();
    for f in [
        "saoovqe_last_error",
        "saoovqe_fixture_load_aoint",
        "saoovqe_fixture_load_fcidump",
        "saoovqe_fixture_free",
        "saoovqe_fixture_dims",
        "saoovqe_run_options_default",
        "saoovqe_run",
        "saoovqe_run_free",
        "saoovqe_run_energies",
        "saoovqe_run_theta",
        "saoovqe_casci",
        "saoovqe_gate_count",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
}
