//! C ABI for the saoovqe toolkit.
//!
//! Objects cross the boundary as opaque handles created by `*_load`/`*_run`
//! functions and released with the matching `*_free`. Every function returns
//! a [`SaoovqeStatus`]; on failure the message is available from
//! [`saoovqe_last_error`] until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use saoovqe::ansatz::{count_gates, CompiledAnsatz};
use saoovqe::driver::{sa_oo_vqe_run, RunConfig, RunRecord};
use saoovqe::integrals::{
    build_frozen_core, parse_aoint, parse_fcidump, transform_to_mo, ActiveSpaceSpec, AoIntFixture,
    MOCoefficients,
};
use saoovqe::reference::{casci_solve, casci_solve_singlets};
use saoovqe::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaoovqeStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Load = 3,
    Dimension = 4,
    Invalid = 5,
    Numerical = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

impl From<&Error> for SaoovqeStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => SaoovqeStatus::Parse,
            Error::Load(_) => SaoovqeStatus::Load,
            Error::Dimension(_) => SaoovqeStatus::Dimension,
            Error::Invalid(_) => SaoovqeStatus::Invalid,
            Error::Numerical(_) => SaoovqeStatus::Numerical,
            Error::Io(_) => SaoovqeStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), (SaoovqeStatus, String)>) -> SaoovqeStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SaoovqeStatus::Ok,
        Ok(Err((code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            SaoovqeStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SaoovqeStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (SaoovqeStatus, String) {
    (SaoovqeStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, (SaoovqeStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (SaoovqeStatus::Invalid, "path is not valid UTF-8".into()))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn saoovqe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Integrals and starting orbitals.
pub struct SaoovqeFixture {
    inner: AoIntFixture,
}

/// Result of one SA-OO-VQE calculation.
pub struct SaoovqeRun {
    inner: RunRecord,
}

fn load(path: *const c_char, out: *mut *mut SaoovqeFixture, fcidump: bool) -> SaoovqeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = unsafe { path_arg(path)? };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| (SaoovqeStatus::Load, format!("{path}: {e}")))?;
        let inner = if fcidump {
            let ints = parse_fcidump(&text).map_err(lib_err)?;
            let n = ints.n_orb;
            AoIntFixture {
                integrals: ints,
                coeffs: MOCoefficients::identity(n),
                metadata: Vec::new(),
            }
        } else {
            parse_aoint(&text).map_err(lib_err)?
        };
        unsafe { *out = Box::into_raw(Box::new(SaoovqeFixture { inner })) };
        Ok(())
    })
}

/// Loads an AOINT file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_fixture_load_aoint(path: *const c_char, out: *mut *mut SaoovqeFixture) -> SaoovqeStatus {
    load(path, out, false)
}

/// Loads an FCIDUMP file; its orbitals become the starting MOs.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_fixture_load_fcidump(path: *const c_char, out: *mut *mut SaoovqeFixture) -> SaoovqeStatus {
    load(path, out, true)
}

/// # Safety
/// `fixture` must come from a load function and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_fixture_free(fixture: *mut SaoovqeFixture) {
    if !fixture.is_null() {
        drop(Box::from_raw(fixture));
    }
}

/// Number of MOs and electrons.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_fixture_dims(
    fixture: *const SaoovqeFixture,
    n_mo: *mut usize,
    n_elec: *mut usize,
) -> SaoovqeStatus {
    guard(|| {
        let f = fixture.as_ref().ok_or_else(|| null("fixture"))?;
        if n_mo.is_null() || n_elec.is_null() {
            return Err(null("output"));
        }
        *n_mo = f.inner.coeffs.n_mo();
        *n_elec = f.inner.integrals.n_elec;
        Ok(())
    })
}

/// Run parameters; fill with [`saoovqe_run_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SaoovqeRunOptions {
    pub n_active_elec: usize,
    pub n_active_orb: usize,
    pub weight_a: f64,
    pub weight_b: f64,
    pub global_tol: f64,
    pub max_cycles: usize,
    /// Nonzero to add the averaged variance to the cost.
    pub use_variance: i32,
    /// Nonzero to skip orbital optimization.
    pub no_oo: i32,
}

#[no_mangle]
pub extern "C" fn saoovqe_run_options_default() -> SaoovqeRunOptions {
    SaoovqeRunOptions {
        n_active_elec: 4,
        n_active_orb: 3,
        weight_a: 0.5,
        weight_b: 0.5,
        global_tol: 1e-4,
        max_cycles: 20,
        use_variance: 0,
        no_oo: 0,
    }
}

fn config(f: &AoIntFixture, o: &SaoovqeRunOptions) -> saoovqe::Result<RunConfig> {
    let spec = ActiveSpaceSpec::contiguous(f.integrals.n_elec, o.n_active_elec, o.n_active_orb)?;
    let mut cfg = RunConfig::new(spec);
    cfg.weights = (o.weight_a, o.weight_b);
    cfg.global_tol = o.global_tol;
    cfg.max_cycles = o.max_cycles;
    cfg.use_variance = o.use_variance != 0;
    cfg.no_oo = o.no_oo != 0;
    Ok(cfg)
}

/// Runs SA-OO-VQE with a contiguous active space.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_run(
    fixture: *const SaoovqeFixture,
    options: *const SaoovqeRunOptions,
    out: *mut *mut SaoovqeRun,
) -> SaoovqeStatus {
    guard(|| {
        let f = fixture.as_ref().ok_or_else(|| null("fixture"))?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = config(&f.inner, o).map_err(lib_err)?;
        let inner = sa_oo_vqe_run(&f.inner.integrals, &f.inner.coeffs, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SaoovqeRun { inner }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`saoovqe_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_run_free(run: *mut SaoovqeRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Final state energies and outer-loop statistics.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_run_energies(
    run: *const SaoovqeRun,
    e_a: *mut f64,
    e_b: *mut f64,
    e_sa: *mut f64,
    n_cycles: *mut usize,
    converged: *mut i32,
) -> SaoovqeStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| null("run"))?.inner;
        if e_a.is_null() || e_b.is_null() || e_sa.is_null() || n_cycles.is_null() || converged.is_null() {
            return Err(null("output"));
        }
        *e_a = r.e_a;
        *e_b = r.e_b;
        *e_sa = r.e_sa;
        *n_cycles = r.n_cycles;
        *converged = r.converged as i32;
        Ok(())
    })
}

/// Copies the optimized circuit parameters. `len` receives the parameter
/// count; the call fails with `BufferTooSmall` if `capacity` is less.
///
/// # Safety
/// `buf` must hold `capacity` doubles; `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_run_theta(
    run: *const SaoovqeRun,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> SaoovqeStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| null("run"))?.inner;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = r.theta.len();
        if capacity < r.theta.len() {
            return Err((SaoovqeStatus::BufferTooSmall, format!("need {} entries", r.theta.len())));
        }
        if buf.is_null() && !r.theta.is_empty() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(r.theta.as_ptr(), buf, r.theta.len());
        Ok(())
    })
}

/// Lowest CASCI energies of the fixture in its stored orbitals.
///
/// # Safety
/// `energies` must hold `n_states` doubles; `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_casci(
    fixture: *const SaoovqeFixture,
    n_active_elec: usize,
    n_active_orb: usize,
    n_states: usize,
    singlets_only: i32,
    energies: *mut f64,
    count: *mut usize,
) -> SaoovqeStatus {
    guard(|| {
        let f = &fixture.as_ref().ok_or_else(|| null("fixture"))?.inner;
        if count.is_null() || (energies.is_null() && n_states > 0) {
            return Err(null("output"));
        }
        let spec = ActiveSpaceSpec::contiguous(f.integrals.n_elec, n_active_elec, n_active_orb).map_err(lib_err)?;
        let mo = transform_to_mo(&f.integrals, &f.coeffs).map_err(lib_err)?;
        let fc = build_frozen_core(&mo, &spec).map_err(lib_err)?;
        let (_, st) = if singlets_only != 0 {
            casci_solve_singlets(&fc, n_states)
        } else {
            casci_solve(&fc, n_states)
        }
        .map_err(lib_err)?;
        for (i, s) in st.iter().enumerate() {
            *energies.add(i) = s.energy;
        }
        *count = st.len();
        Ok(())
    })
}

/// Gate counts of the compiled ansatz over `n_active_orb` orbitals.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn saoovqe_gate_count(
    n_active_orb: usize,
    total: *mut usize,
    single_qubit: *mut usize,
    two_qubit: *mut usize,
) -> SaoovqeStatus {
    guard(|| {
        if total.is_null() || single_qubit.is_null() || two_qubit.is_null() {
            return Err(null("output"));
        }
        let a = CompiledAnsatz::for_active_space(n_active_orb).map_err(lib_err)?;
        let g = count_gates(&a);
        *total = g.total;
        *single_qubit = g.single_qubit;
        *two_qubit = g.two_qubit;
        Ok(())
    })
}
