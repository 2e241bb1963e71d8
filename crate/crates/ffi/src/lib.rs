//! C ABI over `dense-bloch`.
//!
//! Every function returns a [`DbStatus`]; results go through out-pointers.
//! Handles are opaque and must be released with the matching `*_free`.
//! The message of the last failure on the calling thread is available from
//! [`db_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dense_bloch::bistability::{linspace, self_consistent_branches, BistabilityConfig, BranchPoint, CollectiveMode};
use dense_bloch::dynamics::{evolve_two_level, DecayOptions, DecayTrajectory};
use dense_bloch::holstein::{build_slab_kernel, escape_rate};
use dense_bloch::medium::{AtomicState, DimensionlessGroups};
use dense_bloch::numerics::QuadratureSpec;
use dense_bloch::rates::{small_sample_rate_averaged, small_sample_rate_spectral};
use dense_bloch::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    OutOfRange = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbCollectiveMode {
    Off = 0,
    ExplicitApprox = 1,
    FixedPoint = 2,
}

/// Opaque dimensionless parameter set.
pub struct DbGroups(DimensionlessGroups);

/// Opaque population decay trajectory.
pub struct DbDecay(DecayTrajectory);

/// Opaque list of stationary bistability points.
pub struct DbBranches(Vec<BranchPoint>);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DbDecaySample {
    pub t: f64,
    pub rho_aa: f64,
    pub gamma: f64,
    /// NaN below the truncation floor.
    pub gamma_eff: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DbBranchPoint {
    pub omega: f64,
    pub rho_aa: f64,
    pub rho_ab_re: f64,
    pub rho_ab_im: f64,
    pub gamma: f64,
    pub stable: bool,
    pub branch_id: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[repr(C)]
pub struct DbEscapeRate {
    pub numeric: f64,
    /// NaN when κ ≤ 1.
    pub asymptotic: f64,
    pub lambda_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DbStatus {
    set_error(&e.to_string());
    if e.is_numerical() {
        DbStatus::Numerical
    } else {
        DbStatus::InvalidArgument
    }
}

fn guard(f: impl FnOnce() -> DbStatus) -> DbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            DbStatus::Panic
        }
    }
}

macro_rules! out_ref {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(r) => r,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return DbStatus::NullPointer;
            }
        }
    };
}

macro_rules! in_ref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(r) => r,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return DbStatus::NullPointer;
            }
        }
    };
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return status_of(&e),
        }
    };
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn db_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn db_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Groups of a Doppler gas from opacity `eta` and width ratio `g`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn db_groups_new(eta: f64, g: f64, out: *mut *mut DbGroups) -> DbStatus {
    guard(|| {
        let out = out_ref!(out);
        let groups = tri!(DimensionlessGroups::from_opacity(eta, g));
        *out = Box::into_raw(Box::new(DbGroups(groups)));
        DbStatus::Ok
    })
}

/// # Safety
/// `groups` must come from [`db_groups_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn db_groups_free(groups: *mut DbGroups) {
    if !groups.is_null() {
        drop(Box::from_raw(groups));
    }
}

/// Line-center opacity κ and Doppler width Δ_D/γ.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_groups_get(groups: *const DbGroups, kappa: *mut f64, doppler_width: *mut f64) -> DbStatus {
    guard(|| {
        let g = in_ref!(groups);
        *out_ref!(kappa) = g.0.kappa;
        *out_ref!(doppler_width) = g.0.doppler_width();
        DbStatus::Ok
    })
}

/// Small-sample collective rate Γ(Δ)/γ for an incoherent state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_rate_spectral(groups: *const DbGroups, rho_aa: f64, detuning: f64, out: *mut f64) -> DbStatus {
    guard(|| {
        let g = in_ref!(groups);
        let out = out_ref!(out);
        let s = tri!(AtomicState::populations(rho_aa));
        if !detuning.is_finite() {
            set_error("detuning must be finite");
            return DbStatus::InvalidArgument;
        }
        *out = small_sample_rate_spectral(&s, detuning, &g.0);
        DbStatus::Ok
    })
}

/// Velocity-averaged small-sample rate Γ/γ.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_rate_averaged(groups: *const DbGroups, rho_aa: f64, out: *mut f64) -> DbStatus {
    guard(|| {
        let g = in_ref!(groups);
        let out = out_ref!(out);
        let s = tri!(AtomicState::populations(rho_aa));
        *out = tri!(small_sample_rate_averaged(&s, &g.0, &QuadratureSpec::default()));
        DbStatus::Ok
    })
}

/// Integrates the population decay with default numerics.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_decay_run(
    groups: *const DbGroups,
    rho_aa0: f64,
    t_end: f64,
    samples: usize,
    out: *mut *mut DbDecay,
) -> DbStatus {
    guard(|| {
        let g = in_ref!(groups);
        let out = out_ref!(out);
        let s = tri!(AtomicState::populations(rho_aa0));
        let opts = DecayOptions { samples, ..Default::default() };
        let traj = tri!(evolve_two_level(&s, &g.0, t_end, &opts, &[]));
        *out = Box::into_raw(Box::new(DbDecay(traj)));
        DbStatus::Ok
    })
}

/// # Safety
/// `decay` must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_decay_len(decay: *const DbDecay, len: *mut usize) -> DbStatus {
    guard(|| {
        *out_ref!(len) = in_ref!(decay).0.times.len();
        DbStatus::Ok
    })
}

/// # Safety
/// `decay` must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_decay_markov_violated(decay: *const DbDecay, flag: *mut bool) -> DbStatus {
    guard(|| {
        *out_ref!(flag) = in_ref!(decay).0.markov_violated;
        DbStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_decay_get(decay: *const DbDecay, index: usize, sample: *mut DbDecaySample) -> DbStatus {
    guard(|| {
        let d = &in_ref!(decay).0;
        let sample = out_ref!(sample);
        if index >= d.times.len() {
            set_error("sample index out of range");
            return DbStatus::OutOfRange;
        }
        *sample = DbDecaySample {
            t: d.times[index],
            rho_aa: d.rho_aa[index],
            gamma: d.gamma_avg[index],
            gamma_eff: d.gamma_eff[index],
        };
        DbStatus::Ok
    })
}

/// # Safety
/// `decay` must come from [`db_decay_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn db_decay_free(decay: *mut DbDecay) {
    if !decay.is_null() {
        drop(Box::from_raw(decay));
    }
}

/// Fundamental-mode escape rate of the slab trapping kernel.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_holstein_escape_rate(
    kappa: f64,
    half_thickness: f64,
    node_count: usize,
    out: *mut DbEscapeRate,
) -> DbStatus {
    guard(|| {
        let out = out_ref!(out);
        let k = tri!(build_slab_kernel(half_thickness, kappa, node_count));
        let r = tri!(escape_rate(&k));
        *out = DbEscapeRate {
            numeric: r.gamma_esc_numeric,
            asymptotic: r.gamma_esc_asymptotic.unwrap_or(f64::NAN),
            lambda_max: r.lambda_max,
        };
        DbStatus::Ok
    })
}

/// Stationary points on `points` equally spaced Ω in `[omega_min, omega_max]`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_bistability_branches(
    cooperativity: f64,
    slab_parameter: f64,
    nonradiative_ratio: f64,
    mode: DbCollectiveMode,
    omega_min: f64,
    omega_max: f64,
    points: usize,
    out: *mut *mut DbBranches,
) -> DbStatus {
    guard(|| {
        let out = out_ref!(out);
        let collective = match mode {
            DbCollectiveMode::Off => CollectiveMode::Off,
            DbCollectiveMode::ExplicitApprox => CollectiveMode::ExplicitApprox,
            DbCollectiveMode::FixedPoint => CollectiveMode::FixedPoint,
        };
        if !(omega_min.is_finite() && omega_max.is_finite()) || omega_max < omega_min {
            set_error("omega range must be finite with omega_min <= omega_max");
            return DbStatus::InvalidArgument;
        }
        let mut cfg = BistabilityConfig::new(cooperativity, slab_parameter, nonradiative_ratio, collective);
        cfg.omega_grid = linspace(omega_min, omega_max, points);
        let pts = tri!(self_consistent_branches(&cfg));
        *out = Box::into_raw(Box::new(DbBranches(pts)));
        DbStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_branches_len(branches: *const DbBranches, len: *mut usize) -> DbStatus {
    guard(|| {
        *out_ref!(len) = in_ref!(branches).0.len();
        DbStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_branches_get(branches: *const DbBranches, index: usize, point: *mut DbBranchPoint) -> DbStatus {
    guard(|| {
        let b = &in_ref!(branches).0;
        let point = out_ref!(point);
        let Some(p) = b.get(index) else {
            set_error("branch index out of range");
            return DbStatus::OutOfRange;
        };
        *point = DbBranchPoint {
            omega: p.omega,
            rho_aa: p.rho_aa,
            rho_ab_re: p.rho_ab.re,
            rho_ab_im: p.rho_ab.im,
            gamma: p.gamma,
            stable: p.stable,
            branch_id: p.branch_id,
        };
        DbStatus::Ok
    })
}

/// # Safety
/// `branches` must come from [`db_bistability_branches`] or be null.
#[no_mangle]
pub unsafe extern "C" fn db_branches_free(branches: *mut DbBranches) {
    if !branches.is_null() {
        drop(Box::from_raw(branches));
    }
}
