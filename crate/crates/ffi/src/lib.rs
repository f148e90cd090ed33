//! C ABI over the gaussync library.
//!
//! Every entry point returns a [`GsStatus`]. On failure the message is kept in
//! a per-thread buffer readable with [`gs_last_error_message`]. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gaussync::dynamics::{IntegratorSettings, PhysicalityPolicy, Regime, Sample};
use gaussync::error::Error;
use gaussync::linalg::C64;
use gaussync::{
    critical_xi, eigenspectrum, gamma12, info_report, ladder_to_quadrature, propagate_covariance,
    propagate_moments, solve_lyapunov, validate_params, CovarianceState, MomentState, SystemParams,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    NoUniqueSteadyState = 3,
    Unstable = 4,
    SolverFailure = 5,
    PhysicalityLost = 6,
    NotFound = 7,
    IndexOutOfRange = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsRegime {
    Normal = 0,
    ExceptionalPoint = 1,
    Synchronized = 2,
}

/// Model parameters; see `gs_system_new`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsParams {
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    pub gamma: f64,
    pub xi: f64,
    pub nbar1: f64,
    pub nbar2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsSpectrum {
    pub re_lambda_plus: f64,
    pub im_lambda_plus: f64,
    pub re_lambda_minus: f64,
    pub im_lambda_minus: f64,
    pub gap_real: f64,
    pub gap_imag: f64,
    pub regime: GsRegime,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsInfoReport {
    pub s2_a: f64,
    pub s2_b: f64,
    pub s2_ab: f64,
    pub i2: f64,
    pub j2: f64,
    pub d2: f64,
    pub d2_lower: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    /// Measurement squeezing; infinite for homodyne.
    pub seed_r: f64,
    pub seed_phi: f64,
    pub divergent: bool,
}

/// Initial displacements ⟨a₁⟩, ⟨a₂⟩ as (re, im) pairs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsInitial {
    pub alpha1_re: f64,
    pub alpha1_im: f64,
    pub alpha2_re: f64,
    pub alpha2_im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsSample {
    pub t: f64,
    pub a1_re: f64,
    pub a1_im: f64,
    pub a2_re: f64,
    pub a2_im: f64,
    pub theta11: f64,
    pub theta22: f64,
    pub theta12_re: f64,
    pub theta12_im: f64,
    pub min_uncertainty_eig: f64,
}

/// Validated parameter set.
pub struct GsSystem {
    params: SystemParams,
}

/// Sampled covariance trajectory.
pub struct GsTrajectory {
    samples: Vec<Sample>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::OutOfRange { .. } | Error::NonFinite { .. } | Error::StepTooLarge { .. } => {
            GsStatus::InvalidParams
        }
        Error::NoUniqueSteadyState { .. } => GsStatus::NoUniqueSteadyState,
        Error::Unstable { .. } => GsStatus::Unstable,
        Error::PhysicalityLost { .. } => GsStatus::PhysicalityLost,
        Error::ZeroDamping => GsStatus::NotFound,
        _ => GsStatus::SolverFailure,
    }
}

fn fail(e: &Error) -> GsStatus {
    set_error(&e.to_string());
    status_of(e)
}

fn null() -> GsStatus {
    set_error("null pointer argument");
    GsStatus::NullPointer
}

fn guard(f: impl FnOnce() -> GsStatus) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            GsStatus::Internal
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty when none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Validate `params` and create a system handle in `*out`.
///
/// # Safety
/// `params` must point to a valid `GsParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_system_new(
    params: *const GsParams,
    out: *mut *mut GsSystem,
) -> GsStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return null();
        }
        let p = &*params;
        let params = SystemParams {
            omega1: p.omega1,
            omega2: p.omega2,
            g: p.g,
            gamma: p.gamma,
            xi: p.xi,
            nbar1: p.nbar1,
            nbar2: p.nbar2,
        };
        match validate_params(params) {
            Ok(v) => {
                *out = Box::into_raw(Box::new(GsSystem { params: v.params }));
                GsStatus::Ok
            }
            Err(e) => {
                *out = ptr::null_mut();
                fail(&e)
            }
        }
    })
}

/// # Safety
/// `system` must come from `gs_system_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_system_free(system: *mut GsSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Cross-relaxation rate γ₁₂.
///
/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_gamma12(system: *const GsSystem, out: *mut f64) -> GsStatus {
    guard(|| {
        if system.is_null() || out.is_null() {
            return null();
        }
        *out = gamma12(&(*system).params);
        GsStatus::Ok
    })
}

/// Smallest ξ > 0 at which the decoupled eigenvalues coalesce. Returns
/// `GS_STATUS_NOT_FOUND` when there is none in (0, 1] or g ≠ 0.
///
/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_critical_xi(system: *const GsSystem, out: *mut f64) -> GsStatus {
    guard(|| {
        if system.is_null() || out.is_null() {
            return null();
        }
        match critical_xi(&(*system).params) {
            Ok(Some(c)) => {
                *out = c.xi;
                GsStatus::Ok
            }
            Ok(None) => {
                *out = f64::NAN;
                set_error("no critical correlation strength");
                GsStatus::NotFound
            }
            Err(e) => {
                *out = f64::NAN;
                fail(&e)
            }
        }
    })
}

/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_eigenspectrum(
    system: *const GsSystem,
    out: *mut GsSpectrum,
) -> GsStatus {
    guard(|| {
        if system.is_null() || out.is_null() {
            return null();
        }
        let s = eigenspectrum(&(*system).params);
        *out = GsSpectrum {
            re_lambda_plus: s.lambda_plus.re,
            im_lambda_plus: s.lambda_plus.im,
            re_lambda_minus: s.lambda_minus.re,
            im_lambda_minus: s.lambda_minus.im,
            gap_real: s.gap_real,
            gap_imag: s.gap_imag,
            regime: match s.regime {
                Regime::Normal => GsRegime::Normal,
                Regime::ExceptionalPoint => GsRegime::ExceptionalPoint,
                Regime::Synchronized => GsRegime::Synchronized,
            },
        };
        GsStatus::Ok
    })
}

/// Stationary covariance over (a₁, a₁†, a₂, a₂†) as 16 complex entries in
/// row-major order, interleaved (re, im): `theta` must hold 32 doubles.
/// `residual` may be null.
///
/// # Safety
/// `system` must be a live handle; `theta` must point to 32 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gs_steady_state(
    system: *const GsSystem,
    theta: *mut f64,
    residual: *mut f64,
) -> GsStatus {
    guard(|| {
        if system.is_null() || theta.is_null() {
            return null();
        }
        match solve_lyapunov(&(*system).params) {
            Ok(ss) => {
                let out = std::slice::from_raw_parts_mut(theta, 32);
                for i in 0..4 {
                    for j in 0..4 {
                        let z = ss.theta[(i, j)];
                        out[2 * (4 * i + j)] = z.re;
                        out[2 * (4 * i + j) + 1] = z.im;
                    }
                }
                if !residual.is_null() {
                    *residual = ss.residual;
                }
                GsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Information measures of the stationary state.
///
/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_info_report(
    system: *const GsSystem,
    out: *mut GsInfoReport,
) -> GsStatus {
    guard(|| {
        if system.is_null() || out.is_null() {
            return null();
        }
        let report = solve_lyapunov(&(*system).params).and_then(|ss| {
            let sigma = ladder_to_quadrature(&CovarianceState {
                t: 0.0,
                theta: ss.theta,
            })?;
            info_report(&sigma)
        });
        match report {
            Ok(r) => {
                *out = GsInfoReport {
                    s2_a: r.s2_a,
                    s2_b: r.s2_b,
                    s2_ab: r.s2_ab,
                    i2: r.i2,
                    j2: r.j2,
                    d2: r.d2,
                    d2_lower: r.d2_lower,
                    nu_plus: r.nu[0],
                    nu_minus: r.nu[1],
                    seed_r: r.seed.r,
                    seed_phi: r.seed.phi,
                    divergent: r.divergent,
                };
                GsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

fn initial_moments(init: &GsInitial) -> MomentState {
    MomentState::displaced(
        0.0,
        C64::new(init.alpha1_re, init.alpha1_im),
        C64::new(init.alpha2_re, init.alpha2_im),
    )
}

/// First moments at time `t`, written to `out` as ⟨a₁⟩, ⟨a₂⟩ (re, im) pairs.
///
/// # Safety
/// `system` and `init` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_propagate_moments(
    system: *const GsSystem,
    init: *const GsInitial,
    t: f64,
    out: *mut GsInitial,
) -> GsStatus {
    guard(|| {
        if system.is_null() || init.is_null() || out.is_null() {
            return null();
        }
        match propagate_moments(&(*system).params, &initial_moments(&*init), t) {
            Ok(m) => {
                let (a1, a2) = (m.a1(), m.a2());
                *out = GsInitial {
                    alpha1_re: a1.re,
                    alpha1_im: a1.im,
                    alpha2_re: a2.re,
                    alpha2_im: a2.im,
                };
                GsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Integrate moments and covariance from a vacuum covariance up to `t_end`.
/// `dt <= 0` selects 200 steps per period of ω₁. With `allow_unphysical`
/// false the run stops with `GS_STATUS_PHYSICALITY_LOST` on the first
/// unphysical sample.
///
/// # Safety
/// `system` and `init` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_trajectory_run(
    system: *const GsSystem,
    init: *const GsInitial,
    dt: f64,
    t_end: f64,
    stride: usize,
    allow_unphysical: bool,
    out: *mut *mut GsTrajectory,
) -> GsStatus {
    guard(|| {
        if system.is_null() || init.is_null() || out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let p = &(*system).params;
        if !(t_end >= 0.0 && t_end.is_finite()) || dt.is_nan() {
            set_error("t_end must be finite and >= 0");
            return GsStatus::InvalidParams;
        }
        let mut settings = IntegratorSettings::default_for(p, t_end);
        if dt > 0.0 {
            settings.dt = dt;
        }
        settings.stride = stride.max(1);
        settings.physicality = if allow_unphysical {
            PhysicalityPolicy::Record
        } else {
            PhysicalityPolicy::Enforce
        };
        match propagate_covariance(
            p,
            &initial_moments(&*init),
            &CovarianceState::vacuum(0.0),
            &settings,
        ) {
            Ok(traj) => {
                *out = Box::into_raw(Box::new(GsTrajectory {
                    samples: traj.samples,
                }));
                GsStatus::Ok
            }
            Err(e) => {
                set_error(&format!("sample {}: {}", e.sample_index, e.source));
                status_of(&e.source)
            }
        }
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `trajectory` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gs_trajectory_len(trajectory: *const GsTrajectory) -> usize {
    if trajectory.is_null() {
        0
    } else {
        let traj = &*trajectory;
        traj.samples.len()
    }
}

/// # Safety
/// `trajectory` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_trajectory_sample(
    trajectory: *const GsTrajectory,
    index: usize,
    out: *mut GsSample,
) -> GsStatus {
    guard(|| {
        if trajectory.is_null() || out.is_null() {
            return null();
        }
        let traj = &*trajectory;
        let Some(s) = traj.samples.get(index) else {
            set_error(&format!("sample index {index} out of range"));
            return GsStatus::IndexOutOfRange;
        };
        let (a1, a2) = (s.moments.a1(), s.moments.a2());
        let t12 = s.covariance.theta12();
        *out = GsSample {
            t: s.moments.t,
            a1_re: a1.re,
            a1_im: a1.im,
            a2_re: a2.re,
            a2_im: a2.im,
            theta11: s.covariance.theta11(),
            theta22: s.covariance.theta22(),
            theta12_re: t12.re,
            theta12_im: t12.im,
            min_uncertainty_eig: s.min_uncertainty_eig,
        };
        GsStatus::Ok
    })
}

/// # Safety
/// `trajectory` must come from `gs_trajectory_run` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_trajectory_free(trajectory: *mut GsTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}
