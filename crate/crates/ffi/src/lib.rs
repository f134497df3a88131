#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! C interface to `shearstab`.
//!
//! Every entry point returns an [`SsStatus`]. On failure the message is kept
//! per thread and can be copied out with [`ss_last_error_message`]. Objects are
//! opaque handles created by `ss_*_new` and released by the matching `ss_*_free`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use shearstab::dispersion::DispersionQuery;
use shearstab::error::StabilityError;
use shearstab::evolve::{perturbed_equilibrium, Field2D, Grid1D, NonlinearSolver};
use shearstab::modes::{dominant_growth_with, mode_residual, reconstruct_mode, GrowingMode, PowerIteration};
use shearstab::profiles::{build_friedlander, miles_howard_check, ShearProfile, Stratification, StratifiedEquilibrium, PROFILE_SCAN_POINTS};
use shearstab::rootfinder::{
    exclusion_radius, gamma0_with, nyquist_f, winding_number, DispersionFunction, HalfDiskContour, SearchOptions,
    NEUMANN_SEARCH_TOL,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    AlphaOutOfRange = 3,
    NotFriedlander = 4,
    NonContractive = 5,
    ToleranceNotReached = 6,
    ZeroOnContour = 7,
    RefinementExhausted = 8,
    NoZeroFound = 9,
    NotAZero = 10,
    NoGrowth = 11,
    CflViolation = 12,
    NoBlowupWithinBudget = 13,
    IncompatibleEps = 14,
    BufferTooSmall = 15,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsShearKind {
    Tanh = 0,
    Couette = 1,
}

/// Stratified equilibrium `(U_s, ρ_s)`.
pub struct SsEquilibrium(StratifiedEquilibrium);

/// Growing mode on a uniform grid of `[-1, 1]`.
pub struct SsMode {
    mode: GrowingMode,
    grid: Grid1D,
}

/// Nonlinear run started from a perturbed equilibrium.
pub struct SsSimulation {
    solver: NonlinearSolver,
    base: Field2D,
    field: Field2D,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &StabilityError) -> SsStatus {
    use StabilityError as E;
    match e {
        E::AlphaOutOfRange(_) => SsStatus::AlphaOutOfRange,
        E::NotFriedlander => SsStatus::NotFriedlander,
        E::NonContractive { .. } => SsStatus::NonContractive,
        E::ToleranceNotReached { .. } => SsStatus::ToleranceNotReached,
        E::ZeroOnContour { .. } => SsStatus::ZeroOnContour,
        E::RefinementExhausted { .. } => SsStatus::RefinementExhausted,
        E::NoZeroFound => SsStatus::NoZeroFound,
        E::NotAZero(_) => SsStatus::NotAZero,
        E::NoGrowth(_) => SsStatus::NoGrowth,
        E::CflViolation { .. } => SsStatus::CflViolation,
        E::NoBlowupWithinBudget { .. } => SsStatus::NoBlowupWithinBudget,
        E::IncompatibleEps { .. } => SsStatus::IncompatibleEps,
        E::NonMonotoneShear(_)
        | E::DegenerateShear(_)
        | E::BranchViolation(_)
        | E::InvalidArgument(_)
        | E::Config(_)
        | E::Io(_) => SsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and catching panics at the boundary.
fn guard<F>(f: F) -> SsStatus
where
    F: FnOnce() -> Result<(), SsFailure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SsStatus::Ok
        }
        Ok(Err(SsFailure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SsStatus::Panic
        }
    }
}

struct SsFailure(SsStatus, String);

impl From<StabilityError> for SsFailure {
    fn from(e: StabilityError) -> Self {
        SsFailure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> SsFailure {
    SsFailure(SsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> SsFailure {
    SsFailure(SsStatus::InvalidArgument, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, SsFailure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), SsFailure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn shear(kind: SsShearKind, beta: f64) -> Result<ShearProfile, SsFailure> {
    match kind {
        SsShearKind::Tanh if beta > 0.0 && beta.is_finite() => Ok(ShearProfile::tanh(beta)),
        SsShearKind::Tanh => Err(invalid(format!("beta must be positive, got {beta}"))),
        SsShearKind::Couette => Ok(ShearProfile::couette()),
    }
}

fn grid(nz: usize) -> Result<Grid1D, SsFailure> {
    if nz < 3 {
        return Err(invalid(format!("nz must be at least 3, got {nz}")));
    }
    Ok(Grid1D::new(nz))
}

/// Copies the message of the last failed call on this thread into `buf`,
/// NUL-terminated and truncated to `len`. Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ss_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Friedlander equilibrium with density `ρ_s` built from `U_s` and `alpha ∈ (1/2, 1]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_equilibrium_friedlander(
    kind: SsShearKind,
    beta: f64,
    alpha: f64,
    out: *mut *mut SsEquilibrium,
) -> SsStatus {
    guard(|| {
        let eq = build_friedlander(shear(kind, beta)?, alpha)?;
        write(out, Box::into_raw(Box::new(SsEquilibrium(eq))), "out")
    })
}

/// Equilibrium with linear density `ρ_s(z) = gradient · z`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_equilibrium_linear(
    kind: SsShearKind,
    beta: f64,
    gradient: f64,
    out: *mut *mut SsEquilibrium,
) -> SsStatus {
    guard(|| {
        let eq = StratifiedEquilibrium::new(shear(kind, beta)?, Stratification::linear(gradient));
        write(out, Box::into_raw(Box::new(SsEquilibrium(eq))), "out")
    })
}

/// # Safety
/// `eq` must be null or a handle from `ss_equilibrium_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_equilibrium_free(eq: *mut SsEquilibrium) {
    if !eq.is_null() {
        drop(Box::from_raw(eq));
    }
}

/// Minimum of the Richardson number over the channel.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_miles_howard(
    eq: *const SsEquilibrium,
    min_ri: *mut f64,
    argmin_z: *mut f64,
    satisfied: *mut bool,
) -> SsStatus {
    guard(|| {
        let eq = deref(eq, "eq")?;
        let r = miles_howard_check(&eq.0, PROFILE_SCAN_POINTS)?;
        write(min_ri, r.min_ri, "min_ri")?;
        write(argmin_z, r.argmin_z, "argmin_z")?;
        write(satisfied, r.miles_howard_satisfied, "satisfied")
    })
}

/// Winding number of the homogeneous Nyquist function around the half disk
/// `{eps ≤ Im c, |c| ≤ radius}`. A non-positive `radius` selects the exclusion radius.
///
/// # Safety
/// `winding` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_nyquist_winding(beta: f64, eps: f64, radius: f64, winding: *mut i64) -> SsStatus {
    guard(|| {
        let s = shear(SsShearKind::Tanh, beta)?;
        if !(eps > 0.0) {
            return Err(invalid(format!("eps must be positive, got {eps}")));
        }
        let r = if radius > 0.0 { radius } else { exclusion_radius(&s) };
        let rep = winding_number(&|c| Ok(nyquist_f(c, &s)), &HalfDiskContour::new(eps, r))?;
        write(winding, rep.winding, "winding")
    })
}

/// Dispersion function at phase speed `c`, `Im c > 0`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_dispersion_eval(
    eq: *const SsEquilibrium,
    kappa: f64,
    c_re: f64,
    c_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SsStatus {
    guard(|| {
        let eq = deref(eq, "eq")?;
        let v = DispersionFunction::auto(&eq.0, kappa, NEUMANN_SEARCH_TOL).eval(Complex64::new(c_re, c_im))?;
        write(out_re, v.re, "out_re")?;
        write(out_im, v.im, "out_im")
    })
}

/// Fastest-growing zero with `Im c ≥ eps_floor` inside the exclusion radius.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_top_zero(
    eq: *const SsEquilibrium,
    kappa: f64,
    eps_floor: f64,
    tol: f64,
    c_re: *mut f64,
    c_im: *mut f64,
) -> SsStatus {
    guard(|| {
        let eq = deref(eq, "eq")?;
        if !(tol > 0.0) {
            return Err(invalid(format!("tol must be positive, got {tol}")));
        }
        let f = DispersionFunction::auto(&eq.0, kappa, NEUMANN_SEARCH_TOL);
        let rep = gamma0_with(&f, &eq.0, eps_floor, &SearchOptions::with_tol(tol))?;
        let z = rep.zeros[0].c;
        write(c_re, z.re, "c_re")?;
        write(c_im, z.im, "c_im")
    })
}

/// Dominant growth rate of the linearized operator for wavenumber `k`;
/// hydrostatic when `kappa == 0`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_dominant_growth(
    eq: *const SsEquilibrium,
    k: f64,
    kappa: f64,
    nz: usize,
    seed: u64,
    rate: *mut f64,
) -> SsStatus {
    guard(|| {
        let eq = deref(eq, "eq")?;
        let opts = PowerIteration {
            seed,
            ..PowerIteration::default()
        };
        let g = dominant_growth_with(k, kappa, &eq.0, &grid(nz)?, &opts)?;
        write(rate, g.rate, "rate")
    })
}

/// Mode `(φ, r, w)` for a zero `c` of the dispersion function.
///
/// # Safety
/// `eq` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ss_mode_new(
    eq: *const SsEquilibrium,
    k: i64,
    kappa: f64,
    c_re: f64,
    c_im: f64,
    nz: usize,
    out: *mut *mut SsMode,
) -> SsStatus {
    guard(|| {
        let eq = deref(eq, "eq")?;
        let g = grid(nz)?;
        let c = Complex64::new(c_re, c_im);
        if !(c.im > 0.0) {
            return Err(StabilityError::BranchViolation(c.im).into());
        }
        if k == 0 {
            return Err(invalid("k must be nonzero"));
        }
        let value = DispersionFunction::auto(&eq.0, kappa, NEUMANN_SEARCH_TOL).eval(c)?;
        let zero = shearstab::rootfinder::Zero {
            c,
            residual: value.norm(),
            iterations: 0,
            multiplicity_hint: 1,
        };
        let mode = reconstruct_mode(&zero, k, &DispersionQuery::new(&eq.0, c, kappa), &g)?;
        write(out, Box::into_raw(Box::new(SsMode { mode, grid: g })), "out")
    })
}

/// # Safety
/// `mode` must be null or a handle from `ss_mode_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_mode_free(mode: *mut SsMode) {
    if !mode.is_null() {
        drop(Box::from_raw(mode));
    }
}

/// Number of grid points of the mode; 0 for a null handle.
///
/// # Safety
/// `mode` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_mode_len(mode: *const SsMode) -> usize {
    mode.as_ref().map_or(0, |m| m.grid.n)
}

/// Copies `z` and the stream function `φ` into caller buffers of length `len`.
///
/// # Safety
/// Each buffer must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ss_mode_phi(
    mode: *const SsMode,
    z: *mut f64,
    phi_re: *mut f64,
    phi_im: *mut f64,
    len: usize,
) -> SsStatus {
    guard(|| {
        let m = deref(mode, "mode")?;
        if z.is_null() || phi_re.is_null() || phi_im.is_null() {
            return Err(null("output buffer"));
        }
        if len < m.grid.n {
            return Err(SsFailure(
                SsStatus::BufferTooSmall,
                format!("buffer holds {len} values, mode has {}", m.grid.n),
            ));
        }
        for i in 0..m.grid.n {
            *z.add(i) = m.mode.z[i];
            *phi_re.add(i) = m.mode.phi[i].re;
            *phi_im.add(i) = m.mode.phi[i].im;
        }
        Ok(())
    })
}

/// Residual of the mode equation and the wall defect.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_mode_residual(
    mode: *const SsMode,
    eq: *const SsEquilibrium,
    equation: *mut f64,
    walls: *mut f64,
) -> SsStatus {
    guard(|| {
        let m = deref(mode, "mode")?;
        let eq = deref(eq, "eq")?;
        let r = mode_residual(&m.mode, &eq.0);
        write(equation, r.tg_residual, "equation")?;
        write(walls, r.bc_defect, "walls")
    })
}

/// Equilibrium plus `delta` times the mode on an `nx × nz` grid with torus scale `m_scale`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_simulation_new(
    eq: *const SsEquilibrium,
    mode: *const SsMode,
    delta: f64,
    nx: usize,
    m_scale: f64,
    out: *mut *mut SsSimulation,
) -> SsStatus {
    guard(|| {
        let eq = deref(eq, "eq")?;
        let m = deref(mode, "mode")?;
        if nx < 4 || !(m_scale > 0.0) || !(delta >= 0.0) {
            return Err(invalid(format!(
                "need nx >= 4, m_scale > 0, delta >= 0; got {nx}, {m_scale}, {delta}"
            )));
        }
        let field = perturbed_equilibrium(&eq.0, &m.mode, delta, &m.grid, nx, m_scale);
        let base = Field2D::equilibrium(&eq.0, nx, &m.grid, m_scale);
        let solver = NonlinearSolver::new(nx, m.grid.clone(), m_scale);
        write(out, Box::into_raw(Box::new(SsSimulation { solver, base, field })), "out")
    })
}

/// # Safety
/// `sim` must be null or a handle from `ss_simulation_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_simulation_free(sim: *mut SsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances `steps` RK4 steps of size `dt`. Stops at the first CFL violation.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_simulation_step(sim: *mut SsSimulation, dt: f64, steps: usize) -> SsStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        if !(dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        for _ in 0..steps {
            s.solver.step(&mut s.field, dt)?;
        }
        Ok(())
    })
}

/// Current time and `L²` distance from the equilibrium.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_simulation_state(sim: *const SsSimulation, t: *mut f64, deviation: *mut f64) -> SsStatus {
    guard(|| {
        let s = deref(sim, "sim")?;
        write(t, s.field.t, "t")?;
        write(deviation, s.field.distance(&s.base, s.solver.grid.h), "deviation")
    })
}
