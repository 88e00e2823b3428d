//! C ABI over the `nare` solver. Problems and solutions are opaque handles;
//! every call returns a `NareStatus`, and the message of the last failure on
//! the calling thread is available through `nare_last_error`.
//!
//! Matrices cross the boundary as column-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nare::gen::{self, TransportForm, TransportParams};
use nare::radi::{self, SolveOptions, SolveOutcome, StopCause};
use nare::{Error, Mat, NareProblem, Orientation, ShiftStrategy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NareStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SingularSystem = 4,
    Breakdown = 5,
    Io = 6,
    Panic = 7,
    BufferTooSmall = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NareStopCause {
    Converged = 0,
    MaxIterations = 1,
    Diverged = 2,
    ShiftStarvation = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NareStrategyKind {
    Leja = 0,
    Hamiltonian = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NareOrientation {
    Consistent = 0,
    PaperLiteral = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NareOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub div_threshold: f64,
    /// Nonzero: conjugate pairs use the real-arithmetic double step.
    pub real_arith: i32,
    pub strategy: NareStrategyKind,
    pub s: usize,
    /// Nonzero: recompute shifts every step.
    pub recompute: i32,
    pub orientation: NareOrientation,
}

/// Opaque problem handle.
pub struct NareProblemHandle {
    inner: NareProblem,
}

/// Opaque solution handle.
pub struct NareSolutionHandle {
    inner: SolveOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NareStatus {
    match e {
        Error::Dimension(_) | Error::SizeGuard { .. } => NareStatus::DimensionMismatch,
        Error::InvalidProblem(_) | Error::InvalidParams(_) | Error::Config(_) => NareStatus::InvalidArgument,
        Error::SingularShift(_)
        | Error::IllConditionedShift { .. }
        | Error::AssumptionViolated(_)
        | Error::SingularBasis
        | Error::SingularUpsilon => NareStatus::SingularSystem,
        Error::Io(_) | Error::Parse { .. } => NareStatus::Io,
        _ => NareStatus::Breakdown,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NareStatus>) -> NareStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NareStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            NareStatus::Panic
        }
    }
}

fn fail(e: Error) -> NareStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> NareStatus {
    set_error(format!("null {what}"));
    NareStatus::NullPointer
}

fn invalid(msg: &str) -> NareStatus {
    set_error(msg.into());
    NareStatus::InvalidArgument
}

unsafe fn read_mat(ptr: *const f64, rows: usize, cols: usize) -> Result<Mat, NareStatus> {
    if rows * cols == 0 {
        return Ok(Mat::zeros(rows, cols));
    }
    if ptr.is_null() {
        return Err(null("matrix pointer"));
    }
    Ok(Mat::from_column_slice(rows, cols, std::slice::from_raw_parts(ptr, rows * cols)))
}

unsafe fn publish<T>(out: *mut *mut T, value: T) -> Result<(), NareStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Defaults: tol 1e-12, 300 iterations, divergence at 1e12, real
/// arithmetic on, Leja with `s = 1`, consistent orientation.
#[no_mangle]
pub extern "C" fn nare_options_default() -> NareOptions {
    let o = SolveOptions::default();
    NareOptions {
        tol: o.tol,
        max_iter: o.max_iter,
        div_threshold: o.div_threshold,
        real_arith: o.real_arith as i32,
        strategy: NareStrategyKind::Leja,
        s: 1,
        recompute: 0,
        orientation: NareOrientation::Consistent,
    }
}

/// Dense problem `X C X - X D - A X + B = 0` with `B = LB RB`, `C = LC RC`.
/// `a` is m x m, `d` n x n, `lb` m x p, `rb` p x n, `lc` n x q, `rc` q x m.
///
/// # Safety
/// Each pointer must reference a column-major array of the stated size;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nare_problem_new_dense(
    m: usize,
    n: usize,
    p: usize,
    q: usize,
    a: *const f64,
    d: *const f64,
    lb: *const f64,
    rb: *const f64,
    lc: *const f64,
    rc: *const f64,
    out: *mut *mut NareProblemHandle,
) -> NareStatus {
    guard(|| {
        let problem = NareProblem::dense(
            read_mat(a, m, m)?,
            read_mat(d, n, n)?,
            read_mat(lb, m, p)?,
            read_mat(rb, p, n)?,
            read_mat(lc, n, q)?,
            read_mat(rc, q, m)?,
        )
        .map_err(fail)?;
        publish(out, NareProblemHandle { inner: problem })
    })
}

/// Transport benchmark of size `n` in its minimal-solution form.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nare_problem_transport(
    n: usize,
    c_alpha: f64,
    c_beta: f64,
    seed: u64,
    out: *mut *mut NareProblemHandle,
) -> NareStatus {
    guard(|| {
        let params = TransportParams::random(n, c_alpha, c_beta, seed);
        let problem = gen::transport_problem(&params, TransportForm::Minimal).map_err(fail)?;
        publish(out, NareProblemHandle { inner: problem })
    })
}

/// # Safety
/// `problem` must come from a `nare_problem_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn nare_problem_free(problem: *mut NareProblemHandle) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Writes `m`, `n` of the problem.
///
/// # Safety
/// `problem` must be a live handle; `m` and `n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nare_problem_dims(problem: *const NareProblemHandle, m: *mut usize, n: *mut usize) -> NareStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem handle"))?;
        if m.is_null() || n.is_null() {
            return Err(null("output pointer"));
        }
        *m = p.inner.m();
        *n = p.inner.n();
        Ok(())
    })
}

fn strategy_of(o: &NareOptions) -> Result<ShiftStrategy, NareStatus> {
    if o.s == 0 {
        return Err(invalid("s must be at least 1"));
    }
    let s = match o.strategy {
        NareStrategyKind::Leja => ShiftStrategy::leja(o.s, o.recompute != 0),
        NareStrategyKind::Hamiltonian => ShiftStrategy::hamiltonian(o.s, o.recompute != 0),
    };
    Ok(s.with_orientation(match o.orientation {
        NareOrientation::Consistent => Orientation::Consistent,
        NareOrientation::PaperLiteral => Orientation::PaperLiteral,
    }))
}

/// Runs the solver. A solution handle is produced for every stop cause;
/// query it with `nare_solution_cause`.
///
/// # Safety
/// `problem` must be a live handle; `options` may be null for defaults;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nare_solve(
    problem: *const NareProblemHandle,
    options: *const NareOptions,
    out: *mut *mut NareSolutionHandle,
) -> NareStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem handle"))?;
        let o = options.as_ref().copied().unwrap_or_else(|| nare_options_default());
        if !(o.tol > 0.0 && o.div_threshold > 0.0) {
            return Err(invalid("tol and div_threshold must be positive"));
        }
        let strategy = strategy_of(&o)?;
        let opts = SolveOptions {
            tol: o.tol,
            max_iter: o.max_iter,
            div_threshold: o.div_threshold,
            real_arith: o.real_arith != 0,
        };
        let outcome = radi::solve(&p.inner, &strategy, &opts).map_err(fail)?;
        publish(out, NareSolutionHandle { inner: outcome })
    })
}

/// # Safety
/// `solution` must come from `nare_solve` or be null.
#[no_mangle]
pub unsafe extern "C" fn nare_solution_free(solution: *mut NareSolutionHandle) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nare_solution_cause(solution: *const NareSolutionHandle) -> NareStopCause {
    match solution.as_ref().map(|s| s.inner.cause) {
        Some(StopCause::Converged) => NareStopCause::Converged,
        Some(StopCause::MaxIterations) | None => NareStopCause::MaxIterations,
        Some(StopCause::Diverged) => NareStopCause::Diverged,
        Some(StopCause::ShiftStarvation) => NareStopCause::ShiftStarvation,
    }
}

/// Iteration count (a conjugate double step counts as two).
///
/// # Safety
/// `solution` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn nare_solution_iterations(solution: *const NareSolutionHandle) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.state.iter)
}

/// Number of columns of `LX` (rank of the factored approximation).
///
/// # Safety
/// `solution` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn nare_solution_rank(solution: *const NareSolutionHandle) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.state.lx.ncols())
}

/// Relative residual `nu` at the last accepted step; NaN for a null handle.
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nare_solution_residual(solution: *const NareSolutionHandle) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.state.nu)
}

unsafe fn copy_out(src: &Mat, buf: *mut f64, len: usize) -> Result<(), NareStatus> {
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, {} needed", src.len()));
        return Err(NareStatus::BufferTooSmall);
    }
    std::slice::from_raw_parts_mut(buf, src.len()).copy_from_slice(src.as_slice());
    Ok(())
}

/// Copies `LX` (m x rank, column-major) into `buf`.
///
/// # Safety
/// `solution` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nare_solution_lx(solution: *const NareSolutionHandle, buf: *mut f64, len: usize) -> NareStatus {
    guard(|| copy_out(&solution.as_ref().ok_or_else(|| null("solution handle"))?.inner.state.lx, buf, len))
}

/// Copies `RX` (rank x n, column-major) into `buf`.
///
/// # Safety
/// `solution` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nare_solution_rx(solution: *const NareSolutionHandle, buf: *mut f64, len: usize) -> NareStatus {
    guard(|| copy_out(&solution.as_ref().ok_or_else(|| null("solution handle"))?.inner.state.rx, buf, len))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nare_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Dimension("x".into())), NareStatus::DimensionMismatch);
        assert_eq!(status_of(&Error::SingularUpsilon), NareStatus::SingularSystem);
        assert_eq!(status_of(&Error::NoSplitting), NareStatus::Breakdown);
        assert_eq!(status_of(&Error::Config("x".into())), NareStatus::InvalidArgument);
    }

    #[test]
    fn defaults_mirror_core() {
        let o = nare_options_default();
        assert_eq!((o.tol, o.max_iter, o.div_threshold, o.real_arith, o.s), (1e-12, 300, 1e12, 1, 1));
        assert_eq!(strategy_of(&o).unwrap(), ShiftStrategy::default());
    }
}
