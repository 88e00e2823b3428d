//! Low-rank RADI-type iteration: real steps, conjugate double steps in real
//! arithmetic, the weakly strengthened variant, stopping logic and telemetry.

use std::collections::VecDeque;
use std::time::Instant;

use crate::dense::{self, from_parts};
use crate::error::{Error, Result};
use crate::problem::{NareProblem, Operator, ProblemKind};
use crate::shifts::{self, ShiftPair, ShiftQueue, ShiftStrategy};
use crate::solver::{self, ShiftSolver, Side};
use crate::{CMat, Mat, C64};

const WINDOW_CAP: usize = 16;
const GROWTH_LIMIT: f64 = 1e14;
const STARVATION_LIMIT: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub iter: usize,
    pub dim: usize,
    pub nu: f64,
    pub shift: ShiftPair,
    pub t_shift_s: f64,
    pub t_solve_s: f64,
    pub t_other_s: f64,
}

#[derive(Debug, Clone)]
pub struct RadiState {
    pub lx: Mat,
    pub rx: Mat,
    pub lb: Mat,
    pub rb: Mat,
    pub lphi: Mat,
    pub rphi: Mat,
    pub iter: usize,
    pub history: Vec<ConvergenceRecord>,
    pub nu0: f64,
    pub nu: f64,
    /// Most recent `(L^X, R^X)` blocks, oldest first.
    pub window: VecDeque<(Mat, Mat)>,
    pub weak: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCause {
    Converged,
    MaxIterations,
    Diverged,
    ShiftStarvation,
}

impl StopCause {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopCause::Converged => "converged",
            StopCause::MaxIterations => "max-iterations",
            StopCause::Diverged => "diverged",
            StopCause::ShiftStarvation => "shift-starvation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub div_threshold: f64,
    /// Conjugate pairs by the real double step; off forces complex arithmetic.
    pub real_arith: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 300, div_threshold: 1e12, real_arith: true }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub state: RadiState,
    pub cause: StopCause,
    pub factorizations: u64,
    pub seconds: f64,
}

/// `sqrt(trace(L^T L R R^T))`.
pub fn gram_norm(l: &Mat, r: &Mat) -> f64 {
    let g = l.transpose() * l;
    let h = r * r.transpose();
    g.component_mul(&h.transpose()).sum().max(0.0).sqrt()
}

pub fn initialize(problem: &NareProblem) -> Result<RadiState> {
    let issues = problem.validate();
    if !issues.is_empty() {
        return Err(Error::InvalidProblem(issues.join("; ")));
    }
    let (m, n, q) = (problem.m(), problem.n(), problem.q());
    let lphi = problem.lphi.clone().unwrap_or_else(|| Mat::zeros(m, q));
    let rphi = problem.rphi.clone().unwrap_or_else(|| Mat::zeros(q, n));
    let nu0 = gram_norm(&problem.lb, &problem.rb);
    Ok(RadiState {
        lx: Mat::zeros(m, 0),
        rx: Mat::zeros(0, n),
        lb: problem.lb.clone(),
        rb: problem.rb.clone(),
        lphi,
        rphi,
        iter: 0,
        history: Vec::new(),
        nu0,
        nu: if nu0 > 0.0 { 1.0 } else { 0.0 },
        window: VecDeque::new(),
        weak: problem.kind == ProblemKind::Weak,
    })
}

pub fn residual_norm(state: &RadiState) -> f64 {
    if state.nu0 == 0.0 {
        0.0
    } else {
        gram_norm(&state.lb, &state.rb) / state.nu0
    }
}

pub fn assemble_dense(state: &RadiState) -> Result<Mat> {
    let (m, n) = (state.lx.nrows(), state.rx.ncols());
    if m.saturating_mul(n) > crate::problem::DENSE_GUARD {
        return Err(Error::SizeGuard { rows: m, cols: n });
    }
    Ok(&state.lx * &state.rx)
}

/// `A - LPhi_k RC - LA RA` and `D - LC RPhi_k - LD RD`, densely.
pub fn implicit_coefficients(problem: &NareProblem, state: &RadiState) -> Result<(Mat, Mat)> {
    let mut a = problem.a.to_dense() - &state.lphi * &problem.rc;
    let mut d = problem.d.to_dense() - &problem.lc * &state.rphi;
    if let (Some(la), Some(ra)) = (&problem.la, &problem.ra) {
        a -= la * ra;
    }
    if let (Some(ld), Some(rd)) = (&problem.ld, &problem.rd) {
        d -= ld * rd;
    }
    Ok((a, d))
}

fn hcat(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

fn vcat(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

fn apply_left(op: &Option<Operator>, x: &Mat) -> Mat {
    match op {
        Some(m) => m.apply(x),
        None => x.clone(),
    }
}

fn apply_right(op: &Option<Operator>, x: &Mat) -> Mat {
    match op {
        Some(n) => n.apply_right(x),
        None => x.clone(),
    }
}

/// `Upsilon = L U` with `L` a row-permuted unit lower factor; monitors growth.
struct UpsilonLu {
    /// `L^{-1}`.
    l_inv: Mat,
    u: Mat,
}

impl UpsilonLu {
    fn new(ups: &Mat) -> Result<Self> {
        let scale = ups.amax();
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::SingularUpsilon);
        }
        let (pl, uu) = plu(ups)?;
        let growth = uu.amax() / scale;
        if !growth.is_finite() || growth > GROWTH_LIMIT {
            return Err(Error::SingularUpsilon);
        }
        let l_inv = pl.try_inverse().ok_or(Error::SingularUpsilon)?;
        Ok(UpsilonLu { l_inv, u: uu })
    }

    /// `x U^{-1}`.
    fn right_u_inv(&self, x: &Mat) -> Result<Mat> {
        let ut = self.u.transpose();
        let sol = ut.solve_lower_triangular(&x.transpose()).ok_or(Error::SingularUpsilon)?;
        Ok(sol.transpose())
    }

    /// `U^{-1} x`.
    fn left_u_inv(&self, x: &Mat) -> Result<Mat> {
        self.u.solve_upper_triangular(x).ok_or(Error::SingularUpsilon)
    }
}

/// Partial-pivoting LU returned as `(P^T L, U)`.
fn plu(a: &Mat) -> Result<(Mat, Mat)> {
    let k = a.nrows();
    let mut u = a.clone();
    let mut l = Mat::identity(k, k);
    let mut perm: Vec<usize> = (0..k).collect();
    for c in 0..k {
        let (piv, big) = (c..k).map(|r| (r, u[(r, c)].abs())).fold((c, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if big == 0.0 || !big.is_finite() {
            return Err(Error::SingularUpsilon);
        }
        if piv != c {
            u.swap_rows(piv, c);
            perm.swap(piv, c);
            for j in 0..c {
                let t = l[(piv, j)];
                l[(piv, j)] = l[(c, j)];
                l[(c, j)] = t;
            }
        }
        for r in c + 1..k {
            let f = u[(r, c)] / u[(c, c)];
            l[(r, c)] = f;
            for j in c..k {
                u[(r, j)] -= f * u[(c, j)];
            }
        }
    }
    let mut pl = Mat::zeros(k, k);
    for (i, &pi) in perm.iter().enumerate() {
        pl.set_row(pi, &l.row(i));
    }
    Ok((pl, u))
}

fn small_inv(a: &Mat) -> Result<Mat> {
    let k = a.nrows();
    let inv = dense::solve(a, &Mat::identity(k, k)).ok_or(Error::SingularUpsilon)?;
    if dense::norm1(a) * dense::norm1(&inv) > solver::cond_limit() {
        return Err(Error::SingularUpsilon);
    }
    Ok(inv)
}

fn small_cinv(a: &CMat) -> Result<CMat> {
    dense::cinv(a).ok_or(Error::SingularUpsilon)
}

/// Extended offset factors `[LPhi LA]`, `[RC; RA]`, `[LC LD]`, `[RPhi; RD]`.
struct Extended {
    lphi: Mat,
    rc: Mat,
    lc: Mat,
    rphi: Mat,
}

fn extended(problem: &NareProblem, state: &RadiState) -> Extended {
    let mut e = Extended {
        lphi: state.lphi.clone(),
        rc: problem.rc.clone(),
        lc: problem.lc.clone(),
        rphi: state.rphi.clone(),
    };
    if let (Some(la), Some(ra)) = (&problem.la, &problem.ra) {
        e.lphi = hcat(&e.lphi, la);
        e.rc = vcat(&e.rc, ra);
    }
    if let (Some(ld), Some(rd)) = (&problem.ld, &problem.rd) {
        e.lc = hcat(&e.lc, ld);
        e.rphi = vcat(&e.rphi, rd);
    }
    e
}

fn push_window(state: &mut RadiState, l: Mat, r: Mat) {
    state.window.push_back((l, r));
    while state.window.len() > WINDOW_CAP {
        state.window.pop_front();
    }
}

fn append_block(state: &mut RadiState, l: &Mat, r: &Mat) {
    state.lx = hcat(&state.lx, l);
    state.rx = vcat(&state.rx, r);
    push_window(state, l.clone(), r.clone());
}

/// One real-shift step; the state is left untouched on error.
pub fn step_real(problem: &NareProblem, solver: &ShiftSolver, state: &mut RadiState, shift: &ShiftPair) -> Result<()> {
    let (alpha, beta) = (shift.alpha.re, shift.beta.re);
    if !shift.admissible() {
        return Err(Error::SingularUpsilon);
    }
    let (p, q) = (problem.p(), problem.q());
    let ext = extended(problem, state);
    let fa = solver.get(Side::A, C64::new(beta, 0.0))?;
    let fd = solver.get(Side::D, C64::new(alpha, 0.0))?;

    let sol = solver.timed(|| solver::solve_columns(&fa, &hcat(&state.lb, &ext.lphi)))?;
    let lbh = sol.columns(0, p).into_owned();
    let lph = sol.columns(p, sol.ncols() - p).into_owned();
    let kq = lph.ncols();
    let g = Mat::identity(kq, kq) - &ext.rc * &lph;
    let ya = small_inv(&g)? * (&ext.rc * &lbh);

    let solr = solver.timed(|| solver::solve_rows(&fd, &vcat(&state.rb, &ext.rphi)))?;
    let rbh = solr.rows(0, p).into_owned();
    let rph = solr.rows(p, solr.nrows() - p).into_owned();
    let h = Mat::identity(kq, kq) - &rph * &ext.lc;
    let yd = (&rbh * &ext.lc) * small_inv(&h)?;

    let ydc = yd.columns(0, q).into_owned();
    let yac = ya.rows(0, q).into_owned();
    let ups = (Mat::identity(p, p) - &ydc * &yac) / (alpha + beta);
    let lu = UpsilonLu::new(&ups)?;

    let z = &lbh + &lph * &ya;
    let w = &rbh + &yd * &rph;
    let lxh = lu.right_u_inv(&z)?;
    let rxh = &lu.l_inv * w;
    let mlt = apply_left(&problem.mass_m, &lxh) * &lu.l_inv;
    let v = lu.left_u_inv(&apply_right(&problem.mass_n, &rxh))?;
    let all_finite = mlt.iter().chain(v.iter()).chain(lxh.iter()).chain(rxh.iter()).all(|x| x.is_finite());
    if !all_finite {
        return Err(Error::SingularUpsilon);
    }

    state.lb -= &mlt;
    state.lphi += &mlt * &ydc;
    state.rb -= &v;
    state.rphi += &yac * &v;
    append_block(state, &lxh, &rxh);
    state.iter += 1;
    Ok(())
}

/// `(Psi^A Omega_2 Psi^D)^{-1}` for a nonreal pair.
pub fn psi(alpha: C64, beta: C64) -> Result<Mat> {
    let s = alpha + beta;
    let s2 = s.norm_sqr();
    let (ia, ib) = (alpha.im, beta.im);
    let m = Mat::from_row_slice(
        2,
        2,
        &[2.0 * s.re, -2.0 * s.im + s2 / ia, -2.0 * s.im + s2 / ib, -2.0 * s.re + s2 * s.re / (ia * ib)],
    );
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let scale = m.amax();
    if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
        return Err(Error::DegeneratePsi);
    }
    Ok(Mat::from_row_slice(2, 2, &[m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det]))
}

fn kron_i(psi: &Mat, k: usize) -> Mat {
    let mut out = Mat::zeros(2 * k, 2 * k);
    for i in 0..2 {
        for j in 0..2 {
            for d in 0..k {
                out[(i * k + d, j * k + d)] = psi[(i, j)];
            }
        }
    }
    out
}

fn block2(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    vcat(&hcat(a, b), &hcat(c, d))
}

fn parts(a: &CMat) -> (Mat, Mat) {
    (dense::re(a), dense::im(a))
}

/// Threshold below which an imaginary part is too small for the real double step.
fn weak_imag(z: C64) -> bool {
    z.im.abs() <= 1e-8 * (1.0 + z.norm())
}

/// Conjugate double step `(alpha, beta)`, `(conj alpha, conj beta)` in real
/// arithmetic; appends `2p` columns.
pub fn step_complex_pair(
    problem: &NareProblem,
    solver: &ShiftSolver,
    state: &mut RadiState,
    shift: &ShiftPair,
) -> Result<()> {
    if shift.is_real {
        return step_real(problem, solver, state, shift);
    }
    let (alpha, beta) = (shift.alpha, shift.beta);
    if weak_imag(alpha) || weak_imag(beta) {
        return Err(Error::DegeneratePsi);
    }
    if !shift.admissible() {
        return Err(Error::SingularUpsilon);
    }
    let psi = psi(alpha, beta)?;
    let (m, n, p, q) = (problem.m(), problem.n(), problem.p(), problem.q());
    let fa = solver.get(Side::A, beta)?;
    let fd = solver.get(Side::D, alpha)?;

    let sol = solver.timed(|| solver::solve_columns(&fa, &hcat(&state.lb, &state.lphi)))?;
    let sre = sol.rows(0, m).into_owned();
    let sim = sol.rows(m, m).into_owned();
    let lbh = from_parts(&sre.columns(0, p).into_owned(), &sim.columns(0, p).into_owned());
    let lph = from_parts(&sre.columns(p, q).into_owned(), &sim.columns(p, q).into_owned());
    let rc = dense::to_complex(&problem.rc);
    let lc = dense::to_complex(&problem.lc);
    let ya = small_cinv(&(CMat::identity(q, q) - &rc * &lph))? * (&rc * &lbh);

    let solr = solver.timed(|| solver::solve_rows(&fd, &vcat(&state.rb, &state.rphi)))?;
    let rre = solr.columns(0, n).into_owned();
    let rim = solr.columns(n, n).into_owned();
    let rbh = from_parts(&rre.rows(0, p).into_owned(), &rim.rows(0, p).into_owned());
    let rph = from_parts(&rre.rows(p, q).into_owned(), &rim.rows(p, q).into_owned());
    let yd = (&rbh * &lc) * small_cinv(&(CMat::identity(q, q) - &rph * &lc))?;

    let (zre, zim) = parts(&(&lbh + &lph * &ya));
    let (wre, wim) = parts(&(&rbh + &yd * &rph));
    let (yar, yai) = parts(&ya);
    let (ydr, ydi) = parts(&yd);

    let yd_blk = block2(&ydr, &(-&ydi), &ydi, &ydr);
    let ya_blk = block2(&yar, &yai, &(-&yai), &yar);
    let ups = kron_i(&psi, p) - &yd_blk * kron_i(&psi, q) * &ya_blk;
    let lu = UpsilonLu::new(&ups)?;

    let lxh = lu.right_u_inv(&hcat(&zre, &zim))?;
    let rxh = &lu.l_inv * vcat(&wre, &wim);
    let mlt = apply_left(&problem.mass_m, &lxh) * &lu.l_inv;
    let v = lu.left_u_inv(&apply_right(&problem.mass_n, &rxh))?;
    let all_finite = mlt.iter().chain(v.iter()).chain(lxh.iter()).chain(rxh.iter()).all(|x| x.is_finite());
    if !all_finite {
        return Err(Error::SingularUpsilon);
    }

    state.lb -= mlt.columns(0, p);
    state.lphi += &mlt * vcat(&ydr, &ydi);
    state.rb -= v.rows(0, p);
    state.rphi += hcat(&yar, &yai) * &v;
    append_block(state, &lxh, &rxh);
    state.iter += 2;
    Ok(())
}

fn solve_a_c(solver: &ShiftSolver, f: &solver::ShiftedFactorization, x: &CMat) -> Result<CMat> {
    let (r, i) = parts(x);
    let (a, b) = solver.timed(|| solver::solve_columns_c(f, &r, &i))?;
    Ok(from_parts(&a, &b))
}

fn solve_d_c(solver: &ShiftSolver, f: &solver::ShiftedFactorization, x: &CMat) -> Result<CMat> {
    let (r, i) = parts(x);
    let (a, b) = solver.timed(|| solver::solve_rows_c(f, &r, &i))?;
    Ok(from_parts(&a, &b))
}

fn left_c(op: &Option<Operator>, x: &CMat) -> CMat {
    let (r, i) = parts(x);
    from_parts(&apply_left(op, &r), &apply_left(op, &i))
}

fn right_c(op: &Option<Operator>, x: &CMat) -> CMat {
    let (r, i) = parts(x);
    from_parts(&apply_right(op, &r), &apply_right(op, &i))
}

fn chcat(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

fn cvcat(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

struct ComplexFactors {
    lb: CMat,
    rb: CMat,
    lphi: CMat,
    rphi: CMat,
}

/// One complex-arithmetic step; returns the increment factors `(Z K, W)`.
fn complex_step(
    problem: &NareProblem,
    solver: &ShiftSolver,
    st: &mut ComplexFactors,
    alpha: C64,
    beta: C64,
) -> Result<(CMat, CMat)> {
    let (p, q) = (problem.p(), problem.q());
    let c = dense::to_complex;
    let mut lphi = st.lphi.clone();
    let mut rc = c(&problem.rc);
    let mut lc = c(&problem.lc);
    let mut rphi = st.rphi.clone();
    if let (Some(la), Some(ra)) = (&problem.la, &problem.ra) {
        lphi = chcat(&lphi, &c(la));
        rc = cvcat(&rc, &c(ra));
    }
    if let (Some(ld), Some(rd)) = (&problem.ld, &problem.rd) {
        lc = chcat(&lc, &c(ld));
        rphi = cvcat(&rphi, &c(rd));
    }
    let fa = solver.get(Side::A, beta)?;
    let fd = solver.get(Side::D, alpha)?;
    let sol = solve_a_c(solver, &fa, &chcat(&st.lb, &lphi))?;
    let lbh = sol.columns(0, p).into_owned();
    let lph = sol.columns(p, sol.ncols() - p).into_owned();
    let kq = lph.ncols();
    let ya = small_cinv(&(CMat::identity(kq, kq) - &rc * &lph))? * (&rc * &lbh);
    let solr = solve_d_c(solver, &fd, &cvcat(&st.rb, &rphi))?;
    let rbh = solr.rows(0, p).into_owned();
    let rph = solr.rows(p, solr.nrows() - p).into_owned();
    let yd = (&rbh * &lc) * small_cinv(&(CMat::identity(kq, kq) - &rph * &lc))?;
    let ydc = yd.columns(0, q).into_owned();
    let yac = ya.rows(0, q).into_owned();
    let ups = (CMat::identity(p, p) - &ydc * &yac) / (alpha + beta);
    let k = small_cinv(&ups)?;
    if dense::cnorm_fro(&k) * dense::cnorm_fro(&ups) > GROWTH_LIMIT {
        return Err(Error::SingularUpsilon);
    }
    let zk = (&lbh + &lph * &ya) * &k;
    let w = &rbh + &yd * &rph;
    let mzk = left_c(&problem.mass_m, &zk);
    let kwn = &k * right_c(&problem.mass_n, &w);
    st.lb -= &mzk;
    st.lphi += &mzk * &ydc;
    st.rb -= &kwn;
    st.rphi += &yac * &kwn;
    Ok((zk, w))
}

/// Conjugate double step in complex arithmetic followed by realification;
/// the increment is compressed to exactly `2p` real columns.
pub fn step_complex_pair_fallback(
    problem: &NareProblem,
    solver: &ShiftSolver,
    state: &mut RadiState,
    shift: &ShiftPair,
) -> Result<()> {
    if !shift.admissible() {
        return Err(Error::SingularUpsilon);
    }
    let p = problem.p();
    let c = dense::to_complex;
    let mut st = ComplexFactors { lb: c(&state.lb), rb: c(&state.rb), lphi: c(&state.lphi), rphi: c(&state.rphi) };
    let (l1, r1) = complex_step(problem, solver, &mut st, shift.alpha, shift.beta)?;
    let (l2, r2) = complex_step(problem, solver, &mut st, shift.alpha.conj(), shift.beta.conj())?;
    let lc = chcat(&l1, &l2);
    let rc = cvcat(&r1, &r2);

    let basis = hcat(&dense::re(&lc), &dense::im(&lc));
    let qm = dense::orth_columns(&basis, 1e-14);
    let qtl = dense::to_complex(&qm.transpose()) * &lc;
    let s = dense::re(&qtl) * dense::re(&rc) - dense::im(&qtl) * dense::im(&rc);
    let svd = s.svd(true, true);
    let (u, vt) = (svd.u.ok_or(Error::SingularUpsilon)?, svd.v_t.ok_or(Error::SingularUpsilon)?);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let keep = (2 * p).min(order.len());
    let (m, n) = (state.lb.nrows(), state.rb.ncols());
    let mut lxh = Mat::zeros(m, 2 * p);
    let mut rxh = Mat::zeros(2 * p, n);
    for (k, &idx) in order.iter().take(keep).enumerate() {
        let sv = svd.singular_values[idx];
        lxh.set_column(k, &(&qm * u.column(idx) * sv));
        rxh.set_row(k, &vt.row(idx));
    }
    let finite = lxh.iter().chain(rxh.iter()).all(|x| x.is_finite());
    if !finite {
        return Err(Error::SingularUpsilon);
    }
    state.lb = dense::re(&st.lb);
    state.rb = dense::re(&st.rb);
    state.lphi = dense::re(&st.lphi);
    state.rphi = dense::re(&st.rphi);
    append_block(state, &lxh, &rxh);
    state.iter += 2;
    Ok(())
}

/// Dispatches one shift to the matching step kind.
pub fn step(
    problem: &NareProblem,
    solver: &ShiftSolver,
    state: &mut RadiState,
    shift: &ShiftPair,
    real_arith: bool,
) -> Result<()> {
    if shift.is_real {
        return step_real(problem, solver, state, &shift.realified());
    }
    if state.weak || !real_arith {
        return step_complex_pair_fallback(problem, solver, state, shift);
    }
    match step_complex_pair(problem, solver, state, shift) {
        Err(Error::DegeneratePsi) => step_complex_pair_fallback(problem, solver, state, shift),
        r => r,
    }
}

pub fn solve(problem: &NareProblem, strategy: &ShiftStrategy, options: &SolveOptions) -> Result<SolveOutcome> {
    solve_with(problem, strategy, options, &mut |_| {})
}

/// Main loop; every accepted step is reported to `sink`.
pub fn solve_with(
    problem: &NareProblem,
    strategy: &ShiftStrategy,
    options: &SolveOptions,
    sink: &mut dyn FnMut(&ConvergenceRecord),
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let mut state = initialize(problem)?;
    let solver = ShiftSolver::new(problem);
    let mut queue = ShiftQueue::new();
    let mut failures = 0;
    let cause = loop {
        if state.nu.is_nan() || state.nu >= options.div_threshold {
            break StopCause::Diverged;
        }
        if state.nu <= options.tol {
            break StopCause::Converged;
        }
        if state.iter >= options.max_iter {
            break StopCause::MaxIterations;
        }
        let it_start = Instant::now();
        let solve0 = solver.seconds();
        let gen_start = Instant::now();
        let next = {
            let st = &state;
            let mut gen = || shifts::generate(problem, st, strategy);
            let mut probe = |s: &ShiftPair| solver.probe(s.alpha, s.beta);
            queue.next_shift(strategy, &mut gen, &mut probe)
        };
        let gen_wall = gen_start.elapsed().as_secs_f64();
        let gen_solve = solver.seconds() - solve0;
        let shift = match next {
            Ok(s) => s,
            Err(Error::NoValidShift | Error::EmptyCandidates | Error::SingularBasis | Error::RankDeficientWindow) => {
                failures += 1;
                if failures >= STARVATION_LIMIT {
                    break StopCause::ShiftStarvation;
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut trial = state.clone();
        match step(problem, &solver, &mut trial, &shift, options.real_arith) {
            Ok(()) => {
                failures = 0;
                state = trial;
            }
            Err(
                Error::SingularUpsilon
                | Error::DegeneratePsi
                | Error::SingularShift(_)
                | Error::IllConditionedShift { .. },
            ) => {
                failures += 1;
                if failures >= STARVATION_LIMIT {
                    break StopCause::ShiftStarvation;
                }
                continue;
            }
            Err(e) => return Err(e),
        }
        state.nu = residual_norm(&state);
        let total = it_start.elapsed().as_secs_f64();
        let t_solve = solver.seconds() - solve0;
        let t_shift = (gen_wall - gen_solve).max(0.0);
        let rec = ConvergenceRecord {
            iter: state.iter,
            dim: state.lx.ncols(),
            nu: state.nu,
            shift,
            t_shift_s: t_shift,
            t_solve_s: t_solve.max(0.0),
            t_other_s: (total - t_shift - t_solve).max(0.0),
        };
        sink(&rec);
        state.history.push(rec);
    };
    Ok(SolveOutcome { state, cause, factorizations: solver.factorization_count(), seconds: start.elapsed().as_secs_f64() })
}
