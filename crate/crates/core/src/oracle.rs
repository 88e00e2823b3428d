//! Dense reference implementations: Cayley transforms, E/F/G/H coefficients,
//! flexible fixed-point iteration, block-Toeplitz closed forms, residual
//! factor closed forms, scalar rational functions of the shifts and a
//! Schur-based stabilizing solver. Complex arithmetic throughout.

use crate::dense::{self, to_complex};
use crate::error::{Error, Result};
use crate::problem::{Classification, NareProblem};
use crate::shifts::ShiftPair;
use crate::{CMat, Mat, C64};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[cfg(test)]
fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Plain equivalent problem in factored form, masses folded in.
#[derive(Debug, Clone)]
pub struct Factored {
    pub a: CMat,
    pub d: CMat,
    pub lb: CMat,
    pub rb: CMat,
    pub lc: CMat,
    pub rc: CMat,
}

impl Factored {
    pub fn b(&self) -> CMat {
        &self.lb * &self.rb
    }
    pub fn c(&self) -> CMat {
        &self.lc * &self.rc
    }
    pub fn m(&self) -> usize {
        self.a.nrows()
    }
    pub fn n(&self) -> usize {
        self.d.nrows()
    }
    pub fn p(&self) -> usize {
        self.lb.ncols()
    }
    pub fn q(&self) -> usize {
        self.lc.ncols()
    }
}

pub fn factored(problem: &NareProblem) -> Result<Factored> {
    let mut a = problem.a_eff_dense()?;
    let mut d = problem.d_eff_dense()?;
    let mut lb = problem.lb.clone();
    let mut rb = problem.rb.clone();
    if let Some(mm) = &problem.mass_m {
        let md = mm.to_dense();
        a = dense::solve(&md, &a).ok_or_else(|| Error::AssumptionViolated("M".into()))?;
        lb = dense::solve(&md, &lb).ok_or_else(|| Error::AssumptionViolated("M".into()))?;
    }
    if let Some(nn) = &problem.mass_n {
        let nd = nn.to_dense();
        d = dense::solve_right(&d, &nd).ok_or_else(|| Error::AssumptionViolated("N".into()))?;
        rb = dense::solve_right(&rb, &nd).ok_or_else(|| Error::AssumptionViolated("N".into()))?;
    }
    Ok(Factored {
        a: to_complex(&a),
        d: to_complex(&d),
        lb: to_complex(&lb),
        rb: to_complex(&rb),
        lc: to_complex(&problem.lc),
        rc: to_complex(&problem.rc),
    })
}

fn cnorm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn cond_limit() -> f64 {
    1.0 / (100.0 * f64::EPSILON)
}

/// Inverse with a 1-norm condition check; `None` when numerically singular.
fn checked_inv(a: &CMat) -> Option<(CMat, f64)> {
    let inv = dense::cinv(a)?;
    let cond = cnorm1(a) * cnorm1(&inv);
    if !cond.is_finite() || cond > cond_limit() {
        return None;
    }
    Some((inv, cond))
}

fn named_inv(a: &CMat, name: &str) -> Result<CMat> {
    checked_inv(a).map(|(i, _)| i).ok_or_else(|| Error::AssumptionViolated(name.into()))
}

fn shifted(a: &CMat, s: C64) -> CMat {
    let mut out = a.clone();
    for i in 0..a.nrows() {
        out[(i, i)] += s;
    }
    out
}

fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `C^{alpha,beta}(M) = (alpha I + M)^{-1} (beta I - M)`.
pub fn cayley(mmat: &CMat, alpha: C64, beta: C64) -> Result<CMat> {
    let n = mmat.nrows();
    let rhs = eye(n) * beta - mmat;
    let (inv, _) = checked_inv(&shifted(mmat, alpha)).ok_or(Error::SingularShift(alpha))?;
    Ok(inv * rhs)
}

#[derive(Debug, Clone)]
pub struct CayleyCoefficients {
    pub e0: CMat,
    pub f0: CMat,
    pub g0: CMat,
    pub h0: CMat,
    pub shift: ShiftPair,
    pub a_tilde: CMat,
    pub d_tilde: CMat,
    pub l_b: CMat,
    pub r_c: CMat,
    pub l_c: CMat,
    pub r_b: CMat,
    pub y_a: CMat,
    pub y_d: CMat,
}

impl CayleyCoefficients {
    /// `(E0, F0, G0, H0)` rebuilt from the low-rank terms.
    pub fn low_rank_forms(&self) -> Result<(CMat, CMat, CMat, CMat)> {
        let p = self.y_d.nrows();
        let q = self.y_a.nrows();
        let kd = named_inv(&(eye(p) - &self.y_d * &self.y_a), "I-Y^D Y^A")?;
        let ka = named_inv(&(eye(q) - &self.y_a * &self.y_d), "I-Y^A Y^D")?;
        let h = &self.l_b * &kd * &self.r_b;
        let e = &self.d_tilde + &self.l_c * &ka * &self.y_a * &self.r_b;
        let f = &self.a_tilde + &self.l_b * &kd * &self.y_d * &self.r_c;
        let g = &self.l_c * &ka * &self.r_c;
        Ok((e, f, g, h))
    }
}

pub fn cayley_coefficients(problem: &NareProblem, shift: &ShiftPair) -> Result<CayleyCoefficients> {
    let fp = factored(problem)?;
    coefficients_of(&fp, shift)
}

fn coefficients_of(fp: &Factored, shift: &ShiftPair) -> Result<CayleyCoefficients> {
    let (al, be) = (shift.alpha, shift.beta);
    let (m, n) = (fp.m(), fp.n());
    let b = fp.b();
    let cm = fp.c();
    let d_al = shifted(&fp.d, al);
    let a_be = shifted(&fp.a, be);
    let d_al_inv = named_inv(&d_al, "D_α")?;
    let a_be_inv = named_inv(&a_be, "A_β")?;
    let bdc = &b * &d_al_inv * &cm;
    let cab = &cm * &a_be_inv * &b;
    let k1 = named_inv(&(&a_be - &bdc), "A_β−BD_α^{-1}C")?;
    let k2 = &shifted(&fp.a, -al) - &bdc;
    named_inv(&k2, "A_{−α}−BD_α^{-1}C")?;
    let k3 = named_inv(&(&d_al - &cab), "D_α−CA_β^{-1}B")?;
    let k4 = &shifted(&fp.d, -be) - &cab;
    named_inv(&k4, "D_{−β}−CA_β^{-1}B")?;
    let s = al + be;
    let f0 = -(&k1 * &k2);
    let e0 = -(&k3 * &k4);
    let h0 = &k1 * &b * &d_al_inv * s;
    let g0 = &k3 * &cm * &a_be_inv * s;
    let a_tilde = -(&a_be_inv * shifted(&fp.a, -al));
    let d_tilde = -(&d_al_inv * shifted(&fp.d, -be));
    let l_b = &a_be_inv * &fp.lb;
    let r_c = &fp.rc * &a_be_inv * s;
    let y_a = &fp.rc * &l_b;
    let l_c = &d_al_inv * &fp.lc;
    let r_b = &fp.rb * &d_al_inv * s;
    let y_d = &fp.rb * &l_c;
    debug_assert_eq!(e0.shape(), (n, n));
    debug_assert_eq!(f0.shape(), (m, m));
    Ok(CayleyCoefficients { e0, f0, g0, h0, shift: *shift, a_tilde, d_tilde, l_b, r_c, l_c, r_b, y_a, y_d })
}

fn initial(fp: &Factored, x0: Option<(&Mat, &Mat)>) -> Result<CMat> {
    match x0 {
        None => Ok(CMat::zeros(fp.m(), fp.n())),
        Some((ga, gd)) => {
            if ga.nrows() != fp.m() || gd.ncols() != fp.n() || ga.ncols() != gd.nrows() {
                return Err(Error::Dimension("X0 factors must be m x r and r x n".into()));
            }
            Ok(to_complex(&(ga * gd)))
        }
    }
}

fn check_shifts(shifts: &[ShiftPair], t: usize) -> Result<()> {
    if shifts.len() < t {
        return Err(Error::InvalidParams(format!("{} shifts supplied, {} required", shifts.len(), t)));
    }
    Ok(())
}

/// `X_{k+1} = H_k + F_k X_k (I - G_k X_k)^{-1} E_k`; returns `X_1..X_t`.
pub fn fixed_point_run(
    problem: &NareProblem,
    shifts: &[ShiftPair],
    t: usize,
    x0: Option<(&Mat, &Mat)>,
) -> Result<Vec<CMat>> {
    check_shifts(shifts, t)?;
    let fp = factored(problem)?;
    let mut x = initial(&fp, x0)?;
    let mut out = Vec::with_capacity(t);
    for (k, sh) in shifts.iter().take(t).enumerate() {
        let cc = coefficients_of(&fp, sh)?;
        let w = eye(fp.n()) - &cc.g0 * &x;
        let (winv, _) = checked_inv(&w).ok_or(Error::IterationBreakdown(k + 1))?;
        x = &cc.h0 + &cc.f0 * &x * winv * &cc.e0;
        out.push(x.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    Over,
    Under,
}

/// `C_{i,j}(lambda) = prod_{l=1}^{j} (beta_{i-l} - lambda) / (lambda + alpha_{i-l})`,
/// `over` divides by `lambda + alpha_{i-j-1}`, `under` by `lambda + alpha_i`.
pub fn rational_value(shifts: &[ShiftPair], i: usize, j: usize, lambda: C64, variant: Variant) -> Result<C64> {
    let xy: Vec<(C64, C64)> = shifts.iter().map(|s| (s.alpha, s.beta)).collect();
    rational_xy(&xy, i, j, lambda, variant)
}

fn rational_xy(xy: &[(C64, C64)], i: usize, j: usize, lambda: C64, variant: Variant) -> Result<C64> {
    if j > i {
        return Err(Error::InvalidParams(format!("j={j} exceeds i={i}")));
    }
    let den = |l: usize| -> Result<C64> {
        let (x, _) = *xy.get(l).ok_or_else(|| Error::InvalidParams(format!("shift index {l} out of range")))?;
        let d = lambda + x;
        if d == ZERO {
            Err(Error::PoleHit)
        } else {
            Ok(d)
        }
    };
    let mut v = ONE;
    for l in 1..=j {
        let (_, y) = xy[i - l];
        v *= (y - lambda) / den(i - l)?;
    }
    match variant {
        Variant::Plain => {}
        Variant::Over => {
            if i < j + 1 {
                return Err(Error::InvalidParams("over variant needs i > j".into()));
            }
            v /= den(i - j - 1)?;
        }
        Variant::Under => v /= den(i)?,
    }
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::PoleHit);
    }
    Ok(v)
}

/// `Omega_t = diag(alpha_{t-1}+beta_{t-1}, ..., alpha_0+beta_0)`.
pub fn omega(shifts: &[ShiftPair], t: usize) -> CMat {
    let mut o = CMat::zeros(t, t);
    for i in 0..t {
        let s = &shifts[t - 1 - i];
        o[(i, i)] = s.alpha + s.beta;
    }
    o
}

/// `J_t = diag(1, -1, 1, ...)`.
pub fn alternating(t: usize) -> CMat {
    let mut j = CMat::zeros(t, t);
    for i in 0..t {
        j[(i, i)] = if i % 2 == 0 { ONE } else { -ONE };
    }
    j
}

/// Lower-triangular `P^{alpha,beta}_t`; `swap` gives `P^{beta,alpha}_t`.
pub fn p_matrix(shifts: &[ShiftPair], t: usize, swap: bool) -> CMat {
    let mut p = CMat::zeros(t, t);
    for j in 0..t {
        let s = &shifts[t - 1 - j];
        p[(j, j)] = if swap { s.beta } else { s.alpha };
        for i in j + 1..t {
            p[(i, j)] = s.alpha + s.beta;
        }
    }
    p
}

fn xy_of(shifts: &[ShiftPair], swap: bool) -> Vec<(C64, C64)> {
    shifts.iter().map(|s| if swap { (s.beta, s.alpha) } else { (s.alpha, s.beta) }).collect()
}

/// Scalar `V_t(lambda) = [over C_{t,0}; ...; over C_{t,t-1}]`.
pub fn scalar_v(shifts: &[ShiftPair], t: usize, lambda: C64, swap: bool) -> Result<CMat> {
    let xy = xy_of(shifts, swap);
    let mut v = CMat::zeros(t, 1);
    for j in 0..t {
        v[(j, 0)] = rational_xy(&xy, t, j, lambda, Variant::Over)?;
    }
    Ok(v)
}

/// Scalar lower-triangular `T_t(lambda)`.
pub fn scalar_t(shifts: &[ShiftPair], t: usize, lambda: C64, swap: bool) -> Result<CMat> {
    let xy = xy_of(shifts, swap);
    let mut m = CMat::zeros(t, t);
    for j in 0..t {
        for i in j..t {
            m[(i, j)] = if i == j {
                let (x, y) = xy[t - 1 - i];
                rational_xy(&xy, t - i, 0, lambda, Variant::Over)? / (x + y)
            } else {
                let (x, _) = xy[t - 1 - j];
                rational_xy(&xy, t - 1 - j, i - j - 1, lambda, Variant::Over)? / (x + lambda)
            };
        }
    }
    Ok(m)
}

/// Relative deviations of `V = T Omega J 1`, `J P J + lambda I = (T Omega)^{-1}`
/// (both shift orders, worst case) and `P Omega^{-1} + Omega^{-1} P'^T = 1 1^T`.
pub fn identity_deviations(shifts: &[ShiftPair], t: usize, lambda: C64) -> Result<[f64; 3]> {
    check_shifts(shifts, t)?;
    let ones = CMat::from_element(t, 1, ONE);
    let om = omega(shifts, t);
    let jm = alternating(t);
    let mut dev = [0.0f64; 3];
    for swap in [false, true] {
        let tm = scalar_t(shifts, t, lambda, swap)?;
        let v = scalar_v(shifts, t, lambda, swap)?;
        let rhs = &tm * &om * &jm * &ones;
        dev[0] = dev[0].max(dense::cnorm_fro(&(&v - rhs)) / (1.0 + dense::cnorm_fro(&v)));
        let lhs = &jm * p_matrix(shifts, t, swap) * &jm + eye(t) * lambda;
        let inv = dense::cinv(&(&tm * &om)).ok_or(Error::PoleHit)?;
        dev[1] = dev[1].max(dense::cnorm_fro(&(&lhs - &inv)) / (1.0 + dense::cnorm_fro(&inv)));
    }
    let oi = CMat::from_diagonal(&om.diagonal().map(|v| ONE / v));
    let lhs = p_matrix(shifts, t, false) * &oi + &oi * p_matrix(shifts, t, true).transpose();
    dev[2] = dense::cnorm_fro(&(lhs - CMat::from_element(t, t, ONE))) / t as f64;
    Ok(dev)
}

/// Per-shift resolvents `(x_l I + M)^{-1}` and Cayley factors of one side.
struct SideFunctions {
    res: Vec<CMat>,
    cay: Vec<CMat>,
}

impl SideFunctions {
    fn new(mmat: &CMat, xy: &[(C64, C64)], rname: &str) -> Result<Self> {
        let n = mmat.nrows();
        let mut res = Vec::with_capacity(xy.len());
        let mut cay = Vec::with_capacity(xy.len());
        for &(x, y) in xy {
            let r = named_inv(&shifted(mmat, x), rname)?;
            cay.push(&r * (eye(n) * y - mmat));
            res.push(r);
        }
        Ok(SideFunctions { res, cay })
    }

    fn plain(&self, i: usize, j: usize) -> CMat {
        let n = self.res.first().map(|r| r.nrows()).unwrap_or(0);
        let mut v = eye(n);
        for l in 1..=j {
            v = &self.cay[i - l] * v;
        }
        v
    }

    fn over(&self, i: usize, j: usize) -> CMat {
        self.plain(i, j) * &self.res[i - j - 1]
    }

    fn under(&self, i: usize, j: usize) -> CMat {
        self.plain(i, j) * &self.res[i]
    }

    /// Block `(i, j)`, `i >= j`, of `T_t` evaluated at the matrix.
    fn t_entry(&self, t: usize, i: usize, j: usize, w: &[C64]) -> CMat {
        if i == j {
            &self.res[t - 1 - i] / w[t - 1 - i]
        } else {
            self.over(t - 1 - j, i - j - 1) * &self.res[t - 1 - j]
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToeplitzFactors {
    pub ua: CMat,
    pub vd: CMat,
    pub ud: CMat,
    pub va: CMat,
    pub ta: CMat,
    pub td: CMat,
    pub omega: CMat,
    pub j: CMat,
    pub pab: CMat,
    pub pba: CMat,
    pub t: usize,
    pub shifts: Vec<ShiftPair>,
    /// `C^{beta,alpha}_{t,t}(A)` and `C^{alpha,beta}_{t,t}(D)`.
    pub ca_tt: CMat,
    pub cd_tt: CMat,
    /// 1-norm condition estimate of `I - TD*TA`.
    pub cond: f64,
    pub lb: CMat,
    pub rb: CMat,
}

pub fn toeplitz_factors(problem: &NareProblem, shifts: &[ShiftPair], t: usize) -> Result<ToeplitzFactors> {
    check_shifts(shifts, t)?;
    let fp = factored(problem)?;
    toeplitz_of(&fp, &shifts[..t])
}

fn toeplitz_of(fp: &Factored, shifts: &[ShiftPair]) -> Result<ToeplitzFactors> {
    let t = shifts.len();
    let (m, n, p, q) = (fp.m(), fp.n(), fp.p(), fp.q());
    for sh in shifts {
        coefficients_of(fp, sh)?;
    }
    let w: Vec<C64> = shifts.iter().map(|s| s.alpha + s.beta).collect();
    let dside = SideFunctions::new(&fp.d, &xy_of(shifts, false), "D_α")?;
    let aside = SideFunctions::new(&fp.a, &xy_of(shifts, true), "A_β")?;

    let mut ua = CMat::zeros(m, t * p);
    let mut vd = CMat::zeros(t * p, n);
    let mut ud = CMat::zeros(n, t * q);
    let mut va = CMat::zeros(t * q, m);
    let mut td = CMat::zeros(t * p, t * q);
    let mut ta = CMat::zeros(t * q, t * p);
    for j in 0..t {
        let k = t - 1 - j;
        ua.view_mut((0, j * p), (m, p)).copy_from(&(aside.over(t, j) * &fp.lb));
        vd.view_mut((j * p, 0), (p, n)).copy_from(&(&fp.rb * dside.over(t, j) * w[k]));
        ud.view_mut((0, j * q), (n, q)).copy_from(&(dside.under(k, k) * &fp.lc));
        va.view_mut((j * q, 0), (q, m)).copy_from(&(&fp.rc * aside.under(k, k) * w[k]));
    }
    for i in 0..t {
        for j in 0..=i {
            let blk = &fp.rb * dside.t_entry(t, i, j, &w) * &fp.lc * w[t - 1 - i];
            td.view_mut((i * p, j * q), (p, q)).copy_from(&blk);
        }
    }
    for r in 0..t {
        for cc in r..t {
            let blk = &fp.rc * aside.t_entry(t, cc, r, &w) * &fp.lb * w[t - 1 - r];
            ta.view_mut((r * q, cc * p), (q, p)).copy_from(&blk);
        }
    }
    let ca_tt = if t == 0 { eye(m) } else { aside.plain(t, t) };
    let cd_tt = if t == 0 { eye(n) } else { dside.plain(t, t) };
    let kmat = eye(t * p) - &td * &ta;
    let cond = match dense::cinv(&kmat) {
        Some(inv) => cnorm1(&kmat) * cnorm1(&inv),
        None => f64::INFINITY,
    };
    Ok(ToeplitzFactors {
        ua,
        vd,
        ud,
        va,
        ta,
        td,
        omega: omega(shifts, t),
        j: alternating(t),
        pab: p_matrix(shifts, t, false),
        pba: p_matrix(shifts, t, true),
        t,
        shifts: shifts.to_vec(),
        ca_tt,
        cd_tt,
        cond,
        lb: fp.lb.clone(),
        rb: fp.rb.clone(),
    })
}

fn solve_block(kmat: &CMat, rhs: &CMat, t: usize) -> Result<CMat> {
    if kmat.nrows() == 0 {
        return Ok(rhs.clone());
    }
    checked_inv(kmat).ok_or(Error::IterationBreakdown(t))?;
    dense::csolve(kmat, rhs).ok_or(Error::IterationBreakdown(t))
}

/// `X_t = [UA, C_{t,t}(A) GA] (I - [TD; GD UD][TA, VA GA])^{-1} [VD; GD C_{t,t}(D)]`.
pub fn closed_form_solution(
    problem: &NareProblem,
    shifts: &[ShiftPair],
    t: usize,
    x0: Option<(&Mat, &Mat)>,
) -> Result<CMat> {
    let tf = toeplitz_factors(problem, shifts, t)?;
    let (m, n) = (tf.ua.nrows(), tf.vd.ncols());
    let tp = tf.ua.ncols();
    let (left, right, mid) = match x0 {
        None => (tf.ua.clone(), tf.vd.clone(), eye(tp) - &tf.td * &tf.ta),
        Some((ga, gd)) => {
            let r = ga.ncols();
            if ga.nrows() != m || gd.ncols() != n || gd.nrows() != r {
                return Err(Error::Dimension("X0 factors must be m x r and r x n".into()));
            }
            let ga = to_complex(ga);
            let gd = to_complex(gd);
            let mut left = CMat::zeros(m, tp + r);
            left.view_mut((0, 0), (m, tp)).copy_from(&tf.ua);
            left.view_mut((0, tp), (m, r)).copy_from(&(&tf.ca_tt * &ga));
            let mut right = CMat::zeros(tp + r, n);
            right.view_mut((0, 0), (tp, n)).copy_from(&tf.vd);
            right.view_mut((tp, 0), (r, n)).copy_from(&(&gd * &tf.cd_tt));
            let tq = tf.ud.ncols();
            let mut lo = CMat::zeros(tp + r, tq);
            lo.view_mut((0, 0), (tp, tq)).copy_from(&tf.td);
            lo.view_mut((tp, 0), (r, tq)).copy_from(&(&gd * &tf.ud));
            let mut hi = CMat::zeros(tq, tp + r);
            hi.view_mut((0, 0), (tq, tp)).copy_from(&tf.ta);
            hi.view_mut((0, tp), (tq, r)).copy_from(&(&tf.va * &ga));
            (left, right, eye(tp + r) - lo * hi)
        }
    };
    let z = solve_block(&mid, &right, t)?;
    Ok(left * z)
}

/// Residual factors `(LB_t, RB_t)` of the zero-start iterate `X_t`.
pub fn residual_factors_closed(problem: &NareProblem, shifts: &[ShiftPair], t: usize) -> Result<(CMat, CMat)> {
    let tf = toeplitz_factors(problem, shifts, t)?;
    if t == 0 {
        return Ok((tf.lb, tf.rb));
    }
    let p = tf.lb.ncols();
    let mut ojp = CMat::zeros(t * p, p);
    let mut jp = CMat::zeros(p, t * p);
    for i in 0..t {
        let sign = tf.j[(i, i)];
        for k in 0..p {
            ojp[(i * p + k, k)] = tf.omega[(i, i)] * sign;
            jp[(k, i * p + k)] = sign;
        }
    }
    let kmat = eye(t * p) - &tf.td * &tf.ta;
    let lbt = &tf.lb - &tf.ua * solve_block(&kmat, &ojp, t)?;
    let rbt = &tf.rb - jp * solve_block(&kmat, &tf.vd, t)?;
    Ok((lbt, rbt))
}

#[derive(Debug, Clone)]
pub struct StabilizingPair {
    pub x_star: Mat,
    /// `None` when the anti-stable basis has a singular lower block.
    pub y_star: Option<Mat>,
    pub r: CMat,
    pub s: Option<CMat>,
    pub spec_radius_product: Option<f64>,
    pub classification: Classification,
}

fn spectral_radius(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let (vals, _) = dense::eig(a)?;
    Ok(vals.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// Stabilizing solution via the ordered complex Schur form of the
/// Hamiltonian; `R`, `S` use the reference shift.
pub fn schur_stabilizing_solution(problem: &NareProblem, reference: &ShiftPair) -> Result<StabilizingPair> {
    let dn = problem.to_dense_plain()?;
    let (m, n) = (dn.a.nrows(), dn.d.nrows());
    let h = to_complex(&crate::problem::hamiltonian_of(&dn, None));
    let band = 1e-10 * h.norm().max(f64::MIN_POSITIVE);
    let (t0, q0) = dense::schur(&h)?;
    let diag: Vec<C64> = (0..n + m).map(|k| t0[(k, k)]).collect();
    if diag.iter().any(|z| z.re.abs() <= band) {
        return Err(Error::NoSplitting);
    }
    if diag.iter().filter(|z| z.re < 0.0).count() != n {
        return Err(Error::NoSplitting);
    }

    let (mut t1, mut q1) = (t0.clone(), q0.clone());
    dense::reorder_schur(&mut t1, &mut q1, &|z: C64| z.re < 0.0);
    let z1 = q1.view((0, 0), (n, n)).into_owned();
    let z2 = q1.view((n, 0), (m, n)).into_owned();
    checked_inv(&z1).ok_or(Error::SingularBasis)?;
    let x = dense::csolve_right(&z2, &z1).ok_or(Error::SingularBasis)?;

    let (mut t2, mut q2) = (t0, q0);
    dense::reorder_schur(&mut t2, &mut q2, &|z: C64| z.re > 0.0);
    let w1 = q2.view((0, 0), (n, m)).into_owned();
    let w2 = q2.view((n, 0), (m, m)).into_owned();
    let y_star = checked_inv(&w2).and_then(|_| dense::csolve_right(&w1, &w2)).map(|y| dense::re(&y));

    let x_star = dense::re(&x);
    let dcx = to_complex(&(&dn.d - &dn.c * &x_star));
    let r = -cayley(&dcx, reference.alpha, reference.beta)?;
    let s = match &y_star {
        Some(y) => Some(-cayley(&to_complex(&(&dn.a - &dn.b * y)), reference.beta, reference.alpha)?),
        None => None,
    };
    let spec_radius_product = match &s {
        Some(s) => Some(spectral_radius(&r)? * spectral_radius(s)?),
        None => None,
    };
    let classification = problem.classify(&x_star)?.classification;
    Ok(StabilizingPair { x_star, y_star, r, s, spec_radius_product, classification })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::NareProblem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(a: f64, d: f64, b: f64, cc: f64) -> NareProblem {
        NareProblem::dense(
            Mat::from_element(1, 1, a),
            Mat::from_element(1, 1, d),
            Mat::from_element(1, 1, b),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, cc),
            Mat::from_element(1, 1, 1.0),
        )
        .unwrap()
    }

    fn random_problem(seed: u64, m: usize, n: usize, p: usize, q: usize) -> NareProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = |r: usize, c: usize, s: f64| Mat::from_fn(r, c, |_, _| s * (rng.random::<f64>() - 0.5));
        let mut a = g(m, m, 0.6);
        let mut d = g(n, n, 0.6);
        for i in 0..m {
            a[(i, i)] += 3.0;
        }
        for i in 0..n {
            d[(i, i)] -= 3.0;
        }
        NareProblem::dense(a, d, g(m, p, 1.0), g(p, n, 1.0), g(n, q, 1.0), g(q, m, 1.0)).unwrap()
    }

    fn near(a: C64, b: f64, tol: f64) -> bool {
        (a - c(b)).norm() <= tol
    }

    #[test]
    fn cayley_examples() {
        let z = cayley(&CMat::zeros(1, 1), ONE, ONE).unwrap();
        assert!(near(z[(0, 0)], 1.0, 1e-15));
        let i3 = cayley(&eye(3), c(1.0), c(3.0)).unwrap();
        assert!((i3 - eye(3)).norm() < 1e-15);
        let mm = to_complex(&Mat::from_row_slice(2, 2, &[2.0, -1.0, 1.0, -2.0]));
        let cm = cayley(&mm, c(-0.5), c(-0.5)).unwrap();
        let (vals, _) = dense::eig(&cm).unwrap();
        let mut mods: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
        mods.sort_by(f64::total_cmp);
        let r3 = 3f64.sqrt();
        let lo = ((-0.5 + r3) / (-r3 - 0.5)).abs();
        let hi = ((-0.5 - r3) / (r3 - 0.5)).abs();
        assert!((mods[0] - lo).abs() < 1e-12 && (mods[1] - hi).abs() < 1e-12);
        assert!((mods[0] * mods[1] - 1.0).abs() < 1e-12);
        assert!(matches!(cayley(&eye(1), c(-1.0), ONE), Err(Error::SingularShift(_))));
    }

    #[test]
    fn coefficient_examples() {
        let p = scalar(2.0, 2.0, 1.0, 1.0);
        let cc = cayley_coefficients(&p, &ShiftPair::real(1.0, 1.0)).unwrap();
        for (v, want) in [(&cc.e0, -0.25), (&cc.f0, -0.25), (&cc.g0, 0.25), (&cc.h0, 0.25)] {
            assert!(near(v[(0, 0)], want, 1e-15));
        }
        let cc = cayley_coefficients(&p, &ShiftPair::real(-0.5, -0.5)).unwrap();
        for (v, want) in [(&cc.e0, -2.2), (&cc.f0, -2.2), (&cc.g0, -0.8), (&cc.h0, -0.8)] {
            assert!(near(v[(0, 0)], want, 1e-14));
        }
        match cayley_coefficients(&p, &ShiftPair::real(-1.0, -1.0)) {
            Err(Error::AssumptionViolated(name)) => assert_eq!(name, "A_β−BD_α^{-1}C"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn low_rank_forms_match_direct() {
        let p = random_problem(1, 5, 4, 2, 3);
        for sh in [ShiftPair::real(1.5, 2.0), ShiftPair::user(C64::new(1.0, 0.5), C64::new(2.0, -0.3))] {
            let cc = cayley_coefficients(&p, &sh).unwrap();
            let (e, f, g, h) = cc.low_rank_forms().unwrap();
            for (x, y) in [(&e, &cc.e0), (&f, &cc.f0), (&g, &cc.g0), (&h, &cc.h0)] {
                assert!(dense::cnorm_fro(&(x - y)) <= 1e-12 * (1.0 + dense::cnorm_fro(y)));
            }
        }
    }

    #[test]
    fn fixed_point_examples() {
        let p = scalar(2.0, 2.0, 1.0, 1.0);
        let xs = fixed_point_run(&p, &[ShiftPair::real(1.0, 1.0); 3], 3, None).unwrap();
        for (x, want) in xs.iter().zip([0.25, 4.0 / 15.0, 15.0 / 56.0]) {
            assert!(near(x[(0, 0)], want, 1e-15));
        }
        let xs = fixed_point_run(&p, &[ShiftPair::real(-0.5, -0.5); 2], 2, None).unwrap();
        assert!(near(xs[0][(0, 0)], -0.8, 1e-14));
        let want = -0.8 + (-2.2) * (-0.8) / (1.0 - 0.64) * (-2.2);
        assert!(near(xs[1][(0, 0)], want, 1e-12));
        let xstar = 2.0 + 3f64.sqrt();
        let ga = Mat::from_element(1, 1, xstar);
        let gd = Mat::from_element(1, 1, 1.0);
        let xs = fixed_point_run(&p, &[ShiftPair::real(-0.5, -0.5); 4], 4, Some((&ga, &gd))).unwrap();
        for x in xs {
            assert!(near(x[(0, 0)], xstar, 1e-12));
        }
    }

    #[test]
    fn toeplitz_examples() {
        let p = scalar(2.0, 2.0, 1.0, 1.0);
        let sh = [ShiftPair::real(1.0, 1.0); 2];
        let tf = toeplitz_factors(&p, &sh, 1).unwrap();
        assert!(near(tf.ua[(0, 0)], 1.0 / 3.0, 1e-15));
        assert!(near(tf.vd[(0, 0)], 2.0 / 3.0, 1e-15));
        assert!(near(tf.ta[(0, 0)], 1.0 / 3.0, 1e-15));
        assert!(near(tf.td[(0, 0)], 1.0 / 3.0, 1e-15));
        let tf = toeplitz_factors(&p, &sh, 2).unwrap();
        assert!(near(tf.ua[(0, 0)], 1.0 / 3.0, 1e-15));
        assert!(near(tf.ua[(0, 1)], -1.0 / 9.0, 1e-15));
        let sh2 = [ShiftPair::real(1.0, 1.0), ShiftPair::real(2.0, 3.0)];
        let o = omega(&sh2, 2);
        assert_eq!((o[(0, 0)], o[(1, 1)], o[(0, 1)]), (c(5.0), c(2.0), ZERO));
        let j = alternating(2);
        assert_eq!((j[(0, 0)], j[(1, 1)]), (ONE, -ONE));
    }

    #[test]
    fn toeplitz_nesting_for_constant_shifts() {
        let p = random_problem(3, 4, 3, 2, 2);
        let sh = [ShiftPair::real(1.5, 2.5); 4];
        let a = toeplitz_factors(&p, &sh, 3).unwrap();
        let b = toeplitz_factors(&p, &sh, 4).unwrap();
        let (tp, tq) = (a.td.nrows(), a.td.ncols());
        assert!(dense::cnorm_fro(&(b.td.view((0, 0), (tp, tq)) - &a.td)) < 1e-13);
        assert!(dense::cnorm_fro(&(b.ta.view((0, 0), (tq, tp)) - &a.ta)) < 1e-13);
    }

    #[test]
    fn closed_form_matches_iterate() {
        let p = scalar(2.0, 2.0, 1.0, 1.0);
        let sh = [ShiftPair::real(1.0, 1.0); 2];
        let x2 = closed_form_solution(&p, &sh, 2, None).unwrap();
        assert!(near(x2[(0, 0)], 4.0 / 15.0, 1e-15));
        let x1 = closed_form_solution(&p, &sh, 1, None).unwrap();
        let h0 = cayley_coefficients(&p, &sh[0]).unwrap().h0;
        assert!((x1 - h0).norm() < 1e-16);

        let p = random_problem(7, 4, 3, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ga = Mat::from_fn(4, 2, |_, _| 0.3 * (rng.random::<f64>() - 0.5));
        let gd = Mat::from_fn(2, 3, |_, _| 0.3 * (rng.random::<f64>() - 0.5));
        let sh = [
            ShiftPair::real(2.0, 3.0),
            ShiftPair::user(C64::new(2.5, 1.0), C64::new(3.0, -0.5)),
            ShiftPair::real(1.5, 4.0),
        ];
        let it = fixed_point_run(&p, &sh, 3, Some((&ga, &gd))).unwrap();
        let cf = closed_form_solution(&p, &sh, 3, Some((&ga, &gd))).unwrap();
        assert!(dense::cnorm_fro(&(&cf - &it[2])) <= 1e-12 * (1.0 + dense::cnorm_fro(&it[2])));
    }

    #[test]
    fn residual_factor_closed_form() {
        let p = scalar(2.0, 2.0, 1.0, 1.0);
        let sh = [ShiftPair::real(1.0, 1.0)];
        let (l, r) = residual_factors_closed(&p, &sh, 1).unwrap();
        assert!(near(l[(0, 0)], 0.25, 1e-15) && near(r[(0, 0)], 0.25, 1e-15));
        let (l0, r0) = residual_factors_closed(&p, &sh, 0).unwrap();
        assert!(near(l0[(0, 0)], 1.0, 0.0) && near(r0[(0, 0)], 1.0, 0.0));

        let p = random_problem(11, 5, 4, 2, 2);
        let sh = [ShiftPair::real(2.0, 3.0), ShiftPair::real(3.5, 2.5)];
        let (l, r) = residual_factors_closed(&p, &sh, 2).unwrap();
        let x = closed_form_solution(&p, &sh, 2, None).unwrap();
        let (res, nrm) = p.residual_dense(&dense::re(&x)).unwrap();
        assert!(dense::cnorm_fro(&(l * r - to_complex(&res))) <= 1e-12 * nrm);
    }

    #[test]
    fn rational_examples() {
        let sh = [ShiftPair::real(1.0, 2.0), ShiftPair::real(3.0, 4.0)];
        assert_eq!(rational_value(&sh, 1, 0, C64::new(0.3, 0.1), Variant::Plain).unwrap(), ONE);
        let one = [ShiftPair::real(1.0, 1.0)];
        assert_eq!(rational_value(&one, 1, 1, ZERO, Variant::Plain).unwrap(), ONE);
        let l = C64::new(0.0, 1.0);
        let want = (c(2.0) - l) / (l + 1.0) * (c(4.0) - l) / (l + 3.0);
        assert!((rational_value(&sh, 2, 2, l, Variant::Plain).unwrap() - want).norm() < 1e-15);
        assert!(matches!(rational_value(&one, 0, 0, -ONE, Variant::Under), Err(Error::PoleHit)));
    }

    #[test]
    fn scalar_identity_suite() {
        let sh = [
            ShiftPair::user(C64::new(1.0, 0.5), C64::new(2.0, -0.5)),
            ShiftPair::real(0.5, 1.5),
            ShiftPair::real(2.0, 3.0),
            ShiftPair::user(C64::new(0.7, -0.2), C64::new(1.1, 0.4)),
        ];
        let t = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ones = CMat::from_element(t, 1, ONE);
        for _ in 0..20 {
            let lam = C64::new(4.0 * rng.random::<f64>() - 2.0, 4.0 * rng.random::<f64>() - 2.0);
            for swap in [false, true] {
                let tm = scalar_t(&sh, t, lam, swap).unwrap();
                let v = scalar_v(&sh, t, lam, swap).unwrap();
                let om = omega(&sh, t);
                let jm = alternating(t);
                let rhs = &tm * &om * &jm * &ones;
                assert!(dense::cnorm_fro(&(&v - rhs)) <= 1e-12 * (1.0 + dense::cnorm_fro(&v)));
                let pm = p_matrix(&sh, t, swap);
                let lhs = &jm * pm * &jm + eye(t) * lam;
                let inv = dense::cinv(&(&tm * &om)).unwrap();
                assert!(dense::cnorm_fro(&(&lhs - &inv)) <= 1e-12 * (1.0 + dense::cnorm_fro(&inv)));
            }
        }
        let dy = [ShiftPair::real(1.0, 3.0), ShiftPair::real(0.5, 1.5), ShiftPair::real(2.0, 2.0)];
        let om = omega(&dy, 3);
        let oi = CMat::from_diagonal(&om.diagonal().map(|v| ONE / v));
        let lhs = p_matrix(&dy, 3, false) * &oi + &oi * p_matrix(&dy, 3, true).transpose();
        assert_eq!(lhs, CMat::from_element(3, 3, ONE));
    }

    #[test]
    fn schur_scalar_examples() {
        let p = scalar(2.0, 2.0, 1.0, 1.0);
        let sp = schur_stabilizing_solution(&p, &ShiftPair::real(1.0, 1.0)).unwrap();
        let r3 = 2.0 + 3f64.sqrt();
        assert!((sp.x_star[(0, 0)] - r3).abs() < 1e-12);
        assert!((sp.y_star.unwrap()[(0, 0)] - r3).abs() < 1e-12);
        assert_eq!(sp.classification, Classification::Stabilizing);

        let p = scalar(2.0, 2.0, 0.0, 1.0);
        let sp = schur_stabilizing_solution(&p, &ShiftPair::real(1.0, 1.0)).unwrap();
        assert!((sp.x_star[(0, 0)] - 4.0).abs() < 1e-12);
        let (_, nrm) = p.residual_dense(&sp.x_star).unwrap();
        assert!(nrm < 1e-12);
        assert!(sp.y_star.is_none());

        let p = scalar(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(schur_stabilizing_solution(&p, &ShiftPair::real(1.0, 1.0)), Err(Error::NoSplitting)));
    }

    #[test]
    fn error_formula_and_rate() {
        let p = scalar(2.0, 2.0, 1.0, 1.0);
        let sh = ShiftPair::real(-0.5, -0.5);
        let sp = schur_stabilizing_solution(&p, &sh).unwrap();
        let xs = fixed_point_run(&p, &[sh; 20], 20, None).unwrap();
        let xstar = to_complex(&sp.x_star);
        let ystar = to_complex(sp.y_star.as_ref().unwrap());
        let s = sp.s.clone().unwrap();
        let rho = sp.spec_radius_product.unwrap();
        assert!((rho - 0.3047).abs() < 1e-3, "{rho}");
        for t in 1..=10 {
            let xt = &xs[t - 1];
            let st = s.pow(t as u32);
            let rt = sp.r.pow(t as u32);
            let pred = &xstar - (eye(1) - xt * &ystar) * st * &xstar * rt;
            assert!(dense::cnorm_fro(&(xt - pred)) <= 1e-8 * dense::cnorm_fro(&xstar));
        }
        let rate = (dense::cnorm_fro(&(&xs[19] - &xstar)) / dense::cnorm_fro(&xstar)).powf(1.0 / 20.0);
        assert!(rate <= rho + 0.05, "{rate} vs {rho}");
    }
}
