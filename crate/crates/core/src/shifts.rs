//! Shift pairs, projected-Hamiltonian spectra, generalized Leja and
//! residual-Hamiltonian shift generation, queue policy and diagnostics.

use std::collections::VecDeque;

use crate::dense;
use crate::error::{Error, Result};
use crate::oracle::{rational_value, Variant};
use crate::problem::NareProblem;
use crate::radi::RadiState;
use crate::{Mat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Leja,
    Hamiltonian,
    User,
    ConjugatePartner,
}

/// One `(alpha, beta)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPair {
    pub alpha: C64,
    pub beta: C64,
    pub is_real: bool,
    pub origin: Origin,
}

pub fn pair_tol(alpha: C64, beta: C64) -> f64 {
    1e-12 * (1.0 + alpha.norm() + beta.norm())
}

impl ShiftPair {
    pub fn new(alpha: C64, beta: C64, origin: Origin) -> Self {
        let tol = 1e-14 * (1.0 + alpha.norm() + beta.norm());
        let is_real = alpha.im.abs() <= tol && beta.im.abs() <= tol;
        ShiftPair { alpha, beta, is_real, origin }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        Self::new(C64::new(alpha, 0.0), C64::new(beta, 0.0), Origin::User)
    }

    pub fn user(alpha: C64, beta: C64) -> Self {
        Self::new(alpha, beta, Origin::User)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.alpha.conj(), self.beta.conj(), Origin::ConjugatePartner)
    }

    /// `|alpha + beta|` is safely away from zero.
    pub fn admissible(&self) -> bool {
        (self.alpha + self.beta).norm() > pair_tol(self.alpha, self.beta)
    }

    /// `C(lambda) = (beta - lambda) / (lambda + alpha)`.
    pub fn cayley(&self, lambda: C64) -> C64 {
        (self.beta - lambda) / (lambda + self.alpha)
    }

    /// Real-valued copy with imaginary parts dropped.
    pub fn realified(&self) -> Self {
        ShiftPair {
            alpha: C64::new(self.alpha.re, 0.0),
            beta: C64::new(self.beta.re, 0.0),
            is_real: true,
            origin: self.origin,
        }
    }

    /// Conjugate of `other` to within the pair tolerance.
    pub fn is_conj_of(&self, other: &ShiftPair) -> bool {
        let tol = pair_tol(self.alpha, self.beta);
        (self.alpha - other.alpha.conj()).norm() <= tol && (self.beta - other.beta.conj()).norm() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    Leja,
    Hamiltonian,
    /// Cycles through a fixed list.
    Fixed(Vec<ShiftPair>),
}

/// Which spectral class feeds the poles `-alpha` and which the zeros `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Zeros on the stable set, poles on the anti-stable set.
    Consistent,
    /// Leja: argmax on the anti-stable set for `-conj(alpha)`, argmin on the
    /// stable set for `beta`. Hamiltonian: stable set feeds `-alpha`.
    PaperLiteral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftStrategy {
    pub kind: StrategyKind,
    pub s: usize,
    /// Shifts consumed per projection; `None` means every generated pair.
    pub s_prime: Option<usize>,
    pub recompute: bool,
    pub orientation: Orientation,
}

impl Default for ShiftStrategy {
    fn default() -> Self {
        ShiftStrategy { kind: StrategyKind::Leja, s: 1, s_prime: None, recompute: false, orientation: Orientation::Consistent }
    }
}

impl ShiftStrategy {
    pub fn leja(s: usize, recompute: bool) -> Self {
        ShiftStrategy { kind: StrategyKind::Leja, s, s_prime: None, recompute, ..Default::default() }
    }

    pub fn hamiltonian(s: usize, recompute: bool) -> Self {
        ShiftStrategy { kind: StrategyKind::Hamiltonian, s, s_prime: None, recompute, ..Default::default() }
    }

    pub fn fixed(shifts: Vec<ShiftPair>) -> Self {
        ShiftStrategy { kind: StrategyKind::Fixed(shifts), ..Default::default() }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Table label, e.g. `leja c 2`.
    pub fn label(&self) -> String {
        let k = match self.kind {
            StrategyKind::Leja => "leja",
            StrategyKind::Hamiltonian => "hami",
            StrategyKind::Fixed(_) => "fixed",
        };
        if self.recompute {
            format!("{k} c {}", self.s)
        } else {
            format!("{k} {}", self.s)
        }
    }

    /// The twelve-strategy grid in table order.
    pub fn grid() -> Vec<ShiftStrategy> {
        let mut v = Vec::new();
        for hami in [false, true] {
            for recompute in [false, true] {
                for s in [1, 2, 5] {
                    v.push(if hami { Self::hamiltonian(s, recompute) } else { Self::leja(s, recompute) });
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionBasis {
    pub pi_l: Mat,
    pub pi_r: Mat,
    pub age: usize,
    /// Window length actually used after shrinking.
    pub s_used: usize,
}

const DROP_TOL: f64 = 1e-12;
const AXIS_TOL: f64 = 1e-10;

fn hcat(blocks: &[&Mat]) -> Mat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Orthonormal bases of the last `s` window blocks; errors when the window
/// is rank deficient.
pub fn window_basis(window: &VecDeque<(Mat, Mat)>, s: usize) -> Result<(Mat, Mat)> {
    let take = s.min(window.len());
    let blocks: Vec<&(Mat, Mat)> = window.iter().rev().take(take).collect();
    let ls: Vec<&Mat> = blocks.iter().map(|b| &b.0).collect();
    let rs: Vec<Mat> = blocks.iter().map(|b| b.1.transpose()).collect();
    let rrefs: Vec<&Mat> = rs.iter().collect();
    let lcat = hcat(&ls);
    let rcat = hcat(&rrefs);
    let pl = dense::orth_columns(&lcat, DROP_TOL);
    let pr = dense::orth_columns(&rcat, DROP_TOL);
    if take > 1 && (pl.ncols() < lcat.ncols() || pr.ncols() < rcat.ncols()) {
        return Err(Error::RankDeficientWindow);
    }
    Ok((pl, pr.transpose()))
}

/// Projected Hamiltonian of the current residual equation and its bases.
pub fn project_hamiltonian(problem: &NareProblem, state: &RadiState, s: usize) -> Result<(Mat, ProjectionBasis)> {
    let (pi_l, pi_r, s_used) = if state.window.is_empty() {
        let pl = dense::orth_columns(&state.lb, DROP_TOL);
        let pr = dense::orth_columns(&state.rb.transpose(), DROP_TOL).transpose();
        (pl, pr, 0)
    } else {
        let mut s_try = s.max(1);
        loop {
            match window_basis(&state.window, s_try) {
                Ok((pl, pr)) => break (pl, pr, s_try.min(state.window.len())),
                Err(Error::RankDeficientWindow) if s_try > 1 => s_try -= 1,
                Err(e) => return Err(e),
            }
        }
    };
    let h = projected_matrix(problem, state, &pi_l, &pi_r)?;
    Ok((h, ProjectionBasis { pi_l, pi_r, age: 0, s_used }))
}

/// `[[PR Dk PR^T, -(PR LC)(RC PL)], [PL^T LB RB PR^T, -PL^T Ak PL]]`,
/// premultiplied by the inverse projected masses when present.
pub fn projected_matrix(problem: &NareProblem, state: &RadiState, pi_l: &Mat, pi_r: &Mat) -> Result<Mat> {
    let r = pi_r.nrows();
    let l = pi_l.ncols();
    let prt = pi_r.transpose();

    // Dk PR^T = D' PR^T - LC (RPhi PR^T) - LD (RD PR^T)
    let mut dk = problem.d.apply(&prt);
    dk -= &problem.lc * (&state.rphi * &prt);
    if let (Some(ld), Some(rd)) = (&problem.ld, &problem.rd) {
        dk -= ld * (rd * &prt);
    }
    let tl = pi_r * dk;

    let mut ak = problem.a.apply(pi_l);
    ak -= &state.lphi * (&problem.rc * pi_l);
    if let (Some(la), Some(ra)) = (&problem.la, &problem.ra) {
        ak -= la * (ra * pi_l);
    }
    let br = -(pi_l.transpose() * ak);
    let tr = -((pi_r * &problem.lc) * (&problem.rc * pi_l));
    let bl = (pi_l.transpose() * &state.lb) * (&state.rb * &prt);

    let mut h = Mat::zeros(r + l, r + l);
    h.view_mut((0, 0), (r, r)).copy_from(&tl);
    h.view_mut((0, r), (r, l)).copy_from(&tr);
    h.view_mut((r, 0), (l, r)).copy_from(&bl);
    h.view_mut((r, r), (l, l)).copy_from(&br);

    if let Some(nn) = &problem.mass_n {
        let nr = pi_r * nn.apply(&prt);
        let top = h.rows(0, r).into_owned();
        let solved = dense::solve(&nr, &top).ok_or(Error::SingularBasis)?;
        h.rows_mut(0, r).copy_from(&solved);
    }
    if let Some(mm) = &problem.mass_m {
        let ml = pi_l.transpose() * mm.apply(pi_l);
        let bot = h.rows(r, l).into_owned();
        let solved = dense::solve(&ml, &bot).ok_or(Error::SingularBasis)?;
        h.rows_mut(r, l).copy_from(&solved);
    }
    Ok(h)
}

/// Eigenvalue with the norm of the trailing (`A`-side) eigenvector part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenInfo {
    pub lambda: C64,
    pub q_norm: f64,
}

/// Eigenpairs of a projected matrix whose leading `r` rows belong to the
/// `D` side; eigenvectors are normalized to unit length.
pub fn projected_eigen(h: &Mat, r: usize) -> Result<Vec<EigenInfo>> {
    let (vals, vecs) = dense::eig_real(h)?;
    let n = h.nrows();
    Ok(vals
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let col = vecs.column(k);
            let tot = col.norm().max(f64::MIN_POSITIVE);
            let q: f64 = (r..n).map(|i| col[i].norm_sqr()).sum::<f64>().sqrt();
            EigenInfo { lambda, q_norm: q / tot }
        })
        .collect())
}

/// Splits eigenvalues into the open left half-plane and the rest; a band
/// of width `1e-10` around the axis counts as anti-stable.
pub fn split(values: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let band = AXIS_TOL * scale;
    let mut stable = Vec::new();
    let mut anti = Vec::new();
    for &z in values {
        if z.re < -band {
            stable.push(z);
        } else {
            anti.push(z);
        }
    }
    (stable, anti)
}

fn by_re_im(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn dedup(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(by_re_im);
    let mut out: Vec<C64> = Vec::with_capacity(v.len());
    for z in v {
        if !out.iter().any(|w| (z - w).norm() <= 1e-12 * (1.0 + z.norm())) {
            out.push(z);
        }
    }
    out
}

/// Fills in missing conjugate partners so that every nonreal pair is
/// immediately followed by its conjugate.
pub fn close_under_conjugation(pairs: Vec<ShiftPair>) -> Vec<ShiftPair> {
    let mut out: Vec<ShiftPair> = Vec::with_capacity(pairs.len() + 2);
    let mut i = 0;
    while i < pairs.len() {
        let p = pairs[i];
        out.push(p);
        if !p.is_real {
            if i + 1 < pairs.len() && pairs[i + 1].is_conj_of(&p) {
                out.push(pairs[i + 1]);
                i += 1;
            } else {
                out.push(p.conj());
            }
        }
        i += 1;
    }
    out
}

/// `log |prod_l (beta_l - z)/(z + alpha_l)|`, with `+-inf` at poles and zeros.
fn log_abs_rational(pairs: &[ShiftPair], z: C64) -> f64 {
    let mut acc = 0.0;
    for p in pairs {
        let num = (p.beta - z).norm();
        let den = (z + p.alpha).norm();
        if den == 0.0 && num == 0.0 {
            continue;
        }
        acc += num.ln() - den.ln();
    }
    acc
}

fn argbest(set: &[C64], pairs: &[ShiftPair], maximize: bool) -> C64 {
    let mut best = 0;
    let mut best_v = log_abs_rational(pairs, set[0]);
    for (k, &z) in set.iter().enumerate().skip(1) {
        let v = log_abs_rational(pairs, z);
        let better = if maximize { v > best_v } else { v < best_v };
        if better {
            best = k;
            best_v = v;
        }
    }
    set[best]
}

/// Greedy generalized Leja pairs; the returned list may exceed `count` by
/// one to keep a trailing conjugate pair intact.
pub fn leja_generate(stable: &[C64], anti: &[C64], count: usize, orientation: Orientation) -> Result<Vec<ShiftPair>> {
    if stable.is_empty() || anti.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let st = dedup(stable.to_vec());
    let an = dedup(anti.to_vec());
    let mut pairs: Vec<ShiftPair> = Vec::with_capacity(count + 1);
    let mk = |a: C64, s: C64| ShiftPair::new(-a.conj(), s, crate::shifts::Origin::Leja);

    let mut best = (0, 0);
    let mut best_d = f64::INFINITY;
    for (i, &a) in an.iter().enumerate() {
        for (j, &s) in st.iter().enumerate() {
            let d = (a - s).norm();
            if d < best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    let push = |pairs: &mut Vec<ShiftPair>, p: ShiftPair| {
        pairs.push(p);
        if !p.is_real {
            pairs.push(p.conj());
        }
    };
    push(&mut pairs, mk(an[best.0], st[best.1]));
    while pairs.len() < count {
        let (a, s) = match orientation {
            Orientation::Consistent => (argbest(&an, &pairs, false), argbest(&st, &pairs, true)),
            Orientation::PaperLiteral => (argbest(&an, &pairs, true), argbest(&st, &pairs, false)),
        };
        push(&mut pairs, mk(a, s));
    }
    Ok(pairs)
}

/// Residual-Hamiltonian shifts from projected eigenpairs.
pub fn hamiltonian_shifts(eigs: &[EigenInfo], orientation: Orientation) -> Result<Vec<ShiftPair>> {
    let vals: Vec<C64> = eigs.iter().map(|e| e.lambda).collect();
    let (st, an) = split(&vals);
    if st.is_empty() || an.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let class = |set: &[C64], decreasing: bool| -> Vec<C64> {
        let mut v: Vec<EigenInfo> = eigs.iter().filter(|e| set.contains(&e.lambda)).copied().collect();
        v.sort_by(|x, y| {
            let o = x.q_norm.total_cmp(&y.q_norm);
            let o = if decreasing { o.reverse() } else { o };
            o.then(by_re_im(&x.lambda, &y.lambda))
        });
        v.into_iter().map(|e| e.lambda).collect()
    };
    let (poles, zeros) = match orientation {
        Orientation::Consistent => (class(&an, true), class(&st, false)),
        Orientation::PaperLiteral => (class(&st, true), class(&an, false)),
    };
    let pairs: Vec<ShiftPair> =
        poles.iter().zip(zeros.iter()).map(|(&z, &b)| ShiftPair::new(-z, b, Origin::Hamiltonian)).collect();
    Ok(close_under_conjugation(pairs))
}

/// Replaces an empty spectral class by the reflection `-conj` of the other.
pub fn fill_empty_class(stable: Vec<C64>, anti: Vec<C64>) -> (Vec<C64>, Vec<C64>) {
    match (stable.is_empty(), anti.is_empty()) {
        (true, false) => (anti.iter().map(|z| -z.conj()).collect(), anti),
        (false, true) => {
            let a = stable.iter().map(|z| -z.conj()).collect();
            (stable, a)
        }
        _ => (stable, anti),
    }
}

/// Generates shifts for `kind` from the current state.
pub fn generate(problem: &NareProblem, state: &RadiState, strategy: &ShiftStrategy) -> Result<Vec<ShiftPair>> {
    let (h, basis) = project_hamiltonian(problem, state, strategy.s)?;
    let r = basis.pi_r.nrows();
    let eigs = projected_eigen(&h, r)?;
    match &strategy.kind {
        StrategyKind::Leja => {
            let vals: Vec<C64> = eigs.iter().map(|e| e.lambda).collect();
            let (st, an) = split(&vals);
            let (st, an) = fill_empty_class(st, an);
            let count = (strategy.s.max(1) * state.lb.ncols().max(1)).max(1);
            leja_generate(&st, &an, count, strategy.orientation)
        }
        StrategyKind::Hamiltonian => match hamiltonian_shifts(&eigs, strategy.orientation) {
            Err(Error::EmptyCandidates) => {
                let vals: Vec<C64> = eigs.iter().map(|e| e.lambda).collect();
                let (st, an) = split(&vals);
                let (st, an) = fill_empty_class(st, an);
                let mut reflected: Vec<EigenInfo> = Vec::new();
                for z in st.iter().chain(an.iter()) {
                    let q = eigs
                        .iter()
                        .find(|e| e.lambda == *z || e.lambda == -z.conj())
                        .map_or(0.0, |e| e.q_norm);
                    reflected.push(EigenInfo { lambda: *z, q_norm: q });
                }
                hamiltonian_shifts(&reflected, strategy.orientation)
            }
            other => other,
        },
        StrategyKind::Fixed(list) => {
            if list.is_empty() {
                Err(Error::EmptyCandidates)
            } else {
                Ok(close_under_conjugation(list.clone()))
            }
        }
    }
}

/// Pending shifts and the per-projection consumption budget.
#[derive(Debug, Clone, Default)]
pub struct ShiftQueue {
    pub pending: VecDeque<ShiftPair>,
    pub consumed: usize,
    pub budget: usize,
    pub generations: usize,
}

impl ShiftQueue {
    pub fn new() -> Self {
        Self::default()
    }

    fn refill(&mut self, list: Vec<ShiftPair>, s_prime: Option<usize>) {
        self.budget = s_prime.unwrap_or(list.len()).max(1);
        self.pending = list.into();
        self.consumed = 0;
        self.generations += 1;
    }

    /// Next admissible shift that passes `probe`. A nonreal result has its
    /// conjugate partner removed from the queue, since both are consumed
    /// by one double step.
    pub fn next_shift(
        &mut self,
        strategy: &ShiftStrategy,
        generate: &mut dyn FnMut() -> Result<Vec<ShiftPair>>,
        probe: &mut dyn FnMut(&ShiftPair) -> Result<()>,
    ) -> Result<ShiftPair> {
        let fixed = matches!(strategy.kind, StrategyKind::Fixed(_));
        let s_prime = if fixed {
            None
        } else if strategy.recompute {
            Some(1)
        } else {
            strategy.s_prime
        };
        if self.pending.is_empty() || self.consumed >= self.budget || (strategy.recompute && !fixed) {
            let list = generate()?;
            if list.is_empty() {
                return Err(Error::NoValidShift);
            }
            self.refill(list, s_prime);
        }
        let mut last = None;
        while let Some(cand) = self.pending.pop_front() {
            self.consumed += 1;
            if !cand.is_real && self.pending.front().is_some_and(|n| n.is_conj_of(&cand)) {
                self.pending.pop_front();
                self.consumed += 1;
            }
            last = Some(cand);
            if !cand.admissible() {
                continue;
            }
            if probe(&cand).is_ok() {
                return Ok(cand);
            }
        }
        if let Some(c) = last {
            let bump = |z: C64| z + C64::new(1e-8 * (1.0 + z.norm()), 0.0);
            let pert = ShiftPair::new(bump(c.alpha), bump(c.beta), c.origin);
            if pert.admissible() && probe(&pert).is_ok() {
                return Ok(pert);
            }
        }
        Err(Error::NoValidShift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: C64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftDiagnostics {
    pub kappa_t: f64,
    pub stable_disk: Disk,
    pub anti_disk: Disk,
    pub center_distance: f64,
    /// `(c^2 - a^2 - b^2) / (2ab)`; infinite for a degenerate disk.
    pub p: f64,
    /// `p + sqrt(p^2 - 1)` when `p > 1`; infinite marks an unbounded rate.
    pub asymptotic_rate: Option<f64>,
}

pub fn kappa(shifts: &[ShiftPair], stable: &[C64], anti: &[C64]) -> Result<f64> {
    if stable.is_empty() || anti.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let t = shifts.len();
    let val = |z: C64| rational_value(shifts, t, t, z, Variant::Plain).map(|v| v.norm());
    let mut lo = f64::INFINITY;
    for &z in anti {
        lo = lo.min(val(z)?);
    }
    let mut hi: f64 = 0.0;
    for &z in stable {
        hi = hi.max(val(z)?);
    }
    Ok(lo / hi)
}

pub fn kappa_diagnostics(shifts: &[ShiftPair], stable: &[C64], anti: &[C64]) -> Result<ShiftDiagnostics> {
    let kappa_t = kappa(shifts, stable, anti)?;
    let (cs, rs) = dense::enclosing_disk(stable);
    let (ca, ra) = dense::enclosing_disk(anti);
    let c = (cs - ca).norm();
    let (p, asymptotic_rate) = if rs == 0.0 || ra == 0.0 {
        (f64::INFINITY, Some(f64::INFINITY))
    } else {
        let p = (c * c - rs * rs - ra * ra) / (2.0 * rs * ra);
        (p, if p > 1.0 { Some(p + (p * p - 1.0).sqrt()) } else { None })
    };
    Ok(ShiftDiagnostics {
        kappa_t,
        stable_disk: Disk { center: cs, radius: rs },
        anti_disk: Disk { center: ca, radius: ra },
        center_distance: c,
        p,
        asymptotic_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn leja_examples() {
        let p = leja_generate(&[r(-1.0), r(-2.0)], &[r(1.0), r(2.0)], 1, Orientation::Consistent).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].alpha, p[0].beta), (r(-1.0), r(-1.0)));
        let p = leja_generate(&[r(-1.0)], &[r(1.0)], 3, Orientation::Consistent).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.iter().all(|x| x.alpha == r(-1.0) && x.beta == r(-1.0)));
        let st = [C64::new(-1.0, 1.0), C64::new(-1.0, -1.0)];
        let an = [C64::new(1.0, 1.0), C64::new(1.0, -1.0)];
        for o in [Orientation::Consistent, Orientation::PaperLiteral] {
            let p = leja_generate(&st, &an, 2, o).unwrap();
            assert!(p.len() >= 2);
            for k in (0..p.len()).step_by(2) {
                assert!(p[k + 1].is_conj_of(&p[k]) || (p[k].is_real && p[k + 1].is_real));
            }
        }
        assert!(matches!(leja_generate(&[], &[r(1.0)], 1, Orientation::Consistent), Err(Error::EmptyCandidates)));
    }

    #[test]
    fn hamiltonian_examples() {
        let e = |l: f64, q: f64| EigenInfo { lambda: r(l), q_norm: q };
        let eigs = [e(-1.0, 0.9), e(-3.0, 0.1), e(2.0, 0.2), e(4.0, 0.8)];
        let p = hamiltonian_shifts(&eigs, Orientation::PaperLiteral).unwrap();
        let al: Vec<f64> = p.iter().map(|x| x.alpha.re).collect();
        let be: Vec<f64> = p.iter().map(|x| x.beta.re).collect();
        assert_eq!(al, vec![1.0, 3.0]);
        assert_eq!(be, vec![2.0, 4.0]);
        let p = hamiltonian_shifts(&eigs, Orientation::Consistent).unwrap();
        let al: Vec<f64> = p.iter().map(|x| x.alpha.re).collect();
        let be: Vec<f64> = p.iter().map(|x| x.beta.re).collect();
        assert_eq!(al, vec![-4.0, -2.0]);
        assert_eq!(be, vec![-3.0, -1.0]);
        assert_eq!(hamiltonian_shifts(&[e(-1.0, 0.5), e(1.0, 0.5)], Orientation::Consistent).unwrap().len(), 1);
        assert!(matches!(
            hamiltonian_shifts(&[e(-1.0, 0.5), e(-2.0, 0.5)], Orientation::Consistent),
            Err(Error::EmptyCandidates)
        ));
    }

    #[test]
    fn kappa_examples() {
        let d = kappa_diagnostics(&[ShiftPair::real(-1.0, -1.0)], &[r(-2.0)], &[r(2.0)]).unwrap();
        assert!((d.kappa_t - 9.0).abs() < 1e-14);
        assert_eq!(d.asymptotic_rate, Some(f64::INFINITY));
        let d = kappa_diagnostics(&[ShiftPair::real(-2.0, -2.0)], &[r(-3.0), r(-1.0)], &[r(1.0), r(3.0)]).unwrap();
        assert!((d.kappa_t - 9.0).abs() < 1e-13);
        assert!((d.center_distance - 4.0).abs() < 1e-14);
        assert!((d.p - 7.0).abs() < 1e-12);
        assert!((d.asymptotic_rate.unwrap() - (7.0 + 48f64.sqrt())).abs() < 1e-10);
        assert!(matches!(
            kappa_diagnostics(&[ShiftPair::real(1.0, 1.0)], &[r(-1.0)], &[r(2.0)]),
            Err(Error::PoleHit)
        ));
    }

    #[test]
    fn queue_examples() {
        let strat = ShiftStrategy::fixed(vec![ShiftPair::real(-1.0, -1.0), ShiftPair::real(-2.0, -2.0)]);
        let list = vec![ShiftPair::real(-1.0, -1.0), ShiftPair::real(-2.0, -2.0)];
        let mut q = ShiftQueue::new();
        let mut gen = || Ok(list.clone());
        let mut ok = |_: &ShiftPair| Ok(());
        assert_eq!(q.next_shift(&strat, &mut gen, &mut ok).unwrap().alpha, r(-1.0));
        assert_eq!(q.next_shift(&strat, &mut gen, &mut ok).unwrap().alpha, r(-2.0));

        let mut q = ShiftQueue::new();
        let list = vec![ShiftPair::real(-2.0, -2.0), ShiftPair::real(-1.0, -1.0)];
        let mut gen = || Ok(list.clone());
        let mut reject = |s: &ShiftPair| if s.beta == r(-2.0) { Err(Error::SingularShift(s.beta)) } else { Ok(()) };
        assert_eq!(q.next_shift(&strat, &mut gen, &mut reject).unwrap().beta, r(-1.0));

        let mut strat = ShiftStrategy::leja(1, false);
        strat.s_prime = Some(1);
        let z = ShiftPair::user(C64::new(-1.0, 0.5), C64::new(-1.0, 0.2));
        let list = vec![z, z.conj(), ShiftPair::real(-3.0, -3.0)];
        let mut q = ShiftQueue::new();
        let mut gen = || Ok(list.clone());
        assert_eq!(q.next_shift(&strat, &mut gen, &mut ok).unwrap(), z);
        assert_eq!(q.consumed, 2);
        let mut fail = |s: &ShiftPair| Err(Error::SingularShift(s.beta));
        let mut q = ShiftQueue::new();
        assert!(matches!(q.next_shift(&strat, &mut gen, &mut fail), Err(Error::NoValidShift)));
    }

    #[test]
    fn grid_order() {
        let labels: Vec<String> = ShiftStrategy::grid().iter().map(|s| s.label()).collect();
        assert_eq!(labels[0], "leja 1");
        assert_eq!(labels[3], "leja c 1");
        assert_eq!(labels[6], "hami 1");
        assert_eq!(labels[11], "hami c 5");
    }

    fn points(v: &[(f64, f64)]) -> Vec<C64> {
        v.iter().map(|&(a, b)| C64::new(a, b)).collect()
    }

    proptest! {
        #[test]
        fn leja_permutation_invariant(
            st in prop::collection::vec((-5.0f64..-0.5, -2.0f64..2.0), 1..6),
            an in prop::collection::vec((0.5f64..5.0, -2.0f64..2.0), 1..6),
            rot in 0usize..6,
        ) {
            let s = points(&st);
            let a = points(&an);
            let mut s2 = s.clone();
            s2.reverse();
            let mut a2 = a.clone();
            let k = rot % a2.len();
            a2.rotate_left(k);
            let p1 = leja_generate(&s, &a, 4, Orientation::Consistent).unwrap();
            let p2 = leja_generate(&s2, &a2, 4, Orientation::Consistent).unwrap();
            prop_assert_eq!(p1, p2);
        }

        #[test]
        fn leja_conjugate_closed(
            st in prop::collection::vec((-5.0f64..-0.5, 0.1f64..2.0), 1..4),
            an in prop::collection::vec((0.5f64..5.0, 0.1f64..2.0), 1..4),
            count in 1usize..7,
        ) {
            let mut s = points(&st);
            s.extend(s.clone().iter().map(|z| z.conj()));
            let mut a = points(&an);
            a.extend(a.clone().iter().map(|z| z.conj()));
            let p = leja_generate(&s, &a, count, Orientation::Consistent).unwrap();
            let mut k = 0;
            while k < p.len() {
                if p[k].is_real {
                    k += 1;
                } else {
                    prop_assert!(k + 1 < p.len() && p[k + 1].is_conj_of(&p[k]));
                    k += 2;
                }
            }
        }

        #[test]
        fn leja_kappa_monotone_on_separated_sets(
            st in prop::collection::vec(-3.0f64..-2.0, 1..5),
            an in prop::collection::vec(2.0f64..3.0, 1..5),
        ) {
            let s: Vec<C64> = st.iter().map(|&x| r(x)).collect();
            let a: Vec<C64> = an.iter().map(|&x| r(x)).collect();
            let p = leja_generate(&s, &a, 6, Orientation::Consistent).unwrap();
            let mut prev = 0.0;
            for t in 1..=p.len() {
                let k = kappa(&p[..t], &s, &a).unwrap_or(f64::INFINITY);
                prop_assert!(k >= prev * (1.0 - 1e-12));
                prev = k;
            }
        }
    }
}
