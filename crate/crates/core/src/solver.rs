//! Shifted factorizations `(A + beta M)` / `(D + alpha N)` with a per-problem
//! LRU cache, the doubled real block form for nonreal shifts, and
//! condition-based rejection of bad shifts.

use crate::dense;
use crate::error::{Error, Result};
use crate::problem::{NareProblem, Operator, Storage};
use crate::sparse::Csc;
use crate::{Mat, C64};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu as SpLu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

pub const CACHE_CAPACITY: usize = 8;

/// Shifts with `|Im s| <= imag_tol(s)` are treated as real.
pub fn imag_tol(s: C64) -> f64 {
    1e-14 * (1.0 + s.norm())
}

pub fn is_real_shift(s: C64) -> bool {
    s.im.abs() <= imag_tol(s)
}

pub fn cond_limit() -> f64 {
    1.0 / (100.0 * f64::EPSILON)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Real,
    ComplexBlock,
}

/// Dense LU with partial pivoting and transpose solves.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: Mat,
    perm: Vec<usize>,
}

impl DenseLu {
    /// `None` on an exact zero pivot.
    pub fn new(mut a: Mat) -> Option<Self> {
        let n = a.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, pval) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            if pval == 0.0 || !pval.is_finite() {
                return None;
            }
            if piv != k {
                a.swap_rows(piv, k);
                perm.swap(piv, k);
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / d;
                a[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        let u = a[(k, j)];
                        a[(i, j)] -= l * u;
                    }
                }
            }
        }
        Some(DenseLu { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn solve(&self, b: &mut Mat) {
        let n = self.lu.nrows();
        for c in 0..b.ncols() {
            let mut x: Vec<f64> = self.perm.iter().map(|&p| b[(p, c)]).collect();
            for i in 0..n {
                let mut s = x[i];
                for j in 0..i {
                    s -= self.lu[(i, j)] * x[j];
                }
                x[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[i];
                for j in i + 1..n {
                    s -= self.lu[(i, j)] * x[j];
                }
                x[i] = s / self.lu[(i, i)];
            }
            for i in 0..n {
                b[(i, c)] = x[i];
            }
        }
    }

    /// Solves `A^T x = b`.
    pub fn solve_t(&self, b: &mut Mat) {
        let n = self.lu.nrows();
        for c in 0..b.ncols() {
            let mut x: Vec<f64> = (0..n).map(|i| b[(i, c)]).collect();
            // U^T y = b
            for i in 0..n {
                let mut s = x[i];
                for j in 0..i {
                    s -= self.lu[(j, i)] * x[j];
                }
                x[i] = s / self.lu[(i, i)];
            }
            // L^T z = y
            for i in (0..n).rev() {
                let mut s = x[i];
                for j in i + 1..n {
                    s -= self.lu[(j, i)] * x[j];
                }
                x[i] = s;
            }
            for i in 0..n {
                b[(self.perm[i], c)] = x[i];
            }
        }
    }
}

enum Backend {
    Diag(Vec<f64>),
    DiagComplex(Vec<C64>),
    Dense(DenseLu),
    Sparse(SpLu<usize, f64>),
}

/// A factorized matrix: `K(s) = B + s*Mass` (real mode) or its doubled real
/// block form `[[B + Re s Mass, -Im s Mass], [Im s Mass, B + Re s Mass]]`.
pub struct FactorCore {
    n: usize,
    mode: Mode,
    shift: C64,
    backend: Backend,
    cond: f64,
}

impl std::fmt::Debug for FactorCore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FactorCore")
            .field("n", &self.n)
            .field("mode", &self.mode)
            .field("shift", &self.shift)
            .field("cond", &self.cond)
            .finish()
    }
}

fn to_faer(x: &Mat) -> faer::Mat<f64> {
    faer::Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

fn from_faer(x: &faer::Mat<f64>, out: &mut Mat) {
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            out[(i, j)] = x[(i, j)];
        }
    }
}

impl FactorCore {
    /// Solves with the factorized matrix (or its transpose) in place;
    /// `x` has `n` rows (real mode) or `2n` rows (block mode).
    fn solve_in_place(&self, x: &mut Mat, trans: bool) {
        match &self.backend {
            Backend::Diag(d) => {
                for (i, mut row) in x.row_iter_mut().enumerate() {
                    row /= d[i];
                }
            }
            Backend::DiagComplex(d) => {
                let n = self.n;
                for c in 0..x.ncols() {
                    for i in 0..n {
                        let k = if trans { d[i].conj() } else { d[i] };
                        let z = C64::new(x[(i, c)], x[(n + i, c)]) / k;
                        x[(i, c)] = z.re;
                        x[(n + i, c)] = z.im;
                    }
                }
            }
            Backend::Dense(lu) => {
                if trans { lu.solve_t(x) } else { lu.solve(x) }
            }
            Backend::Sparse(lu) => {
                let mut f = to_faer(x);
                if trans {
                    lu.solve_transpose_in_place(f.as_mut());
                } else {
                    lu.solve_in_place(f.as_mut());
                }
                from_faer(&f, x);
            }
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn cond(&self) -> f64 {
        self.cond
    }
    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Handle for one shifted matrix on one side.
#[derive(Debug, Clone)]
pub struct ShiftedFactorization {
    pub side: Side,
    pub shift: C64,
    pub mode: Mode,
    pub cond_estimate: f64,
    core: Arc<FactorCore>,
    transposed: bool,
    conj: bool,
}

impl ShiftedFactorization {
    pub fn dim(&self) -> usize {
        self.core.n
    }

    /// Identity of the underlying factorization.
    pub fn same_handle(&self, other: &ShiftedFactorization) -> bool {
        Arc::ptr_eq(&self.core, &other.core)
    }

    fn trans_for(&self, side: Side) -> bool {
        (side == Side::D) ^ self.transposed
    }

    /// Solves `K z = r` (A side) or `z K = r` (D side, with `r`, `z` given
    /// transposed) for complex data held as real/imaginary parts.
    fn solve_parts(&self, rr: &Mat, ri: &Mat, side: Side) -> (Mat, Mat) {
        let trans = self.trans_for(side);
        let n = self.core.n;
        match self.core.mode {
            Mode::Real => {
                let mut a = rr.clone();
                self.core.solve_in_place(&mut a, trans);
                let mut b = ri.clone();
                if b.iter().any(|v| *v != 0.0) {
                    self.core.solve_in_place(&mut b, trans);
                }
                (a, b)
            }
            Mode::ComplexBlock => {
                let flip = self.conj ^ trans;
                let k = rr.ncols();
                let mut x = Mat::zeros(2 * n, k);
                x.view_mut((0, 0), (n, k)).copy_from(rr);
                if flip {
                    x.view_mut((n, 0), (n, k)).copy_from(&(-ri));
                } else {
                    x.view_mut((n, 0), (n, k)).copy_from(ri);
                }
                self.core.solve_in_place(&mut x, trans);
                let zr = x.view((0, 0), (n, k)).into_owned();
                let mut zi = x.view((n, 0), (n, k)).into_owned();
                if flip {
                    zi = -zi;
                }
                (zr, zi)
            }
        }
    }
}

fn check_rows(f: &ShiftedFactorization, rows: usize) -> Result<()> {
    if rows != f.core.n {
        return Err(Error::Dimension(format!(
            "right-hand side has {rows} rows, factorization has dimension {}",
            f.core.n
        )));
    }
    Ok(())
}

/// `(base + shift*mass)^{-1} rhs`; in block mode returns `[Re; Im]` stacked.
pub fn solve_columns(f: &ShiftedFactorization, rhs: &Mat) -> Result<Mat> {
    if f.side != Side::A {
        return Err(Error::Dimension("solve_columns requires an A-side factorization".into()));
    }
    check_rows(f, rhs.nrows())?;
    let zero = Mat::zeros(rhs.nrows(), rhs.ncols());
    let (zr, zi) = f.solve_parts(rhs, &zero, Side::A);
    Ok(match f.mode {
        Mode::Real => zr,
        Mode::ComplexBlock => {
            let (n, k) = zr.shape();
            let mut out = Mat::zeros(2 * n, k);
            out.view_mut((0, 0), (n, k)).copy_from(&zr);
            out.view_mut((n, 0), (n, k)).copy_from(&zi);
            out
        }
    })
}

/// `lhs (base + shift*mass)^{-1}`; in block mode returns `[Re, Im]` side by side.
pub fn solve_rows(f: &ShiftedFactorization, lhs: &Mat) -> Result<Mat> {
    if f.side != Side::D {
        return Err(Error::Dimension("solve_rows requires a D-side factorization".into()));
    }
    check_rows(f, lhs.ncols())?;
    let rt = lhs.transpose();
    let zero = Mat::zeros(rt.nrows(), rt.ncols());
    let (zr, zi) = f.solve_parts(&rt, &zero, Side::D);
    Ok(match f.mode {
        Mode::Real => zr.transpose(),
        Mode::ComplexBlock => {
            let (k, n) = lhs.shape();
            let mut out = Mat::zeros(k, 2 * n);
            out.view_mut((0, 0), (k, n)).copy_from(&zr.transpose());
            out.view_mut((0, n), (k, n)).copy_from(&zi.transpose());
            out
        }
    })
}

/// Complex right-hand side version of [`solve_columns`]: `(re, im)` in and out.
pub fn solve_columns_c(f: &ShiftedFactorization, rr: &Mat, ri: &Mat) -> Result<(Mat, Mat)> {
    check_rows(f, rr.nrows())?;
    Ok(f.solve_parts(rr, ri, Side::A))
}

/// Complex left-hand side version of [`solve_rows`].
pub fn solve_rows_c(f: &ShiftedFactorization, lr: &Mat, li: &Mat) -> Result<(Mat, Mat)> {
    check_rows(f, lr.ncols())?;
    let (zr, zi) = f.solve_parts(&lr.transpose(), &li.transpose(), Side::D);
    Ok((zr.transpose(), zi.transpose()))
}

/// Canonical representative of a shift: nonnegative imaginary part.
fn canonical(shift: C64, mode: Mode) -> (C64, bool) {
    match mode {
        Mode::Real => (C64::new(shift.re, 0.0), false),
        Mode::ComplexBlock => {
            if shift.im < 0.0 {
                (shift.conj(), true)
            } else {
                (shift, false)
            }
        }
    }
}

fn quantize(x: f64, scale: f64) -> i64 {
    let q = 1e-15 * scale;
    (x / q).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CoreKey {
    base: usize,
    mass: usize,
    mass_t: bool,
    mode: Mode,
    re: i64,
    im: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct PatternKey {
    base: usize,
    mass: usize,
    mass_t: bool,
    mode: Mode,
}

fn storage_csc(s: &Storage) -> Csc {
    match s {
        Storage::Dense(a) => Csc::from_dense(a),
        Storage::Sparse(a) => a.clone(),
        Storage::Diagonal(d) => {
            let trip: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
            Csc::from_triplets(d.len(), d.len(), &trip).expect("in-range")
        }
    }
}

fn storage_dense(s: &Storage) -> Mat {
    match s {
        Storage::Dense(a) => a.clone(),
        Storage::Sparse(a) => a.to_dense(),
        Storage::Diagonal(d) => Mat::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
    }
}

/// Mass storage aligned with the base orientation: `(storage, transpose_needed)`.
struct Inner<'a> {
    base: &'a Storage,
    mass: Option<&'a Storage>,
    mass_t: bool,
}

fn mass_csc(inner: &Inner, n: usize) -> Csc {
    match inner.mass {
        None => Csc::identity(n),
        Some(s) => {
            let c = storage_csc(s);
            if inner.mass_t { c.transpose() } else { c }
        }
    }
}

fn mass_dense(inner: &Inner, n: usize) -> Mat {
    match inner.mass {
        None => Mat::identity(n, n),
        Some(s) => {
            let d = storage_dense(s);
            if inner.mass_t { d.transpose() } else { d }
        }
    }
}

fn block_triplets(b: &Csc, mass: &Csc, s: C64) -> Vec<Triplet<usize, usize, f64>> {
    let n = b.nrows();
    let mut t = Vec::with_capacity(2 * b.nnz() + 4 * mass.nnz());
    for (i, j, v) in b.triplets() {
        t.push(Triplet::new(i, j, v));
        t.push(Triplet::new(n + i, n + j, v));
    }
    for (i, j, v) in mass.triplets() {
        t.push(Triplet::new(i, j, s.re * v));
        t.push(Triplet::new(n + i, n + j, s.re * v));
        t.push(Triplet::new(i, n + j, -s.im * v));
        t.push(Triplet::new(n + i, j, s.im * v));
    }
    t
}

fn real_triplets(b: &Csc, mass: &Csc, s: f64) -> Vec<Triplet<usize, usize, f64>> {
    let mut t = Vec::with_capacity(b.nnz() + mass.nnz());
    for (i, j, v) in b.triplets() {
        t.push(Triplet::new(i, j, v));
    }
    for (i, j, v) in mass.triplets() {
        t.push(Triplet::new(i, j, s * v));
    }
    t
}

fn finish_core(n: usize, mode: Mode, shift: C64, backend: Backend, norm1: f64) -> Result<FactorCore> {
    let mut core = FactorCore { n, mode, shift, backend, cond: 1.0 };
    let dim = match mode {
        Mode::Real => n,
        Mode::ComplexBlock => 2 * n,
    };
    let inv = match &core.backend {
        Backend::Diag(d) => d.iter().map(|v| 1.0 / v.abs()).fold(0.0, f64::max),
        Backend::DiagComplex(d) => d.iter().map(|v| 1.0 / v.norm()).fold(0.0, f64::max) * 2f64.sqrt(),
        _ => {
            let c = &core;
            dense::inv_norm1_estimate(dim, |x| c.solve_in_place(x, false), |x| c.solve_in_place(x, true))
        }
    };
    let cond = (norm1 * inv).max(1.0);
    if !cond.is_finite() {
        return Err(Error::SingularShift(shift));
    }
    if cond > cond_limit() {
        return Err(Error::IllConditionedShift { shift, cond });
    }
    core.cond = cond;
    Ok(core)
}

fn build_core(inner: &Inner, shift: C64, mode: Mode, symbolic: Option<&mut Option<SymbolicLu<usize>>>) -> Result<FactorCore> {
    let n = match inner.base {
        Storage::Dense(a) => a.nrows(),
        Storage::Sparse(a) => a.nrows(),
        Storage::Diagonal(d) => d.len(),
    };
    // diagonal fast path
    if let Storage::Diagonal(b) = inner.base {
        let mdiag: Option<Vec<f64>> = match inner.mass {
            None => Some(vec![1.0; n]),
            Some(Storage::Diagonal(m)) => Some(m.clone()),
            _ => None,
        };
        if let Some(md) = mdiag {
            return match mode {
                Mode::Real => {
                    let d: Vec<f64> = b.iter().zip(&md).map(|(x, m)| x + shift.re * m).collect();
                    if d.iter().any(|v| *v == 0.0) {
                        return Err(Error::SingularShift(shift));
                    }
                    let norm = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    finish_core(n, mode, shift, Backend::Diag(d), norm)
                }
                Mode::ComplexBlock => {
                    let d: Vec<C64> = b.iter().zip(&md).map(|(x, m)| C64::new(*x, 0.0) + shift * m).collect();
                    if d.iter().any(|v| v.norm() == 0.0) {
                        return Err(Error::SingularShift(shift));
                    }
                    let norm = d.iter().fold(0.0f64, |a, v| a.max(v.re.abs() + v.im.abs()));
                    finish_core(n, mode, shift, Backend::DiagComplex(d), norm)
                }
            };
        }
    }
    match inner.base {
        Storage::Dense(b) => {
            let m = mass_dense(inner, n);
            let k = match mode {
                Mode::Real => b + &m * shift.re,
                Mode::ComplexBlock => {
                    let p = b + &m * shift.re;
                    let q = &m * shift.im;
                    let mut k = Mat::zeros(2 * n, 2 * n);
                    k.view_mut((0, 0), (n, n)).copy_from(&p);
                    k.view_mut((n, n), (n, n)).copy_from(&p);
                    k.view_mut((0, n), (n, n)).copy_from(&(-&q));
                    k.view_mut((n, 0), (n, n)).copy_from(&q);
                    k
                }
            };
            let norm = dense::norm1(&k);
            let lu = DenseLu::new(k).ok_or(Error::SingularShift(shift))?;
            finish_core(n, mode, shift, Backend::Dense(lu), norm)
        }
        _ => {
            let b = storage_csc(inner.base);
            let m = mass_csc(inner, n);
            let (dim, trip) = match mode {
                Mode::Real => (n, real_triplets(&b, &m, shift.re)),
                Mode::ComplexBlock => (2 * n, block_triplets(&b, &m, shift)),
            };
            let k = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &trip)
                .map_err(|_| Error::Dimension("sparse assembly failed".into()))?;
            let mut col_sums = vec![0.0f64; dim];
            for t in &trip {
                col_sums[t.col] += t.val.abs();
            }
            let norm = col_sums.into_iter().fold(0.0, f64::max);
            let sym = match symbolic {
                Some(slot) => {
                    if slot.is_none() {
                        *slot = Some(
                            SymbolicLu::try_new(k.symbolic())
                                .map_err(|_| Error::SingularShift(shift))?,
                        );
                    }
                    slot.as_ref().unwrap().clone()
                }
                None => SymbolicLu::try_new(k.symbolic()).map_err(|_| Error::SingularShift(shift))?,
            };
            let lu = SpLu::try_new_with_symbolic(sym, k.as_ref()).map_err(|_| Error::SingularShift(shift))?;
            finish_core(n, mode, shift, Backend::Sparse(lu), norm)
        }
    }
}

fn inner_of<'a>(base: &'a Operator, mass: Option<&'a Operator>) -> (Inner<'a>, Option<Storage>) {
    let mass_t = mass.map_or(false, |m| m.is_transposed() != base.is_transposed());
    (Inner { base: base.storage(), mass: mass.map(|m| m.storage()), mass_t }, None)
}

fn mode_for(shift: C64) -> Mode {
    if is_real_shift(shift) { Mode::Real } else { Mode::ComplexBlock }
}

/// Uncached factorization of `base + shift*mass`.
pub fn factor_shifted(base: &Operator, mass: Option<&Operator>, shift: C64, side: Side) -> Result<ShiftedFactorization> {
    if !base.is_square() {
        return Err(Error::Dimension("base must be square".into()));
    }
    if let Some(m) = mass {
        if m.nrows() != base.nrows() || m.ncols() != base.ncols() {
            return Err(Error::Dimension("mass must match base".into()));
        }
    }
    let mode = mode_for(shift);
    let (canon, conj) = canonical(shift, mode);
    let (inner, _) = inner_of(base, mass);
    let core = build_core(&inner, canon, mode, None).map_err(|e| relabel(e, shift))?;
    Ok(ShiftedFactorization {
        side,
        shift,
        mode,
        cond_estimate: core.cond,
        core: Arc::new(core),
        transposed: base.is_transposed(),
        conj,
    })
}

fn relabel(e: Error, shift: C64) -> Error {
    match e {
        Error::SingularShift(_) => Error::SingularShift(shift),
        Error::IllConditionedShift { cond, .. } => Error::IllConditionedShift { shift, cond },
        other => other,
    }
}

/// Invertibility certificate for a mass matrix.
pub fn certify_invertible(op: &Operator) -> Result<f64> {
    factor_shifted(op, None, C64::new(0.0, 0.0), Side::A).map(|f| f.cond_estimate)
}

/// Per-problem factorization service with an LRU cache and reusable
/// sparse symbolic analyses.
pub struct ShiftSolver {
    a: Operator,
    m: Option<Operator>,
    d: Operator,
    n: Option<Operator>,
    cache: Mutex<Vec<(CoreKey, Arc<FactorCore>)>>,
    symbolic: Mutex<HashMap<PatternKey, Option<SymbolicLu<usize>>>>,
    capacity: usize,
    nanos: AtomicU64,
    factorizations: AtomicU64,
}

impl ShiftSolver {
    pub fn new(problem: &NareProblem) -> Self {
        Self::with_capacity(problem, CACHE_CAPACITY)
    }

    pub fn with_capacity(problem: &NareProblem, capacity: usize) -> Self {
        ShiftSolver {
            a: problem.a.clone(),
            m: problem.mass_m.clone(),
            d: problem.d.clone(),
            n: problem.mass_n.clone(),
            cache: Mutex::new(Vec::new()),
            symbolic: Mutex::new(HashMap::new()),
            capacity: capacity.max(1),
            nanos: AtomicU64::new(0),
            factorizations: AtomicU64::new(0),
        }
    }

    /// Cumulative seconds spent factorizing and solving.
    pub fn seconds(&self) -> f64 {
        self.nanos.load(Ordering::Relaxed) as f64 * 1e-9
    }

    pub fn factorization_count(&self) -> u64 {
        self.factorizations.load(Ordering::Relaxed)
    }

    pub fn add_time(&self, start: Instant) {
        self.nanos.fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
    }

    /// Cached factorization of `A + shift*M` (side A) or `D + shift*N` (side D).
    pub fn get(&self, side: Side, shift: C64) -> Result<ShiftedFactorization> {
        let start = Instant::now();
        let r = self.get_inner(side, shift);
        self.add_time(start);
        r
    }

    fn get_inner(&self, side: Side, shift: C64) -> Result<ShiftedFactorization> {
        let (base, mass) = match side {
            Side::A => (&self.a, self.m.as_ref()),
            Side::D => (&self.d, self.n.as_ref()),
        };
        let mode = mode_for(shift);
        let (canon, conj) = canonical(shift, mode);
        let (inner, _) = inner_of(base, mass);
        let scale = 1.0 + canon.norm();
        let key = CoreKey {
            base: base.storage_id(),
            mass: mass.map_or(0, |m| m.storage_id()),
            mass_t: inner.mass_t,
            mode,
            re: quantize(canon.re, scale),
            im: quantize(canon.im, scale),
        };
        let mk = |core: Arc<FactorCore>| ShiftedFactorization {
            side,
            shift,
            mode,
            cond_estimate: core.cond,
            core,
            transposed: base.is_transposed(),
            conj,
        };
        {
            let mut cache = self.cache.lock().unwrap();
            if let Some(pos) = cache.iter().position(|(k, _)| *k == key) {
                let entry = cache.remove(pos);
                let core = Arc::clone(&entry.1);
                cache.insert(0, entry);
                return Ok(mk(core));
            }
        }
        let pkey = PatternKey { base: key.base, mass: key.mass, mass_t: key.mass_t, mode };
        let core = {
            let mut sym = self.symbolic.lock().unwrap();
            let slot = sym.entry(pkey).or_insert(None);
            build_core(&inner, canon, mode, Some(slot)).map_err(|e| relabel(e, shift))?
        };
        self.factorizations.fetch_add(1, Ordering::Relaxed);
        let core = Arc::new(core);
        let mut cache = self.cache.lock().unwrap();
        cache.insert(0, (key, Arc::clone(&core)));
        cache.truncate(self.capacity);
        Ok(mk(core))
    }

    /// Probes both sides for a shift pair `(alpha, beta)`.
    pub fn probe(&self, alpha: C64, beta: C64) -> Result<()> {
        self.get(Side::A, beta)?;
        self.get(Side::D, alpha)?;
        Ok(())
    }

    pub fn timed<T>(&self, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let r = f();
        self.add_time(start);
        r
    }
}
