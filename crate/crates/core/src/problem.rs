//! Problem definitions: plain, generalized, strengthened (NARE/S), weakly
//! strengthened (NARE/W) and CARE-adapted NAREs.

use crate::dense;
use crate::error::{Error, Result};
use crate::sparse::Csc;
use crate::Mat;
use std::sync::Arc;

/// Largest number of entries a reference (dense) evaluation may materialize.
pub const DENSE_GUARD: usize = 4_000_000;

#[derive(Debug, Clone)]
pub enum Storage {
    Dense(Mat),
    Sparse(Csc),
    Diagonal(Vec<f64>),
}

impl Storage {
    fn nrows(&self) -> usize {
        match self {
            Storage::Dense(a) => a.nrows(),
            Storage::Sparse(a) => a.nrows(),
            Storage::Diagonal(d) => d.len(),
        }
    }
    fn ncols(&self) -> usize {
        match self {
            Storage::Dense(a) => a.ncols(),
            Storage::Sparse(a) => a.ncols(),
            Storage::Diagonal(d) => d.len(),
        }
    }
}

/// A square linear operator, possibly a transpose view of shared storage.
#[derive(Debug, Clone)]
pub struct Operator {
    store: Arc<Storage>,
    transposed: bool,
}

impl Operator {
    pub fn dense(a: Mat) -> Self {
        Operator { store: Arc::new(Storage::Dense(a)), transposed: false }
    }
    pub fn sparse(a: Csc) -> Self {
        Operator { store: Arc::new(Storage::Sparse(a)), transposed: false }
    }
    pub fn diagonal(d: Vec<f64>) -> Self {
        Operator { store: Arc::new(Storage::Diagonal(d)), transposed: false }
    }

    /// Transpose view sharing the same storage.
    pub fn transpose(&self) -> Self {
        Operator { store: Arc::clone(&self.store), transposed: !self.transposed }
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }
    pub fn storage(&self) -> &Storage {
        &self.store
    }
    pub fn storage_arc(&self) -> &Arc<Storage> {
        &self.store
    }
    pub fn storage_id(&self) -> usize {
        Arc::as_ptr(&self.store) as *const u8 as usize
    }
    pub fn shares_storage(&self, other: &Operator) -> bool {
        Arc::ptr_eq(&self.store, &other.store)
    }

    pub fn nrows(&self) -> usize {
        if self.transposed { self.store.ncols() } else { self.store.nrows() }
    }
    pub fn ncols(&self) -> usize {
        if self.transposed { self.store.nrows() } else { self.store.ncols() }
    }
    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    fn raw_apply(&self, x: &Mat, tr: bool) -> Mat {
        match &*self.store {
            Storage::Dense(a) => {
                if tr { a.tr_mul(x) } else { a * x }
            }
            Storage::Sparse(a) => {
                if tr { a.tr_mul_dense(x) } else { a.mul_dense(x) }
            }
            Storage::Diagonal(d) => {
                assert_eq!(d.len(), x.nrows(), "diagonal operator shape mismatch");
                let mut y = x.clone();
                for (i, mut row) in y.row_iter_mut().enumerate() {
                    row *= d[i];
                }
                y
            }
        }
    }

    /// `Op * x`
    pub fn apply(&self, x: &Mat) -> Mat {
        self.raw_apply(x, self.transposed)
    }

    /// `Op^T * x`
    pub fn apply_tr(&self, x: &Mat) -> Mat {
        self.raw_apply(x, !self.transposed)
    }

    /// `x * Op`
    pub fn apply_right(&self, x: &Mat) -> Mat {
        self.apply_tr(&x.transpose()).transpose()
    }

    pub fn to_dense(&self) -> Mat {
        let a = match &*self.store {
            Storage::Dense(a) => a.clone(),
            Storage::Sparse(a) => a.to_dense(),
            Storage::Diagonal(d) => Mat::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
        };
        if self.transposed { a.transpose() } else { a }
    }

    /// `-Op`, keeping the transpose flag.
    pub fn negated(&self) -> Self {
        let store = match &*self.store {
            Storage::Dense(a) => Storage::Dense(-a),
            Storage::Sparse(a) => Storage::Sparse(a.scaled(-1.0)),
            Storage::Diagonal(d) => Storage::Diagonal(d.iter().map(|v| -v).collect()),
        };
        Operator { store: Arc::new(store), transposed: self.transposed }
    }

    pub fn norm1(&self) -> f64 {
        let (n1, ninf) = match &*self.store {
            Storage::Dense(a) => (dense::norm1(a), dense::norm1(&a.transpose())),
            Storage::Sparse(a) => (a.norm1(), a.norm_inf()),
            Storage::Diagonal(d) => {
                let v = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                (v, v)
            }
        };
        if self.transposed { ninf } else { n1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Plain,
    Generalized,
    Strengthened,
    Weak,
    Care,
}

/// `M X C X N - M X D - A X N + B = 0` with `B = LB*RB`, `C = LC*RC`,
/// `A = A' - LPhi*RC - LA*RA`, `D = D' - LC*RPhi - LD*RD`.
/// The operators `a`, `d` hold `A'`, `D'`.
#[derive(Debug, Clone)]
pub struct NareProblem {
    pub a: Operator,
    pub d: Operator,
    pub lb: Mat,
    pub rb: Mat,
    pub lc: Mat,
    pub rc: Mat,
    pub mass_m: Option<Operator>,
    pub mass_n: Option<Operator>,
    pub lphi: Option<Mat>,
    pub rphi: Option<Mat>,
    pub la: Option<Mat>,
    pub ra: Option<Mat>,
    pub ld: Option<Mat>,
    pub rd: Option<Mat>,
    pub kind: ProblemKind,
}

/// Plain dense coefficients `XCX - XD - AX + B = 0`.
#[derive(Debug, Clone)]
pub struct DenseNare {
    pub a: Mat,
    pub d: Mat,
    pub b: Mat,
    pub c: Mat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Stabilizing,
    AntiStabilizing,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct DenseSolutionCandidate {
    pub x: Mat,
    pub classification: Classification,
}

fn guard(rows: usize, cols: usize) -> Result<()> {
    if rows.saturating_mul(cols) > DENSE_GUARD {
        Err(Error::SizeGuard { rows, cols })
    } else {
        Ok(())
    }
}

impl NareProblem {
    /// Plain NARE, validated.
    pub fn new(a: Operator, d: Operator, lb: Mat, rb: Mat, lc: Mat, rc: Mat) -> Result<Self> {
        let p = NareProblem {
            a,
            d,
            lb,
            rb,
            lc,
            rc,
            mass_m: None,
            mass_n: None,
            lphi: None,
            rphi: None,
            la: None,
            ra: None,
            ld: None,
            rd: None,
            kind: ProblemKind::Plain,
        };
        p.check()?;
        Ok(p)
    }

    /// Dense plain problem from explicit factors.
    pub fn dense(a: Mat, d: Mat, lb: Mat, rb: Mat, lc: Mat, rc: Mat) -> Result<Self> {
        Self::new(Operator::dense(a), Operator::dense(d), lb, rb, lc, rc)
    }

    /// Attaches mass matrices (generalized NARE).
    pub fn with_mass(mut self, m: Option<Operator>, n: Option<Operator>) -> Result<Self> {
        self.mass_m = m;
        self.mass_n = n;
        if self.kind == ProblemKind::Plain && (self.mass_m.is_some() || self.mass_n.is_some()) {
            self.kind = ProblemKind::Generalized;
        }
        self.check()?;
        Ok(self)
    }

    /// Attaches strengthened-structure offsets `A = A' - LPhi*RC`, `D = D' - LC*RPhi`.
    pub fn with_phi(mut self, lphi: Mat, rphi: Mat) -> Result<Self> {
        self.lphi = Some(lphi);
        self.rphi = Some(rphi);
        if self.kind != ProblemKind::Weak {
            self.kind = ProblemKind::Strengthened;
        }
        self.check()?;
        Ok(self)
    }

    /// Attaches weak-structure offsets `-LA*RA` on A and `-LD*RD` on D.
    pub fn with_weak(mut self, la: Mat, ra: Mat, ld: Mat, rd: Mat) -> Result<Self> {
        self.la = Some(la);
        self.ra = Some(ra);
        self.ld = Some(ld);
        self.rd = Some(rd);
        self.kind = ProblemKind::Weak;
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProblem(v.join("; ")))
        }
    }

    /// Same solution set with `A, B, C, D` negated, so the linearizing
    /// matrix flips sign and the stable and antistable classes swap.
    pub fn negated(&self) -> Self {
        let a = self.a.negated();
        let d = if self.d.shares_storage(&self.a) {
            if self.d.is_transposed() == self.a.is_transposed() { a.clone() } else { a.transpose() }
        } else {
            self.d.negated()
        };
        NareProblem {
            a,
            d,
            lb: -&self.lb,
            rb: self.rb.clone(),
            lc: -&self.lc,
            rc: self.rc.clone(),
            mass_m: self.mass_m.clone(),
            mass_n: self.mass_n.clone(),
            lphi: self.lphi.as_ref().map(|l| -l),
            rphi: self.rphi.clone(),
            la: self.la.as_ref().map(|l| -l),
            ra: self.ra.clone(),
            ld: self.ld.as_ref().map(|l| -l),
            rd: self.rd.clone(),
            kind: self.kind,
        }
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
    /// Rank of the weak-structure offsets (0 when absent).
    pub fn w(&self) -> usize {
        self.la.as_ref().map_or(0, |l| l.ncols())
    }
    pub fn has_mass(&self) -> bool {
        self.mass_m.is_some() || self.mass_n.is_some()
    }

    /// All invariant violations, each naming the offending field.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let m = self.a.nrows();
        let n = self.d.nrows();
        if !self.a.is_square() {
            v.push("A must be square".into());
        }
        if !self.d.is_square() {
            v.push("D must be square".into());
        }
        if self.lb.nrows() != m {
            v.push("LB row count must equal m".into());
        }
        if self.lb.ncols() != self.rb.nrows() {
            v.push("LB/RB inner dimension mismatch".into());
        }
        if self.rb.ncols() != n {
            v.push("RB column count must equal n".into());
        }
        if self.lc.nrows() != n {
            v.push("LC row count must equal n".into());
        }
        if self.lc.ncols() != self.rc.nrows() {
            v.push("LC/RC inner dimension mismatch".into());
        }
        if self.rc.ncols() != m {
            v.push("RC column count must equal m".into());
        }
        if self.lb.ncols() == 0 || self.rb.nrows() == 0 {
            v.push("LB/RB rank p must be at least 1".into());
        }
        if self.lc.ncols() == 0 || self.rc.nrows() == 0 {
            v.push("LC/RC rank q must be at least 1".into());
        }
        let q = self.rc.nrows();
        if let Some(mm) = &self.mass_m {
            if mm.nrows() != m || mm.ncols() != m {
                v.push("M must be m x m".into());
            }
        }
        if let Some(nn) = &self.mass_n {
            if nn.nrows() != n || nn.ncols() != n {
                v.push("N must be n x n".into());
            }
        }
        match (&self.lphi, &self.rphi) {
            (Some(l), Some(r)) => {
                if l.nrows() != m || l.ncols() != q {
                    v.push("LPhi must be m x q".into());
                }
                if r.nrows() != q || r.ncols() != n {
                    v.push("RPhi must be q x n".into());
                }
            }
            (Some(_), None) => v.push("strengthened structure requires RPhi".into()),
            (None, Some(_)) => v.push("strengthened structure requires LPhi".into()),
            (None, None) => {
                if self.kind == ProblemKind::Strengthened {
                    v.push("strengthened structure requires LPhi and RPhi".into());
                }
            }
        }
        let weak_parts = [("LA", &self.la), ("RA", &self.ra), ("LD", &self.ld), ("RD", &self.rd)];
        let present = weak_parts.iter().filter(|(_, x)| x.is_some()).count();
        if self.kind == ProblemKind::Weak || present > 0 {
            for (name, part) in weak_parts.iter() {
                if part.is_none() {
                    v.push(format!("weak structure requires {name}"));
                }
            }
            if present == 4 {
                let la = self.la.as_ref().unwrap();
                let ra = self.ra.as_ref().unwrap();
                let ld = self.ld.as_ref().unwrap();
                let rd = self.rd.as_ref().unwrap();
                let w = la.ncols();
                if ra.nrows() != w || ld.ncols() != w || rd.nrows() != w {
                    v.push("weak structure ranks of LA, RA, LD, RD must agree".into());
                }
                if la.nrows() != m || ra.ncols() != m {
                    v.push("LA must be m x w and RA w x m".into());
                }
                if ld.nrows() != n || rd.ncols() != n {
                    v.push("LD must be n x w and RD w x n".into());
                }
            }
        }
        if self.kind == ProblemKind::Generalized && !self.has_mass() {
            v.push("generalized problem requires M or N".into());
        }
        if self.kind == ProblemKind::Care {
            if m != n {
                v.push("CARE-adapted problem requires m = n".into());
            } else if !(self.a.shares_storage(&self.d) && self.a.is_transposed() != self.d.is_transposed())
                && m * n <= DENSE_GUARD
                && self.a.to_dense() != self.d.to_dense().transpose()
            {
                v.push("CARE-adapted problem requires A = D^T".into());
            }
        }
        if v.is_empty() {
            for (name, mass) in [("M", &self.mass_m), ("N", &self.mass_n)] {
                if let Some(op) = mass {
                    if crate::solver::certify_invertible(op).is_err() {
                        v.push(format!("{name} failed the invertibility certificate"));
                    }
                }
            }
        }
        v
    }

    pub fn a_eff_dense(&self) -> Result<Mat> {
        guard(self.m(), self.m())?;
        let mut a = self.a.to_dense();
        if let Some(l) = &self.lphi {
            a -= l * &self.rc;
        }
        if let (Some(l), Some(r)) = (&self.la, &self.ra) {
            a -= l * r;
        }
        Ok(a)
    }

    pub fn d_eff_dense(&self) -> Result<Mat> {
        guard(self.n(), self.n())?;
        let mut d = self.d.to_dense();
        if let Some(r) = &self.rphi {
            d -= &self.lc * r;
        }
        if let (Some(l), Some(r)) = (&self.ld, &self.rd) {
            d -= l * r;
        }
        Ok(d)
    }

    pub fn b_dense(&self) -> Result<Mat> {
        guard(self.m(), self.n())?;
        Ok(&self.lb * &self.rb)
    }

    pub fn c_dense(&self) -> Result<Mat> {
        guard(self.n(), self.m())?;
        Ok(&self.lc * &self.rc)
    }

    /// Equivalent plain dense NARE: masses folded in as
    /// `A <- M^{-1}A`, `D <- D N^{-1}`, `B <- M^{-1} B N^{-1}`.
    pub fn to_dense_plain(&self) -> Result<DenseNare> {
        let mut a = self.a_eff_dense()?;
        let mut d = self.d_eff_dense()?;
        let mut b = self.b_dense()?;
        let c = self.c_dense()?;
        if let Some(mm) = &self.mass_m {
            let md = mm.to_dense();
            a = dense::solve(&md, &a).ok_or_else(|| Error::AssumptionViolated("M".into()))?;
            b = dense::solve(&md, &b).ok_or_else(|| Error::AssumptionViolated("M".into()))?;
        }
        if let Some(nn) = &self.mass_n {
            let nd = nn.to_dense();
            d = dense::solve_right(&d, &nd).ok_or_else(|| Error::AssumptionViolated("N".into()))?;
            b = dense::solve_right(&b, &nd).ok_or_else(|| Error::AssumptionViolated("N".into()))?;
        }
        Ok(DenseNare { a, d, b, c })
    }

    /// Dense residual `M X C X N - M X D - A X N + B` and its Frobenius norm.
    pub fn residual_dense(&self, x: &Mat) -> Result<(Mat, f64)> {
        if x.nrows() != self.m() || x.ncols() != self.n() {
            return Err(Error::Dimension("X must be m x n".into()));
        }
        guard(self.m(), self.n())?;
        let a = self.a_eff_dense()?;
        let d = self.d_eff_dense()?;
        let xlc = x * &self.lc;
        let rcx = &self.rc * x;
        let mut quad = &xlc * &rcx;
        let mut xd = x * &d;
        let mut ax = &a * x;
        if let Some(nn) = &self.mass_n {
            quad = nn.apply_right(&quad);
            ax = nn.apply_right(&ax);
        }
        if let Some(mm) = &self.mass_m {
            quad = mm.apply(&quad);
            xd = mm.apply(&xd);
        }
        let r = quad - xd - ax + &self.lb * &self.rb;
        let nrm = r.norm();
        Ok((r, nrm))
    }

    /// `[[D, -C], [B, -A]]`, or the shifted variant
    /// `[[D - C X, -C], [R(X), -(A - X C)]]` of the equivalent plain problem.
    pub fn hamiltonian(&self, xshift: Option<&Mat>) -> Result<Mat> {
        let dn = self.to_dense_plain()?;
        Ok(hamiltonian_of(&dn, xshift))
    }

    /// Classifies `X` by the sign of the largest real part of `lambda(D - C X)`.
    pub fn classify(&self, x: &Mat) -> Result<DenseSolutionCandidate> {
        let dn = self.to_dense_plain()?;
        let k = &dn.d - &dn.c * x;
        let vals = dense::eigvals_real(&k)?;
        let top = vals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let scale = 1e-10 * (1.0 + k.norm());
        let classification = if top < -scale {
            Classification::Stabilizing
        } else if vals.iter().all(|z| z.re > scale) {
            Classification::AntiStabilizing
        } else {
            Classification::Unknown
        };
        Ok(DenseSolutionCandidate { x: x.clone(), classification })
    }
}

pub fn hamiltonian_of(dn: &DenseNare, xshift: Option<&Mat>) -> Mat {
    let n = dn.d.nrows();
    let m = dn.a.nrows();
    let mut h = Mat::zeros(n + m, n + m);
    match xshift {
        None => {
            h.view_mut((0, 0), (n, n)).copy_from(&dn.d);
            h.view_mut((0, n), (n, m)).copy_from(&(-&dn.c));
            h.view_mut((n, 0), (m, n)).copy_from(&dn.b);
            h.view_mut((n, n), (m, m)).copy_from(&(-&dn.a));
        }
        Some(x) => {
            let res = dense_residual(dn, x);
            h.view_mut((0, 0), (n, n)).copy_from(&(&dn.d - &dn.c * x));
            h.view_mut((0, n), (n, m)).copy_from(&(-&dn.c));
            h.view_mut((n, 0), (m, n)).copy_from(&res);
            h.view_mut((n, n), (m, m)).copy_from(&(-(&dn.a - x * &dn.c)));
        }
    }
    h
}

/// `XCX - XD - AX + B` on explicit dense coefficients.
pub fn dense_residual(dn: &DenseNare, x: &Mat) -> Mat {
    x * &dn.c * x - x * &dn.d - &dn.a * x + &dn.b
}

/// CARE `A^T X E + E^T X A - E^T X B B^T X E + C^T C = 0` as a NARE:
/// `D = A`, `A = A^T` (transpose view), `LC = B`, `RC = B^T`, `RB = C`,
/// `LB = -C^T`, `M = E^T`, `N = E`.
pub fn from_care(acare: Operator, bcare: Mat, ccare: Mat, ecare: Option<Operator>) -> Result<NareProblem> {
    let m = acare.nrows();
    if !acare.is_square() {
        return Err(Error::Dimension("Acare must be square".into()));
    }
    if bcare.nrows() != m {
        return Err(Error::Dimension("Bcare must have m rows".into()));
    }
    if ccare.ncols() != m {
        return Err(Error::Dimension("Ccare must have m columns".into()));
    }
    if let Some(e) = &ecare {
        if e.nrows() != m || e.ncols() != m {
            return Err(Error::Dimension("Ecare must be m x m".into()));
        }
    }
    let a = acare.transpose();
    let d = acare;
    let mut p = NareProblem {
        a,
        d,
        lb: -ccare.transpose(),
        rb: ccare,
        rc: bcare.transpose(),
        lc: bcare,
        mass_m: ecare.as_ref().map(|e| e.transpose()),
        mass_n: ecare,
        lphi: None,
        rphi: None,
        la: None,
        ra: None,
        ld: None,
        rd: None,
        kind: ProblemKind::Care,
    };
    p.check()?;
    p.kind = ProblemKind::Care;
    Ok(p)
}
