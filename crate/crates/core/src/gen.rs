//! Problem generators: transport MARE, random certified-split sparse
//! problems and Nash stacking of CARE problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense;
use crate::error::{Error, Result};
use crate::problem::{NareProblem, Operator, ProblemKind, Storage};
use crate::sparse::Csc;
use crate::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportParams {
    pub n: usize,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub seed: u64,
    /// Strictly decreasing values in `(0, 1)`.
    pub omega: Vec<f64>,
    /// Positive weights summing to one.
    pub c: Vec<f64>,
}

impl TransportParams {
    /// Draws `omega` and `c` from `seed`.
    pub fn random(n: usize, c_alpha: f64, c_beta: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut omega: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        omega.sort_by(|a, b| b.total_cmp(a));
        for i in 1..n {
            if omega[i] >= omega[i - 1] {
                omega[i] = omega[i - 1] - 1e-12;
            }
        }
        for w in omega.iter_mut() {
            if *w <= 0.0 {
                *w = 1e-12;
            }
        }
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + f64::MIN_POSITIVE).collect();
        let total: f64 = raw.iter().sum();
        let c = raw.iter().map(|v| v / total).collect();
        TransportParams { n, c_alpha, c_beta, seed, omega, c }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(0.0..1.0).contains(&self.c_alpha) {
            return bad("c_alpha must lie in [0, 1)");
        }
        if !(self.c_beta > 0.0 && self.c_beta <= 1.0) {
            return bad("c_beta must lie in (0, 1]");
        }
        if self.omega.len() != self.n || self.c.len() != self.n {
            return bad("omega and c must have n entries");
        }
        if self.omega.iter().any(|&w| !(w > 0.0 && w < 1.0)) || self.omega.windows(2).any(|w| w[1] >= w[0]) {
            return bad("omega must be strictly decreasing in (0, 1)");
        }
        if self.c.iter().any(|&v| v <= 0.0) || (self.c.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return bad("c must be positive and sum to one");
        }
        Ok(())
    }
}

/// Transport MARE in strengthened form: diagonal `A'`, `D'`, `p = q = 1`.
pub fn gen_transport(params: &TransportParams) -> Result<NareProblem> {
    params.validate()?;
    let n = params.n;
    let (ca, cb) = (params.c_alpha, params.c_beta);
    let a = params.omega.iter().map(|w| 1.0 / (w * cb * (1.0 + ca))).collect();
    let d = params.omega.iter().map(|w| 1.0 / (w * cb * (1.0 - ca))).collect();
    let q = Mat::from_iterator(n, 1, params.omega.iter().zip(&params.c).map(|(w, c)| c / (2.0 * w)));
    let ones = Mat::from_element(n, 1, 1.0);
    NareProblem::new(
        Operator::diagonal(a),
        Operator::diagonal(d),
        ones.clone(),
        ones.transpose(),
        q.clone(),
        q.transpose(),
    )?
    .with_phi(ones.clone(), ones.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportForm {
    /// Coefficients exactly as displayed; the stable class of the linearizing
    /// matrix is then attached to the maximal solution.
    Raw,
    /// All four coefficients negated: same solutions, and the minimal
    /// nonnegative solution is the one with `lambda(D - CX)` in the open
    /// left half-plane.
    Minimal,
}

pub fn transport_problem(params: &TransportParams, form: TransportForm) -> Result<NareProblem> {
    let p = gen_transport(params)?;
    Ok(match form {
        TransportForm::Raw => p,
        TransportForm::Minimal => p.negated(),
    })
}

fn sparse_offdiag(rng: &mut ChaCha8Rng, n: usize, density: f64) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let mut trip = Vec::new();
    let mut rowsum = vec![0.0; n];
    for j in 0..n {
        for (i, rs) in rowsum.iter_mut().enumerate() {
            if i != j && rng.random::<f64>() < density {
                let v = rng.random::<f64>() - 0.5;
                trip.push((i, j, v));
                *rs += v.abs();
            }
        }
    }
    (trip, rowsum)
}

/// `sum_j |(L R)_ij|` bounded by `sum_k |L_ik| sum_j |R_kj|`.
fn product_rowsum_bound(l: &Mat, r: &Mat) -> Vec<f64> {
    let rs: Vec<f64> = r.row_iter().map(|row| row.iter().map(|v| v.abs()).sum()).collect();
    l.row_iter().map(|row| row.iter().zip(&rs).map(|(v, s)| v.abs() * s).sum()).collect()
}

/// Sparse random problem whose Hamiltonian has exactly `n` stable and `m`
/// antistable eigenvalues, certified by disjoint Gershgorin unions.
pub fn gen_random_stable(m: usize, n: usize, p: usize, q: usize, density: f64, seed: u64) -> Result<NareProblem> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParams("density must lie in (0, 1]".into()));
    }
    if m == 0 || n == 0 || p == 0 || q == 0 {
        return Err(Error::InvalidParams("m, n, p, q must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = |r: usize, c: usize, rng: &mut ChaCha8Rng| Mat::from_fn(r, c, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let lb = g(m, p, &mut rng);
    let rb = g(p, n, &mut rng);
    let lc = g(n, q, &mut rng);
    let rc = g(q, m, &mut rng);
    let (mut ta, ra) = sparse_offdiag(&mut rng, m, density);
    let (mut td, rd) = sparse_offdiag(&mut rng, n, density);
    let bb = product_rowsum_bound(&lb, &rb);
    let cb = product_rowsum_bound(&lc, &rc);
    for i in 0..m {
        let margin = 1.0 + rng.random::<f64>();
        ta.push((i, i, -(ra[i] + bb[i] + margin)));
    }
    for i in 0..n {
        let margin = 1.0 + rng.random::<f64>();
        td.push((i, i, -(rd[i] + cb[i] + margin)));
    }
    let a = Operator::sparse(Csc::from_triplets(m, m, &ta)?);
    let d = Operator::sparse(Csc::from_triplets(n, n, &td)?);
    let problem = NareProblem::new(a, d, lb, rb, lc, rc)?;
    if m <= 100 && n <= 100 {
        let h = problem.hamiltonian(None)?;
        let eigs = dense::eigvals_real(&h)?;
        let stable = eigs.iter().filter(|z| z.re < 0.0).count();
        if stable != n || eigs.iter().any(|z| z.re.abs() < 1e-8) {
            return Err(Error::AssumptionViolated("eigenvalue split".into()));
        }
    }
    Ok(problem)
}

fn triplets_of(op: &Operator) -> Vec<(usize, usize, f64)> {
    let mut out: Vec<(usize, usize, f64)> = match op.storage() {
        Storage::Dense(a) => {
            let mut t = Vec::new();
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    if a[(i, j)] != 0.0 {
                        t.push((i, j, a[(i, j)]));
                    }
                }
            }
            t
        }
        Storage::Sparse(a) => a.triplets().collect(),
        Storage::Diagonal(d) => d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
    };
    if op.is_transposed() {
        for t in out.iter_mut() {
            *t = (t.1, t.0, t.2);
        }
    }
    out
}

fn block_diag2(op: &Operator) -> Result<Operator> {
    let k = op.nrows();
    let t = triplets_of(op);
    let mut all = t.clone();
    all.extend(t.iter().map(|&(i, j, v)| (i + k, j + k, v)));
    Ok(Operator::sparse(Csc::from_triplets(2 * k, 2 * k, &all)?))
}

fn same_pattern(rng: &mut ChaCha8Rng, base: &Mat) -> Mat {
    let scale = base.amax();
    base.map(|v| if v != 0.0 { scale * (2.0 * rng.random::<f64>() - 1.0) } else { 0.0 })
}

/// Two-player stacking of a CARE-derived problem: `[X1; X2]` is `2m x m`,
/// the second player's factors share the pattern and scale of the first.
pub fn gen_nash(base: &NareProblem, seed: u64) -> Result<NareProblem> {
    if base.kind != ProblemKind::Care {
        return Err(Error::InvalidProblem("Nash stacking needs a CARE-derived problem".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = base.m();
    let (p, q) = (base.p(), base.q());
    // Player one: Bcare = LC, Ccare = RB.
    let b1 = base.lc.clone();
    let c1 = base.rb.clone();
    let b2 = same_pattern(&mut rng, &b1);
    let c2 = same_pattern(&mut rng, &c1);
    let mut lb = Mat::zeros(2 * m, 2 * p);
    lb.view_mut((0, 0), (m, p)).copy_from(&(-c1.transpose()));
    lb.view_mut((m, p), (m, p)).copy_from(&(-c2.transpose()));
    let mut rb = Mat::zeros(2 * p, m);
    rb.view_mut((0, 0), (p, m)).copy_from(&c1);
    rb.view_mut((p, 0), (p, m)).copy_from(&c2);
    let mut lc = Mat::zeros(m, 2 * q);
    lc.view_mut((0, 0), (m, q)).copy_from(&b1);
    lc.view_mut((0, q), (m, q)).copy_from(&b2);
    let mut rc = Mat::zeros(2 * q, 2 * m);
    rc.view_mut((0, 0), (q, m)).copy_from(&b1.transpose());
    rc.view_mut((q, m), (q, m)).copy_from(&b2.transpose());
    let a = block_diag2(&base.a)?;
    let problem = NareProblem::new(a, base.d.clone(), lb, rb, lc, rc)?;
    let mass_m = base.mass_m.as_ref().map(block_diag2).transpose()?;
    problem.with_mass(mass_m, base.mass_n.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn scalar_params(c_alpha: f64, c_beta: f64) -> TransportParams {
        TransportParams { n: 1, c_alpha, c_beta, seed: 0, omega: vec![0.5], c: vec![1.0] }
    }

    #[test]
    fn transport_scalar_examples() {
        let p = gen_transport(&scalar_params(0.5, 1.0)).unwrap();
        assert_eq!(p.kind, ProblemKind::Strengthened);
        let dn = p.to_dense_plain().unwrap();
        assert!((dn.a[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((dn.d[(0, 0)] - 3.0).abs() < 1e-15);
        assert_eq!((dn.b[(0, 0)], dn.c[(0, 0)]), (1.0, 1.0));
        for x in [1.0 / 3.0, 3.0] {
            let (_, r) = p.residual_dense(&Mat::from_element(1, 1, x)).unwrap();
            assert!(r < 1e-14);
        }
        let p = gen_transport(&scalar_params(0.0, 1.0)).unwrap();
        let dn = p.to_dense_plain().unwrap();
        assert!((dn.a[(0, 0)] - 1.0).abs() < 1e-15 && (dn.d[(0, 0)] - 1.0).abs() < 1e-15);
        let (_, r) = p.residual_dense(&Mat::from_element(1, 1, 1.0)).unwrap();
        assert!(r < 1e-14);
        assert!(matches!(
            oracle::schur_stabilizing_solution(&p, &crate::shifts::ShiftPair::real(1.0, 1.0)),
            Err(Error::NoSplitting)
        ));
    }

    #[test]
    fn minimal_form_targets_minimal_solution() {
        let params = scalar_params(0.5, 0.5);
        let raw = transport_problem(&params, TransportForm::Raw).unwrap();
        let neg = transport_problem(&params, TransportForm::Minimal).unwrap();
        assert_eq!(neg.kind, ProblemKind::Strengthened);
        let x = Mat::from_element(1, 1, 0.3);
        let (r1, _) = raw.residual_dense(&x).unwrap();
        let (r2, _) = neg.residual_dense(&x).unwrap();
        assert!((r1 + r2).norm() < 1e-14);
        let s = oracle::schur_stabilizing_solution(&neg, &crate::shifts::ShiftPair::real(1.0, 1.0)).unwrap();
        let xs = s.x_star[(0, 0)];
        let disc = (26.0f64 / 3.0).powi(2) - 4.0;
        assert!((xs - (26.0 / 3.0 - disc.sqrt()) / 2.0).abs() < 1e-12, "{xs}");
        let big = oracle::schur_stabilizing_solution(&raw, &crate::shifts::ShiftPair::real(1.0, 1.0)).unwrap();
        assert!(big.x_star[(0, 0)] > 8.0);
    }

    #[test]
    fn transport_params_checked() {
        let mut p = scalar_params(0.5, 1.0);
        p.c_beta = 0.0;
        assert!(matches!(gen_transport(&p), Err(Error::InvalidParams(_))));
        let mut p = TransportParams::random(5, 0.5, 0.5, 3);
        p.omega.swap(0, 1);
        assert!(p.validate().is_err());
        let p = TransportParams::random(50, 0.5, 0.5, 3);
        p.validate().unwrap();
        assert_eq!(p, TransportParams::random(50, 0.5, 0.5, 3));
    }

    #[test]
    fn transport_large_is_guarded() {
        let p = gen_transport(&TransportParams::random(20000, 0.5, 0.5, 1)).unwrap();
        assert!(matches!(p.to_dense_plain(), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn random_stable_examples() {
        let p = gen_random_stable(1, 1, 1, 1, 1.0, 4).unwrap();
        assert_eq!((p.m(), p.n()), (1, 1));
        let a = gen_random_stable(5, 4, 2, 1, 0.5, 7).unwrap();
        let b = gen_random_stable(5, 4, 2, 1, 0.5, 7).unwrap();
        assert_eq!(a.a.to_dense(), b.a.to_dense());
        assert_eq!(a.lb, b.lb);
        assert_eq!(a.rc, b.rc);
        let p = gen_random_stable(30, 30, 2, 2, 0.2, 11).unwrap();
        let s = oracle::schur_stabilizing_solution(&p, &crate::shifts::ShiftPair::real(1.0, 1.0)).unwrap();
        let (_, r) = p.residual_dense(&s.x_star).unwrap();
        assert!(r <= 1e-10, "{r}");
        assert!(matches!(gen_random_stable(3, 3, 1, 1, 0.0, 1), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn nash_examples() {
        let one = Mat::from_element(1, 1, 1.0);
        let base = crate::problem::from_care(Operator::dense(Mat::from_element(1, 1, -1.0)), one.clone(), one, None).unwrap();
        let s = gen_nash(&base, 1).unwrap();
        assert_eq!((s.m(), s.n()), (2, 1));
        let t = gen_nash(&base, 2).unwrap();
        assert_eq!(s.lb.rows(0, 1), t.lb.rows(0, 1));
        assert_eq!(s.a.to_dense(), t.a.to_dense());
        assert!(s.lb.rows(1, 1) != t.lb.rows(1, 1));
        assert!(gen_nash(&gen_random_stable(2, 2, 1, 1, 1.0, 1).unwrap(), 1).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ac = Mat::from_fn(6, 6, |i, j| if i == j { -3.0 } else { 0.3 * (rng.random::<f64>() - 0.5) });
        let bc = Mat::from_fn(6, 1, |_, _| rng.random::<f64>() - 0.5);
        let cc = Mat::from_fn(1, 6, |_, _| rng.random::<f64>() - 0.5);
        let base = crate::problem::from_care(Operator::dense(ac), bc, cc, None).unwrap();
        let s = gen_nash(&base, 9).unwrap();
        let sol = oracle::schur_stabilizing_solution(&s, &crate::shifts::ShiftPair::real(1.0, 1.0)).unwrap();
        let (_, r) = s.residual_dense(&sol.x_star).unwrap();
        assert!(r < 1e-10, "{r}");
    }
}
