//! Dense linear-algebra helpers: complex Schur with reordering, eigenpairs,
//! pivoted orthonormalization and 1-norm condition estimation.

use crate::error::{Error, Result};
use crate::{CMat, Mat, C64};
use nalgebra::DVector;

pub fn to_complex(a: &Mat) -> CMat {
    a.map(|v| C64::new(v, 0.0))
}

pub fn re(a: &CMat) -> Mat {
    a.map(|v| v.re)
}

pub fn im(a: &CMat) -> Mat {
    a.map(|v| v.im)
}

pub fn from_parts(re: &Mat, im: &Mat) -> CMat {
    re.zip_map(im, C64::new)
}

pub fn max_abs_im(a: &CMat) -> f64 {
    a.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
}

pub fn cnorm_fro(a: &CMat) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `a x = b`, `None` when `a` is numerically singular.
pub fn solve(a: &Mat, b: &Mat) -> Option<Mat> {
    if a.nrows() == 0 {
        return Some(b.clone());
    }
    let lu = a.clone().lu();
    let x = lu.solve(b)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

pub fn csolve(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(b.clone());
    }
    let lu = a.clone().lu();
    let x = lu.solve(b)?;
    if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Solves `x a = b`.
pub fn solve_right(b: &Mat, a: &Mat) -> Option<Mat> {
    solve(&a.transpose(), &b.transpose()).map(|x| x.transpose())
}

pub fn csolve_right(b: &CMat, a: &CMat) -> Option<CMat> {
    csolve(&a.transpose(), &b.transpose()).map(|x| x.transpose())
}

pub fn cinv(a: &CMat) -> Option<CMat> {
    csolve(a, &CMat::identity(a.nrows(), a.ncols()))
}

/// Dense 1-norm condition number (small matrices only).
pub fn cond1(a: &Mat) -> f64 {
    match solve(a, &Mat::identity(a.nrows(), a.ncols())) {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

pub fn norm1(a: &Mat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

// rows k, k+1 <- G * rows, G = [[c, s], [-conj(s), c]]
fn rot_rows(a: &mut CMat, k: usize, c: f64, s: C64, from: usize) {
    for j in from..a.ncols() {
        let x = a[(k, j)];
        let y = a[(k + 1, j)];
        a[(k, j)] = x * c + s * y;
        a[(k + 1, j)] = y * c - s.conj() * x;
    }
}

// columns k, k+1 <- cols * G^H
fn rot_cols(a: &mut CMat, k: usize, c: f64, s: C64, upto: usize) {
    for i in 0..upto.min(a.nrows()) {
        let x = a[(i, k)];
        let y = a[(i, k + 1)];
        a[(i, k)] = x * c + s.conj() * y;
        a[(i, k + 1)] = y * c - s * x;
    }
}

/// Householder reduction to upper Hessenberg form, `a = q h q^H`.
fn hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = CMat::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        v[0] += phase * xnorm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // h <- (I - 2 v v^H / |v|^2) h
        for j in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (t, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + t, j)];
            }
            let f = dot * (2.0 / vnorm2);
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * f;
            }
        }
        // h <- h (I - 2 v v^H / |v|^2), same for q
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for (t, vi) in v.iter().enumerate() {
                    dot += mat[(i, k + 1 + t)] * vi;
                }
                let f = dot * (2.0 / vnorm2);
                for (t, vi) in v.iter().enumerate() {
                    mat[(i, k + 1 + t)] -= f * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Complex Schur decomposition `a = q t q^H` with `t` upper triangular.
pub fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidParams("non-finite matrix in eigensolver".into()));
    }
    let (mut t, mut q) = hessenberg(a);
    if n <= 1 {
        return Ok((t, q));
    }
    let eps = f64::EPSILON;
    let anorm = cnorm_fro(a).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let scale = t[(lo, lo)].norm() + t[(lo - 1, lo - 1)].norm();
            if sub <= eps * scale || sub <= eps * 1e-3 * anorm {
                t[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return Err(Error::InvalidParams("eigensolver failed to converge".into()));
        }
        let mu = if iter % 11 == 0 {
            t[(hi, hi)] + C64::new(t[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            let a11 = t[(hi - 1, hi - 1)];
            let a12 = t[(hi - 1, hi)];
            let a21 = t[(hi, hi - 1)];
            let a22 = t[(hi, hi)];
            let half = (a11 - a22) * 0.5;
            let disc = (half * half + a12 * a21).sqrt();
            let m1 = (a11 + a22) * 0.5 + disc;
            let m2 = (a11 + a22) * 0.5 - disc;
            if (m1 - a22).norm() <= (m2 - a22).norm() { m1 } else { m2 }
        };
        let mut x = t[(lo, lo)] - mu;
        let mut y = t[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = t[(k, k - 1)];
                y = t[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let from = if k > lo { k - 1 } else { k };
            rot_rows(&mut t, k, c, s, from);
            if k > lo {
                t[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
            rot_cols(&mut t, k, c, s, (k + 3).min(hi + 1));
            rot_cols(&mut q, k, c, s, n);
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((t, q))
}

/// Moves the diagonal entries satisfying `select` to the leading block.
/// Returns the number of selected eigenvalues.
pub fn reorder_schur(t: &mut CMat, q: &mut CMat, select: &dyn Fn(C64) -> bool) -> usize {
    let n = t.nrows();
    let mut ks = 0;
    for j in 0..n {
        if select(t[(j, j)]) {
            let mut k = j;
            while k > ks {
                swap_adjacent(t, q, k - 1);
                k -= 1;
            }
            ks += 1;
        }
    }
    ks
}

fn swap_adjacent(t: &mut CMat, q: &mut CMat, k: usize) {
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let (c, s) = givens(t[(k, k + 1)], t22 - t11);
    let n = t.nrows();
    rot_rows(t, k, c, s, k);
    rot_cols(t, k, c, s, k + 2);
    rot_cols(q, k, c, s, n);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    t[(k + 1, k)] = C64::new(0.0, 0.0);
}

/// Eigenvalues and unit-norm eigenvectors (columns) of a complex matrix.
pub fn eig(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = a.nrows();
    let (t, q) = schur(a)?;
    let tnorm = cnorm_fro(&t).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut v = CMat::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            x[i] = -acc / den;
        }
        let y = &q * DVector::from_vec(x);
        let nrm = y.norm();
        v.set_column(k, &(y / C64::new(nrm, 0.0)));
    }
    let vals = (0..n).map(|k| t[(k, k)]).collect();
    Ok((vals, v))
}

/// Eigenpairs of a real matrix; eigenvalues are cleaned so that real
/// eigenvalues are exactly real and complex ones come in exact conjugate pairs.
pub fn eig_real(a: &Mat) -> Result<(Vec<C64>, CMat)> {
    let (mut vals, vecs) = eig(&to_complex(a))?;
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let n = vals.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        done[i] = true;
        if vals[i].im.abs() <= tol {
            vals[i].im = 0.0;
            continue;
        }
        let target = vals[i].conj();
        let partner = (0..n)
            .filter(|&j| !done[j] && vals[j].im.abs() > tol && vals[j].im.signum() != vals[i].im.signum())
            .min_by(|&x, &y| (vals[x] - target).norm().total_cmp(&(vals[y] - target).norm()));
        if let Some(j) = partner {
            done[j] = true;
            let avg = (vals[i] + vals[j].conj()) * 0.5;
            vals[i] = avg;
            vals[j] = avg.conj();
        }
    }
    Ok((vals, vecs))
}

pub fn eigvals_real(a: &Mat) -> Result<Vec<C64>> {
    Ok(eig_real(a)?.0)
}

/// Orthonormal basis of the column space by pivoted modified Gram-Schmidt
/// with two passes; columns whose remaining norm drops below
/// `drop_rel * (largest column norm)` are discarded.
pub fn orth_columns(x: &Mat, drop_rel: f64) -> Mat {
    let m = x.nrows();
    let mut work: Vec<DVector<f64>> = (0..x.ncols()).map(|j| x.column(j).into_owned()).collect();
    let largest = work.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tol = drop_rel * largest;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    if largest == 0.0 {
        return Mat::zeros(m, 0);
    }
    while !work.is_empty() {
        let (idx, nrm) = work
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if nrm <= tol {
            break;
        }
        let mut v = work.swap_remove(idx);
        for _ in 0..2 {
            for b in &basis {
                let d = b.dot(&v);
                v.axpy(-d, b, 1.0);
            }
        }
        let vn = v.norm();
        if vn <= tol {
            continue;
        }
        v /= vn;
        for w in work.iter_mut() {
            let d = v.dot(w);
            w.axpy(-d, &v, 1.0);
        }
        basis.push(v);
        if basis.len() == m {
            break;
        }
    }
    let mut q = Mat::zeros(m, basis.len());
    for (j, b) in basis.iter().enumerate() {
        q.set_column(j, b);
    }
    q
}

/// Hager-Higham estimate of `||K^{-1}||_1` from solves with `K` and `K^T`.
pub fn inv_norm1_estimate(
    n: usize,
    mut solve: impl FnMut(&mut Mat),
    mut solve_t: impl FnMut(&mut Mat),
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut x = Mat::from_element(n, 1, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        solve(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let new_est: f64 = x.iter().map(|v| v.abs()).sum();
        let mut xi = x.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        solve_t(&mut xi);
        if xi.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let (j, zmax) = xi
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let ztx: f64 = xi.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        if new_est <= est || zmax <= ztx {
            est = est.max(new_est);
            break;
        }
        est = new_est;
        x = Mat::zeros(n, 1);
        x[(j, 0)] = 1.0;
    }
    // alternating-sign probe guards against unlucky starting vectors
    let mut y = Mat::from_fn(n, 1, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
    });
    solve(&mut y);
    let alt = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
    if !alt.is_finite() {
        return f64::INFINITY;
    }
    est.max(alt)
}

/// Smallest enclosing disk of a point set (Welzl, iterative form).
pub fn enclosing_disk(points: &[C64]) -> (C64, f64) {
    if points.is_empty() {
        return (C64::new(0.0, 0.0), 0.0);
    }
    let pts = points.to_vec();
    let inside = |c: C64, r: f64, p: C64| (p - c).norm() <= r * (1.0 + 1e-12) + 1e-14;
    let mut c = pts[0];
    let mut r = 0.0;
    for i in 1..pts.len() {
        if inside(c, r, pts[i]) {
            continue;
        }
        c = pts[i];
        r = 0.0;
        for j in 0..i {
            if inside(c, r, pts[j]) {
                continue;
            }
            c = (pts[i] + pts[j]) * 0.5;
            r = (pts[i] - c).norm();
            for k in 0..j {
                if inside(c, r, pts[k]) {
                    continue;
                }
                let (cc, rr) = circumcircle(pts[i], pts[j], pts[k]);
                c = cc;
                r = rr;
            }
        }
    }
    (c, r)
}

fn circumcircle(a: C64, b: C64, c: C64) -> (C64, f64) {
    let bx = b - a;
    let cx = c - a;
    let d = 2.0 * (bx.re * cx.im - bx.im * cx.re);
    if d.abs() < 1e-300 {
        // collinear: use the farthest pair
        let cands = [(a, b), (a, c), (b, c)];
        let (p, q) = cands
            .iter()
            .copied()
            .max_by(|x, y| (x.0 - x.1).norm().total_cmp(&(y.0 - y.1).norm()))
            .unwrap();
        let ctr = (p + q) * 0.5;
        return (ctr, (p - ctr).norm());
    }
    let b2 = bx.norm_sqr();
    let c2 = cx.norm_sqr();
    let ux = (cx.im * b2 - bx.im * c2) / d;
    let uy = (bx.re * c2 - cx.re * b2) / d;
    let u = C64::new(ux, uy);
    (a + u, u.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rand_mat(n: usize, seed: u64) -> Mat {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Mat::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn schur_reconstructs() {
        let a = to_complex(&rand_mat(12, 3));
        let (t, q) = schur(&a).unwrap();
        let back = &q * &t * q.adjoint();
        assert!(cnorm_fro(&(back - &a)) < 1e-12 * cnorm_fro(&a));
        let qq = q.adjoint() * &q - CMat::identity(12, 12);
        assert!(cnorm_fro(&qq) < 1e-12);
    }

    #[test]
    fn reorder_moves_stable_block_first() {
        let a = to_complex(&rand_mat(10, 5));
        let (mut t, mut q) = schur(&a).unwrap();
        let k = reorder_schur(&mut t, &mut q, &|z| z.re < 0.0);
        for i in 0..10 {
            assert_eq!(t[(i, i)].re < 0.0, i < k);
        }
        let back = &q * &t * q.adjoint();
        assert!(cnorm_fro(&(back - &a)) < 1e-12 * cnorm_fro(&a));
    }

    #[test]
    fn real_eigenvalues_pair_up() {
        let a = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let (vals, vecs) = eig_real(&a).unwrap();
        assert_eq!(vals[0], vals[1].conj());
        assert!((vals[0].im.abs() - 1.0).abs() < 1e-14);
        let ac = to_complex(&a);
        for k in 0..2 {
            let r = &ac * vecs.column(k) - vecs.column(k) * vals[k];
            assert!(r.norm() < 1e-13);
        }
    }

    #[test]
    fn hamiltonian_scalar_eigenvalues() {
        let h = Mat::from_row_slice(2, 2, &[2.0, -1.0, 1.0, -2.0]);
        let mut vals = eigvals_real(&h).unwrap();
        vals.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((vals[0].re + 3f64.sqrt()).abs() < 1e-14);
        assert!((vals[1].re - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orth_drops_duplicates() {
        let x = Mat::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 1.0, 0.0, 0.0, 1.0]);
        let q = orth_columns(&x, 1e-12);
        assert_eq!(q.ncols(), 2);
        assert!((q.transpose() * &q - Mat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn condition_estimate_is_close() {
        let a = rand_mat(15, 9) + Mat::identity(15, 15) * 0.1;
        let lu = a.clone().lu();
        let at = a.transpose();
        let lut = at.lu();
        let est = inv_norm1_estimate(15, |x| *x = lu.solve(x).unwrap(), |x| *x = lut.solve(x).unwrap());
        let exact = norm1(&a.clone().try_inverse().unwrap());
        assert!(est <= exact * (1.0 + 1e-12) && est >= exact / 10.0);
    }

    #[test]
    fn disks() {
        let (c, r) = enclosing_disk(&[C64::new(-3.0, 0.0), C64::new(-1.0, 0.0)]);
        assert!((c - C64::new(-2.0, 0.0)).norm() < 1e-15 && (r - 1.0).abs() < 1e-15);
        let (c, r) = enclosing_disk(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0)]);
        assert!(c.norm() < 1e-14 && (r - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn disk_encloses_all(pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12)) {
            let pts: Vec<C64> = pts.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            let (c, r) = enclosing_disk(&pts);
            for p in &pts {
                prop_assert!((p - c).norm() <= r * (1.0 + 1e-9) + 1e-12);
            }
        }

        #[test]
        fn eigenpairs_satisfy_definition(seed in 0u64..500, n in 1usize..9) {
            let a = rand_mat(n, seed);
            let (vals, vecs) = eig_real(&a).unwrap();
            let ac = to_complex(&a);
            for k in 0..n {
                let r = &ac * vecs.column(k) - vecs.column(k) * vals[k];
                prop_assert!(r.norm() < 1e-9 * (1.0 + a.norm()));
            }
        }
    }
}
