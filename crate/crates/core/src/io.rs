//! Matrix Market input and output, convergence CSV logs and key-value
//! configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::Operator;
use crate::radi::ConvergenceRecord;
use crate::shifts::ShiftPair;
use crate::sparse::Csc;
use crate::{Mat, C64};

pub const CSV_HEADER: &str = "iter,dim,nu,alpha_re,alpha_im,beta_re,beta_im,t_shift_s,t_solve_s,t_other_s";

#[derive(Debug, Clone, PartialEq)]
pub enum MmMatrix {
    Sparse(Csc),
    Dense(Mat),
}

impl MmMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MmMatrix::Sparse(a) => (a.nrows(), a.ncols()),
            MmMatrix::Dense(a) => a.shape(),
        }
    }
    pub fn to_dense(&self) -> Mat {
        match self {
            MmMatrix::Sparse(a) => a.to_dense(),
            MmMatrix::Dense(a) => a.clone(),
        }
    }
    pub fn into_operator(self) -> Operator {
        match self {
            MmMatrix::Sparse(a) => Operator::sparse(a),
            MmMatrix::Dense(a) => Operator::dense(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses Matrix Market text in coordinate or array format; symmetric and
/// skew-symmetric storage is expanded.
pub fn parse_matrix_market(text: &str) -> Result<MmMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let toks: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(perr(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let coordinate = match toks[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(perr(1, format!("unsupported format '{f}'"))),
    };
    let pattern = match toks[3].as_str() {
        "real" | "double" | "integer" => false,
        "pattern" if coordinate => true,
        f => return Err(perr(1, format!("unsupported field '{f}'"))),
    };
    let sym = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        s => return Err(perr(1, format!("unsupported symmetry '{s}'"))),
    };
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sl, size) = body.next().ok_or_else(|| perr(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| perr(sl, format!("bad size entry '{t}'"))))
        .collect::<Result<_>>()?;
    let num = |line: usize, t: &str| t.parse::<f64>().map_err(|_| perr(line, format!("bad number '{t}'")));
    if coordinate {
        if dims.len() != 3 {
            return Err(perr(sl, "coordinate size line needs rows, cols, nnz"));
        }
        let (nr, nc, nnz) = (dims[0], dims[1], dims[2]);
        let mut trip = Vec::with_capacity(nnz * if sym == Symmetry::General { 1 } else { 2 });
        let mut count = 0;
        for (ln, l) in body {
            let t: Vec<&str> = l.split_whitespace().collect();
            let need = if pattern { 2 } else { 3 };
            if t.len() < need {
                return Err(perr(ln, "too few fields"));
            }
            let i = t[0].parse::<usize>().map_err(|_| perr(ln, "bad row index"))?;
            let j = t[1].parse::<usize>().map_err(|_| perr(ln, "bad column index"))?;
            if i == 0 || j == 0 || i > nr || j > nc {
                return Err(perr(ln, format!("index ({i},{j}) outside {nr}x{nc}")));
            }
            let v = if pattern { 1.0 } else { num(ln, t[2])? };
            trip.push((i - 1, j - 1, v));
            if i != j {
                match sym {
                    Symmetry::General => {}
                    Symmetry::Symmetric => trip.push((j - 1, i - 1, v)),
                    Symmetry::Skew => trip.push((j - 1, i - 1, -v)),
                }
            }
            count += 1;
        }
        if count != nnz {
            return Err(perr(sl, format!("declared {nnz} entries, found {count}")));
        }
        Ok(MmMatrix::Sparse(Csc::from_triplets(nr, nc, &trip)?))
    } else {
        if dims.len() != 2 {
            return Err(perr(sl, "array size line needs rows, cols"));
        }
        let (nr, nc) = (dims[0], dims[1]);
        let mut vals = Vec::new();
        let mut last = sl;
        for (ln, l) in body {
            for t in l.split_whitespace() {
                vals.push(num(ln, t)?);
            }
            last = ln;
        }
        let mut a = Mat::zeros(nr, nc);
        let mut it = vals.into_iter();
        for j in 0..nc {
            let start = match sym {
                Symmetry::General => 0,
                Symmetry::Symmetric => j,
                Symmetry::Skew => j + 1,
            };
            for i in start..nr {
                let v = it.next().ok_or_else(|| perr(last, "too few array values"))?;
                a[(i, j)] = v;
                if i != j {
                    match sym {
                        Symmetry::General => {}
                        Symmetry::Symmetric => a[(j, i)] = v,
                        Symmetry::Skew => a[(j, i)] = -v,
                    }
                }
            }
        }
        if it.next().is_some() {
            return Err(perr(last, "too many array values"));
        }
        Ok(MmMatrix::Dense(a))
    }
}

pub fn read_matrix_market(path: &Path) -> Result<MmMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_market_array(a: &Mat) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} {}", a.nrows(), a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let _ = writeln!(s, "{}", fmt17(a[(i, j)]));
        }
    }
    s
}

pub fn matrix_market_coordinate(a: &Csc) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {}", i + 1, j + 1, fmt17(v));
    }
    s
}

pub fn write_matrix_market_array(a: &Mat, path: &Path) -> Result<()> {
    Ok(fs::write(path, matrix_market_array(a))?)
}

pub fn write_matrix_market_coordinate(a: &Csc, path: &Path) -> Result<()> {
    Ok(fs::write(path, matrix_market_coordinate(a))?)
}

pub fn convergence_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let vals = [
            r.nu,
            r.shift.alpha.re,
            r.shift.alpha.im,
            r.shift.beta.re,
            r.shift.beta.im,
            r.t_shift_s,
            r.t_solve_s,
            r.t_other_s,
        ];
        let _ = write!(s, "{},{}", r.iter, r.dim);
        for v in vals {
            let _ = write!(s, ",{}", fmt17(v));
        }
        s.push('\n');
    }
    s
}

pub fn write_convergence_csv(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    Ok(fs::write(path, convergence_csv(records))?)
}

pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(perr(1, "unexpected CSV header")),
    }
    let mut out = Vec::new();
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let t: Vec<&str> = l.split(',').collect();
        if t.len() != 10 {
            return Err(perr(ln, format!("expected 10 fields, found {}", t.len())));
        }
        let u = |k: usize| t[k].trim().parse::<usize>().map_err(|_| perr(ln, format!("bad integer '{}'", t[k])));
        let f = |k: usize| t[k].trim().parse::<f64>().map_err(|_| perr(ln, format!("bad number '{}'", t[k])));
        out.push(ConvergenceRecord {
            iter: u(0)?,
            dim: u(1)?,
            nu: f(2)?,
            shift: ShiftPair::user(C64::new(f(3)?, f(4)?), C64::new(f(5)?, f(6)?)),
            t_shift_s: f(7)?,
            t_solve_s: f(8)?,
            t_other_s: f(9)?,
        });
    }
    Ok(out)
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    parse_convergence_csv(&fs::read_to_string(path)?)
}

/// `key = value` lines; `#` starts a comment; keys are case-insensitive and
/// `-`/`_` are interchangeable.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (k, v) = l
            .split_once('=')
            .or_else(|| l.split_once(':'))
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().to_ascii_lowercase().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matrix_market_examples() {
        let a = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.0\n").unwrap();
        assert_eq!(a.to_dense(), Mat::from_element(1, 1, 2.0));
        let s = parse_matrix_market("%%MatrixMarket matrix coordinate pattern symmetric\n% c\n3 3 2\n2 1\n3 3\n").unwrap();
        let d = s.to_dense();
        assert_eq!((d[(1, 0)], d[(0, 1)], d[(2, 2)], d[(0, 0)]), (1.0, 1.0, 1.0, 0.0));
        match parse_matrix_market("%%MatrixMarket tensor coordinate real general\n1 1 1\n1 1 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let arr = parse_matrix_market("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(arr.to_dense(), Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
        let sk = parse_matrix_market("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 4\n").unwrap();
        assert_eq!(sk.to_dense(), Mat::from_row_slice(2, 2, &[0.0, -4.0, 4.0, 0.0]));
    }

    #[test]
    fn matrix_market_round_trip() {
        let a = Mat::from_row_slice(2, 3, &[1.0 / 3.0, -2.5e-300, 0.0, 7.0, f64::MAX, -0.1]);
        assert_eq!(parse_matrix_market(&matrix_market_array(&a)).unwrap().to_dense(), a);
        let c = Csc::from_dense(&a);
        assert_eq!(parse_matrix_market(&matrix_market_coordinate(&c)).unwrap(), MmMatrix::Sparse(c));
    }

    fn rec(iter: usize, nu: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            iter,
            dim: iter,
            nu,
            shift: ShiftPair::user(C64::new(-0.1, 0.2), C64::new(-1.0 / 3.0, -0.2)),
            t_shift_s: 1e-6,
            t_solve_s: 0.25,
            t_other_s: 0.0,
        }
    }

    #[test]
    fn csv_examples() {
        assert_eq!(convergence_csv(&[]), format!("{CSV_HEADER}\n"));
        assert_eq!(convergence_csv(&[rec(1, 0.5)]).lines().count(), 2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        write_convergence_csv(&[rec(1, 0.1), rec(2, 1.0 / 7.0)], &p).unwrap();
        let back = read_convergence_csv(&p).unwrap();
        assert_eq!(back[1].nu.to_bits(), (1.0f64 / 7.0).to_bits());
        assert_eq!(back[0].shift.beta, C64::new(-1.0 / 3.0, -0.2));
    }

    #[test]
    fn config_examples() {
        let c = parse_config("# run\nstrategy = leja\nmax_iter: 40\nTol=1e-10 # tight\n\n").unwrap();
        assert_eq!(c["strategy"], "leja");
        assert_eq!(c["max-iter"], "40");
        assert_eq!(c["tol"], "1e-10");
        assert!(matches!(parse_config("nonsense"), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn csv_nu_round_trips_bit_exactly(vals in proptest::collection::vec(any::<f64>(), 0..20)) {
            let recs: Vec<_> = vals.iter().enumerate().map(|(i, &v)| rec(i, v)).collect();
            let back = parse_convergence_csv(&convergence_csv(&recs)).unwrap();
            prop_assert_eq!(back.len(), recs.len());
            for (a, b) in back.iter().zip(&recs) {
                prop_assert!(a.nu.to_bits() == b.nu.to_bits() || (a.nu.is_nan() && b.nu.is_nan()));
            }
        }
    }
}
