//! Minimal compressed-sparse-column storage.

use crate::error::{Error, Result};
use crate::Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct Csc {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Csc {
    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(trip.len());
        for &(i, j, v) in trip {
            if i >= nrows || j >= ncols {
                return Err(Error::Dimension(format!(
                    "entry ({i},{j}) outside {nrows}x{ncols}"
                )));
            }
            entries.push((j, i, v));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (j, i, v) in entries {
            if last == Some((j, i)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((j, i));
            row_idx.push(i);
            values.push(v);
            col_ptr[j + 1] += 1;
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Csc { nrows, ncols, col_ptr, row_idx, values })
    }

    pub fn from_dense(a: &Mat) -> Self {
        let mut trip = Vec::new();
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                if a[(i, j)] != 0.0 {
                    trip.push((i, j, a[(i, j)]));
                }
            }
        }
        Csc::from_triplets(a.nrows(), a.ncols(), &trip).expect("in-range triplets")
    }

    pub fn identity(n: usize) -> Self {
        Csc {
            nrows: n,
            ncols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }
    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |k| (self.row_idx[k], j, self.values[k]))
        })
    }

    pub fn to_dense(&self) -> Mat {
        let mut a = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            a[(i, j)] += v;
        }
        a
    }

    pub fn transpose(&self) -> Csc {
        let trip: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Csc::from_triplets(self.ncols, self.nrows, &trip).expect("in-range triplets")
    }

    /// `self + s * other`, pattern union.
    pub fn add_scaled(&self, s: f64, other: &Csc) -> Result<Csc> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Dimension("sparse add shape mismatch".into()));
        }
        let mut trip: Vec<_> = self.triplets().collect();
        trip.extend(other.triplets().map(|(i, j, v)| (i, j, s * v)));
        Csc::from_triplets(self.nrows, self.ncols, &trip)
    }

    pub fn scaled(&self, s: f64) -> Csc {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self * x`
    pub fn mul_dense(&self, x: &Mat) -> Mat {
        assert_eq!(self.ncols, x.nrows(), "sparse product shape mismatch");
        let mut y = Mat::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..self.ncols {
                let xj = x[(j, c)];
                if xj == 0.0 {
                    continue;
                }
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    y[(self.row_idx[k], c)] += self.values[k] * xj;
                }
            }
        }
        y
    }

    /// `self^T * x`
    pub fn tr_mul_dense(&self, x: &Mat) -> Mat {
        assert_eq!(self.nrows, x.nrows(), "sparse product shape mismatch");
        let mut y = Mat::zeros(self.ncols, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..self.ncols {
                let mut acc = 0.0;
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    acc += self.values[k] * x[(self.row_idx[k], c)];
                }
                y[(j, c)] = acc;
            }
        }
        y
    }

    pub fn norm1(&self) -> f64 {
        (0..self.ncols)
            .map(|j| self.values[self.col_ptr[j]..self.col_ptr[j + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.nrows];
        for (i, _, v) in self.triplets() {
            rows[i] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}
