//! Small dense helpers and a minimal CSR matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest absolute entry of `m - m^T`.
pub fn asymmetry(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Returns `Ok(())` when `m` is square, symmetric to `1e-12` relative and
/// admits a Cholesky factorization.
pub fn check_spd(m: &Mat, what: &'static str) -> Result<()> {
    if !m.is_square() || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotSpd(what));
    }
    let scale = m.amax().max(1.0);
    if asymmetry(m) > 1e-12 * scale {
        return Err(Error::NotSpd(what));
    }
    if m.clone().cholesky().is_none() {
        return Err(Error::NotSpd(what));
    }
    Ok(())
}

/// A frame `E` (columns are frame vectors) that is orthonormal for the SPD
/// metric `h`: `E^T h E = I`. Built from the Cholesky factor `h = L L^T` as
/// `E = L^{-T}`, which is upper triangular with positive diagonal.
pub fn orthonormal_frame(h: &Mat) -> Result<Mat> {
    let chol = h.clone().cholesky().ok_or(Error::NotSpd("metric"))?;
    let l = chol.l();
    let l_inv = l
        .try_inverse()
        .ok_or(Error::Degenerate("singular Cholesky factor".into()))?;
    Ok(l_inv.transpose())
}

/// Eigenvalues of the symmetric matrix `m`, ascending.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Generalized eigenvalues of `(a, b)` with `b` SPD, ascending.
pub fn generalized_sym_eigenvalues(a: &Mat, b: &Mat) -> Result<Vec<f64>> {
    let chol = b.clone().cholesky().ok_or(Error::NotSpd("metric"))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or(Error::Degenerate("singular Cholesky factor".into()))?;
    let reduced = &l_inv * symmetrize(a) * l_inv.transpose();
    Ok(sym_eigenvalues(&reduced))
}

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in the order they appear in `triplets`, so the result is
    /// deterministic for a fixed triplet order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        // Stable bucket by row keeps the original order of duplicates.
        let mut slots = counts.clone();
        let mut buckets = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            buckets[slots[r]] = (c, v);
            slots[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..n_rows {
            let row = &mut buckets[counts[r]..counts[r + 1]];
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.iter().peekable();
            while let Some(&(c, v)) = iter.next() {
                let mut acc = v;
                while let Some(&&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    acc += v2;
                    iter.next();
                }
                col_idx.push(c);
                values.push(acc);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.n_rows
    }

    pub fn ncols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        let mut y = Vector::zeros(self.n_rows);
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &Vector, y: &mut Vector) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> Vector {
        Vector::from_iterator(self.n_rows, (0..self.n_rows).map(|i| self.get(i, i)))
    }

    /// Largest `|a_ij - a_ji|` over the stored pattern.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&self.mul_vec(y))
    }

    /// Entry-wise `self + other` (patterns are merged).
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for m in [self, other] {
            for r in 0..m.n_rows {
                triplets.extend(m.row(r).map(|(c, v)| (r, c, v)));
            }
        }
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, &triplets)
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}
