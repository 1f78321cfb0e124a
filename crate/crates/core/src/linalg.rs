//! Dense symmetric matrices at the parameter dimension (n ≤ ~10): Cholesky,
//! triangular solves, and the sample covariance used for preconditioning.

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

/// Row-major square symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn from_rows(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Config(format!(
                "matrix data length {} does not match dimension {n}",
                data.len()
            )));
        }
        let m = SymMatrix { n, data };
        for i in 0..n {
            for j in 0..i {
                let d = (m.get(i, j) - m.get(j, i)).abs();
                let scale = T::one() + m.get(i, j).abs();
                if d > c::<T>(1e-8) * scale {
                    return Err(Error::LinAlg("matrix is not symmetric".into()));
                }
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        SymMatrix { n, data }
    }

    pub fn scaled_identity(n: usize, s: T) -> Self {
        let mut m = Self::identity(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn matvec(&self, v: &[T], out: &mut [T]) {
        debug_assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            let mut acc = T::zero();
            for j in 0..self.n {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
    }

    /// Lower Cholesky factor; errors if the matrix is not positive definite.
    pub fn cholesky(&self) -> Result<Cholesky<T>> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= T::zero() || !s.is_finite() {
                        return Err(Error::LinAlg(format!(
                            "Cholesky failed at pivot {i} (value {s})"
                        )));
                    }
                    l[i * n + j] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { n, l })
    }
}

/// Lower-triangular Cholesky factor L with L Lᵀ = A.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// out = L v.
    pub fn lower_matvec(&self, v: &[T], out: &mut [T]) {
        for i in 0..self.n {
            let mut acc = T::zero();
            for j in 0..=i {
                acc += self.l[i * self.n + j] * v[j];
            }
            out[i] = acc;
        }
    }

    /// Solves L y = b by forward substitution.
    pub fn forward_solve(&self, b: &[T], out: &mut [T]) {
        for i in 0..self.n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.l[i * self.n + j] * out[j];
            }
            out[i] = acc / self.l[i * self.n + i];
        }
    }

    /// Σ log L_ii = ½ log det A.
    pub fn half_log_det(&self) -> T {
        (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum()
    }
}

/// Sample covariance of `rows` (each of length `dim`), two-pass.
pub fn sample_covariance<T: Scalar>(rows: &[&[T]], dim: usize) -> Result<SymMatrix<T>> {
    let m = rows.len();
    if m < 2 {
        return Err(Error::DegenerateInput(
            "need at least two rows for a covariance".into(),
        ));
    }
    let mut mean = vec![T::zero(); dim];
    for row in rows {
        for (mi, &v) in mean.iter_mut().zip(row.iter()) {
            *mi += v;
        }
    }
    let inv_m = T::one() / c::<T>(m as f64);
    for mi in &mut mean {
        *mi *= inv_m;
    }
    let mut cov = vec![T::zero(); dim * dim];
    for row in rows {
        for i in 0..dim {
            let di = row[i] - mean[i];
            for j in 0..=i {
                cov[i * dim + j] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = T::one() / c::<T>((m - 1) as f64);
    for i in 0..dim {
        for j in 0..=i {
            let v = cov[i * dim + j] * denom;
            cov[i * dim + j] = v;
            cov[j * dim + i] = v;
        }
    }
    SymMatrix::from_rows(dim, cov)
}
