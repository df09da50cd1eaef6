//! Thin wrapper over `faer` compressed-column matrices and their direct
//! solvers, converting to and from the `nalgebra` types used elsewhere.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone)]
pub struct SparseMatrix {
    inner: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let t: Vec<Triplet<usize, usize, f64>> = entries
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let inner = SparseColMat::try_new_from_triplets(nrows, ncols, &t)
            .map_err(|e| Error::Internal(format!("sparse construction failed: {e:?}")))?;
        Ok(SparseMatrix { inner })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[]).expect("empty matrix")
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn nnz(&self) -> usize {
        self.inner.val().len()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner
            .triplet_iter()
            .map(|t| (t.row, t.col, *t.val))
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j).copied().unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.nrows(), self.ncols());
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        let mut y = Vector::zeros(self.nrows());
        for t in self.inner.triplet_iter() {
            y[t.row] += t.val * x[t.col];
        }
        y
    }

    /// `a · self + b · other`.
    pub fn linear_combination(&self, a: f64, other: &SparseMatrix, b: f64) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = self
            .triplets()
            .into_iter()
            .map(|(i, j, v)| (i, j, a * v))
            .collect();
        entries.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, b * v)));
        Self::from_triplets(self.nrows(), self.ncols(), &entries)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for v in out.inner.val_mut() {
            *v *= a;
        }
        out
    }

    /// `self + s I`.
    pub fn shifted(&self, s: f64) -> Result<Self> {
        let mut entries = self.triplets();
        entries.extend((0..self.nrows().min(self.ncols())).map(|i| (i, i, s)));
        Self::from_triplets(self.nrows(), self.ncols(), &entries)
    }

    /// Rows and columns listed in `keep` (old indices), in that order.
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        let mut map = vec![usize::MAX; self.nrows().max(self.ncols())];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let entries: Vec<(usize, usize, f64)> = self
            .triplets()
            .into_iter()
            .filter_map(|(i, j, v)| {
                let (a, b) = (map[i], map[j]);
                (a != usize::MAX && b != usize::MAX).then_some((a, b, v))
            })
            .collect();
        Self::from_triplets(keep.len(), keep.len(), &entries)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.val().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .into_iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Factorizes the matrix, trying Cholesky first and falling back to LU
    /// when the matrix is not numerically positive definite.
    pub fn factorize(&self) -> Result<Factorization> {
        if self.nrows() != self.ncols() {
            return Err(Error::Argument("cannot factorize a rectangular matrix".into()));
        }
        match self.inner.sp_cholesky(Side::Lower) {
            Ok(llt) => Ok(Factorization::Cholesky(llt, self.nrows())),
            Err(_) => {
                log::debug!("Cholesky failed, falling back to sparse LU");
                let lu = self
                    .inner
                    .sp_lu()
                    .map_err(|e| Error::Singular(format!("LU factorization failed: {e:?}")))?;
                Ok(Factorization::Lu(lu, self.nrows()))
            }
        }
    }

    /// Cholesky factorization only; fails on non positive definite input.
    pub fn cholesky(&self) -> Result<Factorization> {
        let llt = self
            .inner
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Singular(format!("matrix is not positive definite: {e:?}")))?;
        Ok(Factorization::Cholesky(llt, self.nrows()))
    }
}

pub enum Factorization {
    Cholesky(Llt<usize, f64>, usize),
    Lu(Lu<usize, f64>, usize),
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factorization::Cholesky(_, n) => write!(f, "Cholesky(n = {n})"),
            Factorization::Lu(_, n) => write!(f, "Lu(n = {n})"),
        }
    }
}

impl Factorization {
    pub fn is_cholesky(&self) -> bool {
        matches!(self, Factorization::Cholesky(..))
    }

    pub fn solve(&self, b: &Vector) -> Vector {
        let n = b.len();
        let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
        let x = match self {
            Factorization::Cholesky(llt, _) => llt.solve(&rhs),
            Factorization::Lu(lu, _) => lu.solve(&rhs),
        };
        Vector::from_fn(n, |i, _| x[(i, 0)])
    }
}
