use num_complex::Complex64;

use super::{LinearOp, NumericsError, Result, StateVector};

/// Relative tolerance for the hermiticity check on flagged operators.
pub const HERMITICITY_RTOL: f64 = 1e-12;

/// Sparse complex matrix in compressed-row form with a canonical entry
/// layout: entries sorted by row, then column, duplicates accumulated,
/// zeros below the drop tolerance removed. Two operators built from the
/// same entries therefore compare equal field by field.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Build from (row, col, value) triplets in any order.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
        drop_tol: f64,
    ) -> Self {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets
            .into_iter()
            .inspect(|&(r, c, _)| {
                assert!(r < dim && c < dim, "triplet ({r},{c}) out of range for dimension {dim}")
            })
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            if v.norm() > drop_tol {
                cols.push(c as u32);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals, hermitian: false }
    }

    /// Like [`from_triplets`](Self::from_triplets) but verifies hermiticity
    /// and sets the hermitian flag.
    pub fn hermitian_from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
        drop_tol: f64,
    ) -> Result<Self> {
        let mut op = Self::from_triplets(dim, triplets, drop_tol);
        op.flag_hermitian()?;
        Ok(op)
    }

    /// Verify entry(i,j) = conj(entry(j,i)) to relative tolerance and flag.
    pub fn flag_hermitian(&mut self) -> Result<()> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let found = self.max_asymmetry();
        if found <= HERMITICITY_RTOL * scale {
            self.hermitian = true;
            Ok(())
        } else {
            Err(NumericsError::NotHermitian { tol: HERMITICITY_RTOL, found: found / scale })
        }
    }

    /// Largest |a_ij - conj(a_ji)| over all stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                let mirror = self.get(c, r);
                worst = worst.max((self.vals[k] - mirror.conj()).norm());
            }
        }
        worst
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::from_triplets(dim, (0..dim).map(|i| (i, i, Complex64::ONE)), 0.0);
        op.hermitian = true;
        op
    }

    pub fn zero(dim: usize) -> Self {
        let mut op = Self::from_triplets(dim, std::iter::empty(), 0.0);
        op.hermitian = true;
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Stored value at (row, col); zero if not stored.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&(col as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => Complex64::ZERO,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Infinity norm (max absolute row sum); an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.dim != v.dim() {
            return Err(NumericsError::DimensionMismatch { op: self.dim, vec: v.dim() });
        }
        let mut out = StateVector::zero(self.dim);
        self.apply_acc(v.amplitudes(), Complex64::ONE, out.amplitudes_mut());
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let triplets: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        let mut out = Self::from_triplets(self.dim, triplets, 0.0);
        out.hermitian = self.hermitian;
        out
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= c;
        }
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(NumericsError::OperatorMismatch { a: self.dim, b: other.dim });
        }
        let triplets: Vec<_> = self.entries().chain(other.entries()).collect();
        let mut out = Self::from_triplets(self.dim, triplets, 0.0);
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(NumericsError::OperatorMismatch { a: self.dim, b: other.dim });
        }
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let m = self.cols[k] as usize;
                let a = self.vals[k];
                for k2 in other.row_ptr[m]..other.row_ptr[m + 1] {
                    triplets.push((r, other.cols[k2] as usize, a * other.vals[k2]));
                }
            }
        }
        Ok(Self::from_triplets(self.dim, triplets, 0.0))
    }

    /// Sum of scaled operators; flags hermitian when the check passes.
    pub fn linear_combination(terms: &[(Complex64, &SparseOperator)]) -> Result<Self> {
        let dim = terms.first().map(|(_, op)| op.dim()).unwrap_or(0);
        let mut triplets = Vec::new();
        for (c, op) in terms {
            if op.dim() != dim {
                return Err(NumericsError::OperatorMismatch { a: dim, b: op.dim() });
            }
            triplets.extend(op.entries().map(|(r, col, v)| (r, col, *c * v)));
        }
        let mut out = Self::from_triplets(dim, triplets, 0.0);
        let scale = out.max_abs().max(f64::MIN_POSITIVE);
        if out.max_asymmetry() <= HERMITICITY_RTOL * scale {
            out.hermitian = true;
        }
        Ok(out)
    }

    /// Expectation value ⟨v|A|v⟩.
    pub fn expectation(&self, v: &StateVector) -> Result<Complex64> {
        Ok(v.dot(&self.apply(v)?))
    }
}

impl LinearOp for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_acc(&self, x: &[Complex64], scale: Complex64, y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[r] += scale * acc;
        }
    }
}
