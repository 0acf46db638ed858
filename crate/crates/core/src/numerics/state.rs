use num_complex::Complex64;

use super::{NumericsError, Result};

/// Complex state vector on a finite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn zero(dim: usize) -> Self {
        Self { amps: vec![Complex64::ZERO; dim] }
    }

    /// Unit vector on basis state `index`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn dot(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dot of mismatched dimensions");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amps {
            *a *= c;
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "axpy of mismatched dimensions");
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
        self
    }

    pub fn check_finite(&self, context: &'static str) -> Result<()> {
        if self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            Ok(())
        } else {
            Err(NumericsError::NonFinite { context })
        }
    }
}
