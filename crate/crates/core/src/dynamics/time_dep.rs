use num_complex::Complex64;

use super::{DynamicsError, Schedule};
use crate::model::{effective_parameters, AtomCavityParams, EffectiveParams};
use crate::numerics::{LinearOp, SparseOperator};

/// Microscopic parameters with the driving laser following a schedule.
#[derive(Debug, Clone)]
pub struct DrivenParams {
    base: AtomCavityParams,
    omega: Schedule,
}

impl DrivenParams {
    pub fn new(base: AtomCavityParams, omega: Schedule) -> Result<Self, DynamicsError> {
        // the closed forms can only fail in t-independent ways (invalid base
        // parameters, Δ = 0 with g24 ≠ 0, or vanishing B); probe the span ends
        for seg in omega.segments() {
            for omega_l in [seg.v_start, seg.v_end] {
                effective_parameters(&AtomCavityParams { omega_l, ..base })
                    .map_err(|e| DynamicsError::Schedule(format!("driven parameters: {e}")))?;
            }
        }
        Ok(Self { base, omega })
    }

    pub fn base(&self) -> &AtomCavityParams {
        &self.base
    }

    pub fn omega(&self) -> &Schedule {
        &self.omega
    }

    pub fn params_at(&self, t: f64) -> AtomCavityParams {
        AtomCavityParams { omega_l: self.omega.value_at(t), ..self.base }
    }

    pub fn effective_at(&self, t: f64) -> EffectiveParams {
        effective_parameters(&self.params_at(t)).expect("validated at construction")
    }
}

/// Scalar time-dependent coefficient of one Hamiltonian term.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Constant(f64),
    Schedule(Schedule),
    /// κ(t) from the closed form under a driven Ω_L.
    Kappa(DrivenParams),
    /// J(t) from the closed form under a driven Ω_L.
    JHop(DrivenParams),
    /// Chemical potential ε g²/B² under a driven Ω_L.
    ChemPot(DrivenParams),
    /// Polariton decay rate Γ(t) under a driven Ω_L.
    GammaPol(DrivenParams),
}

impl Coefficient {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Schedule(s) => s.value_at(t),
            Coefficient::Kappa(d) => d.effective_at(t).kappa,
            Coefficient::JHop(d) => d.effective_at(t).j_hop,
            Coefficient::ChemPot(d) => d.effective_at(t).chem_pot,
            Coefficient::GammaPol(d) => d.effective_at(t).gamma_pol,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Constant(_))
    }
}

/// One term `prefactor · c(t) · op` of a time-dependent operator.
#[derive(Debug, Clone)]
pub struct OperatorTerm {
    pub prefactor: Complex64,
    pub coeff: Coefficient,
    pub op: SparseOperator,
}

impl OperatorTerm {
    pub fn fixed(op: SparseOperator) -> Self {
        Self { prefactor: Complex64::ONE, coeff: Coefficient::Constant(1.0), op }
    }

    pub fn scaled(coeff: Coefficient, op: SparseOperator) -> Self {
        Self { prefactor: Complex64::ONE, coeff, op }
    }
}

/// Sum of scalar-coefficient terms, H(t) = Σ_j pref_j c_j(t) op_j, applied
/// matrix-free after freezing the coefficients at a given time.
#[derive(Debug, Clone)]
pub struct TimeDependentOperator {
    dim: usize,
    terms: Vec<OperatorTerm>,
    /// Real parts of each term's diagonal, for spectral-shift estimates.
    diagonals: Vec<Vec<f64>>,
}

impl TimeDependentOperator {
    pub fn new(terms: Vec<OperatorTerm>) -> Result<Self, DynamicsError> {
        let dim = terms
            .first()
            .map(|t| t.op.dim())
            .ok_or_else(|| DynamicsError::Schedule("operator needs at least one term".into()))?;
        for term in &terms {
            if term.op.dim() != dim {
                return Err(DynamicsError::Schedule(format!(
                    "term dimension {} does not match {}",
                    term.op.dim(),
                    dim
                )));
            }
        }
        let diagonals = terms
            .iter()
            .map(|t| t.op.diagonal().iter().map(|d| d.re).collect())
            .collect();
        Ok(Self { dim, terms, diagonals })
    }

    pub fn fixed(op: SparseOperator) -> Self {
        Self::new(vec![OperatorTerm::fixed(op)]).expect("single-term operator")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_constant())
    }

    pub fn frozen(&self, t: f64) -> FrozenOperator<'_> {
        let weights: Vec<Complex64> =
            self.terms.iter().map(|term| term.prefactor * term.coeff.at(t)).collect();
        FrozenOperator { parent: self, weights }
    }

    /// Assemble the full sparse matrix at time `t`.
    pub fn assemble(&self, t: f64) -> Result<SparseOperator, DynamicsError> {
        let frozen = self.frozen(t);
        let refs: Vec<(Complex64, &SparseOperator)> = frozen
            .weights
            .iter()
            .zip(&self.terms)
            .map(|(w, term)| (*w, &term.op))
            .collect();
        SparseOperator::linear_combination(&refs).map_err(DynamicsError::from)
    }
}

/// Coefficients evaluated at a fixed time; implements matrix-free apply.
pub struct FrozenOperator<'a> {
    parent: &'a TimeDependentOperator,
    weights: Vec<Complex64>,
}

impl FrozenOperator<'_> {
    /// Midpoint of the real diagonal range, used as the Krylov shift.
    pub fn hermitian_shift(&self) -> f64 {
        let dim = self.parent.dim;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..dim {
            let mut d = 0.0;
            for (w, diag) in self.weights.iter().zip(&self.parent.diagonals) {
                d += w.re * diag[i];
            }
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            0.0
        }
    }
}

impl LinearOp for FrozenOperator<'_> {
    fn dim(&self) -> usize {
        self.parent.dim
    }

    fn apply_acc(&self, x: &[Complex64], scale: Complex64, y: &mut [Complex64]) {
        for (w, term) in self.weights.iter().zip(&self.parent.terms) {
            let s = scale * w;
            if s != Complex64::ZERO {
                term.op.apply_acc(x, s, y);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::StateVector;

    #[test]
    fn frozen_apply_matches_assembled() {
        let a = SparseOperator::from_triplets(
            2,
            vec![(0, 1, Complex64::new(1.0, 0.5)), (1, 1, Complex64::new(2.0, 0.0))],
            0.0,
        );
        let b = SparseOperator::identity(2);
        let sched = Schedule::single(super::super::RampKind::Linear, 0.0, 1.0, 0.0, 2.0).unwrap();
        let td = TimeDependentOperator::new(vec![
            OperatorTerm::fixed(a),
            OperatorTerm::scaled(Coefficient::Schedule(sched), b),
        ])
        .unwrap();
        let t = 0.7;
        let assembled = td.assemble(t).unwrap();
        let x = StateVector::new(vec![Complex64::new(0.3, -0.2), Complex64::new(1.0, 0.1)]);
        let direct = assembled.apply(&x).unwrap();
        let mut via_frozen = vec![Complex64::ZERO; 2];
        td.frozen(t).apply_acc(x.amplitudes(), Complex64::ONE, &mut via_frozen);
        for (u, v) in direct.amplitudes().iter().zip(&via_frozen) {
            assert!((u - v).norm() < 1e-14);
        }
    }
}
