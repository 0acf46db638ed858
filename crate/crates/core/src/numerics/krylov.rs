use num_complex::Complex64;

use super::dense::DenseMatrix;
use super::{LinearOp, NumericsError, Result, SparseOperator, StateVector};

#[derive(Debug, Clone)]
pub struct PropagatorOptions {
    /// Maximum Krylov basis size per step.
    pub krylov_dim: usize,
    /// Local error tolerance per step, relative to the state norm.
    pub tol: f64,
    /// Hard cap on internal substeps of a single `propagate` call.
    pub max_substeps: usize,
    /// Relative tolerance of the norm²-threshold bisection.
    pub bisect_rtol: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self { krylov_dim: 30, tol: 1e-10, max_substeps: 20_000_000, bisect_rtol: 1e-10 }
    }
}

pub enum KrylovStepOutcome {
    /// Advanced by `tau_done ≤ tau_max`; `tau_hint` is the suggested next step.
    Advanced { state: Vec<Complex64>, tau_done: f64, tau_hint: f64 },
    /// The squared norm crossed the threshold at `tau_cross`; `state` is the
    /// (un-normalized) state at the crossing.
    Crossed { state: Vec<Complex64>, tau_cross: f64 },
}

/// Single-step Krylov (Arnoldi) propagator for `exp(-i τ A)` with a real
/// spectral shift and optional norm²-threshold detection. `A` may be
/// non-hermitian with a contractive anti-hermitian part (quantum-jump
/// no-jump evolution).
pub struct KrylovStepper {
    pub opts: PropagatorOptions,
}

struct ArnoldiFactorization {
    basis: Vec<Vec<Complex64>>,
    h: DenseMatrix,
    h_next: f64,
    m: usize,
    beta: f64,
    exact: bool,
}

impl KrylovStepper {
    pub fn new(opts: PropagatorOptions) -> Self {
        Self { opts }
    }

    pub fn step(
        &self,
        op: &dyn LinearOp,
        v: &[Complex64],
        shift: f64,
        tau_max: f64,
        tau_try: f64,
        threshold: Option<f64>,
        t_now: f64,
    ) -> Result<KrylovStepOutcome> {
        assert!(tau_max > 0.0, "step span must be positive");
        let fac = self.arnoldi(op, v, shift)?;
        if fac.beta == 0.0 {
            return Ok(KrylovStepOutcome::Advanced {
                state: vec![Complex64::ZERO; op.dim()],
                tau_done: tau_max,
                tau_hint: tau_max,
            });
        }

        let mut tau = tau_try.min(tau_max).max(tau_max * 1e-12);
        if fac.exact {
            tau = tau_max;
        }
        let tol_abs = self.opts.tol * fac.beta;
        let (coeffs, grew) = loop {
            let (y, err) = self.small_exp_with_error(&fac, tau);
            if fac.exact || err <= tol_abs {
                break (y, err <= 0.25 * tol_abs);
            }
            tau *= 0.5;
            if tau < tau_max * 1e-12 || !tau.is_finite() {
                return Err(NumericsError::StepRejected { t: t_now });
            }
        };

        // Threshold crossing inside the accepted step: bisect in the Krylov space.
        if let Some(u) = threshold {
            let norm_sqr = fac.beta * fac.beta * coeff_norm_sqr(&coeffs);
            if norm_sqr < u {
                let (theta, y_cross) = self.bisect_crossing(&fac, tau, u)?;
                let state = assemble(&fac, &y_cross, shift, theta);
                return Ok(KrylovStepOutcome::Crossed { state, tau_cross: theta });
            }
        }

        let state = assemble(&fac, &coeffs, shift, tau);
        let tau_hint = if grew { tau * 2.0 } else { tau * 1.1 };
        Ok(KrylovStepOutcome::Advanced { state, tau_done: tau, tau_hint })
    }

    fn arnoldi(&self, op: &dyn LinearOp, v: &[Complex64], shift: f64) -> Result<ArnoldiFactorization> {
        let n = op.dim();
        assert_eq!(v.len(), n, "state dimension mismatch");
        let m_max = self.opts.krylov_dim.min(n).max(1);
        let beta = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let mut fac = ArnoldiFactorization {
            basis: Vec::with_capacity(m_max + 1),
            h: DenseMatrix::zeros(m_max + 1),
            h_next: 0.0,
            m: 0,
            beta,
            exact: false,
        };
        if beta == 0.0 {
            return Ok(fac);
        }
        if !beta.is_finite() {
            return Err(NumericsError::NonFinite { context: "krylov input" });
        }
        let inv_beta = Complex64::new(1.0 / beta, 0.0);
        fac.basis.push(v.iter().map(|a| a * inv_beta).collect());

        let mut hscale: f64 = 0.0;
        for j in 0..m_max {
            let mut w = vec![Complex64::ZERO; n];
            op.apply_acc(&fac.basis[j], Complex64::ONE, &mut w);
            if shift != 0.0 {
                let s = Complex64::new(-shift, 0.0);
                for (wk, vk) in w.iter_mut().zip(&fac.basis[j]) {
                    *wk += s * vk;
                }
            }
            // modified Gram-Schmidt; re-orthogonalize only on heavy
            // cancellation ("twice is enough" with the 1/√2 criterion)
            let norm_before = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for (i, b) in fac.basis.iter().enumerate() {
                let c: Complex64 = b.iter().zip(&w).map(|(bi, wi)| bi.conj() * wi).sum();
                if c == Complex64::ZERO {
                    continue;
                }
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk -= c * bk;
                }
                fac.h[(i, j)] += c;
            }
            let norm_after = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm_after < std::f64::consts::FRAC_1_SQRT_2 * norm_before {
                for (i, b) in fac.basis.iter().enumerate() {
                    let c: Complex64 = b.iter().zip(&w).map(|(bi, wi)| bi.conj() * wi).sum();
                    if c == Complex64::ZERO {
                        continue;
                    }
                    for (wk, bk) in w.iter_mut().zip(b) {
                        *wk -= c * bk;
                    }
                    fac.h[(i, j)] += c;
                }
            }
            for i in 0..=j {
                hscale = hscale.max(fac.h[(i, j)].norm());
            }
            let hnext = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            fac.m = j + 1;
            if !hnext.is_finite() {
                return Err(NumericsError::NonFinite { context: "arnoldi recurrence" });
            }
            if hnext <= 1e-13 * hscale.max(f64::MIN_POSITIVE) {
                fac.exact = true;
                fac.h_next = 0.0;
                return Ok(fac);
            }
            if j + 1 == m_max {
                fac.h_next = hnext;
                return Ok(fac);
            }
            fac.h[(j + 1, j)] = Complex64::new(hnext, 0.0);
            let inv = Complex64::new(1.0 / hnext, 0.0);
            fac.basis.push(w.into_iter().map(|a| a * inv).collect());
        }
        unreachable!("arnoldi loop always returns");
    }

    /// exp(-i τ H_m) e₁ together with the a-posteriori error estimate
    /// β·h_{m+1,m}·τ·|e_mᵀ φ₁(-iτH_m) e₁| from the augmented exponential.
    fn small_exp_with_error(&self, fac: &ArnoldiFactorization, tau: f64) -> (Vec<Complex64>, f64) {
        let m = fac.m;
        let aug = m + 1;
        let mut b = DenseMatrix::zeros(aug);
        let z = Complex64::new(0.0, -tau);
        for i in 0..m {
            for j in 0..m {
                b[(i, j)] = z * fac.h[(i, j)];
            }
        }
        b[(0, m)] = Complex64::ONE;
        let e = b.expm();
        let coeffs: Vec<Complex64> = (0..m).map(|i| e[(i, 0)]).collect();
        let phi1_last = e[(m - 1, m)];
        let err = fac.beta * fac.h_next * tau * phi1_last.norm();
        (coeffs, err)
    }

    fn bisect_crossing(
        &self,
        fac: &ArnoldiFactorization,
        tau_hi: f64,
        u: f64,
    ) -> Result<(f64, Vec<Complex64>)> {
        let beta_sqr = fac.beta * fac.beta;
        let mut lo = 0.0f64;
        let mut hi = tau_hi;
        let mut best = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (y, _) = self.small_exp_with_error(fac, mid);
            let q = beta_sqr * coeff_norm_sqr(&y);
            if (q - u).abs() <= self.opts.bisect_rtol * u || (hi - lo) <= 1e-15 * tau_hi {
                best = Some((mid, y));
                break;
            }
            if q > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best.ok_or(NumericsError::BisectionFailed { iterations: 200 })
    }
}

fn coeff_norm_sqr(coeffs: &[Complex64]) -> f64 {
    coeffs.iter().map(|c| c.norm_sqr()).sum()
}

/// β·V·y with the shift phase e^{-i σ τ} restored.
fn assemble(fac: &ArnoldiFactorization, coeffs: &[Complex64], shift: f64, tau: f64) -> Vec<Complex64> {
    let n = fac.basis.first().map(|b| b.len()).unwrap_or(0);
    let phase = Complex64::from_polar(fac.beta, -shift * tau);
    let mut out = vec![Complex64::ZERO; n];
    for (y, b) in coeffs.iter().zip(&fac.basis) {
        let c = phase * y;
        for (o, bk) in out.iter_mut().zip(b) {
            *o += c * bk;
        }
    }
    out
}

/// exp(-i·dt·op)·v for a general (possibly non-hermitian) operator with an
/// explicit spectral shift, substepping adaptively until `dt` is covered.
pub fn propagate(
    op: &dyn LinearOp,
    v: &StateVector,
    dt: f64,
    shift: f64,
    opts: &PropagatorOptions,
) -> Result<StateVector> {
    assert!(dt > 0.0, "propagation span must be positive");
    let stepper = KrylovStepper::new(opts.clone());
    let mut state = v.amplitudes().to_vec();
    let mut t = 0.0;
    let mut hint = dt;
    let mut steps = 0usize;
    while t < dt {
        let remaining = dt - t;
        if remaining <= dt * 1e-14 {
            break;
        }
        match stepper.step(op, &state, shift, remaining, hint.min(remaining), None, t)? {
            KrylovStepOutcome::Advanced { state: s, tau_done, tau_hint } => {
                state = s;
                t += tau_done;
                hint = tau_hint;
            }
            KrylovStepOutcome::Crossed { .. } => unreachable!("no threshold requested"),
        }
        steps += 1;
        if steps > opts.max_substeps {
            return Err(NumericsError::StepRejected { t });
        }
    }
    let out = StateVector::new(state);
    out.check_finite("propagate")?;
    Ok(out)
}

/// exp(-i·H·dt)·v with an automatic diagonal shift.
pub fn propagate_step(
    h: &SparseOperator,
    v: &StateVector,
    dt: f64,
    opts: &PropagatorOptions,
) -> Result<StateVector> {
    if h.dim() != v.dim() {
        return Err(NumericsError::DimensionMismatch { op: h.dim(), vec: v.dim() });
    }
    propagate(h, v, dt, diagonal_shift(h), opts)
}

/// Midpoint of the real diagonal range; a cheap spectral centering.
pub fn diagonal_shift(h: &SparseOperator) -> f64 {
    let diag = h.diagonal();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for d in diag {
        lo = lo.min(d.re);
        hi = hi.max(d.re);
    }
    if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn opts() -> PropagatorOptions {
        PropagatorOptions::default()
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = SparseOperator::zero(4);
        let v = StateVector::new(vec![c(0.5, 0.1), c(0.0, 0.2), c(-0.3, 0.0), c(0.1, -0.4)]);
        let w = propagate_step(&h, &v, 1.0, &opts()).unwrap();
        for (a, b) in w.amplitudes().iter().zip(v.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_phase_evolution() {
        let omega = 2.0e9;
        let dt = 3.0e-9;
        let h = SparseOperator::hermitian_from_triplets(2, vec![(1, 1, c(omega, 0.0))], 0.0).unwrap();
        let v = StateVector::basis_state(2, 1);
        let w = propagate_step(&h, &v, dt, &opts()).unwrap();
        let expected = Complex64::from_polar(1.0, -omega * dt);
        assert!((w.amplitudes()[1] - expected).norm() < 1e-9);
        assert!((w.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_site_rabi_oscillation() {
        // H = J(p1†p2 + h.c.), start at site 1: |amp_1(t)|² = cos²(Jt)
        let j = 2.0e7;
        let h = SparseOperator::hermitian_from_triplets(
            2,
            vec![(0, 1, c(j, 0.0)), (1, 0, c(j, 0.0))],
            0.0,
        )
        .unwrap();
        for jt in [std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
            let t = jt / j;
            let v = StateVector::basis_state(2, 0);
            let w = propagate_step(&h, &v, t, &opts()).unwrap();
            let p1 = w.amplitudes()[0].norm_sqr();
            assert!(
                (p1 - jt.cos().powi(2)).abs() < 1e-9,
                "Jt={jt}: got {p1}, want {}",
                jt.cos().powi(2)
            );
        }
    }

    #[test]
    fn hermitian_norm_preserved_and_steps_compose() {
        // random-ish 6-dim hermitian
        let mut trip = Vec::new();
        for i in 0..6usize {
            trip.push((i, i, c(i as f64 * 1e8, 0.0)));
            if i + 1 < 6 {
                trip.push((i, i + 1, c(3.0e7, 1.0e7)));
                trip.push((i + 1, i, c(3.0e7, -1.0e7)));
            }
        }
        let h = SparseOperator::hermitian_from_triplets(6, trip, 0.0).unwrap();
        let v = StateVector::new((0..6).map(|i| c(1.0 / (i as f64 + 1.0), 0.3)).collect()).normalized();
        let dt = 2.0e-8;
        let one = propagate_step(&h, &v, dt, &opts()).unwrap();
        assert!((one.norm() - 1.0).abs() < 1e-8);
        let half = propagate_step(&h, &v, dt / 2.0, &opts()).unwrap();
        let two = propagate_step(&h, &half, dt / 2.0, &opts()).unwrap();
        for (a, b) in one.amplitudes().iter().zip(two.amplitudes()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn non_hermitian_decay_norm() {
        // H_eff = -i Γ/2 n on a single excited mode: norm² = e^{-Γt}
        let gamma = 1.0e6;
        let heff = SparseOperator::from_triplets(2, vec![(1, 1, c(0.0, -gamma / 2.0))], 0.0);
        let v = StateVector::basis_state(2, 1);
        let t = 2.2 / gamma;
        let w = propagate(&heff, &v, t, 0.0, &opts()).unwrap();
        assert!((w.norm_sqr() - (-gamma * t).exp()).abs() < 1e-9);
    }

    #[test]
    fn threshold_crossing_bisects_exponential() {
        let gamma = 1.0e6;
        let heff = SparseOperator::from_triplets(2, vec![(1, 1, c(0.0, -gamma / 2.0))], 0.0);
        let v = StateVector::basis_state(2, 1);
        let u: f64 = 0.37;
        let stepper = KrylovStepper::new(opts());
        let expect_t = -(u.ln()) / gamma;
        match stepper
            .step(&heff, v.amplitudes(), 0.0, 2.0 * expect_t, 2.0 * expect_t, Some(u), 0.0)
            .unwrap()
        {
            KrylovStepOutcome::Crossed { state, tau_cross } => {
                assert!((tau_cross - expect_t).abs() < 1e-8 * expect_t.max(1e-12));
                let q: f64 = state.iter().map(|a| a.norm_sqr()).sum();
                assert!((q - u).abs() <= 1e-9 * u);
            }
            KrylovStepOutcome::Advanced { .. } => panic!("expected a crossing"),
        }
    }

    #[test]
    fn large_window_with_shift() {
        // stiff diagonal plus coupling; evolution must stay unitary
        let d = 1.0e12;
        let g = 2.0e10;
        let h = SparseOperator::hermitian_from_triplets(
            2,
            vec![(1, 1, c(d, 0.0)), (0, 1, c(g, 0.0)), (1, 0, c(g, 0.0))],
            0.0,
        )
        .unwrap();
        let v = StateVector::basis_state(2, 0);
        let w = propagate_step(&h, &v, 1.0e-8, &opts()).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-8);
        // generalized Rabi: P(0→1) amplitude bounded by (g/Ω_R)², tiny here
        assert!(w.amplitudes()[1].norm_sqr() < 4.0 * (g / d).powi(2) * 1.01);
    }
}
