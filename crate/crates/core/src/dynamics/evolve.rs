use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::time_dep::{DrivenParams, OperatorTerm, TimeDependentOperator};
use super::{Coefficient, DynamicsError, Result};
use crate::hilbert::{
    mode_operator, LadderKind, LatticeBasis, Mode, BH_MODES, FULL_MODES,
};
use crate::model::{effective_parameters, AtomCavityParams, ModelError};
use crate::numerics::{KrylovStepOutcome, KrylovStepper, PropagatorOptions, StateVector};
use crate::numerics::SparseOperator;

/// Time profile of a jump rate.
#[derive(Debug, Clone)]
pub enum JumpRate {
    Constant(f64),
    Schedule(super::Schedule),
    /// Γ(t) of the dark polariton under a driven Ω_L.
    EffectiveGamma(DrivenParams),
}

impl JumpRate {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            JumpRate::Constant(v) => *v,
            JumpRate::Schedule(s) => s.value_at(t),
            JumpRate::EffectiveGamma(d) => d.effective_at(t).gamma_pol,
        }
    }
}

/// One collapse channel: the Lindblad unraveling applies `op` at `rate`.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub op: SparseOperator,
    pub rate: JumpRate,
}

impl JumpOperator {
    pub fn constant(op: SparseOperator, rate: f64) -> Self {
        Self { op, rate: JumpRate::Constant(rate) }
    }
}

/// Decay channels of the model on the given basis: per cavity, photon
/// annihilation at Γ_C and collective S14 lowering (atomic emission back to
/// the level-1 manifold) at Γ_4 for the full model; dark-polariton
/// annihilation at Γ for the effective model. Channels with zero rate are
/// omitted.
pub fn build_jump_operators(
    params: &[AtomCavityParams],
    basis: &LatticeBasis,
) -> std::result::Result<Vec<JumpOperator>, ModelError> {
    if params.len() != basis.num_sites() {
        return Err(ModelError::BasisMismatch(format!(
            "{} parameter sets for {} sites",
            params.len(),
            basis.num_sites()
        )));
    }
    let mut out = Vec::new();
    if basis.modes() == FULL_MODES {
        for (site, p) in params.iter().enumerate() {
            p.validate()?;
            if p.gamma_c > 0.0 {
                let a = mode_operator(basis, site, Mode::Photon, LadderKind::Lower)?;
                out.push(JumpOperator::constant(a, p.gamma_c));
            }
            if p.gamma_4 > 0.0 {
                let s14 = mode_operator(basis, site, Mode::S14, LadderKind::Lower)?;
                out.push(JumpOperator::constant(s14, p.gamma_4));
            }
        }
    } else if basis.modes() == BH_MODES {
        for (site, p) in params.iter().enumerate() {
            let eff = effective_parameters(p)?;
            if eff.gamma_pol > 0.0 {
                let pol = mode_operator(basis, site, Mode::Polariton, LadderKind::Lower)?;
                out.push(JumpOperator::constant(pol, eff.gamma_pol));
            }
        }
    } else {
        return Err(ModelError::BasisMismatch(format!(
            "unrecognized mode set {:?}",
            basis.modes()
        )));
    }
    Ok(out)
}

/// A quantum-jump event: output-grid-independent time and channel index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
}

/// Result of one evolution: normalized snapshots on the output grid, the
/// jump log and the cumulative decay probability track.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<StateVector>,
    pub jumps: Vec<JumpEvent>,
    /// 1 - (no-jump norm² track, compounded across jumps), per grid point.
    pub decay_prob: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    pub propagator: PropagatorOptions,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(DynamicsError::BadGrid("output grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|t| !t.is_finite()) {
        return Err(DynamicsError::BadGrid("output grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_initial(psi0: &StateVector, dim: usize) -> Result<()> {
    if psi0.dim() != dim {
        return Err(DynamicsError::BadGrid(format!(
            "initial state dimension {} does not match operator dimension {}",
            psi0.dim(),
            dim
        )));
    }
    psi0.check_finite("initial state")?;
    if (psi0.norm() - 1.0).abs() > 1e-8 {
        return Err(DynamicsError::BadGrid("initial state must be normalized".into()));
    }
    Ok(())
}

/// Uniform output grid [0, t_final] with `points` intervals.
pub fn uniform_grid(t_final: f64, points: usize) -> Vec<f64> {
    let n = points.max(1);
    (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

/// Deterministic Schrödinger evolution under H(t): normalized snapshots,
/// empty jump log, zero decay probability.
pub fn evolve_schrodinger(
    h: &TimeDependentOperator,
    psi0: &StateVector,
    grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    check_grid(grid)?;
    check_initial(psi0, h.dim())?;
    let engine = Engine { h_eff: effective_hamiltonian(h, &[])?, jumps: &[], opts };
    engine.run(psi0.clone().normalized(), grid, None, 0, 0)
}

/// Monte Carlo wavefunction trajectory: no-jump evolution under
/// H_eff = H(t) - (i/2) Σ_k rate_k L_k†L_k, with collapses applied when the
/// squared norm crosses pre-drawn uniform thresholds. Bit-reproducible for a
/// fixed (seed, stream, grid, tolerances).
pub fn quantum_jump_trajectory(
    h: &TimeDependentOperator,
    jumps: &[JumpOperator],
    psi0: &StateVector,
    grid: &[f64],
    seed: u64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    quantum_jump_trajectory_stream(h, jumps, psi0, grid, seed, 0, opts)
}

/// Like [`quantum_jump_trajectory`] with an explicit RNG stream, used by
/// ensembles to derive independent per-trajectory randomness from one seed.
pub fn quantum_jump_trajectory_stream(
    h: &TimeDependentOperator,
    jumps: &[JumpOperator],
    psi0: &StateVector,
    grid: &[f64],
    seed: u64,
    stream: u64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    check_grid(grid)?;
    check_initial(psi0, h.dim())?;
    for j in jumps {
        if j.op.dim() != h.dim() {
            return Err(DynamicsError::BadGrid(format!(
                "jump operator dimension {} does not match {}",
                j.op.dim(),
                h.dim()
            )));
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let engine = Engine { h_eff: effective_hamiltonian(h, jumps)?, jumps, opts };
    engine.run(psi0.clone().normalized(), grid, Some(&mut rng), seed, stream)
}

/// H(t) - (i/2) Σ_k rate_k(t) L_k†L_k as a time-dependent operator.
fn effective_hamiltonian(
    h: &TimeDependentOperator,
    jumps: &[JumpOperator],
) -> Result<TimeDependentOperator> {
    let mut terms: Vec<OperatorTerm> = h.terms().to_vec();
    for j in jumps {
        let ldl = j.op.adjoint().matmul(&j.op)?;
        let coeff = match &j.rate {
            JumpRate::Constant(v) => Coefficient::Constant(*v),
            JumpRate::Schedule(s) => Coefficient::Schedule(s.clone()),
            JumpRate::EffectiveGamma(d) => Coefficient::GammaPol(d.clone()),
        };
        terms.push(OperatorTerm { prefactor: Complex64::new(0.0, -0.5), coeff, op: ldl });
    }
    TimeDependentOperator::new(terms)
}

struct Engine<'a> {
    h_eff: TimeDependentOperator,
    jumps: &'a [JumpOperator],
    opts: &'a EvolveOptions,
}

impl Engine<'_> {
    fn run(
        &self,
        psi0: StateVector,
        grid: &[f64],
        mut rng: Option<&mut ChaCha12Rng>,
        seed: u64,
        stream: u64,
    ) -> Result<Trajectory> {
        let stepper = KrylovStepper::new(self.opts.propagator.clone());
        let mut state = psi0.into_amplitudes();
        let mut survival_base = 1.0f64;
        let mut threshold = rng.as_mut().map(|r| draw_threshold(r));
        let mut jump_log = Vec::new();

        let mut snapshots = Vec::with_capacity(grid.len());
        let mut decay = Vec::with_capacity(grid.len());
        push_snapshot(&state, survival_base, &mut snapshots, &mut decay);

        let mut substeps = 0usize;
        let mut hint = (grid[1] - grid[0]).max(f64::MIN_POSITIVE);
        for window in grid.windows(2) {
            let (t0, t1) = (window[0], window[1]);
            let mut t = t0;
            loop {
                let remaining = t1 - t;
                if remaining <= (t1 - t0) * 1e-14 {
                    break;
                }
                let tau_intend = hint.min(remaining);
                let frozen = self.h_eff.frozen(t + 0.5 * tau_intend);
                let shift = frozen.hermitian_shift();
                match stepper.step(&frozen, &state, shift, remaining, tau_intend, threshold, t)? {
                    KrylovStepOutcome::Advanced { state: s, tau_done, tau_hint } => {
                        state = s;
                        t += tau_done;
                        hint = tau_hint;
                    }
                    KrylovStepOutcome::Crossed { state: s, tau_cross } => {
                        let t_jump = t + tau_cross;
                        let rng_ref = rng.as_mut().expect("threshold implies rng");
                        let u = threshold.expect("crossing implies threshold");
                        state = self.apply_jump(s, t_jump, rng_ref, &mut jump_log)?;
                        survival_base *= u;
                        threshold = Some(draw_threshold(rng_ref));
                        t = t_jump;
                    }
                }
                substeps += 1;
                if substeps > self.opts.propagator.max_substeps {
                    return Err(DynamicsError::Numerics(
                        crate::numerics::NumericsError::StepRejected { t },
                    ));
                }
            }
            push_snapshot(&state, survival_base, &mut snapshots, &mut decay);
        }

        for s in &snapshots {
            s.check_finite("trajectory snapshot")?;
        }
        Ok(Trajectory { times: grid.to_vec(), snapshots, jumps: jump_log, decay_prob: decay, seed, stream })
    }

    fn apply_jump(
        &self,
        pre_jump: Vec<Complex64>,
        t_jump: f64,
        rng: &mut ChaCha12Rng,
        log: &mut Vec<JumpEvent>,
    ) -> Result<Vec<Complex64>> {
        let psi = StateVector::new(pre_jump).normalized();
        let mut weights = Vec::with_capacity(self.jumps.len());
        let mut candidates = Vec::with_capacity(self.jumps.len());
        let mut total = 0.0;
        for j in self.jumps {
            let jumped = j.op.apply(&psi)?;
            let w = j.rate.at(t_jump) * jumped.norm_sqr();
            total += w;
            weights.push(w);
            candidates.push(jumped);
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(DynamicsError::JumpSelection { t: t_jump });
        }
        let r: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if r < acc {
                chosen = k;
                break;
            }
        }
        log.push(JumpEvent { time: t_jump, channel: chosen });
        Ok(candidates.swap_remove(chosen).normalized().into_amplitudes())
    }
}

fn draw_threshold(rng: &mut ChaCha12Rng) -> f64 {
    // uniform on (0, 1]: a threshold of exactly 0 would never fire
    1.0 - rng.random::<f64>()
}

fn push_snapshot(
    state: &[Complex64],
    survival_base: f64,
    snapshots: &mut Vec<StateVector>,
    decay: &mut Vec<f64>,
) {
    let v = StateVector::new(state.to_vec());
    let q = v.norm_sqr();
    decay.push((1.0 - survival_base * q).clamp(0.0, 1.0));
    snapshots.push(v.normalized());
}
