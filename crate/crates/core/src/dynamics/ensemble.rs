use rayon::prelude::*;

use super::evolve::{quantum_jump_trajectory_stream, EvolveOptions, JumpEvent, JumpOperator};
use super::time_dep::TimeDependentOperator;
use super::Result;
use crate::numerics::{SparseOperator, StateVector};

/// Per-time-point statistics of an ensemble of quantum-jump trajectories.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub observable_names: Vec<String>,
    /// means[obs][time]
    pub means: Vec<Vec<f64>>,
    /// population variances across trajectories, variances[obs][time]
    pub variances: Vec<Vec<f64>>,
    pub mean_decay: Vec<f64>,
    /// jump log of every trajectory, indexed by trajectory number
    pub jump_logs: Vec<Vec<JumpEvent>>,
    pub num_trajectories: usize,
    pub master_seed: u64,
}

/// Run `num_trajectories` quantum-jump trajectories with per-trajectory
/// randomness derived from `(master_seed, trajectory index)`; observable
/// expectations are evaluated on the normalized snapshots. Results are
/// independent of worker count and execution order.
pub fn ensemble_run(
    h: &TimeDependentOperator,
    jumps: &[JumpOperator],
    psi0: &StateVector,
    grid: &[f64],
    observables: &[(String, SparseOperator)],
    num_trajectories: usize,
    master_seed: u64,
    opts: &EvolveOptions,
) -> Result<EnsembleStats> {
    assert!(num_trajectories >= 1, "ensemble needs at least one trajectory");
    let runs: Vec<Result<(Vec<Vec<f64>>, Vec<f64>, Vec<JumpEvent>)>> = (0..num_trajectories)
        .into_par_iter()
        .map(|k| {
            let traj =
                quantum_jump_trajectory_stream(h, jumps, psi0, grid, master_seed, k as u64, opts)?;
            let mut series = vec![vec![0.0; grid.len()]; observables.len()];
            for (ti, snap) in traj.snapshots.iter().enumerate() {
                for (oi, (_, op)) in observables.iter().enumerate() {
                    series[oi][ti] = op.expectation(snap)?.re;
                }
            }
            Ok((series, traj.decay_prob, traj.jumps))
        })
        .collect();

    let nt = grid.len();
    let nobs = observables.len();
    let mut means = vec![vec![0.0; nt]; nobs];
    let mut second = vec![vec![0.0; nt]; nobs];
    let mut mean_decay = vec![0.0; nt];
    let mut jump_logs = Vec::with_capacity(num_trajectories);
    for run in runs {
        let (series, decay, jumps) = run?;
        for (oi, s) in series.iter().enumerate() {
            for (ti, v) in s.iter().enumerate() {
                means[oi][ti] += v;
                second[oi][ti] += v * v;
            }
        }
        for (ti, d) in decay.iter().enumerate() {
            mean_decay[ti] += d;
        }
        jump_logs.push(jumps);
    }
    let n = num_trajectories as f64;
    let mut variances = vec![vec![0.0; nt]; nobs];
    for oi in 0..nobs {
        for ti in 0..nt {
            means[oi][ti] /= n;
            variances[oi][ti] = (second[oi][ti] / n - means[oi][ti] * means[oi][ti]).max(0.0);
        }
    }
    for d in &mut mean_decay {
        *d /= n;
    }
    Ok(EnsembleStats {
        times: grid.to_vec(),
        observable_names: observables.iter().map(|(n, _)| n.clone()).collect(),
        means,
        variances,
        mean_decay,
        jump_logs,
        num_trajectories,
        master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve::uniform_grid;
    use crate::dynamics::quantum_jump_trajectory;
    use crate::hilbert::{mode_operator, LadderKind, LatticeBasis, Mode, BH_MODES};

    fn decay_system(gamma: f64) -> (TimeDependentOperator, Vec<JumpOperator>, StateVector, SparseOperator) {
        let basis = LatticeBasis::build(1, &BH_MODES, 1, None).unwrap();
        let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let lower = mode_operator(&basis, 0, Mode::Polariton, LadderKind::Lower).unwrap();
        let number = mode_operator(&basis, 0, Mode::Polariton, LadderKind::Number).unwrap();
        let excited = StateVector::basis_state(basis.dim(), basis.index_of(&[1]).unwrap());
        (h, vec![JumpOperator::constant(lower, gamma)], excited, number)
    }

    #[test]
    fn single_trajectory_ensemble_matches_direct_run() {
        let (h, jumps, psi0, number) = decay_system(1.0e6);
        let grid = uniform_grid(3.0e-6, 60);
        let stats = ensemble_run(
            &h,
            &jumps,
            &psi0,
            &grid,
            &[("n".into(), number.clone())],
            1,
            17,
            &EvolveOptions::default(),
        )
        .unwrap();
        let traj = quantum_jump_trajectory(&h, &jumps, &psi0, &grid, 17, &EvolveOptions::default())
            .unwrap();
        for (ti, snap) in traj.snapshots.iter().enumerate() {
            let n = number.expectation(snap).unwrap().re;
            assert!((stats.means[0][ti] - n).abs() < 1e-12);
        }
        assert_eq!(stats.jump_logs[0], traj.jumps);
    }

    #[test]
    fn zero_rates_have_zero_variance() {
        let basis = LatticeBasis::build(1, &BH_MODES, 1, None).unwrap();
        let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let number = mode_operator(&basis, 0, Mode::Polariton, LadderKind::Number).unwrap();
        let psi0 = StateVector::basis_state(basis.dim(), basis.index_of(&[1]).unwrap());
        let grid = uniform_grid(1.0e-6, 20);
        let stats = ensemble_run(
            &h,
            &[],
            &psi0,
            &grid,
            &[("n".into(), number)],
            16,
            5,
            &EvolveOptions::default(),
        )
        .unwrap();
        for v in &stats.variances[0] {
            assert!(*v < 1e-20);
        }
        for m in &stats.means[0] {
            assert!((m - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ensemble_mean_tracks_exponential_decay() {
        let gamma = 1.0e6;
        let (h, jumps, psi0, number) = decay_system(gamma);
        let grid = uniform_grid(2.0 / gamma, 20);
        let n_traj = 600;
        let stats = ensemble_run(
            &h,
            &jumps,
            &psi0,
            &grid,
            &[("n".into(), number)],
            n_traj,
            2024,
            &EvolveOptions::default(),
        )
        .unwrap();
        // binomial standard error at each point
        for (ti, t) in grid.iter().enumerate() {
            let p = (-gamma * t).exp();
            let se = (p * (1.0 - p) / n_traj as f64).sqrt().max(1e-6);
            assert!(
                (stats.means[0][ti] - p).abs() <= 4.0 * se,
                "t={t:e}: mean {} vs {p} (se {se})",
                stats.means[0][ti]
            );
        }
    }

    #[test]
    fn ensemble_is_deterministic() {
        let (h, jumps, psi0, number) = decay_system(2.0e6);
        let grid = uniform_grid(2.0e-6, 30);
        let a = ensemble_run(&h, &jumps, &psi0, &grid, &[("n".into(), number.clone())], 24, 7, &EvolveOptions::default())
            .unwrap();
        let b = ensemble_run(&h, &jumps, &psi0, &grid, &[("n".into(), number)], 24, 7, &EvolveOptions::default())
            .unwrap();
        assert_eq!(a.means, b.means);
        assert_eq!(a.jump_logs, b.jump_logs);
    }
}
