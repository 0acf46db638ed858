//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities (run with `-- --nocapture` to see the lines
//! for passing criteria too).
//!
//! Two sub-clauses are measured against bounds that the pinned parameter
//! sets cannot meet; those tests report the precise measured value and fail
//! honestly instead of loosening the threshold (see the criterion 3 decay
//! clause and the criterion 4 start-ratio clause).

use polariton_cli::load_and_run;
use polariton_cli::scenario::derive_rows;
use polariton_cli::config::ScenarioConfig;
use polariton_cli::load_config_text;

use polariton_core::analysis::{model_observables, NumberProbe};
use polariton_core::dynamics::{
    ensemble_run, evolve_schrodinger, quantum_jump_trajectory, uniform_grid, EvolveOptions,
    JumpOperator, TimeDependentOperator,
};
use polariton_core::hilbert::{
    mode_operator, CouplingGraph, LadderKind, LatticeBasis, Mode, BH_MODES, FULL_MODES,
};
use polariton_core::model::{
    effective_bh_hamiltonian, effective_parameters, full_hamiltonian, polariton_operators,
    AtomCavityParams,
};
use polariton_core::numerics::{lowest_eigenpair, SparseOperator, StateVector};
use num_complex::Complex64;

/// Collects (label, ok, detail) and panics at the end if anything failed,
/// after printing every clause.
struct Criterion {
    name: &'static str,
    clauses: Vec<(String, bool)>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self { name, clauses: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.clauses.push((detail, ok));
    }

    fn finish(self) {
        let ok = self.clauses.iter().all(|(_, ok)| *ok);
        let status = if ok { "PASS" } else { "FAIL" };
        println!("acceptance {}: {status}", self.name);
        for (detail, clause_ok) in &self.clauses {
            println!("    [{}] {detail}", if *clause_ok { "ok" } else { "FAILED" });
        }
        assert!(ok, "acceptance {} failed; see clause list above", self.name);
    }
}

fn reference_params() -> AtomCavityParams {
    AtomCavityParams {
        g13: 2.5e9,
        g24: 2.5e9,
        omega_l: 2.5e11,
        delta: 1.0e12,
        big_delta: -1.0e11,
        epsilon: 0.0,
        n_atoms: 10_000,
        hop2wca: 0.4e8,
        gamma_c: 0.4e5,
        gamma_4: 1.6e7,
    }
}

fn column<'a>(out: &'a polariton_cli::scenario::ScenarioOutput, name: &str) -> &'a [f64] {
    &out
        .columns
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("column {name} missing"))
        .values
}

/// Criterion 1 — effective-parameter closed forms at the reference set.
#[test]
fn acceptance_01_effective_parameter_closed_forms() {
    let mut cr = Criterion::new("01 effective-parameter closed forms");
    let eff = effective_parameters(&reference_params()).unwrap();
    let kappa_err = (eff.kappa - 1.6e7).abs() / 1.6e7;
    let j_err = (eff.j_hop - 2.0e7).abs() / 2.0e7;
    cr.check(
        kappa_err < 0.03,
        format!("kappa = {:.6e} within 3% of 1.6e7 (rel err {:.3e})", eff.kappa, kappa_err),
    );
    cr.check(
        j_err < 0.01,
        format!("j_hop = {:.6e} within 1% of 2.0e7 (rel err {:.3e})", eff.j_hop, j_err),
    );
    // and through the CLI derive path
    let cfg = ScenarioConfig::parse(&load_config_text("fig3-dynamics").unwrap()).unwrap();
    let rows = derive_rows(&cfg).unwrap();
    let get = |n: &str| rows.iter().find(|(name, _, _)| name == n).unwrap().1;
    cr.check(
        (get("kappa") - eff.kappa).abs() == 0.0 && (get("j_hop") - eff.j_hop).abs() == 0.0,
        "derive reports the same closed-form values".to_string(),
    );
    cr.finish();
}

/// Criterion 2 — polariton transformation diagonalizes the single-cavity
/// single-excitation block.
#[test]
fn acceptance_02_polariton_diagonalization() {
    let mut cr = Criterion::new("02 polariton diagonalization");
    let p = AtomCavityParams { g24: 0.0, epsilon: 0.0, ..reference_params() };
    let eff = effective_parameters(&p).unwrap();
    let scale = eff.a_freq;

    // eigenvalues of the single-excitation sector
    let sector = LatticeBasis::build(1, &FULL_MODES, 2, Some(1)).unwrap();
    let h1 = full_hamiltonian(&[p], &CouplingGraph::chain(1), &sector).unwrap();
    let pairs = lowest_eigenpair(&h1, 3).unwrap();
    let mut got: Vec<f64> = pairs.iter().map(|(l, _)| *l).collect();
    let mut expect = [eff.mu_plus, eff.mu0, eff.mu_minus];
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (g, e) in got.iter().zip(expect) {
        cr.check(
            (g - e).abs() <= 1e-9 * scale,
            format!("eigenvalue {g:.9e} matches {e:.9e} to 1e-9 relative"),
        );
    }

    // the Eq-(7)-convention vectors are eigenvectors
    let basis = LatticeBasis::build(1, &FULL_MODES, 2, None).unwrap();
    let h = full_hamiltonian(&[p], &CouplingGraph::chain(1), &basis).unwrap();
    let vac = StateVector::basis_state(basis.dim(), basis.index_of(&[0, 0, 0, 0]).unwrap());
    let (p0, pp, pm) = polariton_operators(&p, &basis, 0).unwrap();
    for (tag, op, mu) in
        [("p0", &p0, eff.mu0), ("p+", &pp, eff.mu_minus), ("p-", &pm, eff.mu_plus)]
    {
        let v = op.apply(&vac).unwrap();
        let mut resid = h.apply(&v).unwrap();
        resid.axpy(Complex64::new(-mu, 0.0), &v);
        let r = resid.norm() / scale;
        cr.check(r <= 1e-9, format!("{tag}†|vac⟩ eigenvector residual {r:.3e} ≤ 1e-9"));
    }
    cr.finish();
}

/// Criterion 3 — fig3 reproduction: model deviations below 1e-3 and the
/// cumulative decay probability clause (which the pinned parameters exceed;
/// see the printed arithmetic).
#[test]
fn acceptance_03_fig3_reproduction() {
    let mut cr = Criterion::new("03 fig3 reproduction");
    let (_, _, out) = load_and_run("fig3-dynamics", &[]).unwrap();
    let comparison = out.comparison.as_ref().expect("both-model run");
    cr.check(
        comparison.max_abs_dn < 1e-3,
        format!("max |dn_l| = {:.3e} < 1e-3", comparison.max_abs_dn),
    );
    cr.check(
        comparison.max_abs_ddelta < 1e-3,
        format!("max |ddelta_l| = {:.3e} < 1e-3", comparison.max_abs_ddelta),
    );
    let decay = *column(&out, "decay_prob_full").last().unwrap();
    cr.check(
        decay < 2e-3,
        format!(
            "cumulative decay probability {decay:.4e} < 2e-3 \
             (closed form 1-exp(-gamma_c*<n_ph>*T) = 2.397e-3 for the pinned window; \
             the bound is unattainable by 20%)"
        ),
    );
    let full = out.full.as_ref().unwrap();
    let n2_start = full.observables.n[1].values[0];
    cr.check(
        (n2_start - 1.0).abs() < 1e-9,
        format!("initial polariton sits in cavity 2 (n_2(0) = {n2_start:.9})"),
    );
    cr.finish();
}

/// Criterion 7 — stochastic-unraveling oracle: jump-time distribution
/// against the (truncated) exponential law and the ensemble-mean excitation
/// against e^{-Γt}.
#[test]
fn acceptance_07_stochastic_unraveling_oracle() {
    let mut cr = Criterion::new("07 stochastic unraveling oracle");
    let gamma = 1.0e6;
    let t_final = 5.0 / gamma;
    let basis = LatticeBasis::build(1, &BH_MODES, 1, None).unwrap();
    let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
    let lower = mode_operator(&basis, 0, Mode::Polariton, LadderKind::Lower).unwrap();
    let number = mode_operator(&basis, 0, Mode::Polariton, LadderKind::Number).unwrap();
    let jumps = vec![JumpOperator::constant(lower, gamma)];
    let excited = StateVector::basis_state(basis.dim(), basis.index_of(&[1]).unwrap());
    let grid = uniform_grid(t_final, 100);
    let n_traj = 10_000;
    let stats = ensemble_run(
        &h,
        &jumps,
        &excited,
        &grid,
        &[("n".into(), number)],
        n_traj,
        20_240_817,
        &EvolveOptions::default(),
    )
    .unwrap();

    // Kolmogorov-Smirnov against the window-truncated Exponential(gamma)
    let mut jump_times: Vec<f64> = stats
        .jump_logs
        .iter()
        .filter_map(|log| log.first().map(|e| e.time))
        .collect();
    jump_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = jump_times.len();
    cr.check(n >= 9_000, format!("{n} of {n_traj} trajectories jumped inside the window"));
    let total_mass = 1.0 - (-gamma * t_final).exp();
    let cdf = |t: f64| (1.0 - (-gamma * t).exp()) / total_mass;
    let mut d: f64 = 0.0;
    for (i, t) in jump_times.iter().enumerate() {
        let f = cdf(*t);
        d = d.max((f - i as f64 / n as f64).abs());
        d = d.max(((i + 1) as f64 / n as f64 - f).abs());
    }
    let critical = 1.628 / (n as f64).sqrt(); // alpha = 0.01
    cr.check(
        d < critical,
        format!("KS statistic {d:.5} < {critical:.5} (1% level, n = {n})"),
    );

    // ensemble mean excitation vs e^{-Γt} within 3 binomial standard errors
    for target in [0.5, 1.0, 2.0, 3.0] {
        let idx = grid
            .iter()
            .position(|t| *t >= target / gamma)
            .unwrap();
        let p = (-gamma * grid[idx]).exp();
        let se = (p * (1.0 - p) / n_traj as f64).sqrt();
        let mean = stats.means[0][idx];
        cr.check(
            (mean - p).abs() <= 3.0 * se,
            format!(
                "mean excitation at Γt = {:.2}: {mean:.5} vs {p:.5} (|diff| = {:.2} se)",
                gamma * grid[idx],
                (mean - p).abs() / se
            ),
        );
    }
    cr.finish();
}

/// Criterion 8 — invariant suite at the stated tolerances.
#[test]
fn acceptance_08_invariant_suite() {
    let mut cr = Criterion::new("08 invariant suite");
    let p = reference_params();

    // bosonic commutators of the polariton species, restricted below the
    // cutoff edge; artifacts vanish when the cutoff is raised
    {
        let mut worst: f64 = 0.0;
        for (cutoff, max_exc) in [(2u32, 1u32), (3, 2)] {
            let basis = LatticeBasis::build(1, &FULL_MODES, cutoff, None).unwrap();
            let (p0, pp, pm) = polariton_operators(&p, &basis, 0).unwrap();
            let raises = [&p0, &pp, &pm];
            for (i, ri) in raises.iter().enumerate() {
                for (j, rj) in raises.iter().enumerate() {
                    let ai = ri.adjoint();
                    let comm = ai
                        .matmul(rj)
                        .unwrap()
                        .add(&rj.matmul(&ai).unwrap().scaled(Complex64::new(-1.0, 0.0)))
                        .unwrap();
                    for row in 0..basis.dim() {
                        for col in 0..basis.dim() {
                            if basis.excitations(row) > max_exc || basis.excitations(col) > max_exc
                            {
                                continue;
                            }
                            let expect = if i == j && row == col {
                                Complex64::ONE
                            } else {
                                Complex64::ZERO
                            };
                            worst = worst.max((comm.get(row, col) - expect).norm());
                        }
                    }
                }
            }
        }
        cr.check(worst < 1e-12, format!("[p_i, p_j†] = δ_ij below the cutoff edge (worst {worst:.2e})"));
    }

    // hermiticity of assembled Hamiltonians
    {
        let basis = LatticeBasis::build(2, &FULL_MODES, 2, None).unwrap();
        let h = full_hamiltonian(&[p, p], &CouplingGraph::ring(2), &basis).unwrap();
        let asym = h.max_asymmetry() / h.max_abs();
        cr.check(
            h.is_hermitian_flagged() && asym <= 1e-12,
            format!("full Hamiltonian hermitian to 1e-12 relative (asymmetry {asym:.2e})"),
        );
    }

    // norm conservation per step for hermitian evolution
    {
        let basis = LatticeBasis::build(3, &BH_MODES, 2, Some(2)).unwrap();
        let h = effective_bh_hamiltonian(1.6e7, 2.0e7, 0.0, &CouplingGraph::ring(3), &basis)
            .unwrap();
        let psi0 = StateVector::basis_state(basis.dim(), basis.index_of(&[1, 1, 0]).unwrap());
        let stepped =
            polariton_core::numerics::propagate_step(&h, &psi0, 1.0e-7, &Default::default())
                .unwrap();
        let drift = (stepped.norm() - 1.0).abs();
        cr.check(drift < 1e-8, format!("norm preserved to 1e-8 per step (drift {drift:.2e})"));
    }

    // κ sign law
    {
        let plus = AtomCavityParams { big_delta: 2.0e10, ..p };
        let e_neg = effective_parameters(&p).unwrap(); // Δ < 0
        let e_pos = effective_parameters(&plus).unwrap();
        cr.check(
            e_neg.kappa > 0.0 && e_pos.kappa < 0.0,
            format!("sign(kappa) = -sign(Δ): κ(Δ<0) = {:.3e}, κ(Δ>0) = {:.3e}", e_neg.kappa, e_pos.kappa),
        );
    }

    // determinism: bit-identical reruns
    {
        let basis = LatticeBasis::build(1, &BH_MODES, 1, None).unwrap();
        let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let lower = mode_operator(&basis, 0, Mode::Polariton, LadderKind::Lower).unwrap();
        let jumps = vec![JumpOperator::constant(lower, 2.0e6)];
        let excited = StateVector::basis_state(basis.dim(), basis.index_of(&[1]).unwrap());
        let grid = uniform_grid(2.0e-6, 64);
        let a = quantum_jump_trajectory(&h, &jumps, &excited, &grid, 5, &EvolveOptions::default())
            .unwrap();
        let b = quantum_jump_trajectory(&h, &jumps, &excited, &grid, 5, &EvolveOptions::default())
            .unwrap();
        let identical = a.jumps == b.jumps
            && a.snapshots
                .iter()
                .zip(&b.snapshots)
                .all(|(x, y)| x.amplitudes() == y.amplitudes());
        cr.check(identical, format!("rerun with seed 5 is bit-identical ({} jumps)", a.jumps.len()));
    }

    // two-site cos²(Jt) oracle
    {
        let j = 2.0e7;
        let basis = LatticeBasis::build(2, &BH_MODES, 1, Some(1)).unwrap();
        let h = effective_bh_hamiltonian(0.0, j, 0.0, &CouplingGraph::ring(2), &basis).unwrap();
        let psi0 = StateVector::basis_state(basis.dim(), basis.index_of(&[1, 0]).unwrap());
        let mut worst: f64 = 0.0;
        for jt in [std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
            let out = polariton_core::numerics::propagate_step(
                &h,
                &psi0,
                jt / j,
                &Default::default(),
            )
            .unwrap();
            let idx = basis.index_of(&[1, 0]).unwrap();
            let got = out.amplitudes()[idx].norm_sqr();
            worst = worst.max((got - jt.cos().powi(2)).abs());
        }
        cr.check(worst < 1e-9, format!("two-site cos²(Jt) oracle (worst |err| {worst:.2e})"));
    }

    // three-site (5 + 4cos 3Jt)/9 oracle
    {
        let j = 2.0e7;
        let basis = LatticeBasis::build(3, &BH_MODES, 1, Some(1)).unwrap();
        let h = effective_bh_hamiltonian(0.0, j, 0.0, &CouplingGraph::ring(3), &basis).unwrap();
        let start = basis.index_of(&[0, 1, 0]).unwrap();
        let psi0 = StateVector::basis_state(basis.dim(), start);
        let grid = uniform_grid(3.0e-7, 90);
        let td = TimeDependentOperator::fixed(h);
        let traj = evolve_schrodinger(&td, &psi0, &grid, &EvolveOptions::default()).unwrap();
        let probe = NumberProbe::BhMode { basis: &basis };
        let obs = model_observables(&traj, &probe).unwrap();
        let mut worst: f64 = 0.0;
        for (t, n) in grid.iter().zip(&obs.n[1].values) {
            let expect = (5.0 + 4.0 * (3.0 * j * t).cos()) / 9.0;
            worst = worst.max((n - expect).abs());
        }
        cr.check(worst < 1e-8, format!("three-site (5+4cos3Jt)/9 oracle (worst |err| {worst:.2e})"));
    }

    // Mott / superfluid fluctuation extremes of the BH ground state
    {
        let basis = LatticeBasis::build(4, &BH_MODES, 4, Some(4)).unwrap();
        let graph = CouplingGraph::ring(4);
        let j = 1.0e7;
        let delta_of = |kappa: f64| -> f64 {
            let h = effective_bh_hamiltonian(kappa, j, 0.0, &graph, &basis).unwrap();
            let gs = lowest_eigenpair(&h, 1).unwrap().remove(0).1;
            let number = mode_operator(&basis, 0, Mode::Polariton, LadderKind::Number).unwrap();
            let applied = number.apply(&gs).unwrap();
            applied.norm_sqr() - gs.dot(&applied).re.powi(2)
        };
        let mott = delta_of(100.0 * j);
        let sf = delta_of(0.01 * j);
        cr.check(mott < 0.1, format!("Mott regime κ/J = 100: Δ_l = {mott:.4} < 0.1"));
        cr.check(
            (sf - 0.75).abs() < 0.05,
            format!("superfluid regime κ/J = 0.01: Δ_l = {sf:.4} ≈ 3/4"),
        );
    }

    cr.finish();
}

/// Criterion 6 — fig5 W-state preparation.
#[test]
fn acceptance_06_fig5_wstate() {
    let mut cr = Criterion::new("06 fig5 W-state preparation");
    let (_, _, out) = load_and_run("fig5-wstate", &[]).unwrap();
    let o_w = column(&out, "o_w");
    let o_gs = column(&out, "o_gs");
    let delta_1 = column(&out, "delta_1");
    let final_ow = *o_w.last().unwrap();
    let final_delta = *delta_1.last().unwrap();
    let min_ogs = o_gs.iter().cloned().fold(f64::INFINITY, f64::min);
    cr.check(final_ow > 0.9, format!("final |⟨ψ|W_4⟩| = {final_ow:.4} > 0.9"));
    cr.check(final_delta > 2.5, format!("final Δ_1 = {final_delta:.4} > 2.5 (exact W value 3)"));
    cr.check(min_ogs > 0.9, format!("o_gs stays above 0.9 throughout (min {min_ogs:.4})"));
    cr.check(
        (o_gs[0] - 1.0).abs() < 1e-6,
        format!("adiabatic start: o_gs(0) = {:.8}", o_gs[0]),
    );

    // overlap series stay in [0, 1]; fluctuations stay non-negative;
    // total number is conserved in this decay-free run
    let in_unit = o_gs.iter().chain(o_w).all(|v| (0.0..=1.0 + 1e-12).contains(v));
    cr.check(in_unit, "overlap series confined to [0, 1]".to_string());
    let bh = out.bh.as_ref().unwrap();
    let min_delta = bh
        .observables
        .delta
        .iter()
        .flat_map(|s| s.values.iter())
        .cloned()
        .fold(f64::INFINITY, f64::min);
    cr.check(min_delta >= -1e-10, format!("all Δ_l ≥ -1e-10 (min {min_delta:.2e})"));
    let worst_total = (0..out.times.len())
        .map(|i| {
            let total: f64 = bh.observables.n.iter().map(|s| s.values[i]).sum();
            (total - 4.0).abs()
        })
        .fold(0.0, f64::max);
    cr.check(
        worst_total < 1e-8,
        format!("Σ_l n_l conserved at 4 in the decay-free run (worst drift {worst_total:.2e})"),
    );
    cr.finish();
}

/// Criterion 4 — fig4 reproduction in property form. The κ/J start-ratio
/// clause is asserted as stated even though the pinned parameters bound the
/// ratio at 26.04 (see the printed arithmetic).
#[test]
fn acceptance_04_fig4_transition() {
    let mut cr = Criterion::new("04 fig4 transition");
    let (cfg, _, out) = load_and_run("fig4-transition", &[]).unwrap();

    // ratio sweep from the derived parameter rows
    let rows = derive_rows(&cfg).unwrap();
    let get = |n: &str| rows.iter().find(|(name, _, _)| name == n).unwrap();
    let kappa = get("kappa");
    let j_hop = get("j_hop");
    let ratio_start = kappa.1 / j_hop.1;
    let ratio_end = kappa.2 / j_hop.2;
    cr.check(
        ratio_start >= 1.0e2,
        format!(
            "κ/J at ramp start = {ratio_start:.3} (stated bound ≥ 1e2 is unattainable: \
             sup over all Ω_L is g24²/(|Δ|·hop2wca) = 26.04 for the pinned parameters)"
        ),
    );
    cr.check(ratio_end <= 0.1, format!("κ/J at ramp end = {ratio_end:.4} ≤ 0.1"));
    // κ and J values stay within the 1e-1..1e2 MHz band at both endpoints
    let in_band = [kappa.1, kappa.2, j_hop.1, j_hop.2]
        .iter()
        .all(|v| (1.0e5..=1.0e8).contains(v));
    cr.check(
        in_band,
        format!(
            "κ and J endpoint values within 0.1..100 MHz: κ = ({:.3e}, {:.3e}), J = ({:.3e}, {:.3e})",
            kappa.1, kappa.2, j_hop.1, j_hop.2
        ),
    );

    let delta_full = column(&out, "delta_1_full");
    let ddelta = column(&out, "ddelta_1");
    let times = &out.times;
    let t_final = *times.last().unwrap();

    // no collapse in either trajectory for this seed: the comparison below
    // is the between-jumps statement of the criterion
    let full_jumps = out.full.as_ref().unwrap().trajectory.jumps.len();
    let bh_jumps = out.bh.as_ref().unwrap().trajectory.jumps.len();
    cr.check(
        full_jumps == 0 && bh_jumps == 0,
        format!("jump-free realization (full: {full_jumps}, bh: {bh_jumps} collapses)"),
    );

    // Mott end: Δ_1 < 0.1 over the first 5% of the window
    let mott_max = times
        .iter()
        .zip(delta_full)
        .filter(|(t, _)| **t <= 0.05 * t_final)
        .map(|(_, d)| *d)
        .fold(0.0, f64::max);
    cr.check(mott_max < 0.1, format!("Mott end: max Δ_1(t ≤ 0.05 T) = {mott_max:.4} < 0.1"));

    // superfluid end: Δ_1 in 0.75 ± 0.15 at the end of the ramp
    let final_delta = *delta_full.last().unwrap();
    cr.check(
        (final_delta - 0.75).abs() <= 0.15,
        format!("superfluid end: Δ_1(T) = {final_delta:.4} within 0.75 ± 0.15"),
    );

    // monotone trend: coarse-grained Δ_1 never drops by more than 0.05
    let windows = 20;
    let mut means = Vec::new();
    for w in 0..windows {
        let lo = w * delta_full.len() / windows;
        let hi = ((w + 1) * delta_full.len() / windows).max(lo + 1);
        means.push(delta_full[lo..hi].iter().sum::<f64>() / (hi - lo) as f64);
    }
    let monotone = means.windows(2).all(|p| p[1] >= p[0] - 0.05);
    cr.check(
        monotone,
        format!("Δ_1 rises monotonically in trend ({windows} coarse windows)"),
    );

    // model deviation bound
    let max_dd = ddelta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    cr.check(max_dd <= 0.10, format!("max |δΔ_1| = {max_dd:.4} ≤ 0.10"));

    // decay probability band
    let decay = *column(&out, "decay_prob_full").last().unwrap();
    cr.check(
        (0.05..=0.30).contains(&decay),
        format!("cumulative decay probability {decay:.4} within [0.05, 0.30]"),
    );
    cr.finish();
}

/// Criterion 5 — unit-filling fidelity of the decay-free deterministic
/// fig4 variant in the Mott segment.
#[test]
fn acceptance_05_unit_filling_fidelity() {
    let mut cr = Criterion::new("05 unit-filling fidelity");
    let (cfg, _, out) =
        load_and_run("fig4-transition", &["jumps.enabled=false".into()]).unwrap();

    // Mott segment: κ(t)/J(t) ≥ 10
    let times = &out.times;
    let full = out.full.as_ref().unwrap();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for (i, t) in times.iter().enumerate() {
        if polariton_cli::scenario::kappa_over_j_at(&cfg, *t).unwrap() < 10.0 {
            break;
        }
        for site in &full.observables.n {
            worst = worst.max((site.values[i] - 1.0).abs());
        }
        checked = i + 1;
    }
    cr.check(checked > 0, format!("Mott segment covers {checked} grid points"));
    cr.check(
        worst < 3e-3,
        format!("max |⟨p†p⟩ - 1| = {worst:.3e} < 3e-3 over the Mott segment"),
    );
    cr.finish();
}
