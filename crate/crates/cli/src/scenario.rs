//! Assembles a scenario configuration into concrete bases, Hamiltonians,
//! jump channels and initial states, runs the requested model(s) and
//! collects the output columns.

use std::fmt;

use polariton_core::analysis::{
    compare_models, ground_state_overlap_series, model_observables, state_overlap_series, w_state,
    ComparisonSeries, GroundTrackOptions, ModelObservables, NumberProbe, ObservableSeries,
};
use polariton_core::dynamics::{
    build_jump_operators, evolve_schrodinger, quantum_jump_trajectory, uniform_grid, Coefficient,
    DrivenParams, EvolveOptions, JumpOperator, JumpRate, OperatorTerm, RampKind, Schedule,
    TimeDependentOperator, Trajectory,
};
use polariton_core::hilbert::{
    CouplingGraph, LatticeBasis, SectorConstraint, BH_MODES, FULL_MODES,
};
use polariton_core::model::{
    bh_hamiltonian_parts, effective_parameters, full_hamiltonian, full_hamiltonian_parts,
    polariton_product_state, validity_report, AtomCavityParams, DEFAULT_VALIDITY_THRESHOLD,
};
use polariton_core::numerics::{lowest_eigenpair, StateVector};

use crate::config::{
    ConfigError, InitialStateKind, ModelKind, Observable, ScenarioConfig, ScheduleKind,
    ScheduleParam, ScheduleSection,
};
use crate::output::Column;

#[derive(Debug)]
pub enum ScenarioError {
    Config(ConfigError),
    Runtime(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Config(e) => write!(f, "{e}"),
            ScenarioError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<ConfigError> for ScenarioError {
    fn from(e: ConfigError) -> Self {
        ScenarioError::Config(e)
    }
}

fn rt(e: impl fmt::Display) -> ScenarioError {
    ScenarioError::Runtime(e.to_string())
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// Everything a single model run produces.
pub struct RunArtifacts {
    pub trajectory: Trajectory,
    pub observables: ModelObservables,
    pub o_gs: Option<ObservableSeries>,
    pub o_w: Option<ObservableSeries>,
}

pub struct ScenarioOutput {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    pub params_rows: Vec<(String, f64, f64)>,
    pub full: Option<RunArtifacts>,
    pub bh: Option<RunArtifacts>,
    pub comparison: Option<ComparisonSeries>,
}

fn to_segment(s: &ScheduleSection) -> polariton_core::dynamics::Segment {
    let kind = match s.kind {
        ScheduleKind::Constant => RampKind::Constant,
        ScheduleKind::Linear => RampKind::Linear,
        ScheduleKind::LogLinear => RampKind::LogLinear,
    };
    polariton_core::dynamics::Segment {
        kind,
        t_start: s.t_start,
        t_end: s.t_end,
        v_start: s.v_start,
        v_end: s.v_end,
    }
}

/// Combined (possibly multi-segment) schedule of one parameter.
fn combined_schedule(cfg: &ScenarioConfig, param: ScheduleParam) -> Result<Option<Schedule>> {
    let segs: Vec<polariton_core::dynamics::Segment> = cfg
        .schedules
        .iter()
        .filter(|s| s.param == param)
        .map(to_segment)
        .collect();
    if segs.is_empty() {
        return Ok(None);
    }
    Schedule::from_segments(segs).map(Some).map_err(rt)
}

fn build_graph(cfg: &ScenarioConfig) -> Result<CouplingGraph> {
    let sites = cfg.lattice.num_sites;
    match &cfg.lattice.edges {
        Some(edges) => {
            let zero_based: Vec<(usize, usize)> =
                edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
            CouplingGraph::new(sites, zero_based, cfg.lattice.periodic).map_err(rt)
        }
        None if cfg.lattice.periodic => Ok(CouplingGraph::ring(sites)),
        None => Ok(CouplingGraph::chain(sites)),
    }
}

/// The scheduled Ω_L profile of a microscopic run, when ramped.
fn driven_params(cfg: &ScenarioConfig) -> Result<Option<DrivenParams>> {
    let Some(omega) = combined_schedule(cfg, ScheduleParam::OmegaL)? else {
        return Ok(None);
    };
    let base = cfg
        .uniform_params()
        .ok_or_else(|| ScenarioError::Config(ConfigError::Invalid("ramped omega_l needs uniform parameters".into())))?;
    Ok(Some(DrivenParams::new(base, omega).map_err(rt)?))
}

/// κ(t)/J(t) along the configured ramp; used by segment classification.
pub fn kappa_over_j_at(cfg: &ScenarioConfig, t: f64) -> Result<f64> {
    if cfg.microscopic() {
        let eff = match driven_params(cfg)? {
            Some(d) => d.effective_at(t),
            None => effective_parameters(&cfg.site_params().expect("microscopic")[0]).map_err(rt)?,
        };
        Ok(eff.kappa / eff.j_hop)
    } else {
        let eff = cfg.effective.as_ref().expect("direct path");
        let value = |param: ScheduleParam, fallback: f64| -> Result<f64> {
            Ok(match combined_schedule(cfg, param)? {
                Some(s) => s.value_at(t),
                None => fallback,
            })
        };
        Ok(value(ScheduleParam::Kappa, eff.kappa)? / value(ScheduleParam::JHop, eff.j_hop)?)
    }
}

/// Derived parameters for `derive`; requires the microscopic path.
pub fn derive_rows(cfg: &ScenarioConfig) -> Result<Vec<(String, f64, f64)>> {
    if !cfg.microscopic() {
        return Err(ScenarioError::Config(ConfigError::Invalid(
            "derive needs the microscopic [atom_cavity] parameter path".into(),
        )));
    }
    params_rows(cfg)
}

/// Derived parameter rows (start and end of the window) plus validity flags.
fn params_rows(cfg: &ScenarioConfig) -> Result<Vec<(String, f64, f64)>> {
    let mut rows = Vec::new();
    let t_final = cfg.time.t_final;
    if cfg.microscopic() {
        let site_params = cfg.site_params().expect("microscopic path");
        let driven = driven_params(cfg)?;
        let uniform = cfg.uniform_params().is_some();
        let param_sets: Vec<(String, AtomCavityParams, AtomCavityParams)> = if uniform {
            let base = cfg.uniform_params().expect("uniform");
            let (p0, p1) = match &driven {
                Some(d) => (d.params_at(0.0), d.params_at(t_final)),
                None => (base, base),
            };
            vec![(String::new(), p0, p1)]
        } else {
            site_params
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("_site{}", i + 1), *p, *p))
                .collect()
        };
        for (suffix, p0, p1) in &param_sets {
            let e0 = effective_parameters(p0).map_err(rt)?;
            let e1 = effective_parameters(p1).map_err(rt)?;
            let pairs: [(&str, f64, f64); 10] = [
                ("g", e0.g, e1.g),
                ("b", e0.b, e1.b),
                ("a_freq", e0.a_freq, e1.a_freq),
                ("mu0", e0.mu0, e1.mu0),
                ("mu_plus", e0.mu_plus, e1.mu_plus),
                ("mu_minus", e0.mu_minus, e1.mu_minus),
                ("kappa", e0.kappa, e1.kappa),
                ("j_hop", e0.j_hop, e1.j_hop),
                ("gamma_pol", e0.gamma_pol, e1.gamma_pol),
                ("chem_pot", e0.chem_pot, e1.chem_pot),
            ];
            for (name, v0, v1) in pairs {
                rows.push((format!("{name}{suffix}"), v0, v1));
            }
            let r0 = validity_report(p0, DEFAULT_VALIDITY_THRESHOLD).map_err(rt)?;
            let r1 = validity_report(p1, DEFAULT_VALIDITY_THRESHOLD).map_err(rt)?;
            for (a, b) in r0.ratios.iter().zip(&r1.ratios) {
                rows.push((format!("ratio_{}{suffix}", a.name), a.value, b.value));
                rows.push((
                    format!("pass_{}{suffix}", a.name),
                    a.pass as u8 as f64,
                    b.pass as u8 as f64,
                ));
            }
        }
    } else {
        let eff = cfg.effective.as_ref().expect("direct path");
        let at = |param: ScheduleParam, fallback: f64, t: f64| -> Result<f64> {
            match combined_schedule(cfg, param)? {
                Some(s) => Ok(s.value_at(t)),
                None => Ok(fallback),
            }
        };
        for (name, param, fallback) in [
            ("kappa", ScheduleParam::Kappa, eff.kappa),
            ("j_hop", ScheduleParam::JHop, eff.j_hop),
            ("chem_pot", ScheduleParam::ChemPot, eff.chem_pot),
        ] {
            rows.push((name.to_string(), at(param, fallback, 0.0)?, at(param, fallback, t_final)?));
        }
        rows.push(("gamma_pol".to_string(), eff.gamma_pol, eff.gamma_pol));
    }
    Ok(rows)
}

/// Hamiltonian, jump channels and initial state of the full microscopic run.
fn build_full_run(
    cfg: &ScenarioConfig,
    graph: &CouplingGraph,
) -> Result<(LatticeBasis, TimeDependentOperator, Vec<JumpOperator>, StateVector)> {
    let site_params = cfg.site_params().expect("validated microscopic");
    let occupations = cfg.occupation_vector()?;
    let excitations: u32 = occupations.iter().sum();
    let basis = LatticeBasis::build_with(
        cfg.lattice.num_sites,
        &FULL_MODES,
        cfg.model.full_cutoff,
        SectorConstraint::AtMost(excitations),
    )
    .map_err(rt)?;

    let driven = driven_params(cfg)?;
    let h = match &driven {
        Some(d) => {
            let parts = full_hamiltonian_parts(d.base(), graph, &basis).map_err(rt)?;
            TimeDependentOperator::new(vec![
                OperatorTerm::fixed(parts.drift),
                OperatorTerm::scaled(Coefficient::Schedule(d.omega().clone()), parts.drive),
            ])
            .map_err(rt)?
        }
        None => {
            TimeDependentOperator::fixed(full_hamiltonian(&site_params, graph, &basis).map_err(rt)?)
        }
    };

    let jumps = if cfg.jumps.enabled {
        build_jump_operators(&site_params, &basis).map_err(rt)?
    } else {
        Vec::new()
    };

    let t0_params: Vec<AtomCavityParams> = match &driven {
        Some(d) => vec![d.params_at(0.0); cfg.lattice.num_sites],
        None => site_params.clone(),
    };
    let psi0 = polariton_product_state(&t0_params, &basis, &occupations).map_err(rt)?;
    Ok((basis, h, jumps, psi0))
}

/// Hamiltonian, jump channels and initial state of the effective BH run.
fn build_bh_run(
    cfg: &ScenarioConfig,
    graph: &CouplingGraph,
) -> Result<(LatticeBasis, TimeDependentOperator, Vec<JumpOperator>, StateVector)> {
    let particles = cfg.total_particles()?;
    let sector = if cfg.jumps.enabled {
        SectorConstraint::AtMost(particles)
    } else {
        SectorConstraint::Exact(particles)
    };
    let basis =
        LatticeBasis::build_with(cfg.lattice.num_sites, &BH_MODES, particles, sector).map_err(rt)?;
    let parts = bh_hamiltonian_parts(graph, &basis).map_err(rt)?;

    let (kappa_c, j_c, chem_c, gamma): (Coefficient, Coefficient, Coefficient, Option<JumpRate>) =
        if cfg.microscopic() {
            match driven_params(cfg)? {
                Some(d) => (
                    Coefficient::Kappa(d.clone()),
                    Coefficient::JHop(d.clone()),
                    Coefficient::ChemPot(d.clone()),
                    Some(JumpRate::EffectiveGamma(d)),
                ),
                None => {
                    let p = cfg.site_params().expect("microscopic")[0];
                    let eff = effective_parameters(&p).map_err(rt)?;
                    (
                        Coefficient::Constant(eff.kappa),
                        Coefficient::Constant(eff.j_hop),
                        Coefficient::Constant(eff.chem_pot),
                        (eff.gamma_pol > 0.0)
                            .then_some(JumpRate::Constant(eff.gamma_pol)),
                    )
                }
            }
        } else {
            let eff = cfg.effective.as_ref().expect("direct path");
            let coeff = |param: ScheduleParam, fallback: f64| -> Result<Coefficient> {
                match combined_schedule(cfg, param)? {
                    Some(s) => Ok(Coefficient::Schedule(s)),
                    None => Ok(Coefficient::Constant(fallback)),
                }
            };
            (
                coeff(ScheduleParam::Kappa, eff.kappa)?,
                coeff(ScheduleParam::JHop, eff.j_hop)?,
                coeff(ScheduleParam::ChemPot, eff.chem_pot)?,
                (eff.gamma_pol > 0.0).then_some(JumpRate::Constant(eff.gamma_pol)),
            )
        };

    let h = TimeDependentOperator::new(vec![
        OperatorTerm::scaled(kappa_c, parts.kerr),
        OperatorTerm::scaled(j_c, parts.hop),
        OperatorTerm::scaled(chem_c, parts.number),
    ])
    .map_err(rt)?;

    let jumps = match (cfg.jumps.enabled, gamma) {
        (true, Some(rate)) => {
            let mut ops = Vec::new();
            for site in 0..cfg.lattice.num_sites {
                let lower = polariton_core::hilbert::mode_operator(
                    &basis,
                    site,
                    polariton_core::hilbert::Mode::Polariton,
                    polariton_core::hilbert::LadderKind::Lower,
                )
                .map_err(rt)?;
                ops.push(JumpOperator { op: lower, rate: rate.clone() });
            }
            ops
        }
        _ => Vec::new(),
    };

    let psi0 = match cfg.initial_state.kind {
        InitialStateKind::SiteOccupations | InitialStateKind::UnitFilling => {
            let occ = cfg.occupation_vector()?;
            let key: Vec<u8> = occ.iter().map(|&n| n as u8).collect();
            let idx = basis.index_of(&key).ok_or_else(|| {
                ScenarioError::Runtime("initial occupations not representable in the basis".into())
            })?;
            StateVector::basis_state(basis.dim(), idx)
        }
        InitialStateKind::WState => w_state(cfg.lattice.num_sites, particles, &basis).map_err(rt)?,
        InitialStateKind::GroundState => {
            // ground state of H(0) within the particle-number sector
            let sector_basis = LatticeBasis::build_with(
                cfg.lattice.num_sites,
                &BH_MODES,
                particles,
                SectorConstraint::Exact(particles),
            )
            .map_err(rt)?;
            let parts0 = bh_hamiltonian_parts(graph, &sector_basis).map_err(rt)?;
            let h0 = TimeDependentOperator::new(vec![
                OperatorTerm::scaled(kappa_at_zero(&h), parts0.kerr),
                OperatorTerm::scaled(j_at_zero(&h), parts0.hop),
                OperatorTerm::scaled(chem_at_zero(&h), parts0.number),
            ])
            .map_err(rt)?
            .assemble(0.0)
            .map_err(rt)?;
            let ground = lowest_eigenpair(&h0, 1).map_err(rt)?.remove(0).1;
            embed(&sector_basis, &basis, &ground)?
        }
    };

    Ok((basis, h, jumps, psi0))
}

// the BH Hamiltonian terms are ordered (kerr, hop, number)
fn kappa_at_zero(h: &TimeDependentOperator) -> Coefficient {
    h.terms()[0].coeff.clone()
}
fn j_at_zero(h: &TimeDependentOperator) -> Coefficient {
    h.terms()[1].coeff.clone()
}
fn chem_at_zero(h: &TimeDependentOperator) -> Coefficient {
    h.terms()[2].coeff.clone()
}

/// Re-express a state on `from` in the (larger) basis `to`.
fn embed(from: &LatticeBasis, to: &LatticeBasis, state: &StateVector) -> Result<StateVector> {
    let mut out = StateVector::zero(to.dim());
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let occ = from.state(idx);
        let target = to.index_of(occ).ok_or_else(|| {
            ScenarioError::Runtime("sector state missing from the run basis".into())
        })?;
        out.amplitudes_mut()[target] = *amp;
    }
    Ok(out)
}

fn evolve_options(cfg: &ScenarioConfig) -> EvolveOptions {
    let mut opts = EvolveOptions::default();
    opts.propagator.krylov_dim = cfg.numerics.krylov_dim;
    opts.propagator.tol = cfg.numerics.tol;
    opts
}

fn run_one_model(
    cfg: &ScenarioConfig,
    basis: LatticeBasis,
    h: TimeDependentOperator,
    jumps: Vec<JumpOperator>,
    psi0: StateVector,
    grid: &[f64],
    want_ogs: bool,
    want_ow: bool,
    is_full: bool,
) -> Result<RunArtifacts> {
    let opts = evolve_options(cfg);
    let trajectory = if jumps.is_empty() {
        evolve_schrodinger(&h, &psi0, grid, &opts).map_err(rt)?
    } else {
        quantum_jump_trajectory(&h, &jumps, &psi0, grid, cfg.run.seed, &opts).map_err(rt)?
    };

    let driven = driven_params(cfg)?;
    let probe = if is_full {
        match driven {
            Some(d) => NumberProbe::DrivenDarkPolariton { basis: &basis, driven: d },
            None => NumberProbe::DarkPolariton {
                basis: &basis,
                params: cfg.site_params().expect("microscopic")[0],
            },
        }
    } else {
        NumberProbe::BhMode { basis: &basis }
    };
    let observables = model_observables(&trajectory, &probe).map_err(rt)?;

    let o_gs = if want_ogs {
        Some(
            ground_state_overlap_series(&trajectory, &h, &GroundTrackOptions::default())
                .map_err(rt)?,
        )
    } else {
        None
    };
    let o_w = if want_ow {
        let particles = cfg.total_particles()?;
        let target = w_state(cfg.lattice.num_sites, particles, &basis).map_err(rt)?;
        Some(state_overlap_series(&trajectory, &target, "o_w").map_err(rt)?)
    } else {
        None
    };

    Ok(RunArtifacts { trajectory, observables, o_gs, o_w })
}

/// Run the configured scenario and collect output columns.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let grid = uniform_grid(cfg.time.t_final, cfg.time.output_points);
    let graph = build_graph(cfg)?;
    let params_rows = params_rows(cfg)?;

    if cfg.run.observables.is_empty() {
        return Ok(ScenarioOutput {
            times: grid,
            columns: Vec::new(),
            params_rows,
            full: None,
            bh: None,
            comparison: None,
        });
    }

    let want = |o: Observable| cfg.run.observables.contains(&o);
    let want_ogs = want(Observable::OGs);
    let want_ow = want(Observable::OW);

    let full = if matches!(cfg.model.kind, ModelKind::Full | ModelKind::Both) {
        let (basis, h, jumps, psi0) = build_full_run(cfg, &graph)?;
        Some(run_one_model(cfg, basis, h, jumps, psi0, &grid, false, false, true)?)
    } else {
        None
    };
    let bh = if matches!(cfg.model.kind, ModelKind::Bh | ModelKind::Both) {
        let (basis, h, jumps, psi0) = build_bh_run(cfg, &graph)?;
        Some(run_one_model(cfg, basis, h, jumps, psi0, &grid, want_ogs, want_ow, false)?)
    } else {
        None
    };

    let comparison = match (&full, &bh) {
        (Some(f), Some(b)) => {
            Some(compare_models(&f.observables, &b.observables).map_err(rt)?)
        }
        _ => None,
    };

    let mut columns = Vec::new();
    let both = cfg.model.kind == ModelKind::Both;
    let suffix = |base: &str, tag: &str| {
        if both {
            format!("{base}_{tag}")
        } else {
            base.to_string()
        }
    };
    let push_series = |columns: &mut Vec<Column>, s: &ObservableSeries, name: String| {
        columns.push(Column { name, values: s.values.clone() });
    };

    if want(Observable::N) {
        if let Some(f) = &full {
            for s in &f.observables.n {
                push_series(&mut columns, s, suffix(&s.name, "full"));
            }
        }
        if let Some(b) = &bh {
            for s in &b.observables.n {
                push_series(&mut columns, s, suffix(&s.name, "bh"));
            }
        }
        if let Some(c) = &comparison {
            for s in &c.dn {
                push_series(&mut columns, s, s.name.clone());
            }
        }
    }
    if want(Observable::DeltaN) {
        if let Some(f) = &full {
            for s in &f.observables.delta {
                push_series(&mut columns, s, suffix(&s.name, "full"));
            }
        }
        if let Some(b) = &bh {
            for s in &b.observables.delta {
                push_series(&mut columns, s, suffix(&s.name, "bh"));
            }
        }
        if let Some(c) = &comparison {
            for s in &c.ddelta {
                push_series(&mut columns, s, s.name.clone());
            }
        }
    }
    if want_ogs {
        if let Some(series) = bh.as_ref().and_then(|b| b.o_gs.as_ref()) {
            push_series(&mut columns, series, "o_gs".into());
        }
    }
    if want_ow {
        if let Some(series) = bh.as_ref().and_then(|b| b.o_w.as_ref()) {
            push_series(&mut columns, series, "o_w".into());
        }
    }
    if want(Observable::DecayProb) {
        if let Some(f) = &full {
            columns.push(Column {
                name: suffix("decay_prob", "full"),
                values: f.trajectory.decay_prob.clone(),
            });
        }
        if let Some(b) = &bh {
            columns.push(Column {
                name: suffix("decay_prob", "bh"),
                values: b.trajectory.decay_prob.clone(),
            });
        }
    }

    Ok(ScenarioOutput { times: grid, columns, params_rows, full, bh, comparison })
}
