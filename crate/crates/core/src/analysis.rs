//! Observables, ground-state tracking, W states and full-vs-effective model
//! comparison metrics.

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{DrivenParams, DynamicsError, TimeDependentOperator, Trajectory};
use crate::hilbert::{mode_operator, HilbertError, LadderKind, LatticeBasis, Mode, BH_MODES};
use crate::model::{dark_polariton_number_operator, AtomCavityParams, ModelError};
use crate::numerics::{
    lowest_eigenpair_with, EigOptions, NumericsError, SparseOperator, StateVector,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("trajectories live on different time grids")]
    GridMismatch,
    #[error("series have different site counts: {a} vs {b}")]
    SiteMismatch { a: usize, b: usize },
    #[error("basis cannot hold {particles} particles on one site (cutoff {cutoff})")]
    CutoffTooSmall { particles: u32, cutoff: u32 },
    #[error("state not present in the basis: {0}")]
    MissingState(String),
    #[error("non-finite observable value in series {0}")]
    NonFinite(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// Named real time series on an output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if !values.iter().all(|v| v.is_finite()) {
            return Err(AnalysisError::NonFinite(name));
        }
        Ok(Self { name, times, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// How to read a site's particle number out of a trajectory.
#[derive(Debug, Clone)]
pub enum NumberProbe<'a> {
    /// Effective model: the mode number of the site.
    BhMode { basis: &'a LatticeBasis },
    /// Full model: the dark polariton at fixed parameters.
    DarkPolariton { basis: &'a LatticeBasis, params: AtomCavityParams },
    /// Full model under a ramped drive: the momentary dark polariton.
    DrivenDarkPolariton { basis: &'a LatticeBasis, driven: DrivenParams },
}

impl NumberProbe<'_> {
    /// The site's number operator P†P in excitation-conserving form; safe on
    /// sector-restricted bases.
    fn number_operator(&self, site: usize, t: f64) -> Result<SparseOperator> {
        match self {
            NumberProbe::BhMode { basis } => {
                Ok(mode_operator(basis, site, Mode::Polariton, LadderKind::Number)?)
            }
            NumberProbe::DarkPolariton { basis, params } => {
                Ok(dark_polariton_number_operator(params, basis, site)?)
            }
            NumberProbe::DrivenDarkPolariton { basis, driven } => {
                Ok(dark_polariton_number_operator(&driven.params_at(t), basis, site)?)
            }
        }
    }

    fn is_static(&self) -> bool {
        !matches!(self, NumberProbe::DrivenDarkPolariton { .. })
    }
}

/// n_l(t) = ⟨ψ|P†P|ψ⟩ with P the site's annihilation operator.
pub fn polariton_number_series(
    traj: &Trajectory,
    probe: &NumberProbe<'_>,
    site: usize,
) -> Result<ObservableSeries> {
    let (n, _) = site_number_stats(traj, probe, site)?;
    Ok(n)
}

/// Δ_l(t) = ⟨(P†P)²⟩ - ⟨P†P⟩².
pub fn number_fluctuation_series(
    traj: &Trajectory,
    probe: &NumberProbe<'_>,
    site: usize,
) -> Result<ObservableSeries> {
    let (_, delta) = site_number_stats(traj, probe, site)?;
    Ok(delta)
}

/// Number expectation and fluctuation in one pass.
pub fn site_number_stats(
    traj: &Trajectory,
    probe: &NumberProbe<'_>,
    site: usize,
) -> Result<(ObservableSeries, ObservableSeries)> {
    let mut n_vals = Vec::with_capacity(traj.times.len());
    let mut d_vals = Vec::with_capacity(traj.times.len());
    let mut cached: Option<SparseOperator> = None;
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        let num_op = match (&cached, probe.is_static()) {
            (Some(op), true) => op.clone(),
            _ => {
                let op = probe.number_operator(site, *t)?;
                if probe.is_static() {
                    cached = Some(op.clone());
                }
                op
            }
        };
        let applied = num_op.apply(snap)?;
        let n = snap.dot(&applied).re;
        let n_sqr_expect = applied.norm_sqr();
        n_vals.push(n);
        d_vals.push(n_sqr_expect - n * n);
    }
    Ok((
        ObservableSeries::new(format!("n_{}", site + 1), traj.times.clone(), n_vals)?,
        ObservableSeries::new(format!("delta_{}", site + 1), traj.times.clone(), d_vals)?,
    ))
}

/// Per-site number and fluctuation series of one model run.
#[derive(Debug, Clone)]
pub struct ModelObservables {
    pub n: Vec<ObservableSeries>,
    pub delta: Vec<ObservableSeries>,
}

pub fn model_observables(traj: &Trajectory, probe: &NumberProbe<'_>) -> Result<ModelObservables> {
    let num_sites = match probe {
        NumberProbe::BhMode { basis } => basis.num_sites(),
        NumberProbe::DarkPolariton { basis, .. } => basis.num_sites(),
        NumberProbe::DrivenDarkPolariton { basis, .. } => basis.num_sites(),
    };
    let mut n = Vec::with_capacity(num_sites);
    let mut delta = Vec::with_capacity(num_sites);
    for site in 0..num_sites {
        let (ns, ds) = site_number_stats(traj, probe, site)?;
        n.push(ns);
        delta.push(ds);
    }
    Ok(ModelObservables { n, delta })
}

/// Per-site differences full - effective, with max-abs summaries.
#[derive(Debug, Clone)]
pub struct ComparisonSeries {
    pub dn: Vec<ObservableSeries>,
    pub ddelta: Vec<ObservableSeries>,
    pub max_abs_dn: f64,
    pub max_abs_ddelta: f64,
}

pub fn compare_models(full: &ModelObservables, bh: &ModelObservables) -> Result<ComparisonSeries> {
    if full.n.len() != bh.n.len() {
        return Err(AnalysisError::SiteMismatch { a: full.n.len(), b: bh.n.len() });
    }
    let diff = |a: &ObservableSeries, b: &ObservableSeries, name: String| -> Result<ObservableSeries> {
        if a.times != b.times {
            return Err(AnalysisError::GridMismatch);
        }
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        ObservableSeries::new(name, a.times.clone(), values)
    };
    let mut dn = Vec::new();
    let mut ddelta = Vec::new();
    for (site, (a, b)) in full.n.iter().zip(&bh.n).enumerate() {
        dn.push(diff(a, b, format!("dn_{}", site + 1))?);
    }
    for (site, (a, b)) in full.delta.iter().zip(&bh.delta).enumerate() {
        ddelta.push(diff(a, b, format!("ddelta_{}", site + 1))?);
    }
    let max_abs_dn = dn.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
    let max_abs_ddelta = ddelta.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
    Ok(ComparisonSeries { dn, ddelta, max_abs_dn, max_abs_ddelta })
}

#[derive(Debug, Clone)]
pub struct GroundTrackOptions {
    /// Eigenpairs computed per grid point.
    pub k: usize,
    /// Eigenvalues within this fraction of the computed spread of the lowest
    /// are treated as one degenerate ground cluster.
    pub cluster_rtol: f64,
    pub eig: EigOptions,
}

impl Default for GroundTrackOptions {
    fn default() -> Self {
        Self { k: 6, cluster_rtol: 1e-3, eig: EigOptions::default() }
    }
}

/// o_gs(t) = ‖P_gs ψ(t)‖ where P_gs projects onto the momentary ground
/// state; on (near-)degeneracy the projector covers the whole ground
/// cluster.
pub fn ground_state_overlap_series(
    traj: &Trajectory,
    h: &TimeDependentOperator,
    opts: &GroundTrackOptions,
) -> Result<ObservableSeries> {
    let mut values = Vec::with_capacity(traj.times.len());
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        let h_t = h.assemble(*t)?;
        let k = opts.k.min(h_t.dim());
        let pairs = lowest_eigenpair_with(&h_t, k, &opts.eig)?;
        let lambda0 = pairs[0].0;
        let spread = (pairs[k - 1].0 - lambda0).max(1e-12 * lambda0.abs()).max(f64::MIN_POSITIVE);
        let mut overlap_sqr = 0.0;
        for (lambda, vec) in &pairs {
            if lambda - lambda0 <= opts.cluster_rtol * spread {
                overlap_sqr += vec.dot(snap).norm_sqr();
            }
        }
        values.push(overlap_sqr.sqrt().min(1.0));
    }
    ObservableSeries::new("o_gs", traj.times.clone(), values)
}

/// |⟨ψ(t)|target⟩| for a fixed reference state.
pub fn state_overlap_series(
    traj: &Trajectory,
    target: &StateVector,
    name: &str,
) -> Result<ObservableSeries> {
    let values = traj
        .snapshots
        .iter()
        .map(|s| target.dot(s).norm().min(1.0))
        .collect();
    ObservableSeries::new(name, traj.times.clone(), values)
}

/// The W state: equal-amplitude superposition of the `num_sites` states with
/// all `num_particles` on one site.
pub fn w_state(num_sites: usize, num_particles: u32, basis: &LatticeBasis) -> Result<StateVector> {
    if basis.modes() != BH_MODES || basis.num_sites() != num_sites {
        return Err(AnalysisError::MissingState(format!(
            "need a {num_sites}-site single-mode basis"
        )));
    }
    if basis.per_site_cutoff() < num_particles {
        return Err(AnalysisError::CutoffTooSmall {
            particles: num_particles,
            cutoff: basis.per_site_cutoff(),
        });
    }
    let mut psi = StateVector::zero(basis.dim());
    let amp = Complex64::new(1.0 / (num_sites as f64).sqrt(), 0.0);
    for site in 0..num_sites {
        let mut occ = vec![0u8; num_sites];
        occ[site] = num_particles as u8;
        let idx = basis.index_of(&occ).ok_or_else(|| {
            AnalysisError::MissingState(format!("{num_particles} particles on site {site}"))
        })?;
        psi.amplitudes_mut()[idx] = amp;
    }
    Ok(psi)
}

/// Σ_l n_l(t), for conservation checks.
pub fn total_number_series(observables: &ModelObservables) -> Result<ObservableSeries> {
    let times = observables.n[0].times.clone();
    let mut total = vec![0.0; times.len()];
    for s in &observables.n {
        for (acc, v) in total.iter_mut().zip(&s.values) {
            *acc += v;
        }
    }
    ObservableSeries::new("n_total", times, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_schrodinger, uniform_grid, EvolveOptions};
    use crate::hilbert::CouplingGraph;
    use crate::model::effective_bh_hamiltonian;
    use crate::numerics::lowest_eigenpair;

    fn bh_basis(sites: usize, cutoff: u32, sector: Option<u32>) -> LatticeBasis {
        LatticeBasis::build(sites, &BH_MODES, cutoff, sector).unwrap()
    }

    #[test]
    fn vacuum_number_series_is_zero() {
        let basis = bh_basis(2, 2, None);
        let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let psi0 = StateVector::basis_state(basis.dim(), basis.index_of(&[0, 0]).unwrap());
        let traj =
            evolve_schrodinger(&h, &psi0, &uniform_grid(1.0, 4), &EvolveOptions::default()).unwrap();
        let probe = NumberProbe::BhMode { basis: &basis };
        let n = polariton_number_series(&traj, &probe, 0).unwrap();
        assert!(n.values.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn isolated_polariton_number_is_one() {
        let basis = bh_basis(1, 2, None);
        let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let psi0 = StateVector::basis_state(basis.dim(), basis.index_of(&[1]).unwrap());
        let traj =
            evolve_schrodinger(&h, &psi0, &uniform_grid(1.0, 4), &EvolveOptions::default()).unwrap();
        let probe = NumberProbe::BhMode { basis: &basis };
        let (n, d) = site_number_stats(&traj, &probe, 0).unwrap();
        assert!(n.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        // Fock state: zero fluctuations
        assert!(d.values.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn bernoulli_superposition_fluctuation() {
        // (|0⟩ + |1⟩)/√2 on one site: Δ = 1/4
        let basis = bh_basis(1, 2, None);
        let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let mut psi0 = StateVector::zero(basis.dim());
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi0.amplitudes_mut()[basis.index_of(&[0]).unwrap()] = inv;
        psi0.amplitudes_mut()[basis.index_of(&[1]).unwrap()] = inv;
        let traj =
            evolve_schrodinger(&h, &psi0, &uniform_grid(1.0, 2), &EvolveOptions::default()).unwrap();
        let probe = NumberProbe::BhMode { basis: &basis };
        let d = number_fluctuation_series(&traj, &probe, 0).unwrap();
        assert!((d.values[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn w_state_properties() {
        let basis = bh_basis(4, 4, Some(4));
        let w = w_state(4, 4, &basis).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
        // disjoint support from unit filling
        let unit = StateVector::basis_state(basis.dim(), basis.index_of(&[1, 1, 1, 1]).unwrap());
        assert!(w.dot(&unit).norm() < 1e-14);
        // Δ_i = num_particles - 1 = 3 on the W state
        let h = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let traj =
            evolve_schrodinger(&h, &w, &uniform_grid(1.0, 2), &EvolveOptions::default()).unwrap();
        let probe = NumberProbe::BhMode { basis: &basis };
        for site in 0..4 {
            let d = number_fluctuation_series(&traj, &probe, site).unwrap();
            assert!((d.values[0] - 3.0).abs() < 1e-10, "site {site}: {}", d.values[0]);
        }
    }

    #[test]
    fn w_state_single_site_is_fock() {
        let basis = bh_basis(1, 3, None);
        let w = w_state(1, 3, &basis).unwrap();
        let idx = basis.index_of(&[3]).unwrap();
        assert!((w.amplitudes()[idx].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn w_state_cutoff_error() {
        let basis = bh_basis(4, 2, None);
        assert!(matches!(
            w_state(4, 4, &basis),
            Err(AnalysisError::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn compare_identical_trajectories_is_zero_and_antisymmetric() {
        let basis = bh_basis(2, 1, Some(1));
        let h = effective_bh_hamiltonian(0.0, 1.0e7, 0.0, &CouplingGraph::ring(2), &basis).unwrap();
        let psi0 = StateVector::basis_state(basis.dim(), basis.index_of(&[0, 1]).unwrap());
        let td = TimeDependentOperator::fixed(h);
        let traj =
            evolve_schrodinger(&td, &psi0, &uniform_grid(1e-7, 16), &EvolveOptions::default())
                .unwrap();
        let probe = NumberProbe::BhMode { basis: &basis };
        let obs = model_observables(&traj, &probe).unwrap();
        let same = compare_models(&obs, &obs).unwrap();
        assert_eq!(same.max_abs_dn, 0.0);
        assert_eq!(same.max_abs_ddelta, 0.0);

        // antisymmetry under swap against a different run
        let psi1 = StateVector::basis_state(basis.dim(), basis.index_of(&[1, 0]).unwrap());
        let td2 = TimeDependentOperator::fixed(
            effective_bh_hamiltonian(0.0, 0.7e7, 0.0, &CouplingGraph::ring(2), &basis).unwrap(),
        );
        let traj2 =
            evolve_schrodinger(&td2, &psi1, &uniform_grid(1e-7, 16), &EvolveOptions::default())
                .unwrap();
        let obs2 = model_observables(&traj2, &probe).unwrap();
        let ab = compare_models(&obs, &obs2).unwrap();
        let ba = compare_models(&obs2, &obs).unwrap();
        for (x, y) in ab.dn.iter().zip(&ba.dn) {
            for (u, v) in x.values.iter().zip(&y.values) {
                assert!((u + v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ground_state_overlap_stays_one_for_eigenstate() {
        let basis = bh_basis(4, 1, Some(1));
        let h = effective_bh_hamiltonian(0.0, 1.0e7, 0.0, &CouplingGraph::ring(4), &basis).unwrap();
        let ground = lowest_eigenpair(&h, 1).unwrap().remove(0).1;
        let td = TimeDependentOperator::fixed(h);
        let traj =
            evolve_schrodinger(&td, &ground, &uniform_grid(2e-7, 10), &EvolveOptions::default())
                .unwrap();
        let o = ground_state_overlap_series(&traj, &td, &GroundTrackOptions::default()).unwrap();
        for v in &o.values {
            assert!((v - 1.0).abs() < 1e-8, "overlap {v}");
        }
    }

    #[test]
    fn four_ring_single_particle_ground_is_alternating() {
        // with +J hopping the single-particle ground state on a 4-ring is the
        // alternating-sign state at energy -2J
        let j = 1.0e7;
        let basis = bh_basis(4, 1, Some(1));
        let h = effective_bh_hamiltonian(0.0, j, 0.0, &CouplingGraph::ring(4), &basis).unwrap();
        let pairs = lowest_eigenpair(&h, 1).unwrap();
        assert!((pairs[0].0 + 2.0 * j).abs() < 1e-6 * j);
        let v = &pairs[0].1;
        // amplitudes alternate in sign around the ring
        let amps: Vec<f64> = v.amplitudes().iter().map(|a| a.re).collect();
        let site_of = |k: usize| basis.index_of(&{
            let mut occ = vec![0u8; 4];
            occ[k] = 1;
            occ
        })
        .unwrap();
        let reference = amps[site_of(0)];
        let signs: Vec<f64> = (0..4).map(|k| amps[site_of(k)] / reference).collect();
        assert!((signs[0] - 1.0).abs() < 1e-8);
        assert!((signs[1] + 1.0).abs() < 1e-8);
        assert!((signs[2] - 1.0).abs() < 1e-8);
        assert!((signs[3] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn mott_and_superfluid_fluctuation_extremes() {
        // 4 sites at unit filling: κ/J = 100 pins the occupation (Δ < 0.1);
        // κ = 0 delocalizes it (Δ = 3/4 exactly for 4 particles on 4 sites)
        let basis = bh_basis(4, 4, Some(4));
        let graph = CouplingGraph::ring(4);
        let j = 1.0e7;

        let mott = effective_bh_hamiltonian(100.0 * j, j, 0.0, &graph, &basis).unwrap();
        let gs = lowest_eigenpair(&mott, 1).unwrap().remove(0).1;
        let td = TimeDependentOperator::fixed(SparseOperator::zero(basis.dim()));
        let traj =
            evolve_schrodinger(&td, &gs, &uniform_grid(1.0, 2), &EvolveOptions::default()).unwrap();
        let probe = NumberProbe::BhMode { basis: &basis };
        let d = number_fluctuation_series(&traj, &probe, 0).unwrap();
        assert!(d.values[0] < 0.1, "Mott Δ = {}", d.values[0]);

        let sf = effective_bh_hamiltonian(0.01 * j, j, 0.0, &graph, &basis).unwrap();
        let gs = lowest_eigenpair(&sf, 1).unwrap().remove(0).1;
        let traj =
            evolve_schrodinger(&td, &gs, &uniform_grid(1.0, 2), &EvolveOptions::default()).unwrap();
        let d = number_fluctuation_series(&traj, &probe, 0).unwrap();
        assert!((d.values[0] - 0.75).abs() < 0.05, "superfluid Δ = {}", d.values[0]);
    }
}
