//! Microscopic atom-cavity model, polariton transformation, closed-form
//! effective parameters and the effective Bose-Hubbard Hamiltonian.
//!
//! Everything lives in the rotating frame where the bare cavity energy has
//! been absorbed; all couplings, detunings and rates are angular frequencies
//! in s⁻¹.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{
    collective_operator, mode_operator, transition_operator, CouplingGraph, HilbertError,
    LadderKind, LadderMove, LatticeBasis, Mode, BH_MODES, FULL_MODES,
};
use crate::numerics::{NumericsError, SparseOperator, StateVector};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("perturbative on-site shift undefined: big_delta = 0 with g24 != 0")]
    KappaUndefined,
    #[error("degenerate polariton normalization: A(A ± δ) vanishes")]
    DegenerateNormalization,
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Microscopic parameters of one driven atom-cavity site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomCavityParams {
    /// 1-3 dipole coupling (s⁻¹).
    pub g13: f64,
    /// 2-4 dipole coupling (s⁻¹).
    pub g24: f64,
    /// Rabi frequency of the driving laser (s⁻¹).
    pub omega_l: f64,
    /// Level-3 detuning δ (s⁻¹).
    pub delta: f64,
    /// Level-4 detuning Δ (s⁻¹).
    pub big_delta: f64,
    /// Two-photon detuning ε (s⁻¹).
    pub epsilon: f64,
    /// Number of atoms per cavity.
    pub n_atoms: u64,
    /// Photon-hopping strength 2ω_Cα between neighbouring cavities (s⁻¹).
    pub hop2wca: f64,
    /// Cavity decay rate Γ_C (s⁻¹).
    pub gamma_c: f64,
    /// Level-4 spontaneous emission rate Γ_4 (s⁻¹).
    pub gamma_4: f64,
}

impl AtomCavityParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g13", self.g13),
            ("g24", self.g24),
            ("omega_l", self.omega_l),
            ("delta", self.delta),
            ("big_delta", self.big_delta),
            ("epsilon", self.epsilon),
            ("hop2wca", self.hop2wca),
            ("gamma_c", self.gamma_c),
            ("gamma_4", self.gamma_4),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ModelError::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.g13 < 0.0 {
            return Err(ModelError::InvalidParams("g13 must be non-negative".into()));
        }
        if self.n_atoms < 1 {
            return Err(ModelError::InvalidParams("n_atoms must be at least 1".into()));
        }
        if self.gamma_c < 0.0 || self.gamma_4 < 0.0 {
            return Err(ModelError::InvalidParams("decay rates must be non-negative".into()));
        }
        Ok(())
    }

    /// Collective coupling g = √N g13.
    pub fn collective_g(&self) -> f64 {
        (self.n_atoms as f64).sqrt() * self.g13
    }
}

/// Derived polariton-model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// Collective coupling g = √N g13 (s⁻¹).
    pub g: f64,
    /// B = √(g² + Ω_L²) (s⁻¹).
    pub b: f64,
    /// A = √(4B² + δ²) (s⁻¹).
    pub a_freq: f64,
    /// Dark-polariton frequency, identically zero.
    pub mu0: f64,
    /// (δ - A)/2 (s⁻¹).
    pub mu_plus: f64,
    /// (δ + A)/2 (s⁻¹).
    pub mu_minus: f64,
    /// On-site interaction κ (s⁻¹); double occupation costs 2κ.
    pub kappa: f64,
    /// Inter-cavity hopping J (s⁻¹).
    pub j_hop: f64,
    /// Dark-polariton decay rate Γ (s⁻¹).
    pub gamma_pol: f64,
    /// Chemical-potential term ε g²/B² (s⁻¹).
    pub chem_pot: f64,
}

/// Closed-form effective parameters of the dark-polariton Bose-Hubbard model.
pub fn effective_parameters(p: &AtomCavityParams) -> Result<EffectiveParams> {
    p.validate()?;
    let g = p.collective_g();
    let b_sqr = g * g + p.omega_l * p.omega_l;
    if b_sqr <= 0.0 {
        return Err(ModelError::InvalidParams(
            "need g13 > 0 or omega_l != 0 for the polariton basis".into(),
        ));
    }
    let b = b_sqr.sqrt();
    let a_freq = (4.0 * b_sqr + p.delta * p.delta).sqrt();
    let mu_plus = 0.5 * (p.delta - a_freq);
    let mu_minus = 0.5 * (p.delta + a_freq);

    let kappa = if p.g24 == 0.0 {
        0.0
    } else if p.big_delta == 0.0 {
        return Err(ModelError::KappaUndefined);
    } else {
        -(p.g24 * p.g24 / p.big_delta) * g * g * p.omega_l * p.omega_l / (b_sqr * b_sqr)
    };

    let level4 = if p.g24 == 0.0 {
        0.0
    } else {
        p.g24 * p.g24 * g * g * p.gamma_4 / (p.big_delta * p.big_delta * b_sqr)
    };
    let gamma_pol = (2.0 * p.omega_l * p.omega_l / b_sqr) * (0.5 * p.gamma_c + level4);

    Ok(EffectiveParams {
        g,
        b,
        a_freq,
        mu0: 0.0,
        mu_plus,
        mu_minus,
        kappa,
        j_hop: p.hop2wca * p.omega_l * p.omega_l / b_sqr,
        gamma_pol,
        chem_pot: p.epsilon * g * g / b_sqr,
    })
}

/// One dimensionless validity ratio with its pass flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityRatio {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

/// Dimensionless ratios behind the rotating-wave and perturbative
/// approximations, flagged against a smallness threshold. `kappa_over_gamma`
/// wants to be large; its flag tests the inverse against the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub threshold: f64,
    pub ratios: Vec<ValidityRatio>,
}

impl ValidityReport {
    pub fn get(&self, name: &str) -> Option<&ValidityRatio> {
        self.ratios.iter().find(|r| r.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.ratios.iter().all(|r| r.pass)
    }
}

pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.1;

pub fn validity_report(p: &AtomCavityParams, threshold: f64) -> Result<ValidityReport> {
    let eff = effective_parameters(p)?;
    let small = |num: f64, den: f64| -> f64 {
        if num == 0.0 {
            0.0
        } else {
            (num / den).abs()
        }
    };
    let mut ratios = Vec::new();
    {
        let mut push_small = |name: &str, value: f64| {
            ratios.push(ValidityRatio { name: name.into(), value, pass: value <= threshold });
        };
        push_small("g24_over_mu_plus", small(p.g24, eff.mu_plus));
        push_small("g24_over_mu_minus", small(p.g24, eff.mu_minus));
        push_small("epsilon_over_mu_plus", small(p.epsilon, eff.mu_plus));
        push_small("epsilon_over_mu_minus", small(p.epsilon, eff.mu_minus));
        push_small("big_delta_over_mu_plus", small(p.big_delta, eff.mu_plus));
        push_small("big_delta_over_mu_minus", small(p.big_delta, eff.mu_minus));
        push_small("g24_over_big_delta", small(p.g24, p.big_delta));
        push_small("omega_l_over_collective_g", small(p.omega_l, eff.g));
    }
    let kappa_over_gamma = if eff.gamma_pol == 0.0 {
        if eff.kappa == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (eff.kappa / eff.gamma_pol).abs()
    };
    ratios.push(ValidityRatio {
        name: "kappa_over_gamma".into(),
        value: kappa_over_gamma,
        pass: kappa_over_gamma >= 1.0 / threshold,
    });
    Ok(ValidityReport { threshold, ratios })
}

/// Ω-independent and Ω-linear parts of the full Hamiltonian, for ramped
/// driving (uniform across sites).
#[derive(Debug, Clone)]
pub struct FullHamiltonianParts {
    /// Diagonal detunings, g and g24 couplings and photon hopping.
    pub drift: SparseOperator,
    /// Σ_R (S12†S13 + h.c.), to be scaled by Ω_L(t).
    pub drive: SparseOperator,
}

fn check_full_basis(basis: &LatticeBasis) -> Result<()> {
    if basis.modes() != FULL_MODES {
        return Err(ModelError::BasisMismatch(format!(
            "full model needs the 4-mode basis, found {:?}",
            basis.modes()
        )));
    }
    Ok(())
}

fn check_bh_basis(basis: &LatticeBasis) -> Result<()> {
    if basis.modes() != BH_MODES {
        return Err(ModelError::BasisMismatch(format!(
            "effective model needs the 1-mode basis, found {:?}",
            basis.modes()
        )));
    }
    Ok(())
}

fn check_graph(graph: &CouplingGraph, basis: &LatticeBasis) -> Result<()> {
    if graph.num_sites() != basis.num_sites() {
        return Err(ModelError::BasisMismatch(format!(
            "graph has {} sites, basis has {}",
            graph.num_sites(),
            basis.num_sites()
        )));
    }
    Ok(())
}

/// Site-local pieces: the Ω-independent drift and the unit-strength laser
/// ladder S12†S13 + h.c.
fn site_terms(
    p: &AtomCavityParams,
    basis: &LatticeBasis,
    site: usize,
) -> Result<(SparseOperator, SparseOperator)> {
    p.validate()?;
    let g = p.collective_g();
    let n12 = mode_operator(basis, site, Mode::S12, LadderKind::Number)?;
    let n13 = mode_operator(basis, site, Mode::S13, LadderKind::Number)?;
    let n14 = mode_operator(basis, site, Mode::S14, LadderKind::Number)?;

    // g (a† S13 + h.c.)
    let g_up = transition_operator(
        basis,
        &[LadderMove::lower(site, Mode::S13), LadderMove::raise(site, Mode::Photon)],
    )?;
    let g_term = g_up.add(&g_up.adjoint())?;

    // g24 (a† S12† S14 + h.c.): the level-4 pathway converts two excitations
    // of the dark manifold into one S14 quantum.
    let g24_up = transition_operator(
        basis,
        &[
            LadderMove::lower(site, Mode::S14),
            LadderMove::raise(site, Mode::S12),
            LadderMove::raise(site, Mode::Photon),
        ],
    )?;
    let g24_term = g24_up.add(&g24_up.adjoint())?;

    let drift = SparseOperator::linear_combination(&[
        (Complex64::new(p.epsilon, 0.0), &n12),
        (Complex64::new(p.delta, 0.0), &n13),
        (Complex64::new(p.big_delta + p.epsilon, 0.0), &n14),
        (Complex64::new(g, 0.0), &g_term),
        (Complex64::new(p.g24, 0.0), &g24_term),
    ])?;

    // Ω_L (S12† S13 + h.c.) at unit strength
    let ladder_up = transition_operator(
        basis,
        &[LadderMove::lower(site, Mode::S13), LadderMove::raise(site, Mode::S12)],
    )?;
    let ladder = ladder_up.add(&ladder_up.adjoint())?;
    Ok((drift, ladder))
}

fn photon_hopping(
    params: &[AtomCavityParams],
    graph: &CouplingGraph,
    basis: &LatticeBasis,
) -> Result<SparseOperator> {
    let dim = basis.dim();
    let mut total = SparseOperator::zero(dim);
    for &(r, s) in graph.edges() {
        let hop = 0.5 * (params[r].hop2wca + params[s].hop2wca);
        let fwd = transition_operator(
            basis,
            &[LadderMove::lower(s, Mode::Photon), LadderMove::raise(r, Mode::Photon)],
        )?;
        let term = fwd.add(&fwd.adjoint())?.scaled(Complex64::new(hop, 0.0));
        total = total.add(&term)?;
    }
    Ok(total)
}

/// Full microscopic Hamiltonian on the truncated collective basis:
/// detunings, laser driving, g and g24 couplings plus photon hopping.
pub fn full_hamiltonian(
    params: &[AtomCavityParams],
    graph: &CouplingGraph,
    basis: &LatticeBasis,
) -> Result<SparseOperator> {
    check_full_basis(basis)?;
    check_graph(graph, basis)?;
    if params.len() != basis.num_sites() {
        return Err(ModelError::BasisMismatch(format!(
            "{} parameter sets for {} sites",
            params.len(),
            basis.num_sites()
        )));
    }
    let mut h = photon_hopping(params, graph, basis)?;
    for (site, p) in params.iter().enumerate() {
        let (drift, ladder) = site_terms(p, basis, site)?;
        h = h.add(&drift)?.add(&ladder.scaled(Complex64::new(p.omega_l, 0.0)))?;
    }
    h.flag_hermitian()?;
    Ok(h)
}

/// Split form for ramped driving; parameters are uniform across sites.
pub fn full_hamiltonian_parts(
    params: &AtomCavityParams,
    graph: &CouplingGraph,
    basis: &LatticeBasis,
) -> Result<FullHamiltonianParts> {
    check_full_basis(basis)?;
    check_graph(graph, basis)?;
    let per_site = vec![*params; basis.num_sites()];
    let mut drift = photon_hopping(&per_site, graph, basis)?;
    let mut drive = SparseOperator::zero(basis.dim());
    for site in 0..basis.num_sites() {
        let (site_drift, ladder) = site_terms(params, basis, site)?;
        drift = drift.add(&site_drift)?;
        drive = drive.add(&ladder)?;
    }
    drift.flag_hermitian()?;
    drive.flag_hermitian()?;
    Ok(FullHamiltonianParts { drift, drive })
}

/// Polariton creation operators (p0†, p+†, p-†) on a full-model basis.
///
/// The vectors follow the standard sign convention
/// p0† = (g S12† - Ω a†)/B and
/// p±† = √(2/(A(A±δ))) (Ω S12† + g a† ± (A±δ)/2 S13†).
pub fn polariton_operators(
    p: &AtomCavityParams,
    basis: &LatticeBasis,
    site: usize,
) -> Result<(SparseOperator, SparseOperator, SparseOperator)> {
    check_full_basis(basis)?;
    let eff = effective_parameters(p)?;
    let (g, b, a, d) = (eff.g, eff.b, eff.a_freq, p.delta);
    if a * (a - d) <= 1e-12 * b * b || a * (a + d) <= 1e-12 * b * b {
        return Err(ModelError::DegenerateNormalization);
    }
    let a_rai = mode_operator(basis, site, Mode::Photon, LadderKind::Raise)?;
    let s12_rai = collective_operator(basis, site, Mode::S12, LadderKind::Raise, None)?;
    let s13_rai = collective_operator(basis, site, Mode::S13, LadderKind::Raise, None)?;

    let p0 = SparseOperator::linear_combination(&[
        (Complex64::new(g / b, 0.0), &s12_rai),
        (Complex64::new(-p.omega_l / b, 0.0), &a_rai),
    ])?;
    let norm_p = (2.0 / (a * (a + d))).sqrt();
    let p_plus = SparseOperator::linear_combination(&[
        (Complex64::new(norm_p * p.omega_l, 0.0), &s12_rai),
        (Complex64::new(norm_p * g, 0.0), &a_rai),
        (Complex64::new(norm_p * 0.5 * (a + d), 0.0), &s13_rai),
    ])?;
    let norm_m = (2.0 / (a * (a - d))).sqrt();
    let p_minus = SparseOperator::linear_combination(&[
        (Complex64::new(norm_m * p.omega_l, 0.0), &s12_rai),
        (Complex64::new(norm_m * g, 0.0), &a_rai),
        (Complex64::new(-norm_m * 0.5 * (a - d), 0.0), &s13_rai),
    ])?;
    Ok((p0, p_plus, p_minus))
}

/// Dark-polariton annihilation operator at one site.
pub fn dark_polariton_annihilator(
    p: &AtomCavityParams,
    basis: &LatticeBasis,
    site: usize,
) -> Result<SparseOperator> {
    let (p0_raise, _, _) = polariton_operators(p, basis, site)?;
    Ok(p0_raise.adjoint())
}

/// Dark-polariton number operator p0†p0 assembled directly in its
/// excitation-conserving form
/// (g² n_S12 + Ω² n_a - gΩ (S12†a + a†S12)) / B²,
/// so it stays exact on sector-restricted bases where a bare lowering
/// operator would be projected away.
pub fn dark_polariton_number_operator(
    p: &AtomCavityParams,
    basis: &LatticeBasis,
    site: usize,
) -> Result<SparseOperator> {
    check_full_basis(basis)?;
    let eff = effective_parameters(p)?;
    let (g, b) = (eff.g, eff.b);
    let n12 = mode_operator(basis, site, Mode::S12, LadderKind::Number)?;
    let n_ph = mode_operator(basis, site, Mode::Photon, LadderKind::Number)?;
    let cross_up = transition_operator(
        basis,
        &[LadderMove::lower(site, Mode::Photon), LadderMove::raise(site, Mode::S12)],
    )?;
    let cross = cross_up.add(&cross_up.adjoint())?;
    let b2 = b * b;
    let mut op = SparseOperator::linear_combination(&[
        (Complex64::new(g * g / b2, 0.0), &n12),
        (Complex64::new(p.omega_l * p.omega_l / b2, 0.0), &n_ph),
        (Complex64::new(-g * p.omega_l / b2, 0.0), &cross),
    ])?;
    op.flag_hermitian()?;
    Ok(op)
}

/// Static pieces of the effective Bose-Hubbard Hamiltonian.
#[derive(Debug, Clone)]
pub struct BhParts {
    /// Σ_R (p†)²p² = Σ_R n(n-1).
    pub kerr: SparseOperator,
    /// Σ_⟨R,R'⟩ (p†_R p_R' + h.c.).
    pub hop: SparseOperator,
    /// Σ_R p†_R p_R.
    pub number: SparseOperator,
}

pub fn bh_hamiltonian_parts(graph: &CouplingGraph, basis: &LatticeBasis) -> Result<BhParts> {
    check_bh_basis(basis)?;
    check_graph(graph, basis)?;
    let dim = basis.dim();
    let mut kerr_trip = Vec::new();
    let mut number_trip = Vec::new();
    for idx in 0..dim {
        let occ = basis.state(idx);
        let mut kerr = 0.0;
        let mut num = 0.0;
        for &n in occ {
            let nf = n as f64;
            kerr += nf * (nf - 1.0);
            num += nf;
        }
        if kerr != 0.0 {
            kerr_trip.push((idx, idx, Complex64::new(kerr, 0.0)));
        }
        if num != 0.0 {
            number_trip.push((idx, idx, Complex64::new(num, 0.0)));
        }
    }
    let kerr = SparseOperator::hermitian_from_triplets(dim, kerr_trip, 0.0)?;
    let number = SparseOperator::hermitian_from_triplets(dim, number_trip, 0.0)?;
    let mut hop = SparseOperator::zero(dim);
    for &(r, s) in graph.edges() {
        let fwd = transition_operator(
            basis,
            &[LadderMove::lower(s, Mode::Polariton), LadderMove::raise(r, Mode::Polariton)],
        )?;
        hop = hop.add(&fwd.add(&fwd.adjoint())?)?;
    }
    hop.flag_hermitian()?;
    Ok(BhParts { kerr, hop, number })
}

/// H = κ Σ (p†)²p² + J Σ (p†p' + h.c.) + chem_pot Σ p†p.
pub fn effective_bh_hamiltonian(
    kappa: f64,
    j_hop: f64,
    chem_pot: f64,
    graph: &CouplingGraph,
    basis: &LatticeBasis,
) -> Result<SparseOperator> {
    let parts = bh_hamiltonian_parts(graph, basis)?;
    let mut h = SparseOperator::linear_combination(&[
        (Complex64::new(kappa, 0.0), &parts.kerr),
        (Complex64::new(j_hop, 0.0), &parts.hop),
        (Complex64::new(chem_pot, 0.0), &parts.number),
    ])?;
    h.flag_hermitian()?;
    Ok(h)
}

/// Product state with `occupations[site]` dark polaritons in each cavity of
/// a full-model basis, built by repeated application of p0† to the vacuum.
pub fn polariton_product_state(
    params: &[AtomCavityParams],
    basis: &LatticeBasis,
    occupations: &[u32],
) -> Result<StateVector> {
    check_full_basis(basis)?;
    if occupations.len() != basis.num_sites() || params.len() != basis.num_sites() {
        return Err(ModelError::BasisMismatch(format!(
            "{} occupations and {} parameter sets for {} sites",
            occupations.len(),
            params.len(),
            basis.num_sites()
        )));
    }
    let vacuum = vec![0u8; basis.num_sites() * basis.modes().len()];
    let vacuum_index = basis
        .index_of(&vacuum)
        .ok_or_else(|| ModelError::BasisMismatch("basis does not contain the vacuum".into()))?;
    let mut state = StateVector::basis_state(basis.dim(), vacuum_index);
    for (site, (&n, p)) in occupations.iter().zip(params).enumerate() {
        if n == 0 {
            continue;
        }
        let (p0_raise, _, _) = polariton_operators(p, basis, site)?;
        for _ in 0..n {
            state = p0_raise.apply(&state)?;
        }
    }
    let norm = state.norm();
    if norm < 1e-9 {
        return Err(ModelError::BasisMismatch(
            "requested polariton occupation is annihilated by the basis truncation".into(),
        ));
    }
    Ok(state.normalized())
}
