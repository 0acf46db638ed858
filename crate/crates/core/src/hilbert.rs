//! Truncated occupation-number bases for lattices of cavities and the
//! elementary mode operators acting on them.
//!
//! The full model carries four bosonic modes per cavity: the photon mode
//! and the collective atomic modes S12, S13 and S14. The S14 mode
//! represents a level reached by converting two excitations, so it counts
//! twice toward the conserved total excitation number while counting once
//! toward the per-site occupation cutoff. The effective Bose-Hubbard model
//! carries a single polariton mode per site.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::SparseOperator;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("no basis states satisfy the requested constraints")]
    EmptySector,
    #[error("mode {0:?} is not active in this basis")]
    InactiveMode(Mode),
    #[error("site index {site} out of range for {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },
    #[error("invalid coupling graph: {0}")]
    BadGraph(String),
    #[error("finite atom number {n} must be at least the per-site cutoff {cutoff}")]
    AtomNumberTooSmall { n: u64, cutoff: u32 },
    #[error("basis has {got} modes per site, expected {expected}")]
    WrongModeCount { got: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, HilbertError>;

/// Bosonic mode of a single cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Photon,
    S12,
    S13,
    S14,
    /// The single mode of the effective Bose-Hubbard description.
    Polariton,
}

impl Mode {
    /// Quanta of the conserved excitation number carried per occupation.
    pub fn excitation_weight(self) -> u32 {
        match self {
            Mode::S14 => 2,
            _ => 1,
        }
    }
}

/// The four modes of the full microscopic model, in storage order.
pub const FULL_MODES: [Mode; 4] = [Mode::Photon, Mode::S12, Mode::S13, Mode::S14];
/// The single mode of the effective Bose-Hubbard model.
pub const BH_MODES: [Mode; 1] = [Mode::Polariton];

/// Occupations of one cavity in the full model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CavityBasisState {
    pub n_photon: u32,
    pub n_s12: u32,
    pub n_s13: u32,
    pub n_s14: u32,
}

impl CavityBasisState {
    pub fn total_occupation(&self) -> u32 {
        self.n_photon + self.n_s12 + self.n_s13 + self.n_s14
    }

    pub fn excitations(&self) -> u32 {
        self.n_photon + self.n_s12 + self.n_s13 + 2 * self.n_s14
    }
}

/// Constraint on the lattice-wide excitation number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorConstraint {
    None,
    /// Exactly this many excitations (S14 counts twice).
    Exact(u32),
    /// At most this many excitations; needed for jump dynamics, which only
    /// ever lower the total.
    AtMost(u32),
}

/// Deterministic truncated product basis over a lattice of cavities.
///
/// States are enumerated in lexicographic order of the flattened occupation
/// vector (site-major, then mode), so rebuilding a basis always yields the
/// identical ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    num_sites: usize,
    modes: Vec<Mode>,
    per_site_cutoff: u32,
    sector: SectorConstraint,
    /// Flattened occupations, `len = dim * num_sites * modes.len()`.
    states: Vec<u8>,
}

impl LatticeBasis {
    /// Enumerate all product states subject to the per-site occupation cutoff
    /// and an optional exact total-excitation sector.
    pub fn build(
        num_sites: usize,
        modes: &[Mode],
        per_site_cutoff: u32,
        total_sector: Option<u32>,
    ) -> Result<Self> {
        let sector = match total_sector {
            Some(n) => SectorConstraint::Exact(n),
            None => SectorConstraint::None,
        };
        Self::build_with(num_sites, modes, per_site_cutoff, sector)
    }

    pub fn build_with(
        num_sites: usize,
        modes: &[Mode],
        per_site_cutoff: u32,
        sector: SectorConstraint,
    ) -> Result<Self> {
        assert!(num_sites >= 1, "need at least one site");
        assert!(!modes.is_empty(), "need at least one mode");
        assert!(per_site_cutoff <= u8::MAX as u32, "cutoff exceeds occupation storage");
        let weights: Vec<u32> = modes.iter().map(|m| m.excitation_weight()).collect();
        let n_slots = num_sites * modes.len();
        let mut states = Vec::new();
        let mut current = vec![0u8; n_slots];
        enumerate(
            &mut states,
            &mut current,
            0,
            0,
            0,
            num_sites,
            modes.len(),
            per_site_cutoff,
            &weights,
            sector,
        );
        if states.is_empty() {
            return Err(HilbertError::EmptySector);
        }
        Ok(Self { num_sites, modes: modes.to_vec(), per_site_cutoff, sector, states })
    }

    pub fn dim(&self) -> usize {
        self.states.len() / self.slots()
    }

    fn slots(&self) -> usize {
        self.num_sites * self.modes.len()
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn per_site_cutoff(&self) -> u32 {
        self.per_site_cutoff
    }

    pub fn sector(&self) -> SectorConstraint {
        self.sector
    }

    pub fn state(&self, index: usize) -> &[u8] {
        let s = self.slots();
        &self.states[index * s..(index + 1) * s]
    }

    /// Index of an occupation vector, if it belongs to the basis.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        debug_assert_eq!(occ.len(), self.slots());
        let s = self.slots();
        let dim = self.dim();
        let mut lo = 0usize;
        let mut hi = dim;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.states[mid * s..(mid + 1) * s].cmp(occ) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn mode_position(&self, mode: Mode) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .ok_or(HilbertError::InactiveMode(mode))
    }

    fn slot(&self, site: usize, mode_pos: usize) -> usize {
        site * self.modes.len() + mode_pos
    }

    pub fn occupation(&self, state_index: usize, site: usize, mode: Mode) -> Result<u32> {
        let pos = self.mode_position(mode)?;
        Ok(self.state(state_index)[self.slot(site, pos)] as u32)
    }

    /// Per-cavity view of a full-model basis state.
    pub fn cavity_state(&self, state_index: usize, site: usize) -> Result<CavityBasisState> {
        if self.modes != FULL_MODES {
            return Err(HilbertError::WrongModeCount { got: self.modes.len(), expected: 4 });
        }
        let s = self.state(state_index);
        let base = self.slot(site, 0);
        Ok(CavityBasisState {
            n_photon: s[base] as u32,
            n_s12: s[base + 1] as u32,
            n_s13: s[base + 2] as u32,
            n_s14: s[base + 3] as u32,
        })
    }

    /// Total conserved excitation number of a basis state.
    pub fn excitations(&self, state_index: usize) -> u32 {
        let s = self.state(state_index);
        s.iter()
            .enumerate()
            .map(|(slot, &n)| {
                let mode = self.modes[slot % self.modes.len()];
                mode.excitation_weight() * (n as u32)
            })
            .sum()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site < self.num_sites {
            Ok(())
        } else {
            Err(HilbertError::SiteOutOfRange { site, num_sites: self.num_sites })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    states: &mut Vec<u8>,
    current: &mut [u8],
    slot: usize,
    site_sum: u32,
    total_weighted: u32,
    num_sites: usize,
    n_modes: usize,
    cutoff: u32,
    weights: &[u32],
    sector: SectorConstraint,
) {
    let n_slots = num_sites * n_modes;
    if slot == n_slots {
        let keep = match sector {
            SectorConstraint::None => true,
            SectorConstraint::Exact(n) => total_weighted == n,
            SectorConstraint::AtMost(n) => total_weighted <= n,
        };
        if keep {
            states.extend_from_slice(current);
        }
        return;
    }
    let mode_pos = slot % n_modes;
    let site_budget = cutoff - site_sum;
    let weight = weights[mode_pos];
    for n in 0..=site_budget {
        let weighted = total_weighted + weight * n;
        if let SectorConstraint::Exact(s) | SectorConstraint::AtMost(s) = sector {
            if weighted > s {
                break;
            }
        }
        current[slot] = n as u8;
        let next_site_sum = if mode_pos + 1 == n_modes { 0 } else { site_sum + n };
        enumerate(
            states,
            current,
            slot + 1,
            next_site_sum,
            weighted,
            num_sites,
            n_modes,
            cutoff,
            weights,
            sector,
        );
    }
    current[slot] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Raise,
    Lower,
    Number,
}

/// Bosonic ladder / number operator of one mode at one site, truncated by
/// projection: matrix elements whose target lies outside the basis are
/// dropped.
pub fn mode_operator(
    basis: &LatticeBasis,
    site: usize,
    mode: Mode,
    kind: LadderKind,
) -> Result<SparseOperator> {
    ladder_operator(basis, site, mode, kind, None)
}

/// Collective atomic transition operator. Without `finite_n` this is the
/// bosonic limit and coincides exactly with [`mode_operator`]. With
/// `finite_n = Some(N)` the n→n+1 matrix element carries the collective
/// factor √(1 - n/N), the leading finite-atom-number correction.
pub fn collective_operator(
    basis: &LatticeBasis,
    site: usize,
    mode: Mode,
    kind: LadderKind,
    finite_n: Option<u64>,
) -> Result<SparseOperator> {
    if let Some(n) = finite_n {
        if n < basis.per_site_cutoff() as u64 {
            return Err(HilbertError::AtomNumberTooSmall { n, cutoff: basis.per_site_cutoff() });
        }
    }
    ladder_operator(basis, site, mode, kind, finite_n)
}

fn ladder_operator(
    basis: &LatticeBasis,
    site: usize,
    mode: Mode,
    kind: LadderKind,
    finite_n: Option<u64>,
) -> Result<SparseOperator> {
    basis.check_site(site)?;
    let pos = basis.mode_position(mode)?;
    let slot = basis.slot(site, pos);
    let dim = basis.dim();
    let mut triplets = Vec::new();
    let mut scratch = vec![0u8; basis.slots()];
    for idx in 0..dim {
        let occ = basis.state(idx);
        let n = occ[slot] as u32;
        match kind {
            LadderKind::Number => {
                if n > 0 {
                    triplets.push((idx, idx, Complex64::new(n as f64, 0.0)));
                }
            }
            LadderKind::Raise => {
                scratch.copy_from_slice(occ);
                scratch[slot] += 1;
                if let Some(target) = basis.index_of(&scratch) {
                    let elem = ((n + 1) as f64).sqrt() * dicke_factor(n, finite_n);
                    triplets.push((target, idx, Complex64::new(elem, 0.0)));
                }
            }
            LadderKind::Lower => {
                if n == 0 {
                    continue;
                }
                scratch.copy_from_slice(occ);
                scratch[slot] -= 1;
                if let Some(target) = basis.index_of(&scratch) {
                    let elem = (n as f64).sqrt() * dicke_factor(n - 1, finite_n);
                    triplets.push((target, idx, Complex64::new(elem, 0.0)));
                }
            }
        }
    }
    Ok(SparseOperator::from_triplets(dim, triplets, 0.0))
}

/// √(1 - n/N) for the collective n→n+1 element; 1 in the bosonic limit.
fn dicke_factor(n: u32, finite_n: Option<u64>) -> f64 {
    match finite_n {
        Some(big_n) => (1.0 - n as f64 / big_n as f64).sqrt(),
        None => 1.0,
    }
}

/// One ladder move of a composite transition.
#[derive(Debug, Clone, Copy)]
pub struct LadderMove {
    pub site: usize,
    pub mode: Mode,
    pub raise: bool,
}

impl LadderMove {
    pub fn raise(site: usize, mode: Mode) -> Self {
        Self { site, mode, raise: true }
    }

    pub fn lower(site: usize, mode: Mode) -> Self {
        Self { site, mode, raise: false }
    }
}

/// Projector-truncated product of bosonic ladder operators, assembled
/// directly: amplitudes follow the untruncated Fock algebra and only the
/// final target state is tested for basis membership. This matters on
/// sector-restricted bases, where intermediate states of an
/// excitation-conserving product may fall outside the sector even though
/// source and target are inside. Moves are applied in slice order.
pub fn transition_operator(basis: &LatticeBasis, moves: &[LadderMove]) -> Result<SparseOperator> {
    let mut slots = Vec::with_capacity(moves.len());
    for mv in moves {
        basis.check_site(mv.site)?;
        let pos = basis.mode_position(mv.mode)?;
        slots.push(basis.slot(mv.site, pos));
    }
    let dim = basis.dim();
    let mut triplets = Vec::new();
    let mut scratch = vec![0u8; basis.slots()];
    'states: for idx in 0..dim {
        scratch.copy_from_slice(basis.state(idx));
        let mut amp = 1.0f64;
        for (mv, &slot) in moves.iter().zip(&slots) {
            let n = scratch[slot] as u32;
            if mv.raise {
                amp *= ((n + 1) as f64).sqrt();
                if scratch[slot] == u8::MAX {
                    continue 'states;
                }
                scratch[slot] += 1;
            } else {
                if n == 0 {
                    continue 'states;
                }
                amp *= (n as f64).sqrt();
                scratch[slot] -= 1;
            }
        }
        if let Some(target) = basis.index_of(&scratch) {
            triplets.push((target, idx, Complex64::new(amp, 0.0)));
        }
    }
    Ok(SparseOperator::from_triplets(dim, triplets, 0.0))
}

/// Undirected nearest-neighbour coupling graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    num_sites: usize,
    edges: Vec<(usize, usize)>,
    periodic: bool,
}

impl CouplingGraph {
    pub fn new(num_sites: usize, edges: Vec<(usize, usize)>, periodic: bool) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(HilbertError::BadGraph(format!("self-edge at site {a}")));
            }
            if a >= num_sites || b >= num_sites {
                return Err(HilbertError::BadGraph(format!(
                    "edge ({a},{b}) out of range for {num_sites} sites"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        let before = normalized.len();
        normalized.dedup();
        if normalized.len() != before {
            return Err(HilbertError::BadGraph("duplicate edge".into()));
        }
        Ok(Self { num_sites, edges: normalized, periodic })
    }

    /// Ring of `n` sites (periodic nearest-neighbour chain).
    pub fn ring(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = if n == 1 {
            Vec::new()
        } else if n == 2 {
            vec![(0, 1)]
        } else {
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        };
        Self::new(n, edges, true).expect("ring edges are valid")
    }

    /// Open nearest-neighbour chain.
    pub fn chain(n: usize) -> Self {
        let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::new(n, edges, false).expect("chain edges are valid")
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }
}

/// Closed-form multiset count used as an independent oracle for basis sizes:
/// number of occupation vectors of `slots` weighted modes with per-site
/// plain sum ≤ cutoff is checked against enumeration in tests.
#[cfg(test)]
fn count_site_states(n_modes: usize, cutoff: u32) -> usize {
    // compositions of k into n_modes parts, summed over k = 0..=cutoff:
    // sum_k C(k + n_modes - 1, n_modes - 1) = C(cutoff + n_modes, n_modes)
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..n_modes {
        num *= cutoff as usize + n_modes - i;
        den *= i + 1;
    }
    num / den
}
