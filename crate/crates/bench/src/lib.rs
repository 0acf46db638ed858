//! Shared fixtures for the kernel benchmarks.

use polariton_core::hilbert::{CouplingGraph, LatticeBasis, SectorConstraint, BH_MODES, FULL_MODES};
use polariton_core::model::{full_hamiltonian, AtomCavityParams};
use polariton_core::numerics::{SparseOperator, StateVector};

pub fn reference_params() -> AtomCavityParams {
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

/// The Hamiltonian and a normalized dense state of the 4-cavity full model
/// at two excitations, the largest operator exercised by the scenarios.
pub fn full_model_fixture() -> (SparseOperator, StateVector) {
    let basis =
        LatticeBasis::build_with(4, &FULL_MODES, 2, SectorConstraint::AtMost(2)).unwrap();
    let p = reference_params();
    let h = full_hamiltonian(&vec![p; 4], &CouplingGraph::ring(4), &basis).unwrap();
    let dim = basis.dim();
    let amps = (0..dim)
        .map(|i| num_complex::Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()))
        .collect();
    (h, StateVector::new(amps).normalized())
}

pub fn bh_fixture() -> (SparseOperator, StateVector) {
    let basis = LatticeBasis::build(4, &BH_MODES, 4, Some(4)).unwrap();
    let h = polariton_core::model::effective_bh_hamiltonian(
        1.6e7,
        2.0e7,
        0.0,
        &CouplingGraph::ring(4),
        &basis,
    )
    .unwrap();
    let dim = basis.dim();
    let amps = (0..dim)
        .map(|i| num_complex::Complex64::new(1.0 / (i as f64 + 1.0), 0.1))
        .collect();
    (h, StateVector::new(amps).normalized())
}
