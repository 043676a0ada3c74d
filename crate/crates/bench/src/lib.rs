//! Shared fixtures for the criterion benchmarks in `benches/`.

use hamsim_core::oracle::{random_sparse, to_dense};
use hamsim_core::suzuki::DenseTerm;
use hamsim_core::{NumericsConfig, SparseOracle};

/// Seeded random oracle; panics on infeasible parameters.
pub fn oracle(n: u32, d: usize, seed: u64) -> SparseOracle {
    random_sparse(n, d, seed, Some(1.0), &NumericsConfig::default()).expect("feasible oracle")
}

/// `m` dense terms on `n` qubits drawn from consecutive seeds.
pub fn dense_terms(m: usize, n: u32, seed: u64) -> Vec<DenseTerm> {
    let cfg = NumericsConfig::default();
    (0..m as u64)
        .map(|j| {
            let h = to_dense(&oracle(n, 1 << n, seed + j), &cfg).expect("within cap");
            DenseTerm::new(&h, &cfg).expect("hermitian")
        })
        .collect()
}
