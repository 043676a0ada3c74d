//! Sparse Hamiltonian simulation at desk scale.
//!
//! The crate implements higher-order Suzuki product formulas with their
//! analytic error and cost bounds, the `(i, j, ν)` edge-coloring that splits a
//! d-sparse Hamiltonian into at most `6d²` one-sparse pieces using
//! deterministic coin tossing, exact evolution under one-sparse pieces, and the
//! parity construction that shows simulation time cannot be sublinear.
//! Every quantity is checked against dense linear algebra in [`numerics`].

pub mod coloring;
pub mod error;
pub mod numerics;
pub mod one_sparse;
pub mod oracle;
pub mod parity;
pub mod pipeline;
pub mod suzuki;

pub use coloring::{
    decompose, enumerate_labels, iterate_count, verify_coloring, ColoredOracle, ColoringReport,
    EdgeLabel,
};
pub use error::{Error, Result};
pub use numerics::{
    hermitian_expm, pure_trace_distance, spectral_norm, trace_distance, unitary_diff_norm,
    DenseOperator, DensityOperator, NumericsConfig, StateVector, C64,
};
pub use one_sparse::{evolve, precision_bits, quantize_oracle, CompiledPiece, OneSparseAction};
pub use oracle::{from_entry_list, random_sparse, to_dense, EntryList, SparseOracle};
pub use parity::{run_parity, Decomposition, ParityInstance};
pub use pipeline::{simulate_oracle, sweep_point, RunParams, SimulationReport, SweepRow};
pub use suzuki::{build_plan, simulate, ProductFormulaPlan, TermEvolver};
