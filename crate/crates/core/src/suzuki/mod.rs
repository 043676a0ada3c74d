//! Suzuki higher-order product formulas.
//!
//! `S_2` is the symmetric Lie-Trotter product and
//! `S_2k(λ) = [S_2k-2(p_k λ)]² S_2k-2((1-4p_k) λ) [S_2k-2(p_k λ)]²`.
//! [`build_plan`] flattens the recursion into an ordered list of
//! `(term, fraction)` steps, [`bounds`] holds parameter selection and the
//! analytic error/cost bounds, and [`simulate`] applies `[S_2k(-it/r)]^r`.

pub mod bounds;
mod evolve;
mod plan;

pub use bounds::{
    choose_k, choose_r, exponential_count, integrator_error_bound, nexp_bound, nexp_bound_optimal,
    p_coefficient, restriction, restriction_check, theorem_window, IntegratorBound, NexpBound,
    OptimalBound, Restriction,
};
pub use evolve::{
    product_formula_operator, simulate, simulate_plan, DenseTerm, Propagator, Simulation,
    TermEvolver,
};
pub use plan::{build_plan, ProductFormulaPlan, Step, MAX_PLAN_STEPS};
