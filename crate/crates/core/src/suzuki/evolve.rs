use crate::error::{Error, Result};
use crate::numerics::{CMatrix, DenseOperator, HermitianEigen, NumericsConfig, StateVector, C64};

use super::plan::{build_plan, ProductFormulaPlan};

/// In-place evolution for a fixed duration.
pub type Propagator<'a> = Box<dyn Fn(&mut [C64]) + Send + Sync + 'a>;

/// Anything that can apply `exp(-i H_j s)` to a state.
pub trait TermEvolver: Sync {
    fn dim(&self) -> usize;

    /// Applies `exp(-i H_j time)` to `amplitudes` in place.
    fn apply(&self, time: f64, amplitudes: &mut [C64]);

    /// A propagator for a fixed `time`. Implementations may precompute.
    fn propagator(&self, time: f64) -> Propagator<'_> {
        Box::new(move |amps: &mut [C64]| self.apply(time, amps))
    }
}

/// A dense Hermitian term exponentiated through its eigendecomposition.
#[derive(Debug, Clone)]
pub struct DenseTerm {
    dim: usize,
    eigen: HermitianEigen,
}

impl DenseTerm {
    pub fn new(h: &DenseOperator, cfg: &NumericsConfig) -> Result<Self> {
        Ok(Self {
            dim: h.dim(),
            eigen: HermitianEigen::new(h, cfg)?,
        })
    }

    pub fn evolution(&self, time: f64) -> CMatrix {
        self.eigen.evolution(time)
    }
}

fn mat_vec_in_place(matrix: &CMatrix, amps: &mut [C64]) {
    let input = nalgebra::DVector::from_column_slice(amps);
    let out = matrix * input;
    amps.copy_from_slice(out.as_slice());
}

impl TermEvolver for DenseTerm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, time: f64, amplitudes: &mut [C64]) {
        mat_vec_in_place(&self.eigen.evolution(time), amplitudes);
    }

    fn propagator(&self, time: f64) -> Propagator<'_> {
        let u = self.eigen.evolution(time);
        Box::new(move |amps: &mut [C64]| mat_vec_in_place(&u, amps))
    }
}

/// Output of a product-formula run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub state: StateVector,
    /// Exponentials actually applied, `r × plan length` (zero when `t = 0`).
    pub exponentials: u64,
}

fn check_terms(plan: &ProductFormulaPlan, terms: &[&dyn TermEvolver], dim: usize) -> Result<()> {
    if plan.terms() != terms.len() {
        return Err(Error::TermCountMismatch {
            plan: plan.terms(),
            terms: terms.len(),
        });
    }
    for term in terms {
        if term.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: term.dim(),
            });
        }
    }
    Ok(())
}

fn slice_propagators<'a>(
    plan: &ProductFormulaPlan,
    terms: &[&'a dyn TermEvolver],
    slice: f64,
) -> Vec<Propagator<'a>> {
    plan.steps()
        .iter()
        .map(|step| terms[step.term - 1].propagator(step.fraction * slice))
        .collect()
}

/// Applies `[S_2k(-i t / r)]^r` to `psi`.
pub fn simulate(
    terms: &[&dyn TermEvolver],
    t: f64,
    k: u32,
    r: u64,
    psi: &StateVector,
) -> Result<Simulation> {
    let plan = build_plan(k, terms.len())?;
    simulate_plan(&plan, terms, t, r, psi)
}

/// [`simulate`] with a prebuilt plan.
pub fn simulate_plan(
    plan: &ProductFormulaPlan,
    terms: &[&dyn TermEvolver],
    t: f64,
    r: u64,
    psi: &StateVector,
) -> Result<Simulation> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    check_terms(plan, terms, psi.dim())?;
    if t == 0.0 {
        return Ok(Simulation {
            state: psi.clone(),
            exponentials: 0,
        });
    }
    let props = slice_propagators(plan, terms, t / r as f64);
    let mut state = psi.clone();
    let amps = state.amplitudes_mut();
    for _ in 0..r {
        for p in &props {
            p(amps);
        }
    }
    let exponentials = r * plan.len() as u64;
    // rounding drift grows with the number of applied exponentials
    let tol = NumericsConfig::default()
        .normalization_tol
        .max(exponentials as f64 * 8.0 * f64::EPSILON);
    let norm = state.norm();
    if (norm - 1.0).abs() > tol {
        return Err(Error::InvalidState(format!(
            "product formula lost normalization: {norm}"
        )));
    }
    Ok(Simulation {
        state,
        exponentials,
    })
}

/// The dense operator `[S_2k(-i t / r)]^r`: one slice is assembled column by
/// column and then raised to the `r`-th power by repeated squaring.
pub fn product_formula_operator(
    terms: &[&dyn TermEvolver],
    t: f64,
    k: u32,
    r: u64,
) -> Result<DenseOperator> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let dim = terms
        .first()
        .map(|term| term.dim())
        .ok_or_else(|| Error::InvalidParameter("no terms".into()))?;
    let plan = build_plan(k, terms.len())?;
    check_terms(&plan, terms, dim)?;
    let props = slice_propagators(&plan, terms, t / r as f64);
    let mut slice = CMatrix::identity(dim, dim);
    for mut column in slice.column_iter_mut() {
        let amps = column.as_mut_slice();
        for p in &props {
            p(amps);
        }
    }
    let mut result = CMatrix::identity(dim, dim);
    let mut base = slice;
    let mut exp = r;
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    DenseOperator::new(result)
}
