//! End-to-end simulation: pieces, parameter choice, product formula, and the
//! exact comparison.

use std::time::Instant;

use serde::Serialize;

use crate::coloring::{decompose, iterate_count, verify_coloring, ColoringReport};
use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_expm, pure_trace_distance, spectral_norm, unitary_diff_norm, DenseOperator,
    NumericsConfig, StateVector,
};
use crate::one_sparse::{precision_bits, CompiledPiece};
use crate::oracle::{to_dense, SparseOracle};
use crate::suzuki::{
    build_plan, choose_k, choose_r, integrator_error_bound, product_formula_operator, restriction,
    simulate_plan, TermEvolver,
};

/// Time, accuracy target and optional overrides for `k` and `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub t: f64,
    pub eps: f64,
    pub k: Option<u32>,
    pub r: Option<u64>,
}

impl RunParams {
    pub fn new(t: f64, eps: f64) -> Self {
        Self {
            t,
            eps,
            k: None,
            r: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time {}", self.t)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps {} outside (0, 1]",
                self.eps
            )));
        }
        if self.k == Some(0) || self.r == Some(0) {
            return Err(Error::InvalidParameter("k and r must be at least 1".into()));
        }
        Ok(())
    }
}

/// Product-formula run over compiled pieces, compared with exact evolution.
#[derive(Debug, Clone, Serialize)]
pub struct PieceRun {
    #[serde(skip)]
    pub state: StateVector,
    #[serde(skip)]
    pub exact: StateVector,
    pub norm: f64,
    pub tau: f64,
    pub terms: usize,
    pub k: u32,
    /// Zero when the evolution is trivial and nothing was applied.
    pub r: u64,
    pub exponentials_per_slice: u64,
    pub exponentials: u64,
    /// Sum over applied exponentials of the piece's worst per-column query
    /// cost.
    pub piece_queries: u64,
    pub trace_distance: f64,
    pub restriction_ok: bool,
    /// Analytic error bound when the step restriction holds.
    pub error_bound: Option<f64>,
}

/// Simulates `exp(-i H t) ψ` with `H = Σ pieces` and checks against `h`.
pub fn run_pieces(
    pieces: &[CompiledPiece],
    h: &DenseOperator,
    psi: &StateVector,
    params: RunParams,
    cfg: &NumericsConfig,
) -> Result<PieceRun> {
    params.validate()?;
    let norm = spectral_norm(h);
    let tau = norm * params.t;
    let exact = hermitian_expm(h, params.t, cfg)?.apply(psi)?;
    let exact = StateVector::normalized(exact)?;
    let trivial = PieceRun {
        state: psi.clone(),
        exact: exact.clone(),
        norm,
        tau,
        terms: pieces.len(),
        k: params.k.unwrap_or(1),
        r: 0,
        exponentials_per_slice: 0,
        exponentials: 0,
        piece_queries: 0,
        trace_distance: 0.0,
        restriction_ok: true,
        error_bound: None,
    };
    if tau == 0.0 || pieces.is_empty() {
        let trace_distance = pure_trace_distance(psi, &exact)?;
        return Ok(PieceRun {
            trace_distance,
            ..trivial
        });
    }

    let m = pieces.len();
    let k = match params.k {
        Some(k) => k,
        None => choose_k(m, tau, params.eps)?,
    };
    let r = match params.r {
        Some(r) => r,
        None => choose_r(k, m, tau, params.eps)?,
    };
    let plan = build_plan(k, m)?;
    let refs: Vec<&dyn TermEvolver> = pieces.iter().map(|p| p as &dyn TermEvolver).collect();
    let sim = simulate_plan(&plan, &refs, params.t, r, psi)?;
    let slice_cost: u64 = plan
        .steps()
        .iter()
        .map(|s| pieces[s.term - 1].max_column_cost())
        .sum();
    let check = restriction(k, m, tau, r);
    let error_bound = if check.holds() {
        Some(integrator_error_bound(k, m, tau, r)?.bound)
    } else {
        None
    };
    Ok(PieceRun {
        trace_distance: pure_trace_distance(&sim.state, &exact)?,
        state: sim.state,
        k,
        r,
        exponentials_per_slice: plan.len() as u64,
        exponentials: sim.exponentials,
        piece_queries: slice_cost * r,
        restriction_ok: check.holds(),
        error_bound,
        ..trivial
    })
}

/// Report of [`simulate_oracle`].
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub coloring: ColoringReport,
    pub run: PieceRun,
    pub eps: f64,
    pub t: f64,
    /// Black-box queries to `f`: each exponential of a colored piece costs
    /// that piece's worst per-column number of base queries.
    pub n_bb: u64,
    /// `2 (z_n + 2) N_exp`.
    pub n_bb_bound: u64,
    /// Base queries actually issued while reading pieces and verifying.
    pub classical_queries: u64,
    /// Advisory fixed-point width for the chosen parameters.
    pub precision_bits: Option<u32>,
}

/// Colors `oracle`, verifies the decomposition, reads the nonzero pieces, and
/// simulates them for time `t` from `psi`. Fails when the measured trace
/// distance exceeds `eps`.
pub fn simulate_oracle(
    oracle: &SparseOracle,
    psi: &StateVector,
    params: RunParams,
    cfg: &NumericsConfig,
) -> Result<SimulationReport> {
    params.validate()?;
    if psi.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            left: oracle.dim(),
            right: psi.dim(),
        });
    }
    let start = oracle.queries();
    let coloring = verify_coloring(oracle, cfg)?;
    let h = to_dense(oracle, cfg)?;
    let mut pieces = Vec::new();
    for piece in decompose(oracle) {
        let compiled = CompiledPiece::compile(&piece)?;
        if !compiled.is_zero() {
            pieces.push(compiled);
        }
    }
    let run = run_pieces(&pieces, &h, psi, params, cfg)?;
    if run.trace_distance > params.eps {
        return Err(Error::ErrorTargetMissed {
            measured: run.trace_distance,
            target: params.eps,
        });
    }
    let z = u64::from(iterate_count(oracle.n()));
    let precision_bits = if run.tau > 0.0 {
        Some(precision_bits(run.tau, oracle.d(), run.k, params.eps)?)
    } else {
        None
    };
    Ok(SimulationReport {
        coloring,
        n_bb: run.piece_queries,
        n_bb_bound: 2 * (z + 2) * run.exponentials,
        run,
        eps: params.eps,
        t: params.t,
        classical_queries: oracle.queries() - start,
        precision_bits,
    })
}

/// One `(k, r)` point of an error-scaling sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub k: u32,
    pub r: u64,
    /// `‖exp(-i H t) - [S_2k(-i t / r)]^r‖`.
    pub measured_error: f64,
    /// Analytic bound, absent when the step restriction fails.
    pub bound: Option<f64>,
    pub restriction_ok: bool,
    pub n_exp: u64,
    pub wall_time: f64,
}

/// Measures the product-formula operator error against `exact = exp(-i H t)`.
/// `norm` is `‖H‖`, used for the bound.
pub fn sweep_point(
    terms: &[&dyn TermEvolver],
    exact: &DenseOperator,
    norm: f64,
    t: f64,
    k: u32,
    r: u64,
) -> Result<SweepRow> {
    let start = Instant::now();
    let u = product_formula_operator(terms, t, k, r)?;
    let measured_error = unitary_diff_norm(&u, exact)?;
    let m = terms.len();
    let tau = norm * t;
    let restriction_ok = restriction(k, m, tau, r).holds();
    let bound = if restriction_ok {
        Some(integrator_error_bound(k, m, tau, r)?.bound)
    } else {
        None
    };
    let n_exp = if t == 0.0 {
        0
    } else {
        r * build_plan(k, m)?.len() as u64
    };
    Ok(SweepRow {
        k,
        r,
        measured_error,
        bound,
        restriction_ok,
        n_exp,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Error level below which an operator built from `exponentials` products
/// mostly reflects rounding.
pub fn rounding_floor(exponentials: u64) -> f64 {
    10.0 * exponentials.max(1) as f64 * f64::EPSILON
}

/// Least-squares slope of `ln y` against `ln x`; `None` for fewer than two
/// points or a degenerate abscissa.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let points: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Slope of error against `r` for the rows of one `k`, ignoring rows at the
/// rounding floor.
pub fn order_slope(rows: &[SweepRow], k: u32) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.k == k && row.measured_error > rounding_floor(row.n_exp))
        .map(|row| (row.r as f64, row.measured_error))
        .collect();
    loglog_slope(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{random_sparse, EntryList};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slope_of_power_law() {
        let points: Vec<(f64, f64)> = (1..6)
            .map(|r| (r as f64, 3.0 / (r as f64).powi(4)))
            .collect();
        assert!((loglog_slope(&points).unwrap() + 4.0).abs() < 1e-12);
        assert!(loglog_slope(&points[..1]).is_none());
        assert!(loglog_slope(&[(2.0, 1.0), (2.0, 3.0)]).is_none());
    }

    #[test]
    fn sweep_rows_respect_bound() {
        let cfg = NumericsConfig::default();
        let oracle = random_sparse(3, 2, 5, Some(1.0), &cfg).unwrap();
        let h = to_dense(&oracle, &cfg).unwrap();
        let pieces: Vec<CompiledPiece> = decompose(&oracle)
            .iter()
            .map(|p| CompiledPiece::compile(p).unwrap())
            .filter(|p| !p.is_zero())
            .collect();
        let refs: Vec<&dyn TermEvolver> = pieces.iter().map(|p| p as &dyn TermEvolver).collect();
        let exact = hermitian_expm(&h, 1.0, &cfg).unwrap();
        let mut rows = Vec::new();
        for r in [4, 8, 16, 32, 64] {
            let row = sweep_point(&refs, &exact, 1.0, 1.0, 1, r).unwrap();
            if let Some(b) = row.bound {
                assert!(row.measured_error <= b);
            }
            rows.push(row);
        }
        assert!((order_slope(&rows, 1).unwrap() + 2.0).abs() < 0.3);
        let zero = sweep_point(
            &refs,
            &hermitian_expm(&h, 0.0, &cfg).unwrap(),
            1.0,
            0.0,
            1,
            4,
        )
        .unwrap();
        assert!(zero.measured_error <= 1e-12);
        assert_eq!(zero.n_exp, 0);
    }

    #[test]
    fn random_oracle_meets_target() {
        let cfg = NumericsConfig::default();
        let oracle = random_sparse(5, 2, 4, None, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = StateVector::random(32, &mut rng).unwrap();
        let report = simulate_oracle(&oracle, &psi, RunParams::new(1.0, 0.05), &cfg).unwrap();
        assert!(report.run.trace_distance <= 0.05);
        assert!(report.n_bb <= report.n_bb_bound);
        assert!(report.n_bb > 0);
        assert_eq!(
            report.run.exponentials,
            report.run.r * report.run.exponentials_per_slice
        );
    }

    #[test]
    fn zero_time_short_circuits() {
        let cfg = NumericsConfig::default();
        let oracle = random_sparse(3, 2, 4, None, &cfg).unwrap();
        let psi = StateVector::basis(8, 3).unwrap();
        let report = simulate_oracle(&oracle, &psi, RunParams::new(0.0, 0.1), &cfg).unwrap();
        assert_eq!(report.n_bb, 0);
        assert_eq!(report.run.exponentials, 0);
        assert_eq!(report.run.state, psi);
        assert!(report.precision_bits.is_none());
    }

    #[test]
    fn zero_matrix_short_circuits() {
        let cfg = NumericsConfig::default();
        let oracle = crate::oracle::from_entry_list(&EntryList::new(2, vec![]), 1).unwrap();
        let psi = StateVector::basis(4, 0).unwrap();
        let report = simulate_oracle(&oracle, &psi, RunParams::new(2.0, 0.1), &cfg).unwrap();
        assert_eq!(report.run.exponentials, 0);
        assert_eq!(report.run.trace_distance, 0.0);
    }

    #[test]
    fn too_few_slices_is_reported() {
        let cfg = NumericsConfig::default();
        let oracle = random_sparse(4, 3, 9, Some(1.0), &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = StateVector::random(16, &mut rng).unwrap();
        let params = RunParams {
            r: Some(1),
            ..RunParams::new(20.0, 1e-3)
        };
        assert!(matches!(
            simulate_oracle(&oracle, &psi, params, &cfg),
            Err(Error::ErrorTargetMissed { .. })
        ));
    }

    #[test]
    fn parameters_are_validated() {
        let cfg = NumericsConfig::default();
        let oracle = random_sparse(2, 1, 0, None, &cfg).unwrap();
        let psi = StateVector::basis(4, 0).unwrap();
        for params in [
            RunParams::new(-1.0, 0.1),
            RunParams::new(1.0, 0.0),
            RunParams::new(1.0, 1.5),
        ] {
            assert!(simulate_oracle(&oracle, &psi, params, &cfg).is_err());
        }
    }
}
