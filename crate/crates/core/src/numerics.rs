//! Dense linear algebra used as ground truth.
//!
//! Everything in the toolkit is eventually checked against the routines in
//! this module: Hermitian matrix exponentials computed by eigendecomposition,
//! spectral norms, and trace distances between density operators. Values are
//! immutable once constructed and every constructor rejects non-finite input.

use std::env;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Environment variable that overrides [`NumericsConfig::dense_cap`].
pub const DENSE_CAP_ENV: &str = "HAMSIM_DENSE_CAP";

/// Tolerances and limits shared by every exact-verification path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    /// Largest dimension any dense routine will accept.
    pub dense_cap: usize,
    /// max |A_xy - conj(A_yx)| allowed for a matrix flagged Hermitian.
    pub hermitian_tol: f64,
    /// ‖U^H U - I‖ allowed for exponentials.
    pub unitarity_tol: f64,
    /// |‖ψ‖ - 1| allowed for state vectors.
    pub normalization_tol: f64,
    /// |Tr ρ - 1| allowed for density operators.
    pub trace_tol: f64,
    /// Most negative eigenvalue accepted for a density operator.
    pub psd_tol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            dense_cap: 4096,
            hermitian_tol: 1e-12,
            unitarity_tol: 1e-11,
            normalization_tol: 1e-10,
            trace_tol: 1e-10,
            psd_tol: 1e-10,
        }
    }
}

impl NumericsConfig {
    /// Defaults, with the dense cap taken from `HAMSIM_DENSE_CAP` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(raw) = env::var(DENSE_CAP_ENV) {
            cfg.dense_cap = raw.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("{DENSE_CAP_ENV}={raw} is not a dimension"))
            })?;
        }
        Ok(cfg)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim > self.dense_cap {
            return Err(Error::DimensionCap {
                dim,
                cap: self.dense_cap,
            });
        }
        Ok(())
    }
}

fn all_finite<'a>(values: impl IntoIterator<Item = &'a C64>) -> bool {
    values
        .into_iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps `amplitudes`, requiring finite entries and unit norm.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(amplitudes, NumericsConfig::default().normalization_tol)
    }

    pub fn with_tolerance(amplitudes: Vec<C64>, tol: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state".into()));
        }
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        let state = Self { amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(amplitudes)
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Haar-ish random state from Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let amps = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps)
    }

    /// [`random`](Self::random) driven by a ChaCha8 stream seeded with `seed`.
    pub fn random_seeded(dim: usize, seed: u64) -> Result<Self> {
        Self::random(dim, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amplitudes)
    }
}

/// A dense square operator, tagged Hermitian when it is one to within
/// [`NumericsConfig::hermitian_tol`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: CMatrix,
    hermitian: bool,
}

impl DenseOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, NumericsConfig::default().hermitian_tol)
    }

    pub fn with_tolerance(matrix: CMatrix, hermitian_tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("empty operator".into()));
        }
        if !all_finite(matrix.iter()) {
            return Err(Error::NonFinite);
        }
        let hermitian = hermitian_deviation(&matrix) <= hermitian_tol;
        Ok(Self { matrix, hermitian })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        Self::new(CMatrix::from_diagonal(&diag))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter(
                "rows must form a square grid".into(),
            ));
        }
        Self::new(CMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, factor: f64) -> DenseOperator {
        DenseOperator {
            matrix: &self.matrix * C64::new(factor, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_dim(other)?;
        DenseOperator::new(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_dim(other)?;
        DenseOperator::new(&self.matrix - &other.matrix)
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_dim(other)?;
        DenseOperator::new(&self.matrix * &other.matrix)
    }

    /// Applies the operator to a state, returning the raw image (which is only
    /// normalized when the operator is unitary).
    pub fn apply(&self, state: &StateVector) -> Result<Vec<C64>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: state.dim(),
            });
        }
        let image = &self.matrix * state.to_dvector();
        Ok(image.iter().copied().collect())
    }

    /// ‖U^H U - I‖ for this operator.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let defect = gram - CMatrix::identity(self.dim(), self.dim());
        largest_singular_value(&defect)
    }

    fn same_dim(&self, other: &DenseOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

/// max |A_xy - conj(A_yx)|.
pub fn hermitian_deviation(matrix: &CMatrix) -> f64 {
    let n = matrix.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((matrix[(r, c)] - matrix[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Unit-trace positive semidefinite Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: DenseOperator,
}

impl DensityOperator {
    pub fn new(op: DenseOperator, cfg: &NumericsConfig) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: hermitian_deviation(op.matrix()),
            });
        }
        let trace: C64 = op.matrix().diagonal().iter().sum();
        if (trace.re - 1.0).abs() > cfg.trace_tol || trace.im.abs() > cfg.trace_tol {
            return Err(Error::InvalidDensity(format!("trace {trace} is not 1")));
        }
        let min_eig = hermitian_eigenvalues(op.matrix())
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -cfg.psd_tol {
            return Err(Error::InvalidDensity(format!(
                "eigenvalue {min_eig:e} is negative"
            )));
        }
        Ok(Self { op })
    }

    /// |ψ⟩⟨ψ|.
    pub fn from_pure(state: &StateVector) -> Self {
        let v = state.to_dvector();
        let matrix = &v * v.adjoint();
        Self {
            op: DenseOperator {
                matrix,
                hermitian: true,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }
}

/// Eigendecomposition of a Hermitian matrix, reusable for many evolution
/// times.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: DVector<f64>,
    vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &DenseOperator, cfg: &NumericsConfig) -> Result<Self> {
        cfg.check_dim(h.dim())?;
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: hermitian_deviation(h.matrix()),
            });
        }
        let eig = h.matrix().clone().symmetric_eigen();
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// exp(-i H t) as a raw matrix. Exactly the identity at `t = 0`.
    pub fn evolution(&self, t: f64) -> CMatrix {
        if t == 0.0 {
            let n = self.values.len();
            return CMatrix::identity(n, n);
        }
        let phases = DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&e| C64::new(0.0, -e * t).exp()),
        );
        let mut scaled = self.vectors.clone();
        for (mut col, phase) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *phase;
        }
        scaled * self.vectors.adjoint()
    }
}

/// U = exp(-iHt) for Hermitian `h`, by eigendecomposition.
pub fn hermitian_expm(h: &DenseOperator, t: f64, cfg: &NumericsConfig) -> Result<DenseOperator> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let eig = HermitianEigen::new(h, cfg)?;
    Ok(DenseOperator {
        matrix: eig.evolution(t),
        hermitian: false,
    })
}

fn hermitian_eigenvalues(matrix: &CMatrix) -> DVector<f64> {
    matrix.clone().symmetric_eigenvalues()
}

fn largest_singular_value(matrix: &CMatrix) -> f64 {
    matrix
        .singular_values()
        .iter()
        .copied()
        .fold(0.0f64, f64::max)
}

/// Largest singular value. For Hermitian input this is max |eigenvalue|.
pub fn spectral_norm(a: &DenseOperator) -> f64 {
    if a.is_hermitian() {
        hermitian_eigenvalues(a.matrix())
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.abs()))
    } else {
        largest_singular_value(a.matrix())
    }
}

/// ‖U - V‖ in the spectral norm.
pub fn unitary_diff_norm(u: &DenseOperator, v: &DenseOperator) -> Result<f64> {
    Ok(spectral_norm(&u.sub(v)?))
}

/// ½ Σ |eigenvalues of ρ - σ|.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let diff = rho.op.matrix() - sigma.op.matrix();
    let total: f64 = hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum();
    Ok((0.5 * total).clamp(0.0, 1.0))
}

/// Trace distance between two pure states, √(1 - |⟨a|b⟩|²).
pub fn pure_trace_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = a.inner(b)?.norm_sqr();
    Ok((1.0 - overlap).max(0.0).sqrt().min(1.0))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
    let raw = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let h = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    DenseOperator {
        matrix: h,
        hermitian: true,
    }
}

/// Random unitary exp(-iH) for a random Hermitian H.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
    let h = random_hermitian(dim, rng);
    hermitian_expm(&h, 1.0, &NumericsConfig::default()).expect("random Hermitian is valid")
}
