//! A Hamiltonian whose evolution for time π computes the parity of `N` bits.
//!
//! Basis states are `|k, j⟩` with an ancilla bit `k` and a level
//! `j ∈ 0..=N`; the state `|k, j⟩` is stored at index `k (N + 1) + j`. The
//! only nonzero entries are
//! `⟨k', j+1| H |k, j⟩ = √((N - j)(j + 1)) / 2` with `k ⊕ k' = X_(j+1)`, so
//! the graph is two weighted paths that swap rails wherever a bit is 1. Each
//! path is a copy of the spin-`N/2` `J_x` operator, whose evolution for time
//! π carries level 0 to level `N`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;

use crate::coloring::decompose;
use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_expm, spectral_norm, trace_distance, CMatrix, DenseOperator, DensityOperator,
    NumericsConfig, StateVector, C64,
};
use crate::one_sparse::CompiledPiece;
use crate::oracle::{to_dense, ColumnSource, SparseOracle};
use crate::pipeline::{run_pieces, RunParams};

/// The input bits `X_1..X_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityInstance {
    bits: Arc<[bool]>,
}

impl ParityInstance {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter(
                "parity instance needs at least one bit".into(),
            ));
        }
        Ok(Self { bits: bits.into() })
    }

    /// Parses a string of `0`/`1`, `X_1` first.
    pub fn parse(bits: &str) -> Result<Self> {
        let parsed = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidParameter(format!(
                    "`{bits}` is not a bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }

    /// `N`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn parity(&self) -> bool {
        self.bits.iter().fold(false, |acc, &b| acc ^ b)
    }

    pub fn dim(&self) -> usize {
        2 * (self.len() + 1)
    }

    pub fn qubits(&self) -> u32 {
        let dim = self.dim() as u64;
        64 - (dim - 1).leading_zeros()
    }

    pub fn index(&self, k: bool, j: usize) -> usize {
        usize::from(k) * (self.len() + 1) + j
    }

    /// Inverse of [`index`](Self::index).
    pub fn state(&self, index: usize) -> (bool, usize) {
        let levels = self.len() + 1;
        (index >= levels, index % levels)
    }

    /// `τ = ‖H‖ π = π N / 2`.
    pub fn tau(&self) -> f64 {
        PI * self.len() as f64 / 2.0
    }

    /// Prefix parities `k_0, k_1, …, k_N`.
    pub fn prefix_parities(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = false;
        out.push(acc);
        for &b in self.bits.iter() {
            acc ^= b;
            out.push(acc);
        }
        out
    }

    /// `√((N - j)(j + 1)) / 2`, the weight between levels `j` and `j + 1`.
    pub fn weight(&self, j: usize) -> f64 {
        let n = self.len() as f64;
        let j = j as f64;
        ((n - j) * (j + 1.0)).sqrt() / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edges {
    All,
    /// Edges whose lower level is even.
    Even,
    Odd,
}

struct ParitySource {
    instance: ParityInstance,
    edges: Edges,
    bit_queries: Arc<AtomicU64>,
}

impl ParitySource {
    fn bit(&self, j: usize) -> bool {
        self.bit_queries.fetch_add(1, Ordering::Relaxed);
        self.instance.bits[j - 1]
    }

    fn keeps(&self, lower: usize) -> bool {
        match self.edges {
            Edges::All => true,
            Edges::Even => lower.is_multiple_of(2),
            Edges::Odd => !lower.is_multiple_of(2),
        }
    }
}

impl ColumnSource for ParitySource {
    fn qubits(&self) -> u32 {
        self.instance.qubits()
    }

    fn dim(&self) -> usize {
        self.instance.dim()
    }

    fn max_degree(&self) -> usize {
        if self.edges == Edges::All {
            2
        } else {
            1
        }
    }

    fn entry(&self, x: usize, slot: usize) -> (usize, C64) {
        let inst = &self.instance;
        let (k, j) = inst.state(x);
        let weight = |lower: usize| C64::new(inst.weight(lower), 0.0);
        let mut found = [(x, C64::new(0.0, 0.0)); 2];
        let mut count = 0;
        if j > 0 && self.keeps(j - 1) {
            found[count] = (inst.index(k ^ self.bit(j), j - 1), weight(j - 1));
            count += 1;
        }
        if j < inst.len() && self.keeps(j) {
            found[count] = (inst.index(k ^ self.bit(j + 1), j + 1), weight(j));
            count += 1;
        }
        found[..count].sort_by_key(|&(y, _)| y);
        found
            .get(slot - 1)
            .filter(|_| slot <= count)
            .copied()
            .unwrap_or((x, C64::new(0.0, 0.0)))
    }
}

/// A parity oracle together with its counter of reads of the bit array.
#[derive(Debug)]
pub struct ParityOracle {
    pub oracle: SparseOracle,
    bit_queries: Arc<AtomicU64>,
}

impl ParityOracle {
    fn new(instance: &ParityInstance, edges: Edges, bit_queries: Arc<AtomicU64>) -> Self {
        let source = ParitySource {
            instance: instance.clone(),
            edges,
            bit_queries: Arc::clone(&bit_queries),
        };
        Self {
            oracle: SparseOracle::new(source),
            bit_queries,
        }
    }

    /// Reads of `X_j` so far, shared between the two halves of a split.
    pub fn bit_queries(&self) -> u64 {
        self.bit_queries.load(Ordering::Relaxed)
    }
}

/// The 2-sparse oracle for `H`. A column query reads at most two bits.
pub fn build_parity_oracle(instance: &ParityInstance) -> ParityOracle {
    ParityOracle::new(instance, Edges::All, Arc::new(AtomicU64::new(0)))
}

/// `H = H_1 + H_2` with `H_1` holding the edges from even levels and `H_2`
/// the edges from odd levels. Both are one-sparse, a column query reads one
/// bit, and the two share a bit counter.
pub fn split_even_odd(instance: &ParityInstance) -> (ParityOracle, ParityOracle) {
    let counter = Arc::new(AtomicU64::new(0));
    (
        ParityOracle::new(instance, Edges::Even, Arc::clone(&counter)),
        ParityOracle::new(instance, Edges::Odd, counter),
    )
}

/// Squared weight of `psi` on the component not containing `|0, 0⟩`.
pub fn leakage(instance: &ParityInstance, psi: &StateVector) -> f64 {
    instance
        .prefix_parities()
        .iter()
        .enumerate()
        .map(|(j, &k)| psi.amplitudes()[instance.index(!k, j)].norm_sqr())
        .sum()
}

/// Reduced state of the ancilla bit.
pub fn ancilla_density(instance: &ParityInstance, psi: &StateVector) -> Result<DensityOperator> {
    let amps = psi.amplitudes();
    let mut rho = CMatrix::zeros(2, 2);
    for j in 0..=instance.len() {
        let a = [
            amps[instance.index(false, j)],
            amps[instance.index(true, j)],
        ];
        for r in 0..2 {
            for c in 0..2 {
                rho[(r, c)] += a[r] * a[c].conj();
            }
        }
    }
    DensityOperator::new(DenseOperator::new(rho)?, &NumericsConfig::default())
}

/// The more likely ancilla outcome.
pub fn read_ancilla(instance: &ParityInstance, psi: &StateVector) -> Result<bool> {
    let rho = ancilla_density(instance, psi)?;
    Ok(rho.operator().get(1, 1).re > rho.operator().get(0, 0).re)
}

fn ancilla_distance(instance: &ParityInstance, psi: &StateVector, bit: bool) -> Result<f64> {
    let target = DensityOperator::from_pure(&StateVector::basis(2, usize::from(bit))?);
    trace_distance(&ancilla_density(instance, psi)?, &target)
}

/// Result of exact evolution from `|0, 0⟩` for time π.
#[derive(Debug, Clone, Serialize)]
pub struct ExactParity {
    pub ancilla: bool,
    /// `|⟨k_N, N|ψ⟩|`.
    pub overlap: f64,
    pub leakage: f64,
}

pub fn exact_parity_evolution(
    instance: &ParityInstance,
    cfg: &NumericsConfig,
) -> Result<ExactParity> {
    cfg.check_dim(instance.dim())?;
    let oracle = build_parity_oracle(instance);
    let h = to_dense(&oracle.oracle, cfg)?;
    let start = StateVector::basis(instance.dim(), instance.index(false, 0))?;
    let psi = StateVector::normalized(hermitian_expm(&h, PI, cfg)?.apply(&start)?)?;
    let ancilla = read_ancilla(instance, &psi)?;
    let overlap = psi.amplitudes()[instance.index(ancilla, instance.len())].norm();
    Ok(ExactParity {
        ancilla,
        overlap,
        leakage: leakage(instance, &psi),
    })
}

/// Which decomposition [`run_parity`] simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decomposition {
    /// The two one-sparse halves from [`split_even_odd`].
    Split,
    /// The general edge coloring of the 2-sparse oracle.
    Coloring,
}

/// Outcome of [`run_parity`].
#[derive(Debug, Clone, Serialize)]
pub struct ParityRun {
    pub bits: String,
    pub decomposition: Decomposition,
    pub parity: bool,
    pub predicted: bool,
    pub trace_distance: f64,
    /// Trace distance of the ancilla from `|parity⟩`.
    pub ancilla_distance: f64,
    pub leakage: f64,
    pub tau: f64,
    pub k: u32,
    pub r: u64,
    pub exponentials: u64,
    /// Queries to the pieces of `H`, one per exponential and affected column
    /// batch; compared with `N / 4 = τ / 2π`.
    pub h_queries: u64,
    pub lower_bound: f64,
    /// Bit reads: worst per-query bit cost times `h_queries`.
    pub bit_queries: u64,
    /// Bit reads actually issued while reading the pieces.
    pub classical_bit_queries: u64,
}

/// Simulates `exp(-i π H) |0, 0⟩` with the product formula and reads the
/// parity off the ancilla. Fails when the measured trace distance exceeds
/// `eps` or when the query tally undercuts `N / 4`.
pub fn run_parity(
    instance: &ParityInstance,
    eps: f64,
    k: Option<u32>,
    decomposition: Decomposition,
    cfg: &NumericsConfig,
) -> Result<ParityRun> {
    cfg.check_dim(instance.dim())?;
    let full = build_parity_oracle(instance);
    let h = to_dense(&full.oracle, cfg)?;
    let (pieces, bits_per_query, counter_start, counter): (
        Vec<CompiledPiece>,
        u64,
        u64,
        Arc<AtomicU64>,
    ) = match decomposition {
        Decomposition::Split => {
            let (even, odd) = split_even_odd(instance);
            let before = even.bit_queries();
            let pieces = vec![
                CompiledPiece::compile(&even.oracle)?,
                CompiledPiece::compile(&odd.oracle)?,
            ];
            (pieces, 1, before, Arc::clone(&even.bit_queries))
        }
        Decomposition::Coloring => {
            let before = full.bit_queries();
            let mut pieces = Vec::new();
            for piece in decompose(&full.oracle) {
                let compiled = CompiledPiece::compile(&piece)?;
                if !compiled.is_zero() {
                    pieces.push(compiled);
                }
            }
            (pieces, 2, before, Arc::clone(&full.bit_queries))
        }
    };
    let classical_bit_queries = counter.load(Ordering::Relaxed) - counter_start;
    let start = StateVector::basis(instance.dim(), instance.index(false, 0))?;
    let params = RunParams {
        k,
        ..RunParams::new(PI, eps)
    };
    let run = run_pieces(&pieces, &h, &start, params, cfg)?;
    let parity = instance.parity();
    let report = ParityRun {
        bits: instance
            .bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect(),
        decomposition,
        parity,
        predicted: read_ancilla(instance, &run.state)?,
        trace_distance: run.trace_distance,
        ancilla_distance: ancilla_distance(instance, &run.state, parity)?,
        leakage: leakage(instance, &run.state),
        tau: run.tau,
        k: run.k,
        r: run.r,
        exponentials: run.exponentials,
        h_queries: run.piece_queries,
        lower_bound: instance.len() as f64 / 4.0,
        bit_queries: run.piece_queries * bits_per_query,
        classical_bit_queries,
    };
    if report.trace_distance > eps {
        return Err(Error::ErrorTargetMissed {
            measured: report.trace_distance,
            target: eps,
        });
    }
    if (report.h_queries as f64) < report.lower_bound {
        return Err(Error::RestrictionViolated(format!(
            "{} queries undercut the lower bound {}",
            report.h_queries, report.lower_bound
        )));
    }
    Ok(report)
}

/// `‖H‖` from the `(N + 1)`-dimensional `J_x` line, usable beyond the dense
/// cap of the full matrix.
pub fn line_norm(n_bits: usize, cfg: &NumericsConfig) -> Result<f64> {
    let levels = n_bits + 1;
    cfg.check_dim(levels)?;
    let probe = ParityInstance::new(vec![false; n_bits])?;
    let mut m = CMatrix::zeros(levels, levels);
    for j in 0..n_bits {
        let w = C64::new(probe.weight(j), 0.0);
        m[(j, j + 1)] = w;
        m[(j + 1, j)] = w;
    }
    Ok(spectral_norm(&DenseOperator::new(m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::verify_coloring;
    use crate::oracle::Entry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    fn inst(bits: &str) -> ParityInstance {
        ParityInstance::parse(bits).unwrap()
    }

    #[test]
    fn single_bit_blocks() {
        let i = inst("0");
        let list = build_parity_oracle(&i).oracle.entry_list().unwrap();
        assert_eq!(
            list.entries,
            vec![
                Entry {
                    x: 0,
                    y: 1,
                    value: C64::new(0.5, 0.0)
                },
                Entry {
                    x: 2,
                    y: 3,
                    value: C64::new(0.5, 0.0)
                },
            ]
        );
        let crossed = build_parity_oracle(&inst("1")).oracle.entry_list().unwrap();
        assert_eq!(
            crossed
                .entries
                .iter()
                .map(|e| (e.x, e.y))
                .collect::<Vec<_>>(),
            vec![(0, 3), (1, 2)]
        );
    }

    #[test]
    fn neighbors_sit_on_adjacent_levels() {
        let i = inst("0110");
        let oracle = build_parity_oracle(&i);
        for x in 0..i.dim() {
            let (_, j) = i.state(x);
            for slot in 1..=2 {
                let (y, v) = oracle.oracle.query(x, slot).unwrap();
                if v != C64::new(0.0, 0.0) {
                    let (_, jy) = i.state(y);
                    assert!(jy + 1 == j || jy == j + 1);
                }
            }
        }
    }

    #[test]
    fn norm_is_half_n() {
        for n in 1..=10 {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let i = ParityInstance::new(bits).unwrap();
            let h = to_dense(&build_parity_oracle(&i).oracle, &cfg()).unwrap();
            assert!((spectral_norm(&h) - n as f64 / 2.0).abs() < 1e-10);
        }
        for n in [16, 33, 64] {
            assert!((line_norm(n, &cfg()).unwrap() - n as f64 / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn column_queries_read_at_most_two_bits() {
        let i = inst("10110100");
        let oracle = build_parity_oracle(&i);
        let (even, odd) = split_even_odd(&i);
        for x in 0..i.dim() {
            for slot in 1..=2 {
                let before = oracle.bit_queries();
                oracle.oracle.query(x, slot).unwrap();
                assert!(oracle.bit_queries() - before <= 2);
            }
            for half in [&even, &odd] {
                let before = half.bit_queries();
                half.oracle.query(x, 1).unwrap();
                assert!(half.bit_queries() - before <= 1);
            }
        }
    }

    #[test]
    fn halves_sum_to_h_and_are_one_sparse() {
        for n in 1..=10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let i = ParityInstance::new(bits).unwrap();
            let h = to_dense(&build_parity_oracle(&i).oracle, &cfg()).unwrap();
            let (even, odd) = split_even_odd(&i);
            let h1 = to_dense(&even.oracle, &cfg()).unwrap();
            let h2 = to_dense(&odd.oracle, &cfg()).unwrap();
            assert_eq!(h1.add(&h2).unwrap(), h);
            CompiledPiece::compile(&even.oracle).unwrap();
            CompiledPiece::compile(&odd.oracle).unwrap();
        }
    }

    #[test]
    fn two_bit_split_by_level() {
        let i = inst("00");
        let (even, odd) = split_even_odd(&i);
        let e = even.oracle.entry_list().unwrap();
        let o = odd.oracle.entry_list().unwrap();
        assert!(e
            .entries
            .iter()
            .all(|en| i.state(en.x).1 == 0 && i.state(en.y).1 == 1));
        assert!(o
            .entries
            .iter()
            .all(|en| i.state(en.x).1 == 1 && i.state(en.y).1 == 2));
        assert_eq!(e.entries.len(), 2);
        assert_eq!(o.entries.len(), 2);
    }

    #[test]
    fn uncrossed_lines_are_block_diagonal() {
        let i = inst("0000");
        let list = build_parity_oracle(&i).oracle.entry_list().unwrap();
        assert!(list
            .entries
            .iter()
            .all(|e| i.state(e.x).0 == i.state(e.y).0));
    }

    #[test]
    fn prefix_law_by_traversal() {
        for bits in ["1", "0110", "10110100", "1111111111"] {
            let i = inst(bits);
            let oracle = build_parity_oracle(&i);
            let mut x = i.index(false, 0);
            let mut visited = vec![x];
            loop {
                let (_, j) = i.state(x);
                let next = (1..=2)
                    .map(|s| oracle.oracle.query(x, s).unwrap())
                    .find(|&(y, v)| v != C64::new(0.0, 0.0) && i.state(y).1 == j + 1);
                match next {
                    Some((y, _)) => {
                        visited.push(y);
                        x = y;
                    }
                    None => break,
                }
            }
            let prefixes = i.prefix_parities();
            assert_eq!(visited.len(), i.len() + 1);
            for (j, &x) in visited.iter().enumerate() {
                assert_eq!(i.state(x), (prefixes[j], j));
            }
        }
    }

    #[test]
    fn exact_evolution_examples() {
        let one = exact_parity_evolution(&inst("1"), &cfg()).unwrap();
        assert!(one.ancilla);
        assert!((one.overlap - 1.0).abs() < 1e-9);
        let three = exact_parity_evolution(&inst("101"), &cfg()).unwrap();
        assert!(!three.ancilla);
        assert!((three.overlap - 1.0).abs() < 1e-9);
        assert!(three.leakage < 1e-10);
    }

    #[test]
    fn run_examples() {
        let a = run_parity(&inst("1100"), 0.2, None, Decomposition::Split, &cfg()).unwrap();
        assert!(!a.predicted);
        assert!(a.trace_distance <= 0.2);
        assert!(a.h_queries >= 1);
        let b = run_parity(
            &inst("10110100"),
            0.2,
            Some(1),
            Decomposition::Split,
            &cfg(),
        )
        .unwrap();
        assert!(!b.predicted);
        assert!(b.h_queries >= 2);
        assert_eq!(b.h_queries, b.exponentials);
        assert_eq!(b.k, 1);
        assert!(b.ancilla_distance <= b.trace_distance + 1e-12);
    }

    #[test]
    fn coloring_route_agrees() {
        let i = inst("1011");
        let run = run_parity(&i, 0.2, Some(1), Decomposition::Coloring, &cfg()).unwrap();
        assert_eq!(run.predicted, i.parity());
        verify_coloring(&build_parity_oracle(&i).oracle, &cfg()).unwrap();
    }

    #[test]
    fn empty_bits_rejected() {
        assert!(ParityInstance::new(vec![]).is_err());
        assert!(ParityInstance::parse("").is_err());
        assert!(ParityInstance::parse("10a").is_err());
    }
}
