//! Edge coloring of a d-sparse Hamiltonian into one-sparse pieces.
//!
//! An edge `(x, y)` with `x < y`, `y = f_y(x, i)` and `x = f_y(y, j)` gets the
//! label `(i, j, ν)`. The pair `(i, j)` alone can repeat along chains
//! `x_0 < x_1 < …` where every link has the same slots, so `ν` is computed by
//! deterministic coin tossing over the chain starting at `x`: each round
//! replaces a value by the bit at the first position where it differs from its
//! successor, followed by that position in binary. After `z_n` rounds only six
//! values remain, and adjacent edges always end with different `ν`.
//!
//! Bit positions are counted from the most significant bit of a fixed-width
//! value, starting at 0. The last element of a chain has no successor and
//! records its first bit followed by position 0.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, NumericsConfig, C64};
use crate::oracle::{to_dense, SparseOracle};

/// A fixed-width bit string, most significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    value: u64,
    width: u32,
}

impl BitString {
    pub fn new(value: u64, width: u32) -> Result<Self> {
        if width == 0 || width > 64 {
            return Err(Error::InvalidParameter(format!("bit width {width}")));
        }
        if width < 64 && value >> width != 0 {
            return Err(Error::InvalidParameter(format!(
                "{value} does not fit in {width} bits"
            )));
        }
        Ok(Self { value, width })
    }

    pub fn zeros(width: u32) -> Self {
        Self { value: 0, width }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(bits: &str) -> Result<Self> {
        if bits.is_empty() || bits.len() > 64 || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidParameter(format!(
                "`{bits}` is not a bit string"
            )));
        }
        let value = u64::from_str_radix(bits, 2).expect("validated binary digits");
        Self::new(value, bits.len() as u32)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.width as usize)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Width after one coin-toss round: one value bit plus `⌈log₂ w⌉` position
/// bits. The map fixes 1.
pub fn next_width(width: u32) -> u32 {
    1 + ceil_log2(u64::from(width))
}

/// `z_n`: rounds of `l ↦ 2⌈log₂ l⌉`, starting from `2^n`, needed to reach 6
/// or less.
pub fn iterate_count(n: u32) -> u32 {
    if n <= 2 {
        return 0;
    }
    // ⌈log₂ 2^n⌉ = n, so the first round lands on 2n.
    let mut count = 1;
    let mut l = 2 * u64::from(n);
    while l > 6 {
        l = 2 * u64::from(ceil_log2(l));
        count += 1;
    }
    count
}

/// Value widths at levels `0..=z_n`, starting from `n`.
pub fn level_widths(n: u32) -> Vec<u32> {
    let z = iterate_count(n);
    let mut widths = vec![n];
    for _ in 0..z {
        let last = *widths.last().unwrap();
        widths.push(next_width(last));
    }
    widths
}

/// Values `x_0^(p), x_1^(p), …` at one coin-toss level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinTossSequence {
    level: u32,
    width: u32,
    values: Vec<u64>,
}

impl CoinTossSequence {
    /// Level-0 sequence. Consecutive values must differ.
    pub fn new(width: u32, values: Vec<u64>) -> Result<Self> {
        Self::at_level(0, width, values)
    }

    pub fn at_level(level: u32, width: u32, values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty coin-toss sequence".into()));
        }
        for &v in &values {
            BitString::new(v, width)?;
        }
        let seq = Self {
            level,
            width,
            values,
        };
        seq.check_distinct()?;
        Ok(seq)
    }

    pub fn from_strings(values: &[&str]) -> Result<Self> {
        let parsed = values
            .iter()
            .map(|s| BitString::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let width = parsed[0].width();
        if parsed.iter().any(|b| b.width() != width) {
            return Err(Error::InvalidParameter("mixed widths".into()));
        }
        Self::new(width, parsed.iter().map(|b| b.value()).collect())
    }

    fn check_distinct(&self) -> Result<()> {
        for (idx, pair) in self.values.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(Error::RepeatedCoinValue {
                    index: idx,
                    next: idx + 1,
                });
            }
        }
        Ok(())
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<BitString> {
        self.values.get(index).map(|&value| BitString {
            value,
            width: self.width,
        })
    }

    pub fn to_strings(&self) -> Vec<String> {
        (0..self.len())
            .map(|idx| self.get(idx).unwrap().to_string())
            .collect()
    }
}

/// One coin-toss round.
pub fn coin_toss_level(seq: &CoinTossSequence) -> Result<CoinTossSequence> {
    seq.check_distinct()?;
    let width = seq.width;
    if width == 1 {
        return Ok(CoinTossSequence {
            level: seq.level + 1,
            width,
            values: seq.values.clone(),
        });
    }
    let new_width = next_width(width);
    let pos_bits = new_width - 1;
    let unused = 64 - width;
    let bit_at = |v: u64, pos: u32| (v >> (width - 1 - pos)) & 1;
    let n = seq.values.len();
    let values = (0..n)
        .map(|l| {
            let current = seq.values[l];
            let pos = if l + 1 < n {
                (current ^ seq.values[l + 1]).leading_zeros() - unused
            } else {
                0
            };
            (bit_at(current, pos) << pos_bits) | u64::from(pos)
        })
        .collect();
    Ok(CoinTossSequence {
        level: seq.level + 1,
        width: new_width,
        values,
    })
}

/// All levels `0..=rounds` starting from `seq`.
pub fn coin_toss_levels(seq: &CoinTossSequence, rounds: u32) -> Result<Vec<CoinTossSequence>> {
    let mut levels = vec![seq.clone()];
    for _ in 0..rounds {
        let next = coin_toss_level(levels.last().unwrap())?;
        levels.push(next);
    }
    Ok(levels)
}

/// Per-call memo of base-oracle answers, so that one colored query never asks
/// the base oracle the same `(x, i)` twice.
struct QueryCache<'a> {
    base: &'a SparseOracle,
    seen: Vec<((usize, usize), (usize, C64))>,
}

impl<'a> QueryCache<'a> {
    fn new(base: &'a SparseOracle) -> Self {
        Self {
            base,
            seen: Vec::with_capacity(16),
        }
    }

    fn f(&mut self, x: usize, slot: usize) -> Result<(usize, C64)> {
        if let Some(&(_, answer)) = self.seen.iter().find(|(key, _)| *key == (x, slot)) {
            return Ok(answer);
        }
        let answer = self.base.query(x, slot)?;
        self.seen.push(((x, slot), answer));
        Ok(answer)
    }

    fn fy(&mut self, x: usize, slot: usize) -> Result<usize> {
        Ok(self.f(x, slot)?.0)
    }

    fn chain(&mut self, x: usize, i: usize, j: usize, max_len: usize) -> Result<Vec<usize>> {
        let y = self.fy(x, i)?;
        if !(y > x && self.fy(y, j)? == x) {
            return Err(Error::ChainPrecondition { x, i, j });
        }
        let mut chain = vec![x, y];
        while chain.len() < max_len {
            let last = *chain.last().unwrap();
            let next = self.fy(last, i)?;
            if next > last && self.fy(next, j)? == last {
                chain.push(next);
            } else {
                break;
            }
        }
        Ok(chain)
    }

    fn upsilon(&mut self, x: usize, i: usize, j: usize) -> Result<BitString> {
        let n = self.base.n();
        let z = iterate_count(n);
        let chain = self.chain(x, i, j, z as usize + 2)?;
        let seq = CoinTossSequence::new(n, chain.iter().map(|&v| v as u64).collect())?;
        let last = coin_toss_levels(&seq, z)?.pop().unwrap();
        Ok(last.get(0).unwrap())
    }
}

/// The ascending chain `x = x_0 < x_1 < …` of `(i, j)`-labelled edges,
/// truncated at `z_n + 2` elements.
pub fn build_chain(oracle: &SparseOracle, x: usize, i: usize, j: usize) -> Result<Vec<usize>> {
    let z = iterate_count(oracle.n());
    QueryCache::new(oracle).chain(x, i, j, z as usize + 2)
}

/// `Υ(x, i, j)`: the `ν` assigned to the edge leaving `x` through slot `i`.
pub fn upsilon(oracle: &SparseOracle, x: usize, i: usize, j: usize) -> Result<BitString> {
    QueryCache::new(oracle).upsilon(x, i, j)
}

/// Color of a one-sparse piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeLabel {
    pub i: usize,
    pub j: usize,
    pub nu: BitString,
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.i, self.j, self.nu)
    }
}

impl Serialize for EdgeLabel {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Width of `ν` for an `n`-qubit oracle.
pub fn label_width(n: u32) -> u32 {
    *level_widths(n).last().unwrap()
}

/// All labels `(i, j, ν)`, `i, j ∈ 1..=d`, `ν` in the final coin-toss
/// alphabet. Exactly `6d²` labels once `z_n >= 1`; for `z_n = 0`, `ν` ranges
/// over the raw `n`-bit vertex values.
pub fn enumerate_labels(d: usize, n: u32) -> Vec<EdgeLabel> {
    let widths = level_widths(n);
    let width = *widths.last().unwrap();
    let nus: Vec<BitString> = if widths.len() == 1 {
        (0..1u64 << n)
            .map(|v| BitString { value: v, width })
            .collect()
    } else {
        // positions come from the previous level's width
        let positions = u64::from(widths[widths.len() - 2]);
        (0..2u64)
            .flat_map(|bit| (0..positions).map(move |pos| (bit << (width - 1)) | pos))
            .map(|value| BitString { value, width })
            .collect()
    };
    let mut labels = Vec::with_capacity(d * d * nus.len());
    for i in 1..=d {
        for j in 1..=d {
            for &nu in &nus {
                labels.push(EdgeLabel { i, j, nu });
            }
        }
    }
    labels
}

/// Which branch of the colored query produced a nonzero answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    Diagonal,
    Upward,
    Downward,
}

/// Answer to one colored query with its base-oracle cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredAnswer {
    pub y: usize,
    pub value: C64,
    pub base_queries: u64,
    pub case: Option<Case>,
}

/// The one-sparse piece `H_(i,j,ν)` of a base oracle.
#[derive(Debug, Clone, Copy)]
pub struct ColoredOracle<'a> {
    base: &'a SparseOracle,
    label: EdgeLabel,
}

impl<'a> ColoredOracle<'a> {
    pub fn new(base: &'a SparseOracle, label: EdgeLabel) -> Self {
        Self { base, label }
    }

    pub fn label(&self) -> EdgeLabel {
        self.label
    }

    pub fn base(&self) -> &'a SparseOracle {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `g(x, i, j, ν)`.
    pub fn query(&self, x: usize) -> Result<(usize, C64)> {
        let a = self.query_with_cost(x)?;
        Ok((a.y, a.value))
    }

    pub fn query_with_cost(&self, x: usize) -> Result<ColoredAnswer> {
        let EdgeLabel { i, j, nu } = self.label;
        if i == 0 || j == 0 || i > self.base.d() || j > self.base.d() {
            return Err(Error::QueryOutOfRange { x, slot: i.max(j) });
        }
        let start = self.base.queries();
        let mut cache = QueryCache::new(self.base);
        let finish = |y: usize, value: C64, case: Option<Case>| ColoredAnswer {
            y,
            value,
            base_queries: self.base.queries() - start,
            case,
        };

        let (yi, vi) = cache.f(x, i)?;
        if yi == x && i == j && nu == BitString::zeros(nu.width()) {
            return Ok(finish(x, vi, Some(Case::Diagonal)));
        }
        if yi > x && cache.fy(yi, j)? == x && cache.upsilon(x, i, j)? == nu {
            return Ok(finish(yi, vi, Some(Case::Upward)));
        }
        let (wj, vj) = cache.f(x, j)?;
        if wj < x && cache.fy(wj, i)? == x && cache.upsilon(wj, i, j)? == nu {
            return Ok(finish(wj, vj, Some(Case::Downward)));
        }
        Ok(finish(x, C64::new(0.0, 0.0), None))
    }

    /// Evaluates the upward and downward conditions independently.
    pub fn case_conditions(&self, x: usize) -> Result<(bool, bool)> {
        let EdgeLabel { i, j, nu } = self.label;
        let mut cache = QueryCache::new(self.base);
        let yi = cache.fy(x, i)?;
        let upward = yi > x && cache.fy(yi, j)? == x && cache.upsilon(x, i, j)? == nu;
        let wj = cache.fy(x, j)?;
        let downward = wj < x && cache.fy(wj, i)? == x && cache.upsilon(wj, i, j)? == nu;
        Ok((upward, downward))
    }
}

/// `g(x)` for the piece of `oracle` carrying `label`.
pub fn colored_query(oracle: &SparseOracle, x: usize, label: EdgeLabel) -> Result<(usize, C64)> {
    ColoredOracle::new(oracle, label).query(x)
}

/// Colored pieces for every label of `oracle`.
pub fn decompose(oracle: &SparseOracle) -> Vec<ColoredOracle<'_>> {
    enumerate_labels(oracle.d(), oracle.n())
        .into_iter()
        .map(|label| ColoredOracle::new(oracle, label))
        .collect()
}

/// Outcome of [`verify_coloring`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoringReport {
    pub n: u32,
    pub d: usize,
    pub dim: usize,
    pub z_n: u32,
    pub labels_enumerated: usize,
    pub label_bound: usize,
    /// Labels whose piece has at least one nonzero entry.
    pub labels_used: usize,
    pub max_queries_per_call: u64,
    pub query_bound: u64,
    pub colored_calls: u64,
    pub base_queries: u64,
    /// Nonzero entries of the base matrix, diagonal included.
    pub nonzeros: usize,
}

fn violation(check: &str, x: usize, label: EdgeLabel) -> Error {
    Error::ColoringViolation {
        check: check.into(),
        x,
        label: label.to_string(),
    }
}

/// Checks that the pieces reconstruct `oracle` exactly, that each piece is
/// one-sparse and Hermitian, that every edge gets exactly one label, and the
/// label-count and per-call query bounds.
pub fn verify_coloring(oracle: &SparseOracle, cfg: &NumericsConfig) -> Result<ColoringReport> {
    let dim = oracle.dim();
    cfg.check_dim(dim)?;
    let n = oracle.n();
    let d = oracle.d();
    let z = iterate_count(n);
    let query_bound = 2 * (u64::from(z) + 2);
    let label_bound = 6 * d * d;
    let labels = enumerate_labels(d, n);
    if labels.len() > label_bound {
        return Err(violation("label_count", 0, labels[0]));
    }

    let start = oracle.queries();
    let dense = to_dense(oracle, cfg)?;
    let mut sum = CMatrix::zeros(dim, dim);
    let mut cover = vec![0u32; dim * dim];
    let mut labels_used = 0;
    let mut max_cost = 0u64;
    let mut calls = 0u64;
    let mut piece: Vec<Option<(usize, C64)>> = vec![None; dim];

    for &label in &labels {
        let colored = ColoredOracle::new(oracle, label);
        for (x, slot) in piece.iter_mut().enumerate() {
            let answer = colored.query_with_cost(x)?;
            calls += 1;
            max_cost = max_cost.max(answer.base_queries);
            if answer.base_queries > query_bound {
                return Err(violation("query_bound", x, label));
            }
            *slot = (answer.value != C64::new(0.0, 0.0)).then_some((answer.y, answer.value));
        }
        let mut used = false;
        for x in 0..dim {
            let Some((y, v)) = piece[x] else { continue };
            used = true;
            if y >= dim {
                return Err(violation("one_sparse_hermitian", x, label));
            }
            let consistent = if y == x {
                v.im == 0.0
            } else {
                matches!(piece[y], Some((back, w)) if back == x && w == v.conj())
            };
            if !consistent {
                return Err(violation("one_sparse_hermitian", x, label));
            }
            sum[(x, y)] += v;
            cover[x * dim + y] += 1;
        }
        if used {
            labels_used += 1;
        }
    }

    let mut nonzeros = 0;
    for x in 0..dim {
        for y in 0..dim {
            let h = dense.get(x, y);
            let count = cover[x * dim + y];
            if h != C64::new(0.0, 0.0) {
                nonzeros += 1;
                if count != 1 {
                    return Err(violation("distinct_labels", x, labels[0]));
                }
            }
            if sum[(x, y)] != h {
                return Err(violation("reconstruction", x, labels[0]));
            }
        }
    }

    Ok(ColoringReport {
        n,
        d,
        dim,
        z_n: z,
        labels_enumerated: labels.len(),
        label_bound,
        labels_used,
        max_queries_per_call: max_cost,
        query_bound,
        colored_calls: calls,
        base_queries: oracle.queries() - start,
        nonzeros,
    })
}
