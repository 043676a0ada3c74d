//! Exact evolution under one-sparse Hermitian pieces and the fixed-point
//! model of matrix entries.
//!
//! A one-sparse Hermitian matrix is a direct sum of 1×1 diagonal blocks and
//! 2×2 blocks `[[0, a], [conj(a), 0]]`, so `exp(-i H t)` has a closed form:
//! a phase on each diagonal entry and
//! `[[cos |a|t, -i (a/|a|) sin |a|t], [-i (conj a/|a|) sin |a|t, cos |a|t]]`
//! on each pair.

use crate::coloring::ColoredOracle;
use crate::error::{Error, Result};
use crate::numerics::{DenseOperator, StateVector, C64};
use crate::oracle::{Entry, EntryList, SparseOracle, TableSource};
use crate::suzuki::{Propagator, TermEvolver};

/// What a one-sparse piece does to one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneSparseAction {
    Empty,
    Diagonal(f64),
    Paired { partner: usize, value: C64 },
}

/// A matrix answering at most one `(y, H[x][y])` per column.
pub trait PieceOracle: Sync {
    fn dim(&self) -> usize;

    /// The column's single entry and the base-oracle queries it cost.
    fn piece_query(&self, x: usize) -> Result<(usize, C64, u64)>;
}

impl PieceOracle for ColoredOracle<'_> {
    fn dim(&self) -> usize {
        ColoredOracle::dim(self)
    }

    fn piece_query(&self, x: usize) -> Result<(usize, C64, u64)> {
        let a = self.query_with_cost(x)?;
        Ok((a.y, a.value, a.base_queries))
    }
}

/// A degree-1 oracle is already a piece. Higher degrees are accepted as long
/// as every column has a single nonzero, which costs one query per slot.
impl PieceOracle for SparseOracle {
    fn dim(&self) -> usize {
        SparseOracle::dim(self)
    }

    fn piece_query(&self, x: usize) -> Result<(usize, C64, u64)> {
        let mut found: Option<(usize, C64)> = None;
        for slot in 1..=self.d() {
            let (y, v) = self.query(x, slot)?;
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            if found.is_some() {
                return Err(Error::NotOneSparse { x });
            }
            found = Some((y, v));
        }
        let (y, v) = found.unwrap_or((x, C64::new(0.0, 0.0)));
        Ok((y, v, self.d() as u64))
    }
}

/// The action of `piece` on column `x`, from a single piece query.
pub fn classify(piece: &dyn PieceOracle, x: usize) -> Result<OneSparseAction> {
    let (y, value, _) = piece.piece_query(x)?;
    action_from(x, y, value)
}

fn action_from(x: usize, y: usize, value: C64) -> Result<OneSparseAction> {
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if value == C64::new(0.0, 0.0) {
        return Ok(OneSparseAction::Empty);
    }
    if y == x {
        if value.im != 0.0 {
            return Err(Error::NotHermitian {
                deviation: value.im.abs(),
            });
        }
        return Ok(OneSparseAction::Diagonal(value.re));
    }
    Ok(OneSparseAction::Paired { partner: y, value })
}

#[derive(Debug, Clone, Copy)]
enum Block {
    Phase {
        x: usize,
        phase: C64,
    },
    Rotation {
        x: usize,
        y: usize,
        c: f64,
        upper: C64,
        lower: C64,
    },
}

/// A piece read out once, column by column, and checked for consistency.
#[derive(Debug, Clone)]
pub struct CompiledPiece {
    actions: Vec<OneSparseAction>,
    column_cost: Vec<u64>,
}

impl CompiledPiece {
    /// One piece query per column; the pairing must be an involution with
    /// conjugate values.
    pub fn compile(piece: &dyn PieceOracle) -> Result<Self> {
        let dim = piece.dim();
        let mut actions = Vec::with_capacity(dim);
        let mut column_cost = Vec::with_capacity(dim);
        for x in 0..dim {
            let (y, value, cost) = piece.piece_query(x)?;
            if value != C64::new(0.0, 0.0) && y >= dim {
                return Err(Error::EntryOutOfRange { x, y, dim });
            }
            actions.push(action_from(x, y, value)?);
            column_cost.push(cost);
        }
        Self::from_actions(actions, column_cost)
    }

    pub fn from_actions(actions: Vec<OneSparseAction>, column_cost: Vec<u64>) -> Result<Self> {
        for (x, action) in actions.iter().enumerate() {
            if let OneSparseAction::Paired { partner, value } = *action {
                match actions.get(partner) {
                    Some(&OneSparseAction::Paired {
                        partner: back,
                        value: w,
                    }) if back == x => {
                        if w != value.conj() {
                            return Err(Error::NotHermitian {
                                deviation: (w - value.conj()).norm(),
                            });
                        }
                    }
                    _ => return Err(Error::NotOneSparse { x }),
                }
            }
        }
        Ok(Self {
            actions,
            column_cost,
        })
    }

    pub fn actions(&self) -> &[OneSparseAction] {
        &self.actions
    }

    /// Base-oracle queries behind each column of the piece.
    pub fn column_cost(&self) -> &[u64] {
        &self.column_cost
    }

    pub fn max_column_cost(&self) -> u64 {
        self.column_cost.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.actions.iter().all(|a| *a == OneSparseAction::Empty)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        let dim = self.actions.len();
        let mut m = crate::numerics::CMatrix::zeros(dim, dim);
        for (x, action) in self.actions.iter().enumerate() {
            match *action {
                OneSparseAction::Empty => {}
                OneSparseAction::Diagonal(h) => m[(x, x)] = C64::new(h, 0.0),
                OneSparseAction::Paired { partner, value } => m[(x, partner)] = value,
            }
        }
        DenseOperator::new(m)
    }

    fn blocks(&self, t: f64) -> Vec<Block> {
        let mut blocks = Vec::new();
        for (x, action) in self.actions.iter().enumerate() {
            match *action {
                OneSparseAction::Empty => {}
                OneSparseAction::Diagonal(h) => blocks.push(Block::Phase {
                    x,
                    phase: C64::from_polar(1.0, -h * t),
                }),
                OneSparseAction::Paired { partner, value } if x < partner => {
                    let modulus = value.norm();
                    let (s, c) = (modulus * t).sin_cos();
                    let minus_i = C64::new(0.0, -1.0);
                    blocks.push(Block::Rotation {
                        x,
                        y: partner,
                        c,
                        upper: minus_i * (value / modulus) * s,
                        lower: minus_i * (value.conj() / modulus) * s,
                    });
                }
                OneSparseAction::Paired { .. } => {}
            }
        }
        blocks
    }

    /// `exp(-i H t) ψ`.
    pub fn evolve(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.actions.len() {
            return Err(Error::DimensionMismatch {
                left: self.actions.len(),
                right: psi.dim(),
            });
        }
        let mut out = psi.clone();
        self.apply(t, out.amplitudes_mut());
        Ok(out)
    }
}

fn apply_blocks(blocks: &[Block], amps: &mut [C64]) {
    for block in blocks {
        match *block {
            Block::Phase { x, phase } => amps[x] *= phase,
            Block::Rotation {
                x,
                y,
                c,
                upper,
                lower,
            } => {
                let (a, b) = (amps[x], amps[y]);
                amps[x] = a * c + upper * b;
                amps[y] = lower * a + b * c;
            }
        }
    }
}

impl TermEvolver for CompiledPiece {
    fn dim(&self) -> usize {
        self.actions.len()
    }

    fn apply(&self, time: f64, amplitudes: &mut [C64]) {
        apply_blocks(&self.blocks(time), amplitudes);
    }

    fn propagator(&self, time: f64) -> Propagator<'_> {
        let blocks = self.blocks(time);
        Box::new(move |amps: &mut [C64]| apply_blocks(&blocks, amps))
    }
}

/// `exp(-i H t) ψ` for a piece oracle.
pub fn evolve(piece: &dyn PieceOracle, t: f64, psi: &StateVector) -> Result<StateVector> {
    CompiledPiece::compile(piece)?.evolve(t, psi)
}

/// Smallest integer `n'` strictly greater than `5 + log₂(τ d² 5^k / ε)`.
pub fn precision_bits(tau: f64, d: usize, k: u32, eps: f64) -> Result<u32> {
    if !(tau > 0.0 && tau.is_finite() && eps > 0.0 && d >= 1) {
        return Err(Error::InvalidParameter(format!(
            "precision bits need positive arguments (tau {tau}, d {d}, eps {eps})"
        )));
    }
    let d = d as f64;
    let rhs = 5.0 + (tau * d * d * 5f64.powi(k as i32) / eps).log2();
    Ok((rhs.floor() + 1.0).max(1.0) as u32)
}

/// Rounds every entry to the grid of step `norm / 2^bits`, real and
/// imaginary parts separately. Each unordered pair is rounded once, so the
/// result stays Hermitian; entries that round to zero are dropped.
pub fn quantize_oracle(oracle: &SparseOracle, bits: u32, norm: f64) -> Result<SparseOracle> {
    if !(1..=62).contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "precision {bits} outside 1..=62"
        )));
    }
    if !(norm.is_finite() && norm >= 0.0) {
        return Err(Error::InvalidParameter(format!("norm {norm}")));
    }
    let list = oracle.entry_list()?;
    let build = |entries: Vec<Entry>| -> Result<SparseOracle> {
        let source = TableSource::from_entry_list(&EntryList::new(list.n, entries), oracle.d())?;
        Ok(SparseOracle::new(source.with_dim(oracle.dim())?))
    };
    if norm == 0.0 {
        return build(vec![]);
    }
    let step = norm / (bits as f64).exp2();
    let round = |v: f64| (v / step).round() * step;
    let entries = list
        .entries
        .iter()
        .map(|e| Entry {
            value: C64::new(round(e.value.re), round(e.value.im)),
            ..*e
        })
        .filter(|e| e.value != C64::new(0.0, 0.0))
        .collect();
    build(entries)
}
