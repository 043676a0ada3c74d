//! Black-box access to a d-sparse Hermitian matrix.
//!
//! A [`SparseOracle`] answers `f(x, i) = (y_i, H[x][y_i])`, the `i`-th nonzero
//! of column `x` (slots are 1-based). Columns with fewer than `d` nonzeros are
//! padded with `(x, 0)`. Every answer goes through [`SparseOracle::query`],
//! which bumps a monotone counter, so query costs measured anywhere in the
//! crate are exact.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{spectral_norm, CMatrix, DenseOperator, NumericsConfig, C64};

/// Largest supported qubit count; vertex labels are stored in a `u64`.
pub const MAX_QUBITS: u32 = 62;

/// Provider of column entries behind a [`SparseOracle`].
///
/// Implementations must list the nonzeros of column `x` in slots
/// `1..=d'(x)` in a fixed order and return `(x, 0)` for the remaining slots.
pub trait ColumnSource: Send + Sync {
    /// Number of qubits `n`; the dimension never exceeds `2^n`.
    fn qubits(&self) -> u32;
    fn dim(&self) -> usize;
    /// Maximum number of nonzeros per column.
    fn max_degree(&self) -> usize;
    /// Entry for `x < dim()` and `1 <= slot <= max_degree()`.
    fn entry(&self, x: usize, slot: usize) -> (usize, C64);
}

/// Query-counting wrapper around a [`ColumnSource`].
pub struct SparseOracle {
    source: Box<dyn ColumnSource>,
    queries: AtomicU64,
}

impl std::fmt::Debug for SparseOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseOracle")
            .field("n", &self.n())
            .field("dim", &self.dim())
            .field("d", &self.d())
            .field("queries", &self.queries())
            .finish()
    }
}

impl SparseOracle {
    pub fn new(source: impl ColumnSource + 'static) -> Self {
        Self {
            source: Box::new(source),
            queries: AtomicU64::new(0),
        }
    }

    pub fn n(&self) -> u32 {
        self.source.qubits()
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn d(&self) -> usize {
        self.source.max_degree()
    }

    /// Size of the vertex set, `2^n`.
    pub fn vertex_count(&self) -> usize {
        1usize << self.n()
    }

    /// `f(x, i)`. Columns in `dim..2^n` exist but are empty.
    pub fn query(&self, x: usize, slot: usize) -> Result<(usize, C64)> {
        if x >= self.vertex_count() || slot == 0 || slot > self.d() {
            return Err(Error::QueryOutOfRange { x, slot });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        if x >= self.dim() {
            return Ok((x, C64::new(0.0, 0.0)));
        }
        Ok(self.source.entry(x, slot))
    }

    /// The `y` component of `f(x, i)`.
    pub fn neighbor(&self, x: usize, slot: usize) -> Result<usize> {
        Ok(self.query(x, slot)?.0)
    }

    /// Total number of [`query`](Self::query) calls so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Reads the whole matrix back as an upper-triangular entry list.
    pub fn entry_list(&self) -> Result<EntryList> {
        let mut entries = Vec::new();
        for x in 0..self.dim() {
            for slot in 1..=self.d() {
                let (y, value) = self.query(x, slot)?;
                if value == C64::new(0.0, 0.0) {
                    continue;
                }
                if x <= y {
                    entries.push(Entry { x, y, value });
                }
            }
        }
        entries.sort_by_key(|e| (e.x, e.y));
        Ok(EntryList {
            n: self.n(),
            entries,
        })
    }
}

/// One stored entry `H[x][y] = value` with `x <= y`; the conjugate entry is
/// implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub x: usize,
    pub y: usize,
    pub value: C64,
}

/// Upper-triangular serialization of a Hermitian matrix on `n` qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntryList {
    pub n: u32,
    pub entries: Vec<Entry>,
}

impl EntryList {
    pub fn new(n: u32, entries: Vec<Entry>) -> Self {
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// Parses the `n d` / `x y re im` text format. Returns the list and `d`.
    pub fn parse(text: &str) -> Result<(EntryList, usize)> {
        let mut header: Option<(u32, usize)> = None;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            match header {
                None => {
                    if fields.len() != 2 {
                        return Err(parse_err("expected header `n d`".into()));
                    }
                    let n = fields[0]
                        .parse()
                        .map_err(|_| parse_err(format!("bad qubit count `{}`", fields[0])))?;
                    let d = fields[1]
                        .parse()
                        .map_err(|_| parse_err(format!("bad degree `{}`", fields[1])))?;
                    header = Some((n, d));
                }
                Some(_) => {
                    if fields.len() != 4 {
                        return Err(parse_err("expected `x y re im`".into()));
                    }
                    let x = fields[0]
                        .parse()
                        .map_err(|_| parse_err(format!("bad index `{}`", fields[0])))?;
                    let y = fields[1]
                        .parse()
                        .map_err(|_| parse_err(format!("bad index `{}`", fields[1])))?;
                    let re: f64 = fields[2]
                        .parse()
                        .map_err(|_| parse_err(format!("bad real part `{}`", fields[2])))?;
                    let im: f64 = fields[3]
                        .parse()
                        .map_err(|_| parse_err(format!("bad imaginary part `{}`", fields[3])))?;
                    if !re.is_finite() || !im.is_finite() {
                        return Err(parse_err("non-finite value".into()));
                    }
                    entries.push(Entry {
                        x,
                        y,
                        value: C64::new(re, im),
                    });
                }
            }
        }
        let (n, d) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing header".into(),
        })?;
        Ok((EntryList { n, entries }, d))
    }

    /// Writes the text format with 17 significant digits per component.
    pub fn to_text(&self, d: usize) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, d).unwrap();
        for e in &self.entries {
            writeln!(
                out,
                "{} {} {:.16e} {:.16e}",
                e.x, e.y, e.value.re, e.value.im
            )
            .unwrap();
        }
        out
    }
}

/// Column table built from explicit entries.
#[derive(Debug, Clone)]
pub struct TableSource {
    n: u32,
    d: usize,
    columns: Vec<Vec<(usize, C64)>>,
}

impl TableSource {
    /// Validates `list` and lays out columns in ascending-`y` order.
    pub fn from_entry_list(list: &EntryList, d: usize) -> Result<Self> {
        if list.n == 0 || list.n > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "qubit count {} outside 1..={MAX_QUBITS}",
                list.n
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        let dim = list.dim();
        let mut seen = HashSet::new();
        let mut columns: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for e in &list.entries {
            if e.x > e.y {
                return Err(Error::EntryOrder { x: e.x, y: e.y });
            }
            if e.y >= dim {
                return Err(Error::EntryOutOfRange {
                    x: e.x,
                    y: e.y,
                    dim,
                });
            }
            if !seen.insert((e.x, e.y)) {
                return Err(Error::DuplicateEntry { x: e.x, y: e.y });
            }
            if e.value == C64::new(0.0, 0.0) {
                return Err(Error::ZeroEntry { x: e.x, y: e.y });
            }
            if !e.value.re.is_finite() || !e.value.im.is_finite() {
                return Err(Error::NonFinite);
            }
            if e.x == e.y {
                if e.value.im != 0.0 {
                    return Err(Error::ComplexDiagonal { x: e.x });
                }
                columns[e.x].push((e.x, e.value));
            } else {
                columns[e.x].push((e.y, e.value));
                columns[e.y].push((e.x, e.value.conj()));
            }
        }
        for (x, col) in columns.iter_mut().enumerate() {
            if col.len() > d {
                return Err(Error::DegreeOverflow {
                    x,
                    degree: col.len(),
                    d,
                });
            }
            col.sort_by_key(|&(y, _)| y);
        }
        Ok(Self {
            n: list.n,
            d,
            columns,
        })
    }

    /// Restricts the matrix to its first `dim` rows and columns, which must
    /// hold every entry.
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        if dim == 0 || dim > self.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} for {} qubits",
                self.n
            )));
        }
        for (x, col) in self.columns.iter().enumerate() {
            if let Some(&(y, _)) = col.iter().find(|&&(y, _)| x >= dim || y >= dim) {
                return Err(Error::EntryOutOfRange { x, y, dim });
            }
        }
        self.columns.truncate(dim);
        Ok(self)
    }

    /// Same matrix with each column's slot order permuted pseudo-randomly.
    pub fn shuffled(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for col in &mut self.columns {
            col.shuffle(&mut rng);
        }
        self
    }
}

impl ColumnSource for TableSource {
    fn qubits(&self) -> u32 {
        self.n
    }

    fn dim(&self) -> usize {
        self.columns.len()
    }

    fn max_degree(&self) -> usize {
        self.d
    }

    fn entry(&self, x: usize, slot: usize) -> (usize, C64) {
        self.columns[x]
            .get(slot - 1)
            .copied()
            .unwrap_or((x, C64::new(0.0, 0.0)))
    }
}

/// Oracle for the symmetrized matrix described by `list`.
pub fn from_entry_list(list: &EntryList, d: usize) -> Result<SparseOracle> {
    Ok(SparseOracle::new(TableSource::from_entry_list(list, d)?))
}

/// Random Hermitian oracle on `n` qubits with at most `d` nonzeros per
/// column, deterministic in `seed`. With `norm_target`, entries are rescaled
/// so the spectral norm equals it.
pub fn random_sparse(
    n: u32,
    d: usize,
    seed: u64,
    norm_target: Option<f64>,
    cfg: &NumericsConfig,
) -> Result<SparseOracle> {
    let list = random_entry_list(n, d, seed, norm_target, cfg)?;
    from_entry_list(&list, d)
}

/// The entry list behind [`random_sparse`].
pub fn random_entry_list(
    n: u32,
    d: usize,
    seed: u64,
    norm_target: Option<f64>,
    cfg: &NumericsConfig,
) -> Result<EntryList> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Infeasible(format!("qubit count {n}")));
    }
    let dim = 1usize << n;
    cfg.check_dim(dim)?;
    if d == 0 || d > dim {
        return Err(Error::Infeasible(format!("degree {d} for dimension {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; dim];
    let mut present = HashSet::new();
    let mut entries = Vec::new();
    for (x, deg) in degree.iter_mut().enumerate() {
        if rng.random_bool(0.5) {
            let h = rng.random_range(-1.0..1.0);
            if h != 0.0 {
                entries.push(Entry {
                    x,
                    y: x,
                    value: C64::new(h, 0.0),
                });
                *deg += 1;
                present.insert((x, x));
            }
        }
    }
    for _ in 0..2 * dim * d {
        let a = rng.random_range(0..dim);
        let b = rng.random_range(0..dim);
        if a == b {
            continue;
        }
        let (x, y) = (a.min(b), a.max(b));
        if degree[x] >= d || degree[y] >= d || present.contains(&(x, y)) {
            continue;
        }
        let value = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if value == C64::new(0.0, 0.0) {
            continue;
        }
        present.insert((x, y));
        degree[x] += 1;
        degree[y] += 1;
        entries.push(Entry { x, y, value });
    }
    entries.sort_by_key(|e| (e.x, e.y));
    let mut list = EntryList { n, entries };

    if let Some(target) = norm_target {
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::InvalidParameter(format!("norm target {target}")));
        }
        let oracle = from_entry_list(&list, d)?;
        let norm = spectral_norm(&to_dense(&oracle, cfg)?);
        if norm == 0.0 {
            return Err(Error::Infeasible("generated zero matrix".into()));
        }
        let factor = target / norm;
        for e in &mut list.entries {
            e.value *= factor;
        }
    }
    Ok(list)
}

/// Dense matrix of the oracle, with Hermitian consistency checked entry by
/// entry.
pub fn to_dense(oracle: &SparseOracle, cfg: &NumericsConfig) -> Result<DenseOperator> {
    let dim = oracle.dim();
    cfg.check_dim(dim)?;
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut present = vec![false; dim * dim];
    for x in 0..dim {
        for slot in 1..=oracle.d() {
            let (y, value) = oracle.query(x, slot)?;
            if value == C64::new(0.0, 0.0) {
                continue;
            }
            if y >= dim || present[x * dim + y] {
                return Err(Error::CorruptOracle { x, y });
            }
            present[x * dim + y] = true;
            matrix[(x, y)] = value;
        }
    }
    for x in 0..dim {
        for y in x..dim {
            if present[x * dim + y] != present[y * dim + x]
                || (matrix[(x, y)] - matrix[(y, x)].conj()).norm() > cfg.hermitian_tol
            {
                return Err(Error::CorruptOracle { x, y });
            }
        }
    }
    DenseOperator::with_tolerance(matrix, cfg.hermitian_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn empty_list_is_zero_oracle() {
        let oracle = from_entry_list(&EntryList::new(2, vec![]), 1).unwrap();
        for x in 0..4 {
            assert_eq!(oracle.query(x, 1).unwrap(), (x, c(0.0, 0.0)));
        }
        let dense = to_dense(&oracle, &NumericsConfig::default()).unwrap();
        assert!(dense.matrix().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn single_entry_is_pauli_x_like() {
        let list = EntryList::new(
            1,
            vec![Entry {
                x: 0,
                y: 1,
                value: c(1.0, 0.0),
            }],
        );
        let oracle = from_entry_list(&list, 1).unwrap();
        assert_eq!(oracle.query(0, 1).unwrap(), (1, c(1.0, 0.0)));
        assert_eq!(oracle.query(1, 1).unwrap(), (0, c(1.0, 0.0)));
    }

    #[test]
    fn diagonal_entries_are_self_neighbors() {
        let list = EntryList::new(
            1,
            vec![
                Entry {
                    x: 0,
                    y: 0,
                    value: c(0.3, 0.0),
                },
                Entry {
                    x: 1,
                    y: 1,
                    value: c(-2.0, 0.0),
                },
            ],
        );
        let oracle = from_entry_list(&list, 1).unwrap();
        assert_eq!(oracle.query(0, 1).unwrap(), (0, c(0.3, 0.0)));
        assert_eq!(oracle.query(1, 1).unwrap(), (1, c(-2.0, 0.0)));
    }

    #[test]
    fn builder_errors() {
        let e = |x, y, re| Entry {
            x,
            y,
            value: c(re, 0.0),
        };
        let overflow = EntryList::new(2, vec![e(0, 1, 1.0), e(0, 2, 1.0)]);
        assert!(matches!(
            from_entry_list(&overflow, 1),
            Err(Error::DegreeOverflow { x: 0, .. })
        ));
        let dup = EntryList::new(2, vec![e(0, 1, 1.0), e(0, 1, 2.0)]);
        assert!(matches!(
            from_entry_list(&dup, 2),
            Err(Error::DuplicateEntry { x: 0, y: 1 })
        ));
        let order = EntryList::new(2, vec![e(2, 1, 1.0)]);
        assert!(matches!(
            from_entry_list(&order, 2),
            Err(Error::EntryOrder { .. })
        ));
        let complex_diag = EntryList::new(
            1,
            vec![Entry {
                x: 0,
                y: 0,
                value: c(0.0, 1.0),
            }],
        );
        assert!(matches!(
            from_entry_list(&complex_diag, 1),
            Err(Error::ComplexDiagonal { x: 0 })
        ));
    }

    #[test]
    fn query_range_is_checked_and_counted() {
        let oracle = from_entry_list(&EntryList::new(2, vec![]), 2).unwrap();
        assert!(oracle.query(4, 1).is_err());
        assert!(oracle.query(0, 0).is_err());
        assert!(oracle.query(0, 3).is_err());
        assert_eq!(oracle.queries(), 0);
        oracle.query(3, 2).unwrap();
        oracle.query(0, 1).unwrap();
        assert_eq!(oracle.queries(), 2);
    }

    #[test]
    fn random_is_deterministic_and_degree_bounded() {
        let cfg = NumericsConfig::default();
        let a = random_entry_list(3, 2, 7, None, &cfg).unwrap();
        let b = random_entry_list(3, 2, 7, None, &cfg).unwrap();
        assert_eq!(a, b);
        let oracle = from_entry_list(&a, 2).unwrap();
        let dense = to_dense(&oracle, &cfg).unwrap();
        for col in 0..8 {
            let nnz = (0..8).filter(|&r| dense.get(r, col) != c(0.0, 0.0)).count();
            assert!(nnz <= 2, "column {col} has {nnz} nonzeros");
        }
    }

    #[test]
    fn random_norm_target() {
        let cfg = NumericsConfig::default();
        let oracle = random_sparse(4, 3, 11, Some(1.0), &cfg).unwrap();
        let norm = spectral_norm(&to_dense(&oracle, &cfg).unwrap());
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_rejects_infeasible_degree() {
        let cfg = NumericsConfig::default();
        assert!(matches!(
            random_sparse(1, 3, 0, None, &cfg),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            random_sparse(2, 0, 0, None, &cfg),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn corrupt_source_is_reported() {
        struct OneWay;
        impl ColumnSource for OneWay {
            fn qubits(&self) -> u32 {
                1
            }
            fn dim(&self) -> usize {
                2
            }
            fn max_degree(&self) -> usize {
                1
            }
            fn entry(&self, x: usize, _slot: usize) -> (usize, C64) {
                if x == 0 {
                    (1, C64::new(1.0, 0.0))
                } else {
                    (1, C64::new(0.0, 0.0))
                }
            }
        }
        let oracle = SparseOracle::new(OneWay);
        assert!(matches!(
            to_dense(&oracle, &NumericsConfig::default()),
            Err(Error::CorruptOracle { x: 0, y: 1 })
        ));
    }

    #[test]
    fn round_trip_through_dense() {
        let cfg = NumericsConfig::default();
        let list = random_entry_list(4, 3, 5, None, &cfg).unwrap();
        let oracle = from_entry_list(&list, 3).unwrap();
        let dense = to_dense(&oracle, &cfg).unwrap();
        let mut extracted = Vec::new();
        for x in 0..16 {
            for y in x..16 {
                let v = dense.get(x, y);
                if v != c(0.0, 0.0) {
                    extracted.push(Entry { x, y, value: v });
                }
            }
        }
        assert_eq!(extracted, list.entries);
        assert_eq!(oracle.entry_list().unwrap(), list);
    }

    #[test]
    fn shuffled_order_is_stable_and_same_matrix() {
        let cfg = NumericsConfig::default();
        let list = random_entry_list(4, 3, 9, None, &cfg).unwrap();
        let plain = from_entry_list(&list, 3).unwrap();
        let shuffled =
            SparseOracle::new(TableSource::from_entry_list(&list, 3).unwrap().shuffled(1));
        assert_eq!(
            to_dense(&plain, &cfg).unwrap(),
            to_dense(&shuffled, &cfg).unwrap()
        );
        let first: Vec<_> = (0..16)
            .flat_map(|x| (1..=3).map(move |i| (x, i)))
            .map(|(x, i)| shuffled.query(x, i).unwrap())
            .collect();
        let second: Vec<_> = (0..16)
            .flat_map(|x| (1..=3).map(move |i| (x, i)))
            .map(|(x, i)| shuffled.query(x, i).unwrap())
            .collect();
        assert_eq!(first, second);
    }

    #[test]
    fn text_format_parses_comments_and_rejects_garbage() {
        let text = "# example\n2 2\n# entries\n0 1 0.5 -0.25\n3 3 1 0\n";
        let (list, d) = EntryList::parse(text).unwrap();
        assert_eq!(d, 2);
        assert_eq!(list.n, 2);
        assert_eq!(list.entries.len(), 2);
        assert_eq!(list.entries[0].value, c(0.5, -0.25));
        assert!(matches!(
            EntryList::parse("2 2\n0 1 x 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(EntryList::parse("# nothing\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(
            raw in proptest::collection::vec(
                (0usize..16, 0usize..16, -1e6f64..1e6, -1e6f64..1e6), 0..20)
        ) {
            let entries: Vec<Entry> = raw
                .into_iter()
                .map(|(a, b, re, im)| Entry { x: a.min(b), y: a.max(b), value: C64::new(re, im) })
                .collect();
            let list = EntryList::new(4, entries);
            let (back, d) = EntryList::parse(&list.to_text(3)).unwrap();
            prop_assert_eq!(d, 3);
            prop_assert_eq!(back, list);
        }

        #[test]
        fn random_oracles_are_hermitian_and_sparse(n in 1u32..=6, d in 1usize..=4, seed in 0u64..1000) {
            let cfg = NumericsConfig::default();
            let dim = 1usize << n;
            prop_assume!(d <= dim);
            let oracle = random_sparse(n, d, seed, None, &cfg).unwrap();
            let dense = to_dense(&oracle, &cfg).unwrap();
            prop_assert!(dense.is_hermitian());
            for col in 0..dim {
                let nnz = (0..dim).filter(|&r| dense.get(r, col) != C64::new(0.0, 0.0)).count();
                prop_assert!(nnz <= d);
            }
        }
    }
}
