//! Boolean matrices, counted oracle access, and product entry sets.
//!
//! All indices in this module are 0-based. The BMM1 file format and the CLI
//! present them 1-based; the conversion lives in [`io`] and in the
//! `Display` impl of [`WitnessedEntry`].

mod generate;
pub mod io;

use std::borrow::Cow;
use std::collections::btree_map::{self, BTreeMap};
use std::fmt;

use crate::cost::CostLedger;
use crate::error::{Error, Result};

pub use generate::{generate_planted, PlantMode, PlantedInstance};

const WORD: usize = 64;

/// A dense, row-major, bit-packed Boolean matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BoolMatrix {
    /// All-zero `rows × cols` matrix. Both dimensions must be positive.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        let words_per_row = cols.div_ceil(WORD);
        BoolMatrix {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| true)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds a matrix from nested rows of 0/1 values.
    ///
    /// ```
    /// use osbmm::BoolMatrix;
    /// let m = BoolMatrix::from_rows(&[[1, 0], [1, 1]]);
    /// assert!(m.get(1, 0) && !m.get(0, 1));
    /// ```
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(rows.iter().all(|r| r.as_ref().len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| rows[i].as_ref()[j] != 0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn locate(&self, i: usize, j: usize) -> (usize, u64) {
        assert!(
            i < self.rows && j < self.cols,
            "entry ({i}, {j}) outside {}x{} matrix",
            self.rows,
            self.cols
        );
        (i * self.words_per_row + j / WORD, 1u64 << (j % WORD))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let (w, mask) = self.locate(i, j);
        self.bits[w] & mask != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let (w, mask) = self.locate(i, j);
        if value {
            self.bits[w] |= mask;
        } else {
            self.bits[w] &= !mask;
        }
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Coordinates of the set entries in row-major order.
    pub fn iter_ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |i| {
            self.row_words(i)
                .iter()
                .enumerate()
                .flat_map(move |(w, &word)| BitIter(word).map(move |b| (i, w * WORD + b)))
        })
    }

    pub fn transpose(&self) -> BoolMatrix {
        let mut t = BoolMatrix::zeros(self.cols, self.rows);
        for (i, j) in self.iter_ones() {
            t.set(j, i, true);
        }
        t
    }

    /// A view of the whole matrix.
    pub fn view(&self) -> MatrixView<'_> {
        MatrixView {
            base: self,
            rows: None,
            cols: None,
        }
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoolMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: String = (0..self.cols)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// A row/column remapping of a [`BoolMatrix`] that never copies entries.
///
/// Row `i` of the view is row `rows[i]` of the base matrix (identity when the
/// map is absent), and likewise for columns.
#[derive(Clone, Debug)]
pub struct MatrixView<'a> {
    base: &'a BoolMatrix,
    rows: Option<Cow<'a, [usize]>>,
    cols: Option<Cow<'a, [usize]>>,
}

impl<'a> MatrixView<'a> {
    pub fn base(&self) -> &'a BoolMatrix {
        self.base
    }

    pub fn rows(&self) -> usize {
        self.rows.as_ref().map_or(self.base.rows, |r| r.len())
    }

    pub fn cols(&self) -> usize {
        self.cols.as_ref().map_or(self.base.cols, |c| c.len())
    }

    #[inline]
    pub fn base_row(&self, i: usize) -> usize {
        self.rows.as_ref().map_or(i, |r| r[i])
    }

    #[inline]
    pub fn base_col(&self, j: usize) -> usize {
        self.cols.as_ref().map_or(j, |c| c[j])
    }

    /// Uncounted entry read. Algorithms must go through an [`OracleHandle`].
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.base.get(self.base_row(i), self.base_col(j))
    }

    /// Restricts the view to the given rows (indices into this view).
    pub fn select_rows(&self, rows: &'a [usize]) -> MatrixView<'a> {
        MatrixView {
            base: self.base,
            rows: Some(compose(self.rows.as_deref(), rows)),
            cols: self.cols.clone(),
        }
    }

    /// Restricts the view to the given columns (indices into this view).
    pub fn select_cols(&self, cols: &'a [usize]) -> MatrixView<'a> {
        MatrixView {
            base: self.base,
            rows: self.rows.clone(),
            cols: Some(compose(self.cols.as_deref(), cols)),
        }
    }

    /// Copies the view into an owned matrix.
    pub fn to_matrix(&self) -> BoolMatrix {
        BoolMatrix::from_fn(self.rows(), self.cols(), |i, j| self.get(i, j))
    }
}

fn compose<'a>(outer: Option<&[usize]>, inner: &'a [usize]) -> Cow<'a, [usize]> {
    match outer {
        None => Cow::Borrowed(inner),
        Some(outer) => Cow::Owned(inner.iter().map(|&x| outer[x]).collect()),
    }
}

impl<'a> From<&'a BoolMatrix> for MatrixView<'a> {
    fn from(m: &'a BoolMatrix) -> Self {
        m.view()
    }
}

/// Which input matrix an oracle reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Counted read access to one input matrix.
///
/// Every `query` bumps `oracle_queries_a` or `oracle_queries_b` of the
/// supplied ledger by exactly one.
#[derive(Clone, Debug)]
pub struct OracleHandle<'a> {
    view: MatrixView<'a>,
    side: Side,
}

impl<'a> OracleHandle<'a> {
    pub fn new(view: impl Into<MatrixView<'a>>, side: Side) -> Self {
        OracleHandle {
            view: view.into(),
            side,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn view(&self) -> &MatrixView<'a> {
        &self.view
    }

    #[inline]
    pub fn query(&self, ledger: &mut CostLedger, i: usize, j: usize) -> bool {
        match self.side {
            Side::A => ledger.oracle_queries_a += 1,
            Side::B => ledger.oracle_queries_b += 1,
        }
        self.view.get(i, j)
    }
}

/// A non-zero entry `(i, j)` of a product together with a witness `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WitnessedEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl WitnessedEntry {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        WitnessedEntry { i, j, k }
    }

    /// True when `A[i,k] = B[k,j] = 1`.
    pub fn is_valid_for(&self, a: &BoolMatrix, b: &BoolMatrix) -> bool {
        self.i < a.rows()
            && self.k < a.cols()
            && self.k < b.rows()
            && self.j < b.cols()
            && a.get(self.i, self.k)
            && b.get(self.k, self.j)
    }
}

/// Prints the entry 1-based as `i j k`.
impl fmt::Display for WitnessedEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.i + 1, self.j + 1, self.k + 1)
    }
}

/// Non-zero product entries keyed by `(i, j)`, one witness each.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntrySet {
    entries: BTreeMap<(usize, usize), usize>,
}

impl EntrySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the entry unless `(i, j)` is already present; the first
    /// witness is kept. Returns whether the key was new.
    pub fn insert(&mut self, e: WitnessedEntry) -> bool {
        match self.entries.entry((e.i, e.j)) {
            btree_map::Entry::Vacant(v) => {
                v.insert(e.k);
                true
            }
            btree_map::Entry::Occupied(_) => false,
        }
    }

    pub fn extend_from(&mut self, other: &EntrySet) {
        for e in other.iter() {
            self.insert(e);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.entries.contains_key(&(i, j))
    }

    pub fn witness(&self, i: usize, j: usize) -> Option<usize> {
        self.entries.get(&(i, j)).copied()
    }

    /// Entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = WitnessedEntry> + '_ {
        self.entries
            .iter()
            .map(|(&(i, j), &k)| WitnessedEntry { i, j, k })
    }

    pub fn keys(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.keys().copied()
    }

    pub fn same_keys(&self, other: &EntrySet) -> bool {
        self.len() == other.len() && self.keys().eq(other.keys())
    }

    /// First entry whose witness does not check out against `a` and `b`.
    pub fn first_invalid(&self, a: &BoolMatrix, b: &BoolMatrix) -> Option<WitnessedEntry> {
        self.iter().find(|e| !e.is_valid_for(a, b))
    }
}

impl FromIterator<WitnessedEntry> for EntrySet {
    fn from_iter<T: IntoIterator<Item = WitnessedEntry>>(iter: T) -> Self {
        let mut set = EntrySet::new();
        for e in iter {
            set.insert(e);
        }
        set
    }
}

/// Reference product: every non-zero of `AB` with its smallest witness.
pub fn brute_force_product(a: &BoolMatrix, b: &BoolMatrix) -> Result<EntrySet> {
    if a.cols() != b.rows() {
        return Err(Error::input(format!(
            "dimension mismatch: A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let bt = b.transpose();
    let mut out = EntrySet::new();
    for i in 0..a.rows() {
        let row = a.row_words(i);
        for j in 0..b.cols() {
            let col = bt.row_words(j);
            if let Some((w, word)) = row
                .iter()
                .zip(col)
                .map(|(x, y)| x & y)
                .enumerate()
                .find(|&(_, w)| w != 0)
            {
                let k = w * WORD + word.trailing_zeros() as usize;
                out.insert(WitnessedEntry { i, j, k });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_counts_per_side() {
        let one = BoolMatrix::from_rows(&[[1]]);
        let mut ledger = CostLedger::default();
        let oa = OracleHandle::new(&one, Side::A);
        assert!(oa.query(&mut ledger, 0, 0));
        assert_eq!(ledger.oracle_queries_a, 1);

        let zero = BoolMatrix::zeros(2, 2);
        let oz = OracleHandle::new(&zero, Side::A);
        assert!(!oz.query(&mut ledger, 1, 0));

        let ob = OracleHandle::new(&zero, Side::B);
        let before = ledger.oracle_queries_b;
        ob.query(&mut ledger, 0, 0);
        ob.query(&mut ledger, 1, 1);
        assert_eq!(ledger.oracle_queries_b - before, 2);
    }

    #[test]
    fn brute_force_small_cases() {
        let a = BoolMatrix::from_rows(&[[1, 0], [1, 1]]);
        let b = BoolMatrix::from_rows(&[[0, 1], [1, 0]]);
        let got: Vec<_> = brute_force_product(&a, &b).unwrap().iter().collect();
        assert_eq!(
            got,
            vec![
                WitnessedEntry::new(0, 1, 0),
                WitnessedEntry::new(1, 0, 1),
                WitnessedEntry::new(1, 1, 0),
            ]
        );

        let id = BoolMatrix::identity(3);
        let got: Vec<_> = brute_force_product(&id, &id).unwrap().iter().collect();
        assert_eq!(
            got,
            (0..3)
                .map(|i| WitnessedEntry::new(i, i, i))
                .collect::<Vec<_>>()
        );

        let p = brute_force_product(&BoolMatrix::ones(2, 2), &BoolMatrix::zeros(2, 2)).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn brute_force_rejects_mismatch() {
        let err = brute_force_product(&BoolMatrix::zeros(2, 3), &BoolMatrix::zeros(2, 2));
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn brute_force_matches_triple_loop_past_word_boundary() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = BoolMatrix::from_fn(9, 130, |_, _| rng.gen_bool(0.02));
        let b = BoolMatrix::from_fn(130, 11, |_, _| rng.gen_bool(0.02));
        let fast = brute_force_product(&a, &b).unwrap();
        let mut slow = EntrySet::new();
        for i in 0..9 {
            for j in 0..11 {
                if let Some(k) = (0..130).find(|&k| a.get(i, k) && b.get(k, j)) {
                    slow.insert(WitnessedEntry::new(i, j, k));
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn views_compose_without_copying() {
        let m = BoolMatrix::from_fn(4, 4, |i, j| (i * 4 + j) % 3 == 0);
        let rows = [3, 1];
        let cols = [2, 0, 1];
        let v = m.view().select_rows(&rows);
        assert!(matches!(v.rows, Some(Cow::Borrowed(_))));
        let inner = [1usize];
        let vv = v.select_rows(&inner).select_cols(&cols);
        assert_eq!((vv.rows(), vv.cols()), (1, 3));
        for (c, &bc) in cols.iter().enumerate() {
            assert_eq!(vv.get(0, c), m.get(1, bc));
        }
    }

    #[test]
    fn entry_set_keeps_first_witness() {
        let mut s = EntrySet::new();
        assert!(s.insert(WitnessedEntry::new(0, 0, 5)));
        assert!(!s.insert(WitnessedEntry::new(0, 0, 2)));
        assert_eq!(s.witness(0, 0), Some(5));
        assert_eq!(WitnessedEntry::new(0, 1, 2).to_string(), "1 2 3");
    }
}
