//! Bit-packed linear algebra over GF(2).
//!
//! Bits are stored little-endian in `u64` words: bit `i` lives in word
//! `i / 64` at position `i % 64`. Unused high bits of the last word are
//! always zero, so word-wise popcounts and comparisons are exact.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![!0; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// Builds a vector from `0`/`1` entries; any nonzero value counts as `1`.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<u8> = bits.into_iter().map(u8::from).collect();
        Self::from_bits(&bits)
    }

    /// Builds a vector of length `len` with ones at `positions`.
    ///
    /// Repeated positions toggle, matching addition over GF(2).
    pub fn from_support(len: usize, positions: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        for &p in positions {
            if p >= len {
                return Err(Error::DimensionMismatch(format!(
                    "position {p} out of range for length {len}"
                )));
            }
            v.flip(p);
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Number of set bits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Size of the intersection of the supports of `self` and `other`.
    pub fn overlap(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        let acc = self
            .words
            .iter()
            .zip(&other.words)
            .fold(0u64, |acc, (a, b)| acc ^ (a & b));
        acc.count_ones() & 1 == 1
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let tz = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| u8::from(self.get(i))).collect()
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn first_one_from(&self, start: usize) -> Option<usize> {
        if start >= self.len {
            return None;
        }
        let mut wi = start / WORD_BITS;
        let mut word = self.words[wi] & (!0u64 << (start % WORD_BITS));
        loop {
            if word != 0 {
                return Some(wi * WORD_BITS + word.trailing_zeros() as usize);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            word = self.words[wi];
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Number of set bits of `v`.
pub fn weight(v: &BitVector) -> usize {
    v.weight()
}

/// A dense, row-major matrix over GF(2) with at least one row.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidParameter(
                "a matrix needs at least one row".into(),
            ));
        };
        let cols = first.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has length {} but row 0 has length {cols}",
                r.len()
            )));
        }
        Ok(Self { cols, rows })
    }

    /// Builds a matrix from nested `0`/`1` rows.
    pub fn from_dense<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| BitVector::from_bits(r.as_ref())).collect())
    }

    /// Builds a `supports.len() × cols` matrix from per-row column indices.
    pub fn from_row_supports(cols: usize, supports: &[Vec<usize>]) -> Result<Self> {
        let rows = supports
            .iter()
            .map(|s| BitVector::from_support(cols, s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut r = BitVector::zeros(n);
                r.set(i, true);
                r
            })
            .collect();
        Self::from_rows(rows).expect("identity needs n >= 1")
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].get(col)
    }

    /// Total number of ones.
    pub fn num_ones(&self) -> usize {
        self.rows.iter().map(BitVector::weight).sum()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(BitVector::weight).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for r in &self.rows {
            for j in r.iter_ones() {
                w[j] += 1;
            }
        }
        w
    }

    /// The common row weight, if every row has the same weight.
    pub fn uniform_row_weight(&self) -> Option<usize> {
        let w = self.rows[0].weight();
        self.rows.iter().all(|r| r.weight() == w).then_some(w)
    }

    /// Column index lists per row.
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.iter_ones().collect()).collect()
    }

    /// Row index lists per column.
    pub fn col_supports(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.iter_ones() {
                cols[j].push(i);
            }
        }
        cols
    }

    pub fn transpose(&self) -> BitMatrix {
        let rows = self
            .col_supports()
            .iter()
            .map(|s| BitVector::from_support(self.rows.len(), s).expect("index in range"))
            .collect();
        BitMatrix::from_rows(rows).expect("matrix has at least one column")
    }

    /// Computes `H·e`.
    pub fn syndrome(&self, e: &BitVector) -> Result<BitVector> {
        syndrome(self, e)
    }

    pub fn rank(&self) -> usize {
        gf2_rank(self)
    }

    pub fn is_self_orthogonal(&self) -> bool {
        is_self_orthogonal(self)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// Computes the syndrome `H·e` over GF(2).
pub fn syndrome(h: &BitMatrix, e: &BitVector) -> Result<BitVector> {
    if e.len() != h.num_cols() {
        return Err(Error::DimensionMismatch(format!(
            "error vector has length {} but the matrix has {} columns",
            e.len(),
            h.num_cols()
        )));
    }
    Ok(BitVector::from_bools(h.rows().iter().map(|r| r.dot(e))))
}

/// Rank over GF(2) by Gaussian elimination on a copy of the rows.
pub fn gf2_rank(m: &BitMatrix) -> usize {
    let mut rows: Vec<BitVector> = m.rows().to_vec();
    let mut rank = 0;
    let mut col = 0;
    while rank < rows.len() {
        // Next pivot: the smallest leading column among the remaining rows.
        let Some((pivot_row, pivot_col)) = rows[rank..]
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.first_one_from(col).map(|c| (rank + i, c)))
            .min_by_key(|&(_, c)| c)
        else {
            break;
        };
        rows.swap(rank, pivot_row);
        let (done, rest) = rows.split_at_mut(rank + 1);
        let pivot = &done[rank];
        for r in rest.iter_mut() {
            if r.get(pivot_col) {
                r.xor_assign(pivot);
            }
        }
        rank += 1;
        col = pivot_col + 1;
    }
    rank
}

/// True iff `H·Hᵀ = 0`, i.e. every pair of rows (including a row with
/// itself) overlaps in an even number of positions.
pub fn is_self_orthogonal(h: &BitMatrix) -> bool {
    let rows = h.rows();
    rows.iter()
        .enumerate()
        .all(|(i, a)| rows[i..].iter().all(|b| !a.dot(b)))
}
