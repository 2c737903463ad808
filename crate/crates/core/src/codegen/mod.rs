//! Dual-containing LDPC parity-check matrices.
//!
//! The construction stacks a circulant `C` next to its transpose,
//! `H0 = [C | Cᵀ]`. Circulants commute, so `H0·H0ᵀ = C·Cᵀ + Cᵀ·C = 0` and the
//! code defined by `H0` contains its dual. Deleting rows keeps that property,
//! which lets us hit any syndrome length up to `n / 2`.

mod alist;

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::mix64;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

pub use alist::{parse_alist, read_alist, to_alist_string, write_alist};

/// Construction attempts before giving up on a rank-deficient draw.
pub const MAX_CONSTRUCTION_ATTEMPTS: u32 = 32;

/// Target shape of a constructed code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeSpec {
    /// Block length.
    pub n: usize,
    /// Syndrome length `n - k1`.
    pub m_target: usize,
    pub row_weight: usize,
    pub seed: u64,
}

impl CodeSpec {
    /// The `[[3786, 946]]` code shape with row weight 24.
    pub fn flagship(seed: u64) -> Self {
        Self {
            n: 3786,
            m_target: 1420,
            row_weight: 24,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n < 2 || self.n % 2 != 0 {
            return bad(format!("block length must be even and >= 2, got {}", self.n));
        }
        if self.row_weight < 2 || self.row_weight % 2 != 0 {
            return bad(format!(
                "row weight must be even and >= 2 for H·Hᵀ = 0, got {}",
                self.row_weight
            ));
        }
        let half = self.n / 2;
        if self.row_weight / 2 > half {
            return bad(format!(
                "row weight {} too large for block length {}",
                self.row_weight, self.n
            ));
        }
        if self.m_target == 0 || self.m_target > half {
            return bad(format!(
                "syndrome length must lie in 1..={half}, got {}",
                self.m_target
            ));
        }
        Ok(())
    }

    /// Dimension `k1` of the classical code.
    pub fn k1(&self) -> usize {
        self.n - self.m_target
    }

    /// Number of logical qubits of the CSS code with `H1 = H2 = H`.
    pub fn logical_qubits(&self) -> usize {
        2 * self.k1() - self.n
    }
}

/// Picks `weight` distinct residues mod `modulus` for the circulant's first
/// row.
///
/// Preference order: pairwise differences all distinct and never
/// self-inverse (row overlaps of at most 2) with residues spread evenly
/// modulo `stride`; then distinct differences only; then any distinct
/// residues. Rows are later deleted every `stride` positions, so spreading
/// the support over residues mod `stride` keeps column weights near uniform.
fn circulant_support(
    modulus: usize,
    weight: usize,
    stride: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..modulus).collect();
    candidates.shuffle(rng);

    let stride = stride.max(1);
    let per_class = weight.div_ceil(stride);
    let mut support: Vec<usize> = Vec::with_capacity(weight);
    let mut diffs: HashSet<usize> = HashSet::new();
    let mut class_counts = vec![0usize; stride];
    for balanced in [true, false] {
        for &x in &candidates {
            if support.len() == weight {
                break;
            }
            if support.contains(&x) || (balanced && class_counts[x % stride] >= per_class) {
                continue;
            }
            let mut new_diffs = Vec::with_capacity(2 * support.len());
            for &s in &support {
                new_diffs.push((x + modulus - s) % modulus);
                new_diffs.push((s + modulus - x) % modulus);
            }
            let unique: HashSet<usize> = new_diffs.iter().copied().collect();
            if unique.len() == new_diffs.len() && unique.is_disjoint(&diffs) {
                support.push(x);
                class_counts[x % stride] += 1;
                diffs.extend(unique);
            }
        }
    }
    // Too few residues for a difference set: accept overlaps > 2.
    for &x in &candidates {
        if support.len() == weight {
            break;
        }
        if !support.contains(&x) {
            support.push(x);
        }
    }
    support.sort_unstable();
    support
}

/// Circulant supports drawn per attempt; the one giving the flattest column
/// weights after row deletion is kept.
const SUPPORT_DRAWS: usize = 64;

fn build_candidate(spec: &CodeSpec, seed: u64) -> BitMatrix {
    let half = spec.n / 2;
    let to_delete = half - spec.m_target;
    let stride = if to_delete == 0 {
        1
    } else {
        (half as f64 / to_delete as f64).round() as usize
    };
    let deleted: HashSet<usize> = (0..to_delete).map(|k| k * half / to_delete.max(1)).collect();
    let kept: Vec<usize> = (0..half).filter(|i| !deleted.contains(i)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = (0..SUPPORT_DRAWS)
        .map(|_| circulant_support(half, spec.row_weight / 2, stride, &mut rng))
        .min_by_key(|s| column_weight_spread(half, s, &kept))
        .expect("at least one draw");

    let rows: Vec<BitVector> = kept
        .iter()
        .map(|&i| {
            let mut row = BitVector::zeros(spec.n);
            for &s in &support {
                row.set((s + i) % half, true);
                row.set(half + (i + half - s) % half, true);
            }
            row
        })
        .collect();
    BitMatrix::from_rows(rows).expect("at least one row is kept")
}

/// `(max - min, sum of squares)` of the column weights of `[C | Cᵀ]`
/// restricted to `kept` rows.
fn column_weight_spread(half: usize, support: &[usize], kept: &[usize]) -> (usize, usize) {
    let mut weights = vec![0usize; 2 * half];
    for &i in kept {
        for &s in support {
            weights[(s + i) % half] += 1;
            weights[half + (i + half - s) % half] += 1;
        }
    }
    let max = weights.iter().max().copied().unwrap_or(0);
    let min = weights.iter().min().copied().unwrap_or(0);
    (max - min, weights.iter().map(|w| w * w).sum())
}

/// Builds an `m_target × n` dual-containing parity-check matrix with uniform
/// row weight and full row rank, deterministically from `spec.seed`.
pub fn construct_dual_containing_ldpc(spec: &CodeSpec) -> Result<BitMatrix> {
    spec.validate()?;
    let mut last_rank = 0;
    for attempt in 0..MAX_CONSTRUCTION_ATTEMPTS {
        let seed = if attempt == 0 {
            spec.seed
        } else {
            mix64(spec.seed ^ mix64(u64::from(attempt)))
        };
        let h = build_candidate(spec, seed);
        debug_assert!(h.is_self_orthogonal());
        last_rank = h.rank();
        if last_rank == spec.m_target {
            log::debug!("constructed {}x{} matrix on attempt {}", spec.m_target, spec.n, attempt + 1);
            return Ok(h);
        }
    }
    Err(Error::Construction {
        attempts: MAX_CONSTRUCTION_ATTEMPTS,
        reason: format!(
            "rank {last_rank} < {} on the final attempt",
            spec.m_target
        ),
    })
}

/// Structural properties of a parity-check matrix that govern estimation and
/// decoding quality.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDiagnostics {
    pub rows: usize,
    pub cols: usize,
    /// weight -> number of rows
    pub row_weights: BTreeMap<usize, usize>,
    /// weight -> number of columns
    pub col_weights: BTreeMap<usize, usize>,
    pub mean_col_weight: f64,
    pub max_pairwise_row_overlap: usize,
    pub num_overlapping_row_pairs: usize,
    /// overlap size -> number of row pairs, nonzero overlaps only
    pub overlap_histogram: BTreeMap<usize, usize>,
    pub rank: usize,
    pub self_orthogonal: bool,
}

impl MatrixDiagnostics {
    pub fn uniform_row_weight(&self) -> Option<usize> {
        match self.row_weights.keys().collect::<Vec<_>>().as_slice() {
            [w] => Some(**w),
            _ => None,
        }
    }

    pub fn full_rank(&self) -> bool {
        self.rank == self.rows
    }
}

fn histogram(values: impl IntoIterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_insert(0) += 1;
    }
    h
}

pub fn matrix_diagnostics(h: &BitMatrix) -> MatrixDiagnostics {
    let col_w = h.col_weights();
    let mut pair_overlaps: HashMap<(usize, usize), usize> = HashMap::new();
    for col in h.col_supports() {
        for (a, &i) in col.iter().enumerate() {
            for &j in &col[a + 1..] {
                *pair_overlaps.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    MatrixDiagnostics {
        rows: h.num_rows(),
        cols: h.num_cols(),
        row_weights: histogram(h.row_weights()),
        mean_col_weight: col_w.iter().sum::<usize>() as f64 / h.num_cols() as f64,
        col_weights: histogram(col_w),
        max_pairwise_row_overlap: pair_overlaps.values().copied().max().unwrap_or(0),
        num_overlapping_row_pairs: pair_overlaps.len(),
        overlap_histogram: histogram(pair_overlaps.into_values()),
        rank: h.rank(),
        self_orthogonal: h.is_self_orthogonal(),
    }
}
