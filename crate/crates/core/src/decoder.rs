//! Syndrome-based sum-product decoding.
//!
//! Messages are log-likelihood ratios `ln(P[bit = 0] / P[bit = 1])` on the
//! edges of the Tanner graph. Check node `i` enforces parity `s[i]` instead of
//! even parity, so the decoder searches the coset of the code selected by the
//! syndrome. The schedule is flooding: every check node, then every variable
//! node, then a hard decision and a syndrome test.

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 90;

/// LLR magnitudes are clamped here to avoid overflow in `tanh`/`atanh`.
const LLR_CLAMP: f64 = 30.0;

/// Bipartite check/variable adjacency of a parity-check matrix.
///
/// Edges are numbered check-major: the edges of check `i` are
/// `check_offsets[i]..check_offsets[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    num_vars: usize,
    check_offsets: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(h: &BitMatrix) -> Self {
        let mut check_offsets = Vec::with_capacity(h.num_rows() + 1);
        let mut edge_var = Vec::with_capacity(h.num_ones());
        let mut var_edges = vec![Vec::new(); h.num_cols()];
        check_offsets.push(0);
        for row in h.rows() {
            for v in row.iter_ones() {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_offsets.push(edge_var.len());
        }
        Self {
            num_vars: h.num_cols(),
            check_offsets,
            edge_var,
            var_edges,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.check_offsets.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Variable nodes adjacent to check `i`.
    pub fn check_neighbors(&self, i: usize) -> &[usize] {
        &self.edge_var[self.check_offsets[i]..self.check_offsets[i + 1]]
    }

    pub fn check_degree(&self, i: usize) -> usize {
        self.check_offsets[i + 1] - self.check_offsets[i]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_edges[v].len()
    }

    /// Check nodes adjacent to variable `v`.
    pub fn var_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.var_edges[v].iter().map(move |&e| self.edge_check(e))
    }

    fn edge_check(&self, e: usize) -> usize {
        self.check_offsets.partition_point(|&o| o <= e) - 1
    }

    /// Syndrome of `e`, touching only the checks adjacent to its ones.
    pub fn syndrome(&self, e: &BitVector) -> Result<BitVector> {
        if e.len() != self.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "error vector has length {} but the graph has {} variables",
                e.len(),
                self.num_vars
            )));
        }
        let mut s = BitVector::zeros(self.num_checks());
        for v in e.iter_ones() {
            for c in self.var_neighbors(v) {
                s.flip(c);
            }
        }
        Ok(s)
    }

    fn syndrome_matches(&self, bits: &[bool], target: &BitVector) -> bool {
        (0..self.num_checks()).all(|i| {
            let parity = self
                .check_neighbors(i)
                .iter()
                .fold(false, |acc, &v| acc ^ bits[v]);
            parity == target.get(i)
        })
    }
}

pub fn build_tanner(h: &BitMatrix) -> TannerGraph {
    TannerGraph::new(h)
}

/// Outcome of one decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub error_estimate: BitVector,
    /// The estimate reproduces the target syndrome.
    pub converged: bool,
    pub iterations_used: usize,
}

fn clamp_llr(x: f64) -> f64 {
    x.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// Decodes syndrome `s` by belief propagation, assuming every bit flipped
/// independently with probability `prior_p`.
pub fn sum_product_decode(
    graph: &TannerGraph,
    s: &BitVector,
    prior_p: f64,
    max_iters: usize,
) -> Result<DecodeResult> {
    if s.len() != graph.num_checks() {
        return Err(Error::DimensionMismatch(format!(
            "syndrome has length {} but the graph has {} checks",
            s.len(),
            graph.num_checks()
        )));
    }
    if !(prior_p > 0.0 && prior_p < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "prior flip probability must lie in (0, 1/2), got {prior_p}"
        )));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
    }

    let n = graph.num_vars();
    let prior = clamp_llr(((1.0 - prior_p) / prior_p).ln());
    let mut hard = vec![false; n];
    let finish = |hard: &[bool], converged, iterations_used| DecodeResult {
        error_estimate: BitVector::from_bools(hard.iter().copied()),
        converged,
        iterations_used,
    };

    // All-zero is the hard decision of the prior alone.
    if s.is_zero() {
        return Ok(finish(&hard, true, 0));
    }

    let edges = graph.num_edges();
    let mut var_to_check = vec![prior; edges];
    let mut check_to_var = vec![0.0f64; edges];
    let mut totals = vec![prior; n];
    let max_degree = (0..graph.num_checks())
        .map(|i| graph.check_degree(i))
        .max()
        .unwrap_or(0);
    let mut tanhs = vec![0.0f64; max_degree];
    let mut suffix = vec![0.0f64; max_degree + 1];

    for iteration in 1..=max_iters {
        // check nodes
        for i in 0..graph.num_checks() {
            let lo = graph.check_offsets[i];
            let hi = graph.check_offsets[i + 1];
            let d = hi - lo;
            if d == 0 {
                continue;
            }
            for (t, &m) in tanhs[..d].iter_mut().zip(&var_to_check[lo..hi]) {
                *t = (0.5 * m).tanh();
            }
            suffix[d] = 1.0;
            for k in (0..d).rev() {
                suffix[k] = suffix[k + 1] * tanhs[k];
            }
            let sign = if s.get(i) { -1.0 } else { 1.0 };
            let mut prefix = 1.0;
            for k in 0..d {
                let others = prefix * suffix[k + 1];
                check_to_var[lo + k] = clamp_llr(sign * 2.0 * others.atanh());
                prefix *= tanhs[k];
            }
        }
        // variable nodes
        for v in 0..n {
            let incoming = &graph.var_edges[v];
            let total = prior + incoming.iter().map(|&e| check_to_var[e]).sum::<f64>();
            totals[v] = total;
            for &e in incoming {
                var_to_check[e] = clamp_llr(total - check_to_var[e]);
            }
        }
        // LLR exactly 0 decides 0
        for (h, &t) in hard.iter_mut().zip(&totals) {
            *h = t < 0.0;
        }
        if graph.syndrome_matches(&hard, s) {
            return Ok(finish(&hard, true, iteration));
        }
    }
    Ok(finish(&hard, false, max_iters))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimum-weight vector with syndrome `s`, by enumeration.
    fn coset_leader(h: &BitMatrix, s: &BitVector) -> BitVector {
        let n = h.num_cols();
        (0u32..1 << n)
            .map(|mask| BitVector::from_bools((0..n).map(|i| mask >> i & 1 == 1)))
            .filter(|e| h.syndrome(e).unwrap() == *s)
            .min_by_key(|e| e.weight())
            .unwrap()
    }

    fn hamming_7_4() -> BitMatrix {
        // column j is the binary expansion of j + 1
        let rows: Vec<Vec<u8>> = (0..3)
            .map(|bit| (1..=7u8).map(|c| (c >> bit) & 1).collect())
            .collect();
        BitMatrix::from_dense(&rows).unwrap()
    }

    #[test]
    fn tanner_examples() {
        let g = build_tanner(&BitMatrix::identity(3));
        assert_eq!(g.num_edges(), 3);
        assert!((0..3).all(|v| g.var_degree(v) == 1));

        let g = build_tanner(&BitMatrix::from_dense(&[[1, 1, 0], [0, 1, 1]]).unwrap());
        assert_eq!(
            (0..3).map(|v| g.var_degree(v)).collect::<Vec<_>>(),
            vec![1, 2, 1]
        );
        assert_eq!(g.var_neighbors(1).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(g.check_neighbors(1), &[1, 2]);
    }

    #[test]
    fn sparse_syndrome_matches_dense() {
        let h = hamming_7_4();
        let g = build_tanner(&h);
        for mask in 0u8..128 {
            let e = BitVector::from_bools((0..7).map(|i| mask >> i & 1 == 1));
            assert_eq!(g.syndrome(&e).unwrap(), h.syndrome(&e).unwrap());
        }
        assert!(g.syndrome(&BitVector::zeros(6)).is_err());
    }

    #[test]
    fn zero_syndrome_decodes_to_zero() {
        let g = build_tanner(&hamming_7_4());
        for p in [0.001, 0.1, 0.49] {
            let r = sum_product_decode(&g, &BitVector::zeros(3), p, 10).unwrap();
            assert!(r.converged && r.error_estimate.is_zero());
            assert!(r.iterations_used <= 1);
        }
    }

    #[test]
    fn path_code_matches_coset_leader() {
        let h = BitMatrix::from_dense(&[[1, 1, 0], [0, 1, 1]]).unwrap();
        let s = BitVector::from_bits(&[1, 0]);
        let r = sum_product_decode(&build_tanner(&h), &s, 0.1, 20).unwrap();
        assert!(r.converged);
        assert_eq!(r.error_estimate, coset_leader(&h, &s));
        assert_eq!(r.error_estimate, BitVector::from_bits(&[1, 0, 0]));
    }

    #[test]
    fn hamming_single_errors() {
        let h = hamming_7_4();
        let g = build_tanner(&h);
        let s = BitVector::from_bits(&[1, 1, 0]);
        let r = sum_product_decode(&g, &s, 0.05, DEFAULT_MAX_ITERS).unwrap();
        assert!(r.converged);
        // column 3 (index 2) reads 1,1,0
        assert_eq!(r.error_estimate, BitVector::from_support(7, &[2]).unwrap());
        assert_eq!(r.error_estimate, coset_leader(&h, &s));
    }

    #[test]
    fn converged_implies_syndrome_match() {
        let h = hamming_7_4();
        let g = build_tanner(&h);
        for mask in 0u8..8 {
            let s = BitVector::from_bools((0..3).map(|i| mask >> i & 1 == 1));
            for iters in [1, 2, 5, 50] {
                let r = sum_product_decode(&g, &s, 0.2, iters).unwrap();
                if r.converged {
                    assert_eq!(h.syndrome(&r.error_estimate).unwrap(), s);
                }
                assert!(r.iterations_used <= iters);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = build_tanner(&hamming_7_4());
        let s = BitVector::zeros(3);
        assert!(matches!(
            sum_product_decode(&g, &BitVector::zeros(4), 0.1, 5),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(sum_product_decode(&g, &s, 0.0, 5).is_err());
        assert!(sum_product_decode(&g, &s, 0.5, 5).is_err());
        assert!(sum_product_decode(&g, &s, 0.1, 0).is_err());
    }
}
