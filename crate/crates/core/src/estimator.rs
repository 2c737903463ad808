//! Instantaneous noise-level estimation from syndrome weight.
//!
//! For a parity-check matrix with `m` rows, each of weight `r`, and i.i.d.
//! bit flips with probability `p`, each syndrome bit is 1 with probability
//! `q = (1 - (1 - 2p)^r) / 2`. Treating the syndrome weight as
//! `Binomial(m, q)`, the maximum-likelihood estimate of `p` from an observed
//! weight `s` inverts that relation at `q = s / m`, saturating at 1/2.

use crate::error::{Error, Result};

/// The estimate for one observed syndrome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    pub p_hat: f64,
    pub syndrome_weight: usize,
    /// Number of syndrome bits (`n - k1`).
    pub m: usize,
    /// Row weight of the parity-check matrix.
    pub r: usize,
}

impl NoiseEstimate {
    /// Estimated number of flipped bits in a block of length `n`.
    pub fn estimated_error_count(&self, n: usize) -> usize {
        estimated_error_count(self.p_hat, n)
    }
}

/// Analytic mean and mean squared error of the estimator at a true `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats {
    pub mean_mu: f64,
    pub mse: f64,
}

fn check_args(r: usize, p: f64) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidParameter("row weight must be >= 1".into()));
    }
    if !(0.0..0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "flip probability must lie in [0, 1/2), got {p}"
        )));
    }
    Ok(())
}

/// Probability that a weight-`r` parity check is violated under BSC(`p`).
pub fn syndrome_flip_prob(r: usize, p: f64) -> Result<f64> {
    check_args(r, p)?;
    Ok(flip_prob(r, p))
}

fn flip_prob(r: usize, p: f64) -> f64 {
    // (1 - (1-2p)^r) / 2, written to keep precision for tiny p.
    let t = (r as f64) * (-2.0 * p).ln_1p();
    -0.5 * t.exp_m1()
}

/// Maximum-likelihood estimate of the flip probability from a syndrome of
/// weight `syndrome_weight` out of `m` bits, for uniform row weight `r`.
pub fn estimate_noise(syndrome_weight: usize, m: usize, r: usize) -> Result<NoiseEstimate> {
    if m == 0 || r == 0 {
        return Err(Error::InvalidParameter(format!(
            "syndrome length and row weight must be >= 1, got m={m}, r={r}"
        )));
    }
    if syndrome_weight > m {
        return Err(Error::InvalidParameter(format!(
            "syndrome weight {syndrome_weight} exceeds syndrome length {m}"
        )));
    }
    Ok(NoiseEstimate {
        p_hat: p_hat(syndrome_weight, m, r),
        syndrome_weight,
        m,
        r,
    })
}

fn p_hat(s: usize, m: usize, r: usize) -> f64 {
    if 2 * s > m {
        0.5
    } else {
        0.5 - 0.5 * root_term(s, m, r, 1.0)
    }
}

/// `(1 - 2s/m)^(power/r)` for `2s <= m`.
fn root_term(s: usize, m: usize, r: usize, power: f64) -> f64 {
    let base = (m - 2 * s) as f64 / m as f64;
    if base == 0.0 {
        0.0
    } else {
        (power / r as f64 * base.ln()).exp()
    }
}

/// Nearest integer to `n * p_hat`, rounding halves away from zero.
pub fn estimated_error_count(p_hat: f64, n: usize) -> usize {
    debug_assert!((0.0..=0.5).contains(&p_hat));
    (n as f64 * p_hat).round() as usize
}

/// Log-domain `Binomial(m, q)` probability masses for `i = 0..=m/2`.
fn lower_half_pmf(m: usize, q: f64) -> Vec<f64> {
    let half = m / 2;
    if q == 0.0 {
        let mut pmf = vec![0.0; half + 1];
        pmf[0] = 1.0;
        return pmf;
    }
    let (ln_q, ln_1mq) = (q.ln(), (-q).ln_1p());
    let mut ln_choose = 0.0;
    (0..=half)
        .map(|i| {
            if i > 0 {
                ln_choose += ((m - i + 1) as f64).ln() - (i as f64).ln();
            }
            (ln_choose + i as f64 * ln_q + (m - i) as f64 * ln_1mq).exp()
        })
        .collect()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_stats_args(m: usize, r: usize, p: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("syndrome length must be >= 1".into()));
    }
    check_args(r, p)
}

/// Mean of the estimator when the syndrome weight is `Binomial(m, q(r, p))`.
pub fn estimator_mean(m: usize, r: usize, p: f64) -> Result<f64> {
    check_stats_args(m, r, p)?;
    let pmf = lower_half_pmf(m, flip_prob(r, p));
    let mut acc = CompensatedSum::default();
    for (i, w) in pmf.iter().enumerate() {
        acc.add(w * root_term(i, m, r, 1.0));
    }
    Ok(0.5 - 0.5 * acc.value())
}

/// Mean squared error `E[(p_hat - p)^2]` of the estimator under the same law.
pub fn estimator_mse(m: usize, r: usize, p: f64) -> Result<f64> {
    Ok(estimator_stats(m, r, p)?.mse)
}

/// Mean and MSE together, sharing one pass over the binomial terms.
pub fn estimator_stats(m: usize, r: usize, p: f64) -> Result<EstimatorStats> {
    check_stats_args(m, r, p)?;
    let pmf = lower_half_pmf(m, flip_prob(r, p));
    let mut first = CompensatedSum::default();
    let mut second = CompensatedSum::default();
    for (i, w) in pmf.iter().enumerate() {
        let a = root_term(i, m, r, 1.0);
        let a2 = root_term(i, m, r, 2.0);
        first.add(w * a);
        second.add(w * (a2 - 2.0 * a));
    }
    let mean_mu = 0.5 - 0.5 * first.value();
    // p^2 - 2 p mu + 1/4 + (1/4) sum, grouped to limit cancellation.
    let mse = p * (p - 2.0 * mean_mu) + 0.25 * (1.0 + second.value());
    Ok(EstimatorStats {
        mean_mu,
        mse: mse.max(0.0),
    })
}
