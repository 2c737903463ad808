//! Seeded error sampling for binary symmetric and Pauli channels.
//!
//! Every draw is a pure function of an explicit [`RngStream`]: a master seed
//! plus a stream index selecting an independent ChaCha keystream. Trials in
//! an experiment derive their stream index from `(tag, p, trial)`, so results
//! never depend on which worker ran which trial.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Stream for trial `trial` of the experiment labelled `tag` at channel
    /// parameter `p`.
    pub fn for_trial(master_seed: u64, tag: &str, p: f64, trial: u64) -> Self {
        let mut h = 0x6a09_e667_f3bc_c908u64;
        for &b in tag.as_bytes() {
            h = mix64(h ^ u64::from(b));
        }
        h = mix64(h ^ p.to_bits());
        h = mix64(h ^ trial);
        Self::new(master_seed, h)
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-qubit probabilities of the four Pauli outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannelParams {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl PauliChannelParams {
    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let params = Self { p_i, p_x, p_y, p_z };
        params.validate()?;
        Ok(params)
    }

    /// Depolarizing channel with probability `p / 2` for each of X, Y and Z.
    ///
    /// Both marginal flip probabilities then equal `p`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        let each = p / 2.0;
        Self::new(1.0 - 3.0 * each, each, each, each)
    }

    /// Bit flips only: a binary symmetric channel on the X component.
    pub fn bit_flip(p: f64) -> Result<Self> {
        Self::new(1.0 - p, p, 0.0, 0.0)
    }

    /// Marginal probability of a bit flip (X or Y).
    pub fn marginal_x(&self) -> f64 {
        self.p_x + self.p_y
    }

    /// Marginal probability of a phase flip (Z or Y).
    pub fn marginal_z(&self) -> f64 {
        self.p_z + self.p_y
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_i, self.p_x, self.p_y, self.p_z];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(format!(
                "Pauli probabilities must lie in [0, 1], got {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Pauli probabilities must sum to 1, got {sum}"
            )));
        }
        if self.marginal_x() >= 0.5 || self.marginal_z() >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "marginal flip probabilities must be < 1/2, got X {} and Z {}",
                self.marginal_x(),
                self.marginal_z()
            )));
        }
        Ok(())
    }
}

fn check_flip_probability(p: f64) -> Result<()> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "flip probability must lie in [0, 1/2), got {p}"
        )));
    }
    Ok(())
}

/// Samples a length-`n` error vector from a binary symmetric channel.
pub fn sample_bsc_error(n: usize, p: f64, stream: &RngStream) -> Result<BitVector> {
    check_flip_probability(p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    let flip = Bernoulli::new(p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = stream.rng();
    let mut e = BitVector::zeros(n);
    for i in 0..n {
        if flip.sample(&mut rng) {
            e.set(i, true);
        }
    }
    Ok(e)
}

/// Samples a Pauli error and returns its `(e_X, e_Z)` decomposition.
///
/// `e_X` is set where X or Y occurred; `e_Z` where Z or Y occurred.
pub fn sample_pauli_errors(
    n: usize,
    params: &PauliChannelParams,
    stream: &RngStream,
) -> Result<(BitVector, BitVector)> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    let t_x = params.p_x;
    let t_y = t_x + params.p_y;
    let t_z = t_y + params.p_z;
    let mut rng = stream.rng();
    let mut ex = BitVector::zeros(n);
    let mut ez = BitVector::zeros(n);
    for i in 0..n {
        let u: f64 = rng.random();
        if u < t_x {
            ex.set(i, true);
        } else if u < t_y {
            ex.set(i, true);
            ez.set(i, true);
        } else if u < t_z {
            ez.set(i, true);
        }
    }
    Ok((ex, ez))
}
