//! Deterministic, splittable random streams and the exact samplers consumed
//! by the exploration processes.
//!
//! Streams are ChaCha8 counter-mode generators keyed by a master seed, with
//! one independent stream per 64-bit stream index. Two streams built from the
//! same `(master_seed, stream_index)` replay identically, and a stream can be
//! checkpointed to a fixed-width hex token and resumed elsewhere.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::error::{Error, Result};

/// A deterministic random stream derived from `(master_seed, stream_index)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

/// Builds the stream for the given master seed and stream index.
pub fn derive_stream(master_seed: u64, stream_index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_index);
    RngStream { master_seed, stream_index, rng }
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform f64 in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64) / DEN
    }

    /// Bernoulli(prob) draw; prob must already be validated to [0, 1].
    #[inline]
    pub fn bernoulli(&mut self, prob: f64) -> bool {
        self.next_f64() < prob
    }

    /// Uniform index in [0, bound). Panics if bound is zero.
    #[inline]
    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    /// Standard exponential via inverse transform.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        let u = self.next_f64();
        -(-u).ln_1p()
    }

    /// Serializes the stream state to a 64-character hex token
    /// (seed, stream index and word position, 8+8+16 bytes little-endian).
    pub fn state_token(&self) -> String {
        let mut bytes = [0u8; 32];
        bytes[0..8].copy_from_slice(&self.master_seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.stream_index.to_le_bytes());
        bytes[16..32].copy_from_slice(&self.rng.get_word_pos().to_le_bytes());
        let mut out = String::with_capacity(64);
        for b in bytes {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Restores a stream from a token produced by [`RngStream::state_token`].
    pub fn from_state_token(token: &str) -> Result<RngStream> {
        if token.len() != 64 || !token.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::BadStateToken(format!(
                "expected 64 hex characters, got {:?}",
                token
            )));
        }
        let mut bytes = [0u8; 32];
        for (i, chunk) in token.as_bytes().chunks(2).enumerate() {
            let s = std::str::from_utf8(chunk).unwrap();
            bytes[i] = u8::from_str_radix(s, 16).unwrap();
        }
        let master_seed = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let stream_index = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let word_pos = u128::from_le_bytes(bytes[16..32].try_into().unwrap());
        let mut stream = derive_stream(master_seed, stream_index);
        stream.rng.set_word_pos(word_pos);
        Ok(stream)
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Exact binomial draw. Inverse transform for small `count * prob`, exact
/// acceptance-rejection (BTPE) for large parameters; never a normal
/// approximation.
pub fn sample_binomial(count: u64, prob: f64, stream: &mut RngStream) -> Result<u64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidParameter(format!(
            "binomial success probability must lie in [0,1], got {prob}"
        )));
    }
    if count == 0 || prob == 0.0 {
        return Ok(0);
    }
    if prob == 1.0 {
        return Ok(count);
    }
    let dist = Binomial::new(count, prob)
        .map_err(|e| Error::InvalidParameter(format!("binomial: {e}")))?;
    Ok(dist.sample(stream))
}

/// Parameters of the cut-gamma law: `min(E1 + E2, theta)` for independent
/// unit exponentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutGammaParams {
    theta: f64,
}

impl CutGammaParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cut-gamma theta must be positive and finite, got {theta}"
            )));
        }
        Ok(CutGammaParams { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Closed-form mean `2 - (theta + 2) e^{-theta}`.
    pub fn mean(&self) -> f64 {
        2.0 - (self.theta + 2.0) * (-self.theta).exp()
    }
}

/// Draws from the cut-gamma law in [0, theta].
pub fn sample_cut_gamma(params: &CutGammaParams, stream: &mut RngStream) -> f64 {
    let sum = stream.exp1() + stream.exp1();
    sum.min(params.theta)
}

/// Homogeneous Poisson process on [0, length): Poisson(rate*length) many
/// points, i.i.d. uniform, returned sorted.
pub fn sample_poisson_process(
    rate: f64,
    length: f64,
    stream: &mut RngStream,
) -> Result<Vec<f64>> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "poisson process rate must be nonnegative, got {rate}"
        )));
    }
    if !length.is_finite() || length < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "poisson process length must be nonnegative, got {length}"
        )));
    }
    let mean = rate * length;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let dist =
        Poisson::new(mean).map_err(|e| Error::InvalidParameter(format!("poisson: {e}")))?;
    let count = dist.sample(stream) as u64;
    let mut points: Vec<f64> = (0..count).map(|_| stream.next_f64() * length).collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(points)
}
