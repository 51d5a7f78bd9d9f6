//! Counter-based random streams.
//!
//! Every random quantity is addressed by `(seed, domain, index)`: the seed and
//! domain form the ChaCha8 key and the index selects the 64-bit stream. Within
//! a stream, Gaussian draw `s` lives at a fixed word offset, so a value never
//! depends on how many other particles, members or replications were drawn
//! before it.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Separates independent uses of the same seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Driving Brownian increments, one stream per particle or ensemble member.
    Noise = 1,
    /// Initial conditions, one stream per particle or ensemble member.
    Initial = 2,
    /// Reflection coefficients, one stream per matrix row.
    Environment = 3,
    /// Auxiliary sampling (analytic oracles, subsampling).
    Auxiliary = 4,
}

/// Raw ChaCha8 stream for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Seed of replication `r` derived from a base seed. Replication 0 keeps the base.
pub fn replicate_seed(base: u64, r: usize) -> u64 {
    base.wrapping_add((r as u64).wrapping_mul(GOLDEN_GAMMA))
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_closed_open(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * TWO_POW_NEG_53
}

/// Uniform on `(0, 1]` with 53 random bits.
#[inline]
pub fn unit_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG_53
}

/// Standard normal draws from one stream, produced in Box–Muller pairs.
///
/// Draw `s` uses the pair at word offset `4 * (s / 2)`, taking the cosine
/// branch for even `s` and the sine branch for odd `s`.
#[derive(Clone, Debug)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, domain: Domain, index: u64) -> Self {
        Self {
            rng: stream(seed, domain, index),
            spare: None,
        }
    }

    /// Stream positioned so that the next draw is draw number `draw`.
    pub fn starting_at(seed: u64, domain: Domain, index: u64, draw: u64) -> Self {
        let mut rng = stream(seed, domain, index);
        rng.set_word_pos(4 * u128::from(draw / 2));
        let mut out = Self { rng, spare: None };
        if draw % 2 == 1 {
            out.next_standard();
        }
        out
    }

    #[inline]
    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = unit_open_closed(&mut self.rng);
        let u2 = unit_closed_open(&mut self.rng);
        let radius = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(radius * sin);
        radius * cos
    }
}
