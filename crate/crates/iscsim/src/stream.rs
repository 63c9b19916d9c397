//! Counter-based random streams.
//!
//! A [`RandomStream`] is a pure function from a 64-bit counter to a variate.
//! Nothing is buffered and no state advances, which buys three things at
//! once:
//!
//! * **Laziness** — a race over `2^27` proposals touches only the counters it
//!   actually needs; item `i`'s exponential or Gaussian can be regenerated at
//!   any time (e.g. for a second pass that ranks the winner).
//! * **Determinism under parallelism** — work item `t` derives its stream
//!   from `(seed, t)`, so results are identical for any thread count.
//! * **Shared randomness** — encoder and decoder construct the same stream
//!   from the same seed and therefore see the same pool and the same race
//!   variates, which is the whole premise of one-shot channel simulation.
//!
//! Each `(seed, stream id)` pair is mixed into an independent key; counter
//! `i` is then hashed through the SplitMix64 finalizer on a Weyl sequence.

use crate::special::{inv_norm_cdf, mix64, PHI64};

/// A deterministic, stateless stream of variates indexed by a `u64` counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStream {
    key: u64,
}

impl RandomStream {
    /// Stream `stream_id` of the family seeded by `seed`. Distinct
    /// `(seed, stream_id)` pairs give statistically independent streams.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let key = mix64(seed ^ mix64(stream_id.wrapping_mul(PHI64) ^ 0x5851_f42d_4c95_7f2d));
        RandomStream { key }
    }

    /// A child stream; `tag` plays the role of a nested stream id.
    /// `s.substream(a) != s.substream(b)` for `a != b`, and substreams are
    /// independent of the parent's own counters.
    pub fn substream(&self, tag: u64) -> Self {
        RandomStream {
            key: mix64(self.key ^ mix64(tag.wrapping_mul(PHI64) ^ 0x94d0_49bb_1331_11eb)),
        }
    }

    /// Raw 64 uniform bits for counter `i`.
    #[inline(always)]
    pub fn raw(&self, i: u64) -> u64 {
        mix64(self.key.wrapping_add(i.wrapping_mul(PHI64)))
    }

    /// The 53-bit integer behind [`Self::uniform`]; exposed so hot loops can
    /// compare against an integer threshold without touching floats.
    #[inline(always)]
    pub fn raw53(&self, i: u64) -> u64 {
        self.raw(i) >> 11
    }

    /// Uniform variate in the open interval (0, 1):
    /// `(raw53 + 0.5) * 2^-53`. Both `u` and `1 - u` are exact, so either
    /// tail can be pushed through a logarithm at full precision.
    #[inline(always)]
    pub fn uniform(&self, i: u64) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.raw53(i) as f64 + 0.5) * SCALE
    }

    /// Exponential(1) variate for counter `i`, computed as `-ln(u)` through
    /// the exactly-representable complement so that both very small and very
    /// large exponentials keep full relative precision.
    #[inline(always)]
    pub fn exp_draw(&self, i: u64) -> f64 {
        Self::exp_from_raw53(self.raw53(i))
    }

    /// Exponential(1) from an already-extracted 53-bit integer (see
    /// [`Self::raw53`]); the two-pass race uses this to avoid hashing twice.
    #[inline(always)]
    pub fn exp_from_raw53(z53: u64) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        // 1 - u computed exactly: (2^53 - z53 - 0.5) * 2^-53.
        let one_minus_u = (((1u64 << 53) - z53) as f64 - 0.5) * SCALE;
        -(-one_minus_u).ln_1p()
    }

    /// Standard normal variate for counter `i` (inverse-CDF transform; one
    /// counter per variate, so pools stay strictly counter-addressable).
    #[inline(always)]
    pub fn normal(&self, i: u64) -> f64 {
        inv_norm_cdf(self.uniform(i))
    }
}
