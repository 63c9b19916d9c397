//! Channel simulation with decoder side information and decision feedback.
//!
//! Encoder and decoder share a pool of proposals drawn from the marginal of
//! the representation `W` plus the race exponentials. The encoder races with
//! weights `p(W|V=v) / p(W)`; the decoder, holding the noisy view `T = t`,
//! races with the sharper `p(W|T=t) / p(W)`. Because the decoder's weights
//! already concentrate near the encoder's winner, the encoder only needs to
//! transmit the few least-significant bits of the winning index (its *bin*)
//! — rate `log2 L` — and the two parties reconcile the remaining
//! most-significant bits through a short feedback exchange:
//!
//! 1. encoder sends the `log2 L` LSBs of the winning index;
//! 2. decoder re-races restricted to that bin and feeds back an image of its
//!    candidate's MSBs — all of them, a truncated prefix, or a short
//!    universal hash;
//! 3. encoder acknowledges (1 bit) or, on a detected mismatch, sends MSB
//!    bits forward so the decoder can correct (one round; truncated images
//!    can leave an undetected error, which is measured, not hidden).
//!
//! Feedback bits are tracked separately from forward bits and excluded from
//! the rate, matching the operational setting where the reverse link is
//! cheap. [`mismatch_probability`] measures first-round disagreement,
//! [`mismatch_bound`](crate::matching::mismatch_bound) friends bound it from
//! theory, and [`side_info_mismatch_bound`] evaluates the population-level
//! bound `E[1 - (1 + (1+eps) L^{-1} 2^{i(W;V|T)})^{-1}]` by Monte Carlo.

use crate::errors::{Error, Result};
use crate::gauss::SideInfoChannel;
use crate::model::{Density, Normal, QuantileFn, WeightModel};
use crate::pool::ProposalPool;
use crate::race::{select_index_pruned_over, Selection};
use crate::special::{mix64, wilson_ci};
use crate::stream::RandomStream;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// How the decoder's candidate is reported back to the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMode {
    /// No verification: the decoder keeps its first candidate.
    None,
    /// Feedback carries the candidate's full MSB value; every mismatch is
    /// detected and corrected.
    Full,
    /// Feedback carries only the top `l2` MSB bits; on a detected mismatch
    /// the encoder forwards its own `l2`-bit prefix and the decoder
    /// re-decodes among consistent indices. Residual error possible.
    Partial { l2: u32 },
    /// Feedback carries an `h`-bit universal hash of the MSB value; detected
    /// mismatches trigger a full MSB retransmission, undetected collisions
    /// leave the decoder on the wrong index.
    Hashed { h: u32 },
}

impl FeedbackMode {
    /// Short identifier used in reports ("none", "full", "partial",
    /// "hashed").
    pub fn name(self) -> &'static str {
        match self {
            FeedbackMode::None => "none",
            FeedbackMode::Full => "full",
            FeedbackMode::Partial { .. } => "partial",
            FeedbackMode::Hashed { .. } => "hashed",
        }
    }

    /// The mode's truncation/hash width: `l2` for partial, `h` for hashed,
    /// zero otherwise. This is the `L2_or_h` report column.
    pub fn width(self) -> u32 {
        match self {
            FeedbackMode::None | FeedbackMode::Full => 0,
            FeedbackMode::Partial { l2 } => l2,
            FeedbackMode::Hashed { h } => h,
        }
    }
}

/// Binning discipline mapping pool indices to bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMode {
    /// Practical: bin = index LSBs, invertible, required by the feedback
    /// protocol.
    IndexLsb,
    /// Theoretical: i.i.d. uniform bins from shared randomness; only for
    /// validating the mismatch analysis.
    Random,
}

/// Protocol parameters for one feedback round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackConfig {
    /// Number of bins `L` (power of two, `1 <= L <= N`).
    pub l: u64,
    pub mode: FeedbackMode,
    /// Keys the universal hash in [`FeedbackMode::Hashed`].
    pub hash_seed: u64,
}

impl FeedbackConfig {
    /// Validate against a pool of size `n`; returns `(log2 n, log2 l)`.
    pub fn validate(&self, n: u64) -> Result<(u32, u32)> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "pool size must be a power of two >= 2, got {n}"
            )));
        }
        if self.l == 0 || !self.l.is_power_of_two() {
            return Err(Error::invalid(format!(
                "bin count must be a power of two >= 1, got {}",
                self.l
            )));
        }
        if self.l > n {
            return Err(Error::invalid(format!(
                "bin count {} exceeds pool size {n}",
                self.l
            )));
        }
        match self.mode {
            FeedbackMode::Partial { l2 } if l2 == 0 => {
                Err(Error::invalid("partial feedback needs l2 >= 1"))
            }
            FeedbackMode::Hashed { h } if !(1..=48).contains(&h) => {
                Err(Error::invalid(format!("hash width must be in 1..=48, got {h}")))
            }
            _ => Ok((n.trailing_zeros(), self.l.trailing_zeros())),
        }
    }
}

/// `h`-bit multiply-shift universal hash of `x`, keyed by `seed`.
///
/// For `x != x'` with a uniformly random key offset the collision
/// probability is exactly `2^-h`, which is what makes the hashed-feedback
/// error rate analyzable.
pub fn msb_hash(x: u64, h: u32, seed: u64) -> u64 {
    debug_assert!((1..=63).contains(&h));
    let a = mix64(seed) | 1;
    let b = mix64(seed ^ 0x6a09_e667_f3bc_c909);
    a.wrapping_mul(x).wrapping_add(b) >> (64 - h)
}

// ---------------------------------------------------------------------------
// One protocol round
// ---------------------------------------------------------------------------

/// Complete record of one feedback round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transcript {
    /// Encoder's winning pool index (0-based).
    pub u_enc: u64,
    /// Decoder's first-round candidate (same bin as `u_enc` by
    /// construction).
    pub u_dec_first: u64,
    /// Decoder's index after the exchange.
    pub u_dec_final: u64,
    /// First-round candidates disagreed.
    pub mismatch_first: bool,
    /// Encoder flagged the disagreement (always true on disagreement in
    /// full mode; image collisions mask it in partial/hashed modes).
    pub detected: bool,
    /// Decoder ends on an index other than the encoder's.
    pub undetected_error: bool,
    /// Forward bits actually sent this round (bin + ack + any
    /// retransmission).
    pub forward_bits: u32,
    /// Forward bits under the accounting that absorbs the flag bit into a
    /// detected retransmission (`forward_bits - 1` on detected mismatch) —
    /// the convention behind the closed-form rate identity.
    pub forward_bits_nominal: u32,
    /// Feedback bits (decoder to encoder), excluded from the rate.
    pub feedback_bits: u32,
    /// Representation value at the encoder's index.
    pub w_enc: f64,
    /// Representation value the decoder ends with.
    pub w_dec: f64,
    /// Fused estimate of the source from `(w_dec, t)`.
    pub v_hat: f64,
    /// Requested MSB truncation exceeded the available MSB bits and was
    /// clamped.
    pub l2_clamped: bool,
}

/// Run one complete round: shared pool from the `W`-marginal, encoder race,
/// bin transmission, decoder race in the bin, feedback, and (mode-dependent)
/// correction.
pub fn run_feedback_round(
    channel: &SideInfoChannel,
    n: u64,
    v: f64,
    t: f64,
    fb: &FeedbackConfig,
    pool_stream: &RandomStream,
    race_stream: &RandomStream,
) -> Result<Transcript> {
    let (log2n, log2l) = fb.validate(n)?;
    let msb_bits = log2n - log2l;

    let marginal = Normal::new(0.0, channel.var_w())?;
    let pool = ProposalPool::new(*pool_stream, marginal, n);

    // Encoder side.
    let enc_model = WeightModel::new(channel.encoder_target(v), marginal);
    let u_enc = select_index_pruned_over(
        race_stream,
        0..n,
        pool.log_weight_fn(&enc_model),
        channel.encoder_log_weight_bound(v),
    )?
    .index;
    let lsb = u_enc & (fb.l - 1);

    // Decoder first round, restricted to the received bin.
    let dec_bound = channel.decoder_log_weight_bound(t);
    let dec_model = WeightModel::new(channel.decoder_proposal(t), marginal);
    let dec_race = |items: &mut dyn Iterator<Item = u64>| -> Result<Selection> {
        select_index_pruned_over(race_stream, items, pool.log_weight_fn(&dec_model), dec_bound)
    };
    let u_dec_first = dec_race(&mut (lsb..n).step_by(fb.l as usize))?.index;
    debug_assert_eq!(u_dec_first & (fb.l - 1), lsb);

    let msb = |u: u64| u >> log2l;
    let mismatch_first = u_dec_first != u_enc;

    let mut detected = false;
    let mut l2_clamped = false;
    let mut feedback_bits = 0u32;
    let mut retrans_bits = 0u32;
    let mut has_ack = true;
    let u_dec_final = match fb.mode {
        FeedbackMode::None => {
            has_ack = false;
            u_dec_first
        }
        FeedbackMode::Full => {
            feedback_bits = msb_bits;
            detected = mismatch_first; // full image: detection is exact
            if detected {
                retrans_bits = msb_bits;
            }
            u_enc
        }
        FeedbackMode::Partial { l2 } => {
            let l2_eff = l2.min(msb_bits);
            l2_clamped = l2_eff != l2;
            let shift = msb_bits - l2_eff;
            let image = |u: u64| msb(u) >> shift;
            feedback_bits = l2_eff;
            detected = image(u_dec_first) != image(u_enc);
            if detected {
                retrans_bits = l2_eff;
                // Re-decode among indices carrying the encoder's prefix.
                let prefix = image(u_enc);
                let survivors =
                    (0..(1u64 << shift)).map(|rest| (((prefix << shift) | rest) << log2l) | lsb);
                dec_race(&mut survivors.into_iter())?.index
            } else {
                u_dec_first
            }
        }
        FeedbackMode::Hashed { h } => {
            let image = |u: u64| msb_hash(msb(u), h, fb.hash_seed);
            feedback_bits = h;
            detected = image(u_dec_first) != image(u_enc);
            if detected {
                retrans_bits = msb_bits;
                u_enc
            } else {
                u_dec_first
            }
        }
    };

    let forward_bits = log2l + has_ack as u32 + retrans_bits;
    let w_dec = pool.item(u_dec_final);
    Ok(Transcript {
        u_enc,
        u_dec_first,
        u_dec_final,
        mismatch_first,
        detected,
        undetected_error: u_dec_final != u_enc,
        forward_bits,
        forward_bits_nominal: forward_bits - detected as u32,
        feedback_bits,
        w_enc: pool.item(u_enc),
        w_dec,
        v_hat: channel.fuse_estimate(w_dec, t),
        l2_clamped,
    })
}

/// Closed-form mean forward rate of the full-feedback protocol under the
/// flag-absorbing accounting: `log2 L + 1 + (log2 N - log2 L - 1) * p`,
/// where `p` is the first-round mismatch probability.
pub fn feedback_rate_formula(n: u64, l: u64, p_mismatch: f64) -> f64 {
    let (log2n, log2l) = ((n as f64).log2(), (l as f64).log2());
    log2l + 1.0 + (log2n - log2l - 1.0) * p_mismatch
}

/// Population-level upper bound on the same rate, driven by the mismatch
/// bound value `b` in place of the empirical probability:
/// `log2(2L) + log2(N / (2L)) * b`.
pub fn feedback_rate_upper_bound(n: u64, l: u64, b: f64) -> f64 {
    (2.0 * l as f64).log2() + (n as f64 / (2.0 * l as f64)).log2() * b
}

// ---------------------------------------------------------------------------
// Mismatch probability: measurement and bound
// ---------------------------------------------------------------------------

/// Empirical mismatch frequency with a 3-sigma Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mismatches: u64,
    pub trials: u64,
}

fn estimate_from_counts(mismatches: u64, trials: u64) -> MismatchEstimate {
    let (p_hat, ci_lo, ci_hi) = wilson_ci(mismatches, trials, 3.0);
    MismatchEstimate { p_hat, ci_lo, ci_hi, mismatches, trials }
}

/// Measure `Pr(U_p != U_q)` for bin-restricted decoding: fresh source pair,
/// pool, and exponentials per trial.
pub fn mismatch_probability(
    channel: &SideInfoChannel,
    n: u64,
    l: u64,
    bins: BinMode,
    trials: u64,
    base: &RandomStream,
) -> Result<MismatchEstimate> {
    FeedbackConfig { l, mode: FeedbackMode::None, hash_seed: 0 }.validate(n)?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let marginal = Normal::new(0.0, channel.var_w())?;
    let mut mismatches = 0u64;
    for trial in 0..trials {
        let ts = base.substream(trial);
        let (v, t) = channel.draw_source(&ts.substream(3), 0);
        let pool = ProposalPool::new(ts.substream(1), marginal, n);
        let race = ts.substream(2);

        let enc_model = WeightModel::new(channel.encoder_target(v), marginal);
        let u_enc = select_index_pruned_over(
            &race,
            0..n,
            pool.log_weight_fn(&enc_model),
            channel.encoder_log_weight_bound(v),
        )?
        .index;

        let dec_bound = channel.decoder_log_weight_bound(t);
        let dec_model = WeightModel::new(channel.decoder_proposal(t), marginal);
        let dec_weight = pool.log_weight_fn(&dec_model);
        let u_dec = match bins {
            BinMode::IndexLsb => {
                let lsb = u_enc & (l - 1);
                select_index_pruned_over(
                    &race,
                    (lsb..n).step_by(l as usize),
                    dec_weight,
                    dec_bound,
                )?
                .index
            }
            BinMode::Random => {
                let bin_stream = ts.substream(4);
                let bin_of = |i: u64| bin_stream.raw(i) % l;
                let target_bin = bin_of(u_enc);
                select_index_pruned_over(
                    &race,
                    (0..n).filter(|&i| bin_of(i) == target_bin),
                    dec_weight,
                    dec_bound,
                )?
                .index
            }
        };
        mismatches += (u_dec != u_enc) as u64;
    }
    Ok(estimate_from_counts(mismatches, trials))
}

/// Measure `Pr(U_p != U_q)` for block coding: `k` source coordinates per
/// trial, pool items are `k`-vectors, the encoder transmits the `log2 L`
/// LSBs of its winner (per-sample rate `log2(L)/k`), and the decoder races
/// within the bin. The total information density concentrates around
/// `k I(W;V|T)`, so at matched per-sample rate larger blocks mismatch less.
pub fn mismatch_probability_block(
    channel: &SideInfoChannel,
    k: u32,
    n: u64,
    l: u64,
    trials: u64,
    base: &RandomStream,
) -> Result<MismatchEstimate> {
    FeedbackConfig { l, mode: FeedbackMode::None, hash_seed: 0 }.validate(n)?;
    if k == 0 || trials == 0 {
        return Err(Error::invalid("need k >= 1, trials >= 1"));
    }
    let marginal = Normal::new(0.0, channel.var_w())?;
    let mut mismatches = 0u64;
    for trial in 0..trials {
        let ts = base.substream(trial);
        let src = ts.substream(3);
        let pairs: Vec<(f64, f64)> = (0..k as u64).map(|j| channel.draw_source(&src, j)).collect();
        let pool_stream = ts.substream(1);
        let race = ts.substream(2);
        let item = |i: u64, j: u64| marginal.inv_cdf(pool_stream.uniform(i * k as u64 + j));

        let mut enc_bound = 0.0;
        let mut dec_bound = 0.0;
        let mut enc_targets = Vec::with_capacity(k as usize);
        let mut dec_targets = Vec::with_capacity(k as usize);
        for &(v, t) in &pairs {
            enc_bound += channel.encoder_log_weight_bound(v);
            dec_bound += channel.decoder_log_weight_bound(t);
            enc_targets.push(channel.encoder_target(v));
            dec_targets.push(channel.decoder_proposal(t));
        }
        let lw_sum = |targets: &[Normal], i: u64| -> f64 {
            (0..k as u64)
                .map(|j| {
                    let w = item(i, j);
                    targets[j as usize].log_density(w) - marginal.log_density(w)
                })
                .sum()
        };
        let u_enc =
            select_index_pruned_over(&race, 0..n, |i| lw_sum(&enc_targets, i), enc_bound)?.index;
        let bin = u_enc & (l - 1);
        let in_bin = (0..n / l).map(|m| bin + m * l);
        let u_dec =
            select_index_pruned_over(&race, in_bin, |i| lw_sum(&dec_targets, i), dec_bound)?.index;
        mismatches += (u_dec != u_enc) as u64;
    }
    Ok(estimate_from_counts(mismatches, trials))
}

/// The per-sample integrand of the population mismatch bound:
/// `1 - (1 + (1+eps) 2^i / L)^{-1}` for total information density `i` bits.
pub fn mismatch_bound_integrand(info_density_bits: f64, l: u64, eps: f64) -> f64 {
    let x = (1.0 + eps) * (info_density_bits - (l as f64).log2()).exp2();
    if x.is_infinite() {
        1.0
    } else {
        x / (1.0 + x)
    }
}

/// Population-level mismatch bound by Monte Carlo:
/// `E[1 - (1 + (1+eps) L^{-1} 2^{sum_j i(W_j; V_j | T_j)})^{-1}]`
/// over the true joint law (`W_j` drawn from the channel itself). For block
/// coding pass `k > 1` and `L = 2^(k R)`.
///
/// The `eps` margin comes with no constructive pool-size recipe when the
/// weights are unbounded (Gaussian case); callers choose `eps` and the
/// result is labeled with it.
pub fn side_info_mismatch_bound(
    channel: &SideInfoChannel,
    k: u32,
    l: u64,
    eps: f64,
    trials: u64,
    base: &RandomStream,
) -> Result<f64> {
    if k == 0 || l == 0 || trials == 0 {
        return Err(Error::invalid("need k >= 1, l >= 1, trials >= 1"));
    }
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("eps must be >= 0, got {eps}")));
    }
    let src = base.substream(1);
    let chan = base.substream(2);
    let mut acc = 0.0;
    for trial in 0..trials {
        let mut info = 0.0;
        for j in 0..k as u64 {
            let idx = trial * k as u64 + j;
            let (v, t) = channel.draw_source(&src, idx);
            let w = channel.encoder_target(v).inv_cdf(chan.uniform(idx));
            info += channel.info_density_bits(w, v, t);
        }
        acc += mismatch_bound_integrand(info, l, eps);
    }
    Ok(acc / trials as f64)
}

/// Monte-Carlo bound on the probability of excess distortion
/// `Pr(d(V, V_hat) > D)` for the known-bin genie reconstruction:
/// `E[1 - I(d(V, fuse(W,T)) <= D) (1 + (1+eps) L^{-1} 2^i)^{-1}]`,
/// with `d` the per-coordinate mean squared error.
pub fn excess_distortion_bound(
    channel: &SideInfoChannel,
    k: u32,
    d_max: f64,
    l: u64,
    eps: f64,
    trials: u64,
    base: &RandomStream,
) -> Result<f64> {
    if k == 0 || l == 0 || trials == 0 {
        return Err(Error::invalid("need k >= 1, l >= 1, trials >= 1"));
    }
    if !(d_max >= 0.0) {
        return Err(Error::invalid(format!("distortion level must be >= 0, got {d_max}")));
    }
    let src = base.substream(1);
    let chan = base.substream(2);
    let mut acc = 0.0;
    for trial in 0..trials {
        let mut info = 0.0;
        let mut dist = 0.0;
        for j in 0..k as u64 {
            let idx = trial * k as u64 + j;
            let (v, t) = channel.draw_source(&src, idx);
            let w = channel.encoder_target(v).inv_cdf(chan.uniform(idx));
            info += channel.info_density_bits(w, v, t);
            let err = v - channel.fuse_estimate(w, t);
            dist += err * err;
        }
        dist /= k as f64;
        let within = dist <= d_max;
        acc += 1.0 - (within as u64 as f64) * (1.0 - mismatch_bound_integrand(info, l, eps));
    }
    Ok(acc / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::db_of_mse;

    const FIX: SideInfoChannel = SideInfoChannel {
        var_v: 1.0,
        var_t_given_v: 0.01,
        var_w_given_v: 0.01,
    };

    fn round(
        trial: u64,
        n: u64,
        fb: &FeedbackConfig,
    ) -> Transcript {
        let ts = RandomStream::new(2024, trial);
        let (v, t) = FIX.draw_source(&ts.substream(3), 0);
        run_feedback_round(&FIX, n, v, t, fb, &ts.substream(1), &ts.substream(2)).unwrap()
    }

    #[test]
    fn config_validation() {
        let ok = FeedbackConfig { l: 4, mode: FeedbackMode::Full, hash_seed: 0 };
        assert!(ok.validate(64).is_ok());
        for bad in [
            FeedbackConfig { l: 3, ..ok },
            FeedbackConfig { l: 128, ..ok },
            FeedbackConfig { l: 0, ..ok },
            FeedbackConfig { l: 4, mode: FeedbackMode::Partial { l2: 0 }, hash_seed: 0 },
            FeedbackConfig { l: 4, mode: FeedbackMode::Hashed { h: 0 }, hash_seed: 0 },
            FeedbackConfig { l: 4, mode: FeedbackMode::Hashed { h: 49 }, hash_seed: 0 },
        ] {
            assert!(bad.validate(64).is_err(), "{bad:?}");
        }
        assert!(ok.validate(63).is_err());
    }

    #[test]
    fn bins_equal_to_pool_size_reproduce_the_encoder_index() {
        let fb = FeedbackConfig { l: 256, mode: FeedbackMode::Full, hash_seed: 0 };
        for trial in 0..40 {
            let tr = round(trial, 256, &fb);
            assert_eq!(tr.u_dec_first, tr.u_enc);
            assert_eq!(tr.u_dec_final, tr.u_enc);
            assert!(!tr.mismatch_first && !tr.detected && !tr.undetected_error);
            assert_eq!(tr.forward_bits, 8 + 1);
            assert_eq!(tr.feedback_bits, 0);
        }
    }

    #[test]
    fn full_mode_always_ends_on_the_encoder_index() {
        let fb = FeedbackConfig { l: 2, mode: FeedbackMode::Full, hash_seed: 0 };
        let n = 1u64 << 12;
        let mut detected = 0u64;
        for trial in 0..400 {
            let tr = round(trial, n, &fb);
            assert_eq!(tr.u_dec_final, tr.u_enc);
            assert!(!tr.undetected_error);
            assert_eq!(tr.detected, tr.mismatch_first);
            assert_eq!(tr.u_dec_first & 1, tr.u_enc & 1, "bin consistency");
            let expect = 1 + 1 + if tr.detected { 11 } else { 0 };
            assert_eq!(tr.forward_bits, expect);
            assert_eq!(tr.forward_bits_nominal, tr.forward_bits - tr.detected as u32);
            assert_eq!(tr.feedback_bits, 11);
            detected += tr.detected as u64;
        }
        assert!(detected > 20, "fixture should mismatch sometimes, got {detected}");
    }

    #[test]
    fn match_events_are_monotone_in_bin_count_per_seed() {
        // Bins nest as L doubles, so a first-round match at L implies one at
        // 2L on the same randomness.
        let n = 1u64 << 10;
        for trial in 0..200 {
            let mut prev_match = false;
            for log2l in 0..=10 {
                let fb = FeedbackConfig {
                    l: 1 << log2l,
                    mode: FeedbackMode::None,
                    hash_seed: 0,
                };
                let tr = round(trial, n, &fb);
                let matched = !tr.mismatch_first;
                assert!(
                    matched || !prev_match,
                    "trial {trial}: match lost when L grew to 2^{log2l}"
                );
                prev_match = matched;
            }
        }
    }

    #[test]
    fn partial_mode_respects_received_bits_and_clamps() {
        let n = 1u64 << 10; // msb_bits = 9 at L=2
        let fb = FeedbackConfig { l: 2, mode: FeedbackMode::Partial { l2: 3 }, hash_seed: 0 };
        let mut detected = 0u64;
        let mut undetected = 0u64;
        for trial in 0..600 {
            let tr = round(trial, n, &fb);
            assert!(!tr.l2_clamped);
            assert_eq!(tr.u_dec_final & 1, tr.u_enc & 1, "bin consistency");
            if tr.detected {
                detected += 1;
                // Final candidate carries the encoder's 3-bit MSB prefix.
                assert_eq!(tr.u_dec_final >> 1 >> 6, tr.u_enc >> 1 >> 6);
                assert_eq!(tr.forward_bits, 1 + 1 + 3);
            } else {
                assert_eq!(tr.u_dec_final, tr.u_dec_first);
                assert_eq!(tr.forward_bits, 1 + 1);
            }
            undetected += tr.undetected_error as u64;
            assert_eq!(tr.feedback_bits, 3);
        }
        assert!(detected > 0);
        assert!(undetected < detected, "3 extra bits should fix most mismatches");

        // l2 beyond the available MSB width clamps to full detection.
        let fb_clamp =
            FeedbackConfig { l: 2, mode: FeedbackMode::Partial { l2: 16 }, hash_seed: 0 };
        for trial in 0..200 {
            let tr = round(trial, n, &fb_clamp);
            assert!(tr.l2_clamped);
            assert_eq!(tr.u_dec_final, tr.u_enc);
            assert!(!tr.undetected_error);
        }
    }

    #[test]
    fn hashed_mode_errs_exactly_on_collisions() {
        let n = 1u64 << 10;
        let fb = FeedbackConfig { l: 2, mode: FeedbackMode::Hashed { h: 1 }, hash_seed: 7 };
        let (mut mism, mut undet) = (0u64, 0u64);
        for trial in 0..800 {
            let tr = round(trial, n, &fb);
            let img = |u: u64| msb_hash(u >> 1, 1, fb.hash_seed);
            assert_eq!(tr.detected, img(tr.u_dec_first) != img(tr.u_enc));
            if tr.detected {
                assert_eq!(tr.u_dec_final, tr.u_enc);
                assert!(!tr.undetected_error);
            } else {
                assert_eq!(tr.u_dec_final, tr.u_dec_first);
                assert_eq!(tr.undetected_error, tr.mismatch_first);
            }
            mism += tr.mismatch_first as u64;
            undet += tr.undetected_error as u64;
        }
        // A 1-bit hash catches about half the mismatches.
        assert!(undet > 0 && undet < mism, "undetected {undet} of {mism}");
    }

    #[test]
    fn hash_collision_rate_is_two_to_minus_h() {
        let s = RandomStream::new(99, 3);
        for h in [1u32, 2, 4, 8] {
            let trials = 40_000u64;
            let mut coll = 0u64;
            for i in 0..trials {
                let a = s.raw(2 * i);
                let mut b = s.raw(2 * i + 1);
                if a == b {
                    b ^= 1;
                }
                coll += (msb_hash(a, h, 5) == msb_hash(b, h, 5)) as u64;
            }
            let p = 0.5f64.powi(h as i32);
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let p_hat = coll as f64 / trials as f64;
            assert!((p_hat - p).abs() < 4.0 * sigma, "h={h}: {p_hat} vs {p}");
        }
        assert_ne!(msb_hash(12345, 8, 1), msb_hash(12345, 8, 2));
        assert_eq!(msb_hash(12345, 8, 1), msb_hash(12345, 8, 1));
    }

    #[test]
    fn rate_identity_is_exact_under_nominal_accounting() {
        let n = 1u64 << 10;
        let fb = FeedbackConfig { l: 4, mode: FeedbackMode::Full, hash_seed: 0 };
        let trials = 500u64;
        let (mut bits, mut mism) = (0u64, 0u64);
        for trial in 0..trials {
            let tr = round(trial, n, &fb);
            bits += tr.forward_bits_nominal as u64;
            mism += tr.mismatch_first as u64;
        }
        let mean = bits as f64 / trials as f64;
        let formula = feedback_rate_formula(n, fb.l, mism as f64 / trials as f64);
        assert!((mean - formula).abs() < 1e-9, "{mean} vs {formula}");
        // Actual protocol bits exceed the nominal accounting by exactly the
        // mismatch frequency.
        let actual: f64 = (0..trials)
            .map(|t| round(t, n, &fb).forward_bits as f64)
            .sum::<f64>()
            / trials as f64;
        assert!((actual - mean - mism as f64 / trials as f64).abs() < 1e-9);
    }

    #[test]
    fn mismatch_decreases_with_bins_and_stays_under_the_bound() {
        let n = 1u64 << 10;
        let base = RandomStream::new(31, 0);
        let mut prev = 1.0f64;
        for l in [2u64, 8, 32] {
            let est = mismatch_probability(&FIX, n, l, BinMode::IndexLsb, 1500, &base).unwrap();
            assert!(est.p_hat <= prev + 0.02, "L={l}: {} after {prev}", est.p_hat);
            prev = est.p_hat;
            let bound =
                side_info_mismatch_bound(&FIX, 1, l, 0.1, 20_000, &base.substream(9)).unwrap();
            assert!(
                est.ci_lo <= bound,
                "L={l}: mismatch {} (ci lo {}) exceeds bound {bound}",
                est.p_hat,
                est.ci_lo
            );
        }
    }

    #[test]
    fn random_bins_track_lsb_bins() {
        let n = 1u64 << 10;
        let base = RandomStream::new(77, 0);
        let lsb = mismatch_probability(&FIX, n, 8, BinMode::IndexLsb, 1200, &base).unwrap();
        let rnd = mismatch_probability(&FIX, n, 8, BinMode::Random, 1200, &base).unwrap();
        assert!(
            (lsb.p_hat - rnd.p_hat).abs() < 0.06,
            "lsb {} vs random {}",
            lsb.p_hat,
            rnd.p_hat
        );
    }

    #[test]
    fn bound_integrand_pins() {
        assert!((mismatch_bound_integrand(0.0, 1, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(mismatch_bound_integrand(f64::INFINITY, 4, 0.1), 1.0);
        // L -> infinity drives the bound to zero.
        let base = RandomStream::new(8, 8);
        let b = side_info_mismatch_bound(&FIX, 1, 1 << 40, 0.1, 5_000, &base).unwrap();
        assert!(b < 1e-3, "bound {b}");
    }

    #[test]
    fn excess_distortion_limits() {
        let base = RandomStream::new(4, 4);
        let p4 = side_info_mismatch_bound(&FIX, 1, 8, 0.1, 10_000, &base).unwrap();
        let loose = excess_distortion_bound(&FIX, 1, f64::INFINITY, 8, 0.1, 10_000, &base).unwrap();
        assert!((loose - p4).abs() < 1e-12, "D=inf should reduce to the mismatch bound");
        let zero = excess_distortion_bound(&FIX, 1, 0.0, 8, 0.1, 2_000, &base).unwrap();
        assert!((zero - 1.0).abs() < 1e-12);
        // Empirical excess-distortion frequency is dominated by the bound.
        let d = 4.0 * FIX.var_w_given_v;
        let bound = excess_distortion_bound(&FIX, 1, d, 8, 0.1, 10_000, &base).unwrap();
        let chan = base.substream(77);
        let src = base.substream(78);
        let trials = 10_000u64;
        let mut exceed = 0u64;
        for i in 0..trials {
            let (v, t) = FIX.draw_source(&src, i);
            let w = FIX.encoder_target(v).inv_cdf(chan.uniform(i));
            let err = v - FIX.fuse_estimate(w, t);
            exceed += (err * err > d) as u64;
        }
        let p_hat = exceed as f64 / trials as f64;
        assert!(p_hat <= bound, "excess {p_hat} vs bound {bound}");
    }

    #[test]
    fn block_coding_beats_scalar_coding_at_matched_rate() {
        // Per-sample bin rate 2 bits, above the ~0.5-bit conditional
        // information, same pool size: the 5-sample total information density
        // concentrates well below 10 bits, so the larger block mismatches
        // less despite transmitting the same bits per sample.
        let n = 1u64 << 12;
        let base = RandomStream::new(6, 1);
        let scalar = mismatch_probability_block(&FIX, 1, n, 1 << 2, 900, &base).unwrap();
        let block = mismatch_probability_block(&FIX, 5, n, 1 << 10, 900, &base).unwrap();
        assert!(
            block.p_hat <= scalar.p_hat - 0.05,
            "block {} vs scalar {}",
            block.p_hat,
            scalar.p_hat
        );
    }

    #[test]
    fn block_estimator_with_one_bin_matches_unbinned_full_race() {
        // l = 1 means the decoder sweeps the whole pool: pure common
        // randomness, no forward bits.
        let base = RandomStream::new(61, 0);
        let est = mismatch_probability_block(&FIX, 2, 1 << 6, 1, 400, &base).unwrap();
        assert!(est.p_hat > 0.0 && est.p_hat < 1.0, "degenerate estimate {}", est.p_hat);
    }

    #[test]
    fn full_feedback_reconstruction_reaches_the_fusion_floor() {
        let n = 1u64 << 12;
        let fb = FeedbackConfig { l: 2, mode: FeedbackMode::Full, hash_seed: 0 };
        let trials = 1500u64;
        let mut mse = 0.0;
        for trial in 0..trials {
            let ts = RandomStream::new(555, trial);
            let (v, t) = FIX.draw_source(&ts.substream(3), 0);
            let tr =
                run_feedback_round(&FIX, n, v, t, &fb, &ts.substream(1), &ts.substream(2)).unwrap();
            let e = v - tr.v_hat;
            mse += e * e;
        }
        mse /= trials as f64;
        let floor = FIX.fused_mmse();
        assert!(mse > 0.8 * floor, "mse {mse} below the information floor {floor}");
        assert!(
            db_of_mse(mse) < db_of_mse(floor) + 2.0,
            "mse {mse} ({} dB) too far above floor {floor} ({} dB)",
            db_of_mse(mse),
            db_of_mse(floor)
        );
    }
}
