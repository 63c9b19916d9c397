//! Rank coding for the race winner.
//!
//! Transmitting the *rank* `K` of the winning exponential (1 = smallest
//! `S_i` in the pool) instead of the raw index concentrates the message on
//! small integers: under importance weights the winner's exponential is
//! nearly the smallest, and `E[log2 K]` is within a constant of the
//! divergence the pool has to cover. This module provides
//!
//! * prefix-free universal integer coders ([`IndexCoder`]) for the rank —
//!   a power-law (Zipf) Shannon–Fano–Elias code and the Elias delta code;
//! * one-shot [`encode`]/[`decode`] over a shared pool;
//! * [`RateStats`] summarizing measured rate;
//! * the finite-pool rate bounds ([`mean_log_rank_bound`],
//!   [`rank_entropy_bound`], concentration variants) and the
//!   divergence-correction constant they share;
//! * output-fidelity controls: [`pool_size_for_fidelity`] (the smallest
//!   pool size with a guaranteed total-variation bound) and
//!   [`proxy_tv_estimate`] (a two-sample histogram TV estimate with a
//!   bootstrap confidence interval).

use crate::errors::{Error, Result};
use crate::model::{Density, QuantileFn, WeightModel};
use crate::pool::ProposalPool;
use crate::race::{index_with_rank, rank_of, select_index};
use crate::special::{plugin_entropy_bits, zeta};
use crate::stream::RandomStream;

/// Extra bits the mean rank code pays over the pool divergence:
/// `1 + log2(e)/e ≈ 1.5308`.
pub const RANK_MEAN_SLACK_BITS: f64 =
    1.0 + std::f64::consts::LOG2_E / std::f64::consts::E;

// ---------------------------------------------------------------------------
// Bit I/O (MSB-first)
// ---------------------------------------------------------------------------

/// Append-only bit sink, most significant bit of each byte first.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len_bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push_bit(&mut self, bit: bool) {
        let pos = self.len_bits & 7;
        if pos == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> pos;
        }
        self.len_bits += 1;
    }

    /// Write the low `n` bits of `v`, most significant first.
    pub fn push_bits(&mut self, v: u64, n: u32) {
        debug_assert!(n <= 64);
        for i in (0..n).rev() {
            self.push_bit((v >> i) & 1 == 1);
        }
    }

    pub fn len_bits(&self) -> usize {
        self.len_bits
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

/// Cursor over a bit string produced by [`BitWriter`].
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len_bits: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], len_bits: usize) -> Self {
        debug_assert!(len_bits <= bytes.len() * 8);
        BitReader {
            bytes,
            len_bits,
            pos: 0,
        }
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.len_bits {
            return Err(Error::TruncatedCode(format!(
                "needed bit {} of {}",
                self.pos + 1,
                self.len_bits
            )));
        }
        let byte = self.bytes[self.pos >> 3];
        let bit = (byte >> (7 - (self.pos & 7))) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn bits_consumed(&self) -> usize {
        self.pos
    }

    pub fn bits_remaining(&self) -> usize {
        self.len_bits - self.pos
    }
}

// ---------------------------------------------------------------------------
// Universal integer coders
// ---------------------------------------------------------------------------

/// Largest rank the power-law coder tabulates. Ranks are tiny with
/// overwhelming probability; anything above this is a configuration error.
const ZIPF_TABLE_CAP: u64 = 1 << 17;

/// Prefix-free coder for positive integers.
#[derive(Debug, Clone)]
pub enum IndexCoder {
    /// Shannon–Fano–Elias code for the power law `p(k) ∝ k^-exponent`
    /// (normalized by Riemann zeta). Code length
    /// `ceil(exponent*log2 k + log2 zeta(exponent)) + 1`.
    Zipf {
        exponent: f64,
        /// `cum[k]` = total mass of ranks `1..=k` (index 0 unused).
        cum: Vec<f64>,
    },
    /// Elias delta: `floor(log2 k) + 2 floor(log2(floor(log2 k)+1)) + 1`
    /// bits, no tables.
    EliasDelta,
}

impl IndexCoder {
    pub fn zipf(exponent: f64) -> Result<Self> {
        if !(exponent > 1.0) || !exponent.is_finite() {
            return Err(Error::invalid(format!(
                "power-law exponent must be > 1, got {exponent}"
            )));
        }
        let z = zeta(exponent);
        let mut cum = Vec::with_capacity(ZIPF_TABLE_CAP as usize + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for k in 1..=ZIPF_TABLE_CAP {
            acc += (k as f64).powf(-exponent) / z;
            cum.push(acc);
        }
        Ok(IndexCoder::Zipf { exponent, cum })
    }

    /// Power-law exponent tuned for an anticipated rate `r_hat` bits: the
    /// mean code length of the resulting coder stays within a constant of
    /// `r_hat` when the true mean of `log2 K` is near `r_hat`.
    pub fn zipf_for_rate(r_hat: f64) -> Result<Self> {
        if !(r_hat >= 0.0) {
            return Err(Error::invalid(format!("rate estimate must be >= 0, got {r_hat}")));
        }
        IndexCoder::zipf(1.0 + 1.0 / (r_hat + RANK_MEAN_SLACK_BITS))
    }

    pub fn elias_delta() -> Self {
        IndexCoder::EliasDelta
    }

    /// Codeword length in bits for rank `k >= 1`.
    pub fn code_len_bits(&self, k: u64) -> Result<u64> {
        if k == 0 {
            return Err(Error::invalid("ranks are 1-based"));
        }
        match self {
            IndexCoder::Zipf { exponent, .. } => {
                let bits = exponent * (k as f64).log2() + zeta(*exponent).log2();
                Ok(bits.ceil() as u64 + 1)
            }
            IndexCoder::EliasDelta => {
                let lg = k.ilog2() as u64;
                let llg = (lg + 1).ilog2() as u64;
                Ok(lg + 2 * llg + 1)
            }
        }
    }

    /// Append the codeword for `k` to `out`.
    pub fn encode_into(&self, k: u64, out: &mut BitWriter) -> Result<()> {
        match self {
            IndexCoder::Zipf { cum, .. } => {
                if k as usize >= cum.len() {
                    return Err(Error::RankOutOfRange(k, cum.len() as u64 - 1));
                }
                let len = self.code_len_bits(k)? as u32;
                if len > 63 {
                    return Err(Error::RankOutOfRange(k, ZIPF_TABLE_CAP));
                }
                // Shannon–Fano–Elias: truncate the interval midpoint
                // F(k) = cum[k-1] + p_k/2 to `len` bits.
                let p = cum[k as usize] - cum[k as usize - 1];
                let f = cum[k as usize - 1] + 0.5 * p;
                let word = (f * (1u64 << len) as f64).floor() as u64;
                out.push_bits(word, len);
                Ok(())
            }
            IndexCoder::EliasDelta => {
                let n = 64 - k.leading_zeros(); // bit length of k
                let nn = 32 - n.leading_zeros(); // bit length of n
                out.push_bits(0, nn - 1); // nn-1 zeros
                out.push_bits(n as u64, nn); // n, MSB (a one) first
                out.push_bits(k & !(1u64 << (n - 1)), n - 1); // k minus its MSB
                Ok(())
            }
        }
    }

    /// Read one codeword.
    pub fn decode_from(&self, reader: &mut BitReader<'_>) -> Result<u64> {
        match self {
            IndexCoder::Zipf { cum, .. } => {
                // Codeword lengths are nondecreasing in k, so read bits until
                // the prefix matches the truncated midpoint of some rank of
                // exactly that length.
                let mut v: u64 = 0;
                let mut len: u32 = 0;
                let mut k_lo: u64 = 1;
                loop {
                    v = (v << 1) | self.read_checked(reader)? as u64;
                    len += 1;
                    if len > 63 {
                        return Err(Error::TruncatedCode(
                            "power-law codeword exceeds 63 bits".into(),
                        ));
                    }
                    // Ranks whose codeword length equals `len` form the range
                    // (k_lo-1, k_hi]; binary-search the truncated midpoints.
                    let k_hi = self.max_rank_with_len(len as u64, cum.len() as u64 - 1)?;
                    if k_hi < k_lo {
                        continue;
                    }
                    let scale = (1u64 << len) as f64;
                    let (mut lo, mut hi) = (k_lo, k_hi);
                    while lo <= hi {
                        let mid = lo + (hi - lo) / 2;
                        let p = cum[mid as usize] - cum[mid as usize - 1];
                        let word = ((cum[mid as usize - 1] + 0.5 * p) * scale).floor() as u64;
                        match word.cmp(&v) {
                            std::cmp::Ordering::Equal => return Ok(mid),
                            std::cmp::Ordering::Less => lo = mid + 1,
                            std::cmp::Ordering::Greater => {
                                if mid == k_lo {
                                    break;
                                }
                                hi = mid - 1;
                            }
                        }
                    }
                    k_lo = k_hi + 1;
                }
            }
            IndexCoder::EliasDelta => {
                let mut zeros = 0u32;
                while !self.read_checked(reader)? {
                    zeros += 1;
                    if zeros > 63 {
                        return Err(Error::TruncatedCode("delta codeword length field".into()));
                    }
                }
                let n = (1u64 << zeros) | reader.read_bits(zeros)?;
                if n == 0 || n > 64 {
                    return Err(Error::TruncatedCode(format!("delta mantissa length {n}")));
                }
                let rest = reader.read_bits(n as u32 - 1)?;
                Ok((1u64 << (n - 1)) | rest)
            }
        }
    }

    fn read_checked(&self, reader: &mut BitReader<'_>) -> Result<bool> {
        reader.read_bit()
    }

    /// Largest rank (<= cap) whose codeword is at most `len` bits.
    fn max_rank_with_len(&self, len: u64, cap: u64) -> Result<u64> {
        if self.code_len_bits(1)? > len {
            return Ok(0);
        }
        let (mut lo, mut hi) = (1u64, cap);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if self.code_len_bits(mid)? <= len {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(lo)
    }
}

// ---------------------------------------------------------------------------
// One-shot channel simulation
// ---------------------------------------------------------------------------

/// Everything the sender learns from one encode.
#[derive(Debug, Clone)]
pub struct Encoded {
    /// Rank of the winning exponential (the transmitted integer).
    pub rank: u64,
    /// Winning pool index.
    pub index: u64,
    /// The simulated channel output `Y_U`.
    pub y: f64,
    /// Entropy-coded rank.
    pub bits: Vec<u8>,
    pub bit_len: usize,
}

/// Run the race, rank the winner, and entropy-code the rank.
///
/// `race` carries the shared exponentials; the pool carries the shared
/// proposals. A receiver holding the same two streams decodes with
/// [`decode`].
pub fn encode<D, T, P>(
    pool: &ProposalPool<D>,
    model: &WeightModel<T, P>,
    race: &RandomStream,
    coder: &IndexCoder,
) -> Result<Encoded>
where
    D: QuantileFn,
    T: Density,
    P: Density,
{
    let sel = select_index(race, pool.n, pool.log_weight_fn(model))?;
    let rank = rank_of(race, pool.n, sel.index);
    let mut w = BitWriter::new();
    coder.encode_into(rank, &mut w)?;
    Ok(Encoded {
        rank,
        index: sel.index,
        y: pool.item(sel.index),
        bit_len: w.len_bits(),
        bits: w.into_bytes(),
    })
}

/// Receiver side: decode the rank, then locate the pool item holding the
/// rank-th smallest shared exponential.
pub fn decode<D>(
    bits: &[u8],
    bit_len: usize,
    coder: &IndexCoder,
    pool: &ProposalPool<D>,
    race: &RandomStream,
) -> Result<Encoded>
where
    D: QuantileFn,
{
    let mut r = BitReader::new(bits, bit_len);
    let rank = coder.decode_from(&mut r)?;
    let index = index_with_rank(race, pool.n, rank)?;
    Ok(Encoded {
        rank,
        index,
        y: pool.item(index),
        bits: bits.to_vec(),
        bit_len: r.bits_consumed(),
    })
}

// ---------------------------------------------------------------------------
// Rate statistics and bounds
// ---------------------------------------------------------------------------

/// Empirical rate summary over a sample of transmitted ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RateStats {
    pub trials: u64,
    pub mean_log2_rank: f64,
    /// Mean codeword length under the coder that produced the sample.
    pub mean_code_bits: f64,
    /// Plug-in entropy of the rank histogram.
    pub entropy_bits: f64,
    pub max_rank: u64,
}

impl RateStats {
    pub fn from_ranks(ranks: &[u64], coder: &IndexCoder) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::invalid("rate stats need at least one rank"));
        }
        let mut counts = std::collections::HashMap::new();
        let mut sum_log = 0.0;
        let mut sum_bits = 0.0;
        let mut max_rank = 0u64;
        for &k in ranks {
            sum_log += (k as f64).log2();
            sum_bits += coder.code_len_bits(k)? as f64;
            *counts.entry(k).or_insert(0u64) += 1;
            max_rank = max_rank.max(k);
        }
        let hist: Vec<u64> = counts.values().copied().collect();
        Ok(RateStats {
            trials: ranks.len() as u64,
            mean_log2_rank: sum_log / ranks.len() as f64,
            mean_code_bits: sum_bits / ranks.len() as f64,
            entropy_bits: plugin_entropy_bits(&hist),
            max_rank,
        })
    }
}

/// Mean-rank bound: `E[log2 K] <= mean divergence(weights || uniform) +
/// 1.5308 bits`, where the divergence is averaged over pools (and over the
/// source, if the caller marginalizes).
pub fn mean_log_rank_bound(mean_divergence_bits: f64) -> f64 {
    mean_divergence_bits + RANK_MEAN_SLACK_BITS
}

/// The finite-pool divergence correction `Delta(x) = 6(w-1)log2 w + alpha`,
/// with `alpha = 2(w-1) + 2 sqrt(w-1) sqrt(d3 - d2^2) + 4 w d2`.
///
/// `d2` and `d3` are the second and third ratio moments **of the proposal
/// against the target** (`E_prop[(prop/target)^(n-1)]`); they are frequently
/// infinite, in which case the correction — and any bound built on it — is
/// `+inf` and the flag on the result should be surfaced, not hidden.
pub fn pool_divergence_correction(omega: f64, d2_rev: f64, d3_rev: f64) -> f64 {
    if !(omega >= 1.0) {
        return f64::NAN;
    }
    if !d2_rev.is_finite() || !d3_rev.is_finite() {
        return f64::INFINITY;
    }
    let alpha = 2.0 * (omega - 1.0)
        + 2.0 * (omega - 1.0).sqrt() * (d3_rev - d2_rev * d2_rev).max(0.0).sqrt()
        + 4.0 * omega * d2_rev;
    6.0 * (omega - 1.0) * omega.log2() + alpha
}

/// Entropy bound `H(K) <= I' + log2(I' + 1) + 4` with
/// `I' = mutual_info_bits + delta/n`.
pub fn rank_entropy_bound(mutual_info_bits: f64, delta: f64, n: u64) -> f64 {
    let i = mutual_info_bits + delta / n as f64;
    i + (i + 1.0).log2() + 4.0
}

/// Entropy of any positive integer variable with `E[log2 K] = m`:
/// `H(K) <= m + log2(m + 1) + 1`.
pub fn max_entropy_of_mean_log(mean_log2_rank: f64) -> f64 {
    mean_log2_rank + (mean_log2_rank + 1.0).log2() + 1.0
}

/// Concentration (deviation-based) variant of the mean-rank bound:
/// `E[log2 K] <= a_N I + b_N`.
pub fn mean_log_rank_bound_concentration(
    mutual_info_bits: f64,
    n: u64,
    omega: f64,
    eps: f64,
) -> Result<f64> {
    let (a, b) = concentration_coeffs(n, omega, eps)?;
    Ok(a * mutual_info_bits + b)
}

/// Concentration variant of the entropy bound:
/// `H(K) <= a_N I + b_N + log2(a_N I + b_N + 1) + 4`.
pub fn rank_entropy_bound_concentration(
    mutual_info_bits: f64,
    n: u64,
    omega: f64,
    eps: f64,
) -> Result<f64> {
    let (a, b) = concentration_coeffs(n, omega, eps)?;
    let ib = a * mutual_info_bits + b;
    Ok(ib + (ib + 1.0).log2() + 4.0)
}

/// `a_N = N/((N-1)(1-eps))`,
/// `b_N = a_N log2 a_N + N log2(N) exp(-2(N-1) eps^2 / w^2)`.
fn concentration_coeffs(n: u64, omega: f64, eps: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid("concentration bound needs n >= 2"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must be in (0,1), got {eps}")));
    }
    if !(omega >= 1.0) {
        return Err(Error::invalid(format!("weight bound must be >= 1, got {omega}")));
    }
    let nf = n as f64;
    let a = nf / ((nf - 1.0) * (1.0 - eps));
    let tail = nf * nf.log2() * (-2.0 * (nf - 1.0) * eps * eps / (omega * omega)).exp();
    Ok((a, a * a.log2() + tail))
}

// ---------------------------------------------------------------------------
// Output fidelity
// ---------------------------------------------------------------------------

/// Result of [`pool_size_for_fidelity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolSizeBound {
    /// Smallest admissible pool size `N = 2^(divergence + t*)`.
    pub n: u64,
    /// The selected exponent offset `t*`.
    pub t_star: f64,
    /// Total-variation guarantee that comes with it: `TV <= 4 eps`.
    pub tv_guarantee: f64,
}

/// Smallest pool size `N = 2^(D + t)` whose simulated output is within
/// `4*eps` of the target conditional in total variation, for a channel with
/// divergence `d_kl_bits` (bits) and bounded weight `omega`.
///
/// `t` is found by bisecting the decreasing excess function
/// `f(t) = 2^(-t/8) + sqrt(2) exp(-(t/2 - log2(e)/e)^2 / (4 B^2))`,
/// `B = log2 omega`, over `t >= 2 log2(e)/e`.
pub fn pool_size_for_fidelity(d_kl_bits: f64, omega: f64, eps: f64) -> Result<PoolSizeBound> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must be in (0,1), got {eps}")));
    }
    if !(omega >= 1.0) || !omega.is_finite() {
        return Err(Error::invalid(format!(
            "fidelity rule needs a finite weight bound >= 1, got {omega}"
        )));
    }
    if !(d_kl_bits >= 0.0) || !d_kl_bits.is_finite() {
        return Err(Error::invalid(format!(
            "divergence must be finite and >= 0, got {d_kl_bits}"
        )));
    }
    let c = std::f64::consts::LOG2_E / std::f64::consts::E; // log2(e)/e
    let b = omega.log2();
    let excess = |t: f64| -> f64 {
        let first = (-t / 8.0).exp2();
        let second = if b > 0.0 {
            let z = t / 2.0 - c;
            std::f64::consts::SQRT_2 * (-(z * z) / (4.0 * b * b)).exp()
        } else {
            0.0
        };
        first + second
    };
    let t_min = 2.0 * c;
    let t_max = 2000.0;
    if excess(t_max) > eps {
        return Err(Error::invalid(format!(
            "fidelity eps={eps} unattainable for weight bound {omega}"
        )));
    }
    let mut t_star = t_max;
    if excess(t_min) <= eps {
        t_star = t_min;
    } else {
        let (mut lo, mut hi) = (t_min, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        t_star = t_star.min(hi);
    }
    let exponent = d_kl_bits + t_star;
    if exponent > 62.0 {
        return Err(Error::invalid(format!(
            "required pool size 2^{exponent:.1} exceeds addressable range"
        )));
    }
    Ok(PoolSizeBound {
        n: exponent.exp2().ceil() as u64,
        t_star,
        tv_guarantee: 4.0 * eps,
    })
}

/// Histogram total-variation estimate between simulated outputs and the
/// target conditional, with a percentile-bootstrap confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvEstimate {
    pub tv: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bins: usize,
    pub samples: usize,
}

/// Default bin count for [`proxy_tv_estimate`].
pub const DEFAULT_TV_BINS: usize = 128;

/// Two-sample plug-in TV on `bins` equal-probability bins of the target:
/// the simulated sample is compared against an equally sized i.i.d. sample
/// from the target itself, so estimator bias largely cancels in the
/// comparison. `bootstrap` resamples give a 95% percentile interval.
///
/// The statistic has a positive floor of roughly `sqrt(2 bins / (pi n))`
/// even when the two laws coincide; choose `bins` small enough for the
/// sample size to keep that floor below the effect being measured.
pub fn proxy_tv_estimate<T>(
    sim: &[f64],
    target: &T,
    bins: usize,
    bootstrap: usize,
    stream: &RandomStream,
) -> Result<TvEstimate>
where
    T: QuantileFn,
{
    if sim.is_empty() {
        return Err(Error::invalid("TV estimate needs simulated samples"));
    }
    if bins < 2 {
        return Err(Error::invalid("TV estimate needs >= 2 bins"));
    }
    let n = sim.len();
    let edges: Vec<f64> = (1..bins)
        .map(|i| target.inv_cdf(i as f64 / bins as f64))
        .collect();
    let bin_of = |y: f64| edges.partition_point(|&e| e < y);

    let ref_stream = stream.substream(0xcafe);
    let sim_bins: Vec<u32> = sim.iter().map(|&y| bin_of(y) as u32).collect();
    let ref_bins: Vec<u32> = (0..n)
        .map(|i| bin_of(target.inv_cdf(ref_stream.uniform(i as u64))) as u32)
        .collect();

    let tv_of = |sim_sel: &dyn Fn(usize) -> u32, ref_sel: &dyn Fn(usize) -> u32| -> f64 {
        let mut counts = vec![0i64; bins];
        for i in 0..n {
            counts[sim_sel(i) as usize] += 1;
            counts[ref_sel(i) as usize] -= 1;
        }
        counts.iter().map(|&c| c.unsigned_abs() as f64).sum::<f64>() / (2.0 * n as f64)
    };

    let tv = tv_of(&|i| sim_bins[i], &|i| ref_bins[i]);

    let mut boots = Vec::with_capacity(bootstrap);
    let boot_stream = stream.substream(0xb007);
    for b in 0..bootstrap {
        let s = boot_stream.substream(b as u64);
        let draw = |tag: u64, i: usize| -> usize {
            (s.raw(tag.wrapping_mul(0x1000).wrapping_add(i as u64)) % n as u64) as usize
        };
        boots.push(tv_of(
            &|i| sim_bins[draw(1, i)],
            &|i| ref_bins[draw(2, i)],
        ));
    }
    let (ci_lo, ci_hi) = if bootstrap >= 20 {
        boots.sort_by(f64::total_cmp);
        let lo_idx = ((bootstrap as f64) * 0.025).floor() as usize;
        let hi_idx = (((bootstrap as f64) * 0.975).ceil() as usize).min(bootstrap - 1);
        (boots[lo_idx], boots[hi_idx])
    } else {
        (tv, tv)
    };
    Ok(TvEstimate {
        tv,
        ci_lo,
        ci_hi,
        bins,
        samples: n,
    })
}
