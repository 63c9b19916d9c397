//! The exponential race.
//!
//! Item `i` holds an Exponential(1) variate `S_i` drawn from a shared
//! counter-based stream; under log-weights `lw_i` the race selects
//!
//! ```text
//! U = argmin_i  S_i / exp(lw_i)   =  argmin_i  ln S_i - lw_i
//! ```
//!
//! which picks index `i` with probability proportional to `exp(lw_i)`
//! (the Gumbel-max trick, phrased with exponentials). Ties go to the
//! smaller index. A log-weight of `-inf` marks an item that can never win;
//! if every item is unwinnable the race is degenerate and errors out.
//!
//! Two scan strategies produce identical winners:
//!
//! * [`select_index`] — evaluate every item.
//! * [`select_index_pruned`] — for models with a known global bound on the
//!   weight, skip item `i` unless its raw 53-bit draw proves
//!   `S_i < m * w_max` (with `m` the incumbent minimum ratio). The test is a
//!   single integer comparison, so pools of size `2^27`+ race in fractions
//!   of a second while only `O(w_max * ln N)` items are evaluated exactly.

use crate::errors::{Error, Result};
use crate::special::log_sum_exp;
use crate::stream::RandomStream;

/// Outcome of a race.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    /// Winning item (0-based counter into the pool).
    pub index: u64,
    /// The winner's exponential variate `S_U`.
    pub exp: f64,
    /// Winning score `ln S_U - lw_U` (natural log of the minimized ratio).
    pub score_ln: f64,
    /// Number of items whose weight was actually evaluated.
    pub evals: u64,
}

#[inline(always)]
fn check_log_weight(lw: f64, i: u64) -> Result<()> {
    // -inf is a legal "never select"; NaN and +inf are caller bugs.
    if lw.is_nan() || lw == f64::INFINITY {
        return Err(Error::invalid(format!(
            "log-weight at index {i} is {lw}; must be finite or -inf"
        )));
    }
    Ok(())
}

/// Full-scan race over items `0..n`.
///
/// `log_weight_of(i)` must be a pure function of `i`. The same
/// `(race, n, log_weight_of)` always returns the same winner bit-for-bit.
pub fn select_index<F>(race: &RandomStream, n: u64, log_weight_of: F) -> Result<Selection>
where
    F: Fn(u64) -> f64,
{
    select_index_over(race, 0..n, log_weight_of)
}

/// Full-scan race over an arbitrary subset of items, e.g. one bin of a
/// binned pool. `items` must yield strictly increasing indices so that ties
/// keep resolving toward the smaller index.
pub fn select_index_over<F, I>(race: &RandomStream, items: I, log_weight_of: F) -> Result<Selection>
where
    F: Fn(u64) -> f64,
    I: IntoIterator<Item = u64>,
{
    let mut best: Option<Selection> = None;
    let mut seen: u64 = 0;
    for i in items {
        seen += 1;
        let lw = log_weight_of(i);
        check_log_weight(lw, i)?;
        if lw == f64::NEG_INFINITY {
            continue;
        }
        let s = race.exp_draw(i);
        let score = s.ln() - lw;
        if best.map_or(true, |b| score < b.score_ln) {
            best = Some(Selection {
                index: i,
                exp: s,
                score_ln: score,
                evals: 0,
            });
        }
    }
    if seen == 0 {
        return Err(Error::DegenerateWeights("empty pool".into()));
    }
    match best {
        Some(mut sel) => {
            sel.evals = seen;
            Ok(sel)
        }
        None => Err(Error::DegenerateWeights(format!(
            "all {seen} log-weights are -inf"
        ))),
    }
}

/// Slack (in 53-bit integer units) subtracted from the pruning threshold so
/// that accumulated floating-point rounding can never skip an item the full
/// scan would have selected. Costs a handful of extra exact evaluations per
/// billion items.
const PRUNE_SLACK: u64 = 4096;

/// Threshold-pruned race for models with `lw_i <= ln_weight_bound` for all
/// items. Returns bit-identical results to [`select_index`].
///
/// Skip rule: item `i` can only win if `S_i < m * w_max` where `m` is the
/// incumbent's ratio, i.e. only if its uniform `u_i` exceeds
/// `exp(-m * w_max)`. Comparing the raw 53-bit integer against a cached
/// integer threshold rejects almost every item without computing a weight,
/// a logarithm, or even a float.
pub fn select_index_pruned<F>(
    race: &RandomStream,
    n: u64,
    log_weight_of: F,
    ln_weight_bound: f64,
) -> Result<Selection>
where
    F: Fn(u64) -> f64,
{
    select_index_pruned_over(race, 0..n, log_weight_of, ln_weight_bound)
}

/// Pruned race over an arbitrary subset of items (strictly increasing
/// indices, as in [`select_index_over`]). Bit-identical to
/// [`select_index_over`] on the same subset.
pub fn select_index_pruned_over<F, I>(
    race: &RandomStream,
    items: I,
    log_weight_of: F,
    ln_weight_bound: f64,
) -> Result<Selection>
where
    F: Fn(u64) -> f64,
    I: IntoIterator<Item = u64>,
{
    if !ln_weight_bound.is_finite() {
        return Err(Error::invalid(format!(
            "pruned race needs a finite log weight bound, got {ln_weight_bound}"
        )));
    }

    // skip item iff z53 <= threshold; -1 means "skip nothing".
    let mut threshold: i64 = -1;
    let mut best: Option<Selection> = None;
    let mut evals: u64 = 0;
    let mut seen: u64 = 0;

    for i in items {
        seen += 1;
        let z = race.raw53(i);
        if (z as i64) <= threshold {
            continue;
        }
        let lw = log_weight_of(i);
        check_log_weight(lw, i)?;
        debug_assert!(
            lw <= ln_weight_bound + 1e-12,
            "log-weight {lw} at {i} exceeds declared bound {ln_weight_bound}"
        );
        evals += 1;
        if lw == f64::NEG_INFINITY {
            continue;
        }
        let s = RandomStream::exp_from_raw53(z);
        let score = s.ln() - lw;
        if best.map_or(true, |b| score < b.score_ln) {
            best = Some(Selection {
                index: i,
                exp: s,
                score_ln: score,
                evals: 0,
            });
            // New incumbent: recompute the integer skip threshold.
            // u_threshold = exp(-exp(score + ln_w_max)); anything at or below
            // it satisfies S_i >= m*w_max and cannot strictly win.
            let m_wmax = (score + ln_weight_bound).exp();
            let u_thr = (-m_wmax).exp();
            let t = (u_thr * (1u64 << 53) as f64 - 0.5).floor();
            threshold = if t <= 0.0 {
                -1
            } else {
                (t as i64 - PRUNE_SLACK as i64).max(-1)
            };
        }
    }
    if seen == 0 {
        return Err(Error::DegenerateWeights("empty pool".into()));
    }
    match best {
        Some(mut sel) => {
            sel.evals = evals;
            Ok(sel)
        }
        None => Err(Error::DegenerateWeights(format!(
            "all {seen} log-weights are -inf"
        ))),
    }
}

/// Rank of the winner's exponential among the whole pool: `K = 1` means
/// `S_U` was the smallest of `S_1..S_N`.
///
/// Exponentials are strictly decreasing in the raw 53-bit draw, so the rank
/// is computed by exact integer comparison (ties — which have probability
/// ~`N * 2^-53` — count the smaller index first, matching the selection
/// tie-break). This is a pure streaming pass: `O(1)` memory at any `N`.
pub fn rank_of(race: &RandomStream, n: u64, winner: u64) -> u64 {
    let zu = race.raw53(winner);
    let mut below = 0u64; // items with S_i < S_U, i.e. z_i > z_U
    let mut tied_before = 0u64;
    for i in 0..n {
        let z = race.raw53(i);
        if z > zu {
            below += 1;
        } else if z == zu && i < winner {
            tied_before += 1;
        }
    }
    below + tied_before + 1
}

/// Inverse of [`rank_of`]: the index holding the `k`-th smallest exponential
/// (1-based), with ties broken toward the smaller index. This is how a
/// receiver turns a decoded rank back into the winning pool item.
/// Materializes the pool's draws: `O(N)` memory.
pub fn index_with_rank(race: &RandomStream, n: u64, k: u64) -> Result<u64> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("rank {k} outside 1..={n}")));
    }
    let mut draws: Vec<(u64, u64)> = (0..n).map(|i| (race.raw53(i), i)).collect();
    let kth = (k - 1) as usize;
    // Ascending S = descending z; ties ascending index.
    draws.select_nth_unstable_by(kth, |a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(draws[kth].1)
}

/// Self-normalized weights `exp(lw_i) / sum_j exp(lw_j)` via log-sum-exp.
///
/// These are the probabilities with which the race picks each index, and the
/// distribution whose divergence from uniform controls the code length of
/// the winning rank.
pub fn normalized_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    if log_weights.is_empty() {
        return Err(Error::DegenerateWeights("empty weight vector".into()));
    }
    for (i, &lw) in log_weights.iter().enumerate() {
        check_log_weight(lw, i as u64)?;
    }
    let lse = log_sum_exp(log_weights);
    if lse == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights(
            "all log-weights are -inf".into(),
        ));
    }
    Ok(log_weights.iter().map(|&lw| (lw - lse).exp()).collect())
}
