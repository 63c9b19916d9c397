//! Agreement bounds for two races over one shared pool.
//!
//! An encoder races the shared exponentials with weights from a law `p`,
//! a decoder with weights from a law `q` (its best guess given whatever
//! side information it holds). Everything here quantifies how often the two
//! winners coincide:
//!
//! * exact per-pool closed forms ([`race_marginals`],
//!   [`joint_match_probability`], [`conditional_match_probability`]) —
//!   these follow from the memorylessness of the exponential race and are
//!   used both as production code and as test oracles;
//! * the simple per-pool mismatch bound ([`per_pool_mismatch_bound`]);
//! * population-level bounds for i.i.d. pools of size `N̄ + 1` conditioned
//!   on the first sample and on the encoder selecting it
//!   ([`mu_finite_pool`] / [`mismatch_bound`], plus the deviation-based
//!   [`mu_concentration`] / [`mismatch_bound_concentration`]); the decoder
//!   weight law may condition on arbitrary side information, so these cover
//!   both the common-randomness and the decoder-side-information settings;
//! * the ratio moments `d_n(p||q) = E_p[(p/q)^(n-1)]` the population
//!   bounds consume, in closed form for Gaussians and finite alphabets and
//!   as a divergence-flagged Monte-Carlo estimate otherwise.

use crate::errors::{Error, Result};
use crate::model::{Density, DiscreteDist, Normal, QuantileFn};
use crate::race::select_index;
use crate::special::wilson_ci;
use crate::stream::RandomStream;

// ---------------------------------------------------------------------------
// Exact per-pool laws
// ---------------------------------------------------------------------------

fn check_weights(w: &[f64], name: &str) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::DegenerateWeights(format!("{name}: empty")));
    }
    let mut total = 0.0;
    for (i, &x) in w.iter().enumerate() {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::invalid(format!("{name}[{i}] = {x} is not a finite nonnegative weight")));
        }
        total += x;
    }
    if total <= 0.0 {
        return Err(Error::DegenerateWeights(format!("{name}: all zero")));
    }
    Ok(total)
}

/// `Pr(U = i)` for a single race: proportional to the weights.
pub fn race_marginals(weights: &[f64]) -> Result<Vec<f64>> {
    let total = check_weights(weights, "weights")?;
    Ok(weights.iter().map(|w| w / total).collect())
}

/// `Pr(U_p = U_q = k)` for two races sharing exponentials:
/// `1 / (1 + sum_{j != k} max(wp_j/wp_k, wq_j/wq_k))`.
pub fn joint_match_probability(wp: &[f64], wq: &[f64], k: usize) -> Result<f64> {
    check_weights(wp, "wp")?;
    check_weights(wq, "wq")?;
    if wp.len() != wq.len() || k >= wp.len() {
        return Err(Error::invalid("weight vectors must share length and contain k"));
    }
    if wp[k] == 0.0 || wq[k] == 0.0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for j in 0..wp.len() {
        if j != k {
            s += (wp[j] / wp[k]).max(wq[j] / wq[k]);
        }
    }
    Ok(1.0 / (1.0 + s))
}

/// `Pr(U_q = k | U_p = k)` for two races sharing exponentials.
///
/// Conditioned on the `p`-race selecting `k` at value `s`, each losing
/// exponential renews, leaving `S_j - wp_j s` fresh; the `q`-race also picks
/// `k` iff every renewal clears `s (wq_j wp_k / wq_k - wp_j)`. Integrating
/// over the winning value gives `1 / (1 + M / sum(wp))` with
/// `M = sum_{j != k} max(0, wq_j wp_k / wq_k - wp_j)`.
pub fn conditional_match_probability(wp: &[f64], wq: &[f64], k: usize) -> Result<f64> {
    let total_p = check_weights(wp, "wp")?;
    check_weights(wq, "wq")?;
    if wp.len() != wq.len() || k >= wp.len() {
        return Err(Error::invalid("weight vectors must share length and contain k"));
    }
    if wp[k] == 0.0 {
        return Err(Error::invalid("conditioning on a zero-weight selection"));
    }
    if wq[k] == 0.0 {
        return Ok(0.0);
    }
    let mut m = 0.0;
    for j in 0..wp.len() {
        if j != k {
            m += (wq[j] * wp[k] / wq[k] - wp[j]).max(0.0);
        }
    }
    Ok(1.0 / (1.0 + m / total_p))
}

/// Per-pool mismatch bound: `Pr(U_p != U_q | pool, U_p = k)` is at most
/// `1 - (1 + (wp_k / wq_k) * (mean wq / mean wp))^{-1}`.
pub fn per_pool_mismatch_bound(wp: &[f64], wq: &[f64], k: usize) -> Result<f64> {
    let tp = check_weights(wp, "wp")?;
    let tq = check_weights(wq, "wq")?;
    if wp.len() != wq.len() || k >= wp.len() {
        return Err(Error::invalid("weight vectors must share length and contain k"));
    }
    if wp[k] == 0.0 {
        return Err(Error::invalid("conditioning on a zero-weight selection"));
    }
    if wq[k] == 0.0 {
        return Ok(1.0);
    }
    let ratio = (wp[k] / wq[k]) * (tq / tp);
    Ok(1.0 - 1.0 / (1.0 + ratio))
}

// ---------------------------------------------------------------------------
// Population-level bounds
// ---------------------------------------------------------------------------

/// Inputs shared by the finite-pool mismatch bounds, all evaluated at the
/// conditioned first pool sample `y1` and source realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchBoundInputs {
    /// Encoder density ratio at the match point: `p(y1 | x) / marginal(y1)`.
    pub lambda: f64,
    /// Decoder density ratio at the match point:
    /// `q(y1 | side info) / marginal(y1)`.
    pub beta: f64,
    /// Uniform bound on the encoder ratio over the alphabet (`>= 1`).
    pub omega: f64,
    /// `E_marginal[(marginal / p(.|x))^2]`.
    pub d3_rev: f64,
    /// `E_marginal[(marginal / p(.|x))^4]`.
    pub d5_rev: f64,
}

impl MatchBoundInputs {
    /// Assemble the inputs for a finite alphabet: `p_y` is the pool
    /// (marginal) law, `p_cond` the encoder target given its source value,
    /// `q_cond` the decoder target given its side information, and `y1` the
    /// conditioned first-sample symbol.
    pub fn from_discrete(
        p_y: &DiscreteDist,
        p_cond: &DiscreteDist,
        q_cond: &DiscreteDist,
        y1: usize,
    ) -> Result<Self> {
        let n = p_y.len();
        if p_cond.len() != n || q_cond.len() != n || y1 >= n {
            return Err(Error::invalid("alphabet sizes must match and contain y1"));
        }
        let py = p_y.prob(y1);
        if py <= 0.0 {
            return Err(Error::invalid("first sample has zero marginal mass"));
        }
        let mut omega: f64 = 0.0;
        for s in 0..n {
            let denom = p_y.prob(s);
            if p_cond.prob(s) > 0.0 && denom <= 0.0 {
                return Err(Error::invalid("encoder target not dominated by the pool law"));
            }
            if denom > 0.0 {
                omega = omega.max(p_cond.prob(s) / denom);
            }
        }
        Ok(MatchBoundInputs {
            lambda: p_cond.prob(y1) / py,
            beta: q_cond.prob(y1) / py,
            omega,
            d3_rev: d_moment_discrete(3, p_y, p_cond)?,
            d5_rev: d_moment_discrete(5, p_y, p_cond)?,
        })
    }
}

/// The finite-pool correction factor `mu(N̄)` for a pool of `N̄ + 1`
/// i.i.d. samples. Decreases toward 1 as the pool grows; the mismatch bound
/// is `1 - (1 + (lambda / beta) mu)^{-1}`.
pub fn mu_finite_pool(inp: &MatchBoundInputs, n_bar: u64) -> Result<f64> {
    if n_bar == 0 {
        return Err(Error::invalid("pool correction needs n_bar >= 1"));
    }
    if !(inp.omega >= 1.0) || !(inp.lambda > 0.0) || !(inp.beta >= 0.0) {
        return Err(Error::invalid(format!(
            "need omega >= 1, lambda > 0, beta >= 0; got omega={}, lambda={}, beta={}",
            inp.omega, inp.lambda, inp.beta
        )));
    }
    let nb = n_bar as f64;
    let n = nb + 1.0;
    let (lambda, beta, omega) = (inp.lambda, inp.beta, inp.omega);

    let head = (beta / nb + 1.0) / (lambda / nb + 1.0);

    let reach = 1.0 + ((n + 1.0) / nb) * omega;
    let k_term = 4.0 * (omega - 1.0) / (1.0 + lambda / nb).powi(2)
        * reach
        * (2.0
            + 4.0 * ((1.0 + beta / nb) / (1.0 + 2.0 * lambda / nb)).powi(2)
                * (reach * reach + (omega - 1.0) / nb))
            .sqrt();

    let l_term = if inp.d3_rev.is_finite() && inp.d5_rev.is_finite() {
        (omega - 1.0).sqrt() * (inp.d5_rev - inp.d3_rev * inp.d3_rev).max(0.0).sqrt()
            + (omega - 1.0) * inp.d3_rev
    } else if omega == 1.0 {
        0.0
    } else {
        f64::INFINITY
    };

    Ok(head
        + (1.0 / nb) * (1.0 + lambda / nb) * k_term
        + (2.0 * omega / nb) * (1.0 + lambda / nb) * l_term)
}

/// Mismatch bound for an i.i.d. pool of `N̄ + 1` samples, conditioned on the
/// first sample and on the encoder selecting it:
/// `Pr(U_p != U_q | y1, U_p = 1) <= 1 - (1 + (lambda/beta) mu(N̄))^{-1}`.
pub fn mismatch_bound(inp: &MatchBoundInputs, n_bar: u64) -> Result<f64> {
    if !(inp.beta > 0.0) {
        return Ok(1.0);
    }
    let mu = mu_finite_pool(inp, n_bar)?;
    if !mu.is_finite() {
        return Ok(1.0);
    }
    Ok(1.0 - 1.0 / (1.0 + (inp.lambda / inp.beta) * mu))
}

/// Deviation-based alternative to [`mu_finite_pool`] that needs no ratio
/// moments, only the uniform weight bound: for pool size `n` and any
/// `eps` in (0,1),
/// `mu' = (n - 1 + lambda) * ((beta + (n-1)(1+eps)) / (lambda + (n-1)(1-eps))^2
///        + (n omega / lambda^2) * 2 exp(-(n-1) eps^2 / omega^2))`.
pub fn mu_concentration(lambda: f64, beta: f64, omega: f64, n: u64, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("concentration correction needs n >= 2"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must be in (0,1), got {eps}")));
    }
    if !(omega >= 1.0) || !(lambda > 0.0) || !(beta >= 0.0) {
        return Err(Error::invalid(format!(
            "need omega >= 1, lambda > 0, beta >= 0; got omega={omega}, lambda={lambda}, beta={beta}"
        )));
    }
    let nf = n as f64;
    let main = (beta + (nf - 1.0) * (1.0 + eps)) / (lambda + (nf - 1.0) * (1.0 - eps)).powi(2);
    let tail = (nf * omega / (lambda * lambda))
        * 2.0
        * (-(nf - 1.0) * eps * eps / (omega * omega)).exp();
    Ok((nf - 1.0 + lambda) * (main + tail))
}

/// Mismatch bound built on [`mu_concentration`].
pub fn mismatch_bound_concentration(
    lambda: f64,
    beta: f64,
    omega: f64,
    n: u64,
    eps: f64,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Ok(1.0);
    }
    let mu = mu_concentration(lambda, beta, omega, n, eps)?;
    Ok(1.0 - 1.0 / (1.0 + (lambda / beta) * mu))
}

// ---------------------------------------------------------------------------
// Ratio moments d_n(p || q) = E_p[(p/q)^(n-1)]
// ---------------------------------------------------------------------------

/// Closed-form Gaussian ratio moment `d_order(p || q)`, `order >= 1`.
/// Returns `+inf` when the defining integral diverges.
pub fn d_moment_gaussian(order: u32, p: &Normal, q: &Normal) -> Result<f64> {
    if order == 0 {
        return Err(Error::invalid("ratio moments are indexed from 1"));
    }
    let k = (order - 1) as f64;
    let (m1, s1) = (p.mean, p.var);
    let (m2, s2) = (q.mean, q.var);
    // E_p[(p/q)^k] = (s2/s1)^(k/2) (s1 A)^(-1/2) exp((B^2/A - C)/2) with the
    // quadratic-form coefficients below; finite iff A > 0.
    let a = (k + 1.0) / s1 - k / s2;
    if a <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let b = (k + 1.0) * m1 / s1 - k * m2 / s2;
    let c = (k + 1.0) * m1 * m1 / s1 - k * m2 * m2 / s2;
    Ok((s2 / s1).powf(k / 2.0) / (s1 * a).sqrt() * (0.5 * (b * b / a - c)).exp())
}

/// Exact ratio moment on a finite alphabet: `sum_y p(y)^order / q(y)^(order-1)`.
/// `+inf` if `p` puts mass where `q` does not.
pub fn d_moment_discrete(order: u32, p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    if order == 0 {
        return Err(Error::invalid("ratio moments are indexed from 1"));
    }
    if p.len() != q.len() {
        return Err(Error::invalid("alphabet sizes must match"));
    }
    let k = (order - 1) as i32;
    let mut total = 0.0;
    for s in 0..p.len() {
        let (ps, qs) = (p.prob(s), q.prob(s));
        if ps == 0.0 {
            continue;
        }
        if qs == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += ps * (ps / qs).powi(k);
    }
    Ok(total)
}

/// Monte-Carlo ratio moment with a divergence diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DMomentEstimate {
    /// Sample mean of `(p/q)^(order-1)` under `p`. Meaningless when
    /// `diverged` is set.
    pub value: f64,
    /// Standard error of the mean, from the spread of the batch means.
    pub std_err: f64,
    /// Largest single-sample share of the total sum. Near 1 means one draw
    /// dominates and the underlying moment is infinite or near-infinite.
    pub max_share: f64,
    /// Set when the estimate shows the signature of an infinite moment: the
    /// running maximum ratio keeps setting records across the batches, or a
    /// single draw carries more than [`D_MOMENT_DIVERGENCE_SHARE`].
    pub diverged: bool,
    pub samples: u64,
}

/// A single sample carrying more than this share of the Monte-Carlo sum
/// marks the ratio-moment estimate as divergent.
pub const D_MOMENT_DIVERGENCE_SHARE: f64 = 0.05;

/// Number of batches used for the variance and divergence diagnostics.
pub const D_MOMENT_BATCHES: u64 = 10;

/// Estimate `d_order(p || q)` from `samples` draws of `p`.
///
/// `draw(i)` produces the i-th sample of `p`; `log_ratio(y)` evaluates
/// `ln p(y) - ln q(y)`. The run is split into [`D_MOMENT_BATCHES`] batches:
/// the batch means give a standard error, and the running maximum term gives
/// the divergence diagnostic. When the true moment is infinite the sample
/// mean stays finite but record-sized draws keep arriving throughout the
/// run — for a finite moment, records arrive at an `O(log n)` rate, so new
/// records in most batches (or one dominating draw) flag the estimate
/// instead of pretending the number converged.
pub fn d_moment_mc<F, G>(
    order: u32,
    draw: F,
    log_ratio: G,
    samples: u64,
    _stream: &RandomStream,
) -> Result<DMomentEstimate>
where
    F: Fn(u64) -> f64,
    G: Fn(f64) -> f64,
{
    if order == 0 {
        return Err(Error::invalid("ratio moments are indexed from 1"));
    }
    if samples < D_MOMENT_BATCHES {
        return Err(Error::invalid(format!(
            "need at least {D_MOMENT_BATCHES} samples, got {samples}"
        )));
    }
    let k = (order - 1) as f64;
    let batch = samples / D_MOMENT_BATCHES;
    let mut sum = 0.0f64;
    let mut max_term = 0.0f64;
    let mut used = 0u64;
    let mut batch_means = Vec::with_capacity(D_MOMENT_BATCHES as usize);
    let mut record_batches = 0u32;
    for b in 0..D_MOMENT_BATCHES {
        let mut bsum = 0.0f64;
        let mut record_here = false;
        for i in b * batch..(b + 1) * batch {
            let y = draw(i);
            let term = (k * log_ratio(y)).exp();
            bsum += term;
            if term > max_term {
                max_term = term;
                record_here = true;
            }
        }
        // Records in the first batch are inevitable; count later ones.
        if b > 0 && record_here {
            record_batches += 1;
        }
        batch_means.push(bsum / batch as f64);
        sum += bsum;
        used += batch;
    }
    let value = sum / used as f64;
    let var_of_means = batch_means
        .iter()
        .map(|&m| (m - value) * (m - value))
        .sum::<f64>()
        / (D_MOMENT_BATCHES - 1) as f64;
    let std_err = (var_of_means / D_MOMENT_BATCHES as f64).sqrt();
    let max_share = if sum > 0.0 { max_term / sum } else { 0.0 };
    Ok(DMomentEstimate {
        value,
        std_err,
        max_share,
        diverged: record_batches >= 6 || max_share > D_MOMENT_DIVERGENCE_SHARE,
        samples: used,
    })
}

/// Two races over one shared pool and one shared set of exponentials, with
/// different targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairedSelection {
    /// Winner under the first target's weights (0-based pool counter).
    pub u_p: u64,
    /// Winner under the second target's weights.
    pub u_q: u64,
    /// `u_p == u_q`.
    pub matched: bool,
}

/// Race the same `(S_i, Y_i)` pool under two log-weight functions.
///
/// Normalization never matters: adding any constant to either function
/// shifts every score equally and leaves both argmins bit-identical.
pub fn paired_select<F, G>(
    race: &RandomStream,
    n: u64,
    log_weight_p: F,
    log_weight_q: G,
) -> Result<PairedSelection>
where
    F: Fn(u64) -> f64,
    G: Fn(u64) -> f64,
{
    let p = select_index(race, n, log_weight_p)?;
    let q = select_index(race, n, log_weight_q)?;
    Ok(PairedSelection { u_p: p.index, u_q: q.index, matched: p.index == q.index })
}

/// Mismatch frequency between two races over a shared proposal pool, with a
/// Wilson score interval whose endpoints are each one-sided 95% limits
/// (`z = 1.645`); `ci_hi` is the bound the dominance checks compare against,
/// and on zero mismatches it stays below `3/trials`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchStats {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mismatches: u64,
    pub trials: u64,
}

/// Monte-Carlo `Pr(U_p != U_q)` over fresh pools: per trial, `n` proposals
/// are drawn from `proposal` (substream tag 1) and raced (tag 2) under both
/// targets' weights.
pub fn mismatch_mc<P, TP, TQ>(
    proposal: &P,
    target_p: &TP,
    target_q: &TQ,
    n: u64,
    trials: u64,
    base: &RandomStream,
) -> Result<MatchStats>
where
    P: Density + QuantileFn,
    TP: Density,
    TQ: Density,
{
    if trials < 100 {
        return Err(Error::invalid(format!(
            "need at least 100 trials for a meaningful interval, got {trials}"
        )));
    }
    let mut mismatches = 0u64;
    for trial in 0..trials {
        let ts = base.substream(trial);
        let pool_stream = ts.substream(1);
        let item = |i: u64| proposal.inv_cdf(pool_stream.uniform(i));
        let race = ts.substream(2);
        let sel = paired_select(
            &race,
            n,
            |i| {
                let y = item(i);
                target_p.log_density(y) - proposal.log_density(y)
            },
            |i| {
                let y = item(i);
                target_q.log_density(y) - proposal.log_density(y)
            },
        )?;
        mismatches += (!sel.matched) as u64;
    }
    let (p_hat, ci_lo, ci_hi) = wilson_ci(mismatches, trials, 1.6448536269514722);
    Ok(MatchStats { p_hat, ci_lo, ci_hi, mismatches, trials })
}

/// Paired race where the decoder's law conditions on side information `z`:
/// mechanically [`paired_select`] with `q := decoder(z, ·)`.
///
/// The caller guarantees `z` was produced from the source (and possibly the
/// encoder's selected sample) alone — never from pool internals — which is
/// what lets every bound in this module apply with the conditional law in
/// place of `q`: with `z` fixed, the decoder side is just another weight
/// function over the shared pool.
pub fn conditional_paired_select<F, Q>(
    race: &RandomStream,
    n: u64,
    log_weight_p: F,
    decoder_log_weight: Q,
    z: f64,
) -> Result<PairedSelection>
where
    F: Fn(u64) -> f64,
    Q: Fn(f64, u64) -> f64,
{
    paired_select(race, n, log_weight_p, |i| decoder_log_weight(z, i))
}

/// Ratio estimate of a conditional mismatch probability, with a batch-means
/// standard error (10 batches).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMismatch {
    pub p_hat: f64,
    pub std_err: f64,
    /// Trials actually consumed (the requested count rounded down to a
    /// multiple of 10).
    pub trials: u64,
}

/// Monte-Carlo `Pr(U_q != 1 | Y_1 = y1, U_p = 1)` on a finite alphabet:
/// pools hold the symbol `y1` in slot one plus `n_bar` i.i.d. draws from
/// `p_y`, matching the conditioning of [`mismatch_bound`].
///
/// Rejection sampling the conditioning event is hopeless for large pools —
/// its probability decays like `1/n_bar` — so each sampled pool instead
/// contributes its exact conditional probabilities: `Pr(U_p = 1 | pool) =
/// wp_1 / sum(wp)` and the closed-form match probability given `U_p = 1`.
/// The ratio of their averages equals the conditional mismatch probability
/// exactly; a test checks the identity against plain rejection on small
/// pools.
pub fn conditional_mismatch_discrete(
    p_y: &DiscreteDist,
    p_cond: &DiscreteDist,
    q_cond: &DiscreteDist,
    y1: usize,
    n_bar: u64,
    trials: u64,
    base: &RandomStream,
) -> Result<ConditionalMismatch> {
    let n_syms = p_y.len();
    if p_cond.len() != n_syms || q_cond.len() != n_syms || y1 >= n_syms {
        return Err(Error::invalid("alphabet sizes must match and contain y1"));
    }
    if n_bar == 0 {
        return Err(Error::invalid("need at least one competing sample"));
    }
    if trials < 100 {
        return Err(Error::invalid(format!(
            "need at least 100 trials for a batch-means error, got {trials}"
        )));
    }

    let mut ratio_p = vec![0.0; n_syms];
    let mut ratio_q = vec![0.0; n_syms];
    for s in 0..n_syms {
        let denom = p_y.prob(s);
        if denom <= 0.0 {
            if p_cond.prob(s) > 0.0 || q_cond.prob(s) > 0.0 {
                return Err(Error::invalid(
                    "targets are not dominated by the pool law",
                ));
            }
        } else {
            ratio_p[s] = p_cond.prob(s) / denom;
            ratio_q[s] = q_cond.prob(s) / denom;
        }
    }
    if ratio_p[y1] <= 0.0 {
        return Err(Error::invalid(
            "conditioning sample has zero encoder target mass",
        ));
    }

    let batch = trials / 10;
    let mut batch_ratios = [0.0f64; 10];
    let mut num_total = 0.0;
    let mut den_total = 0.0;
    let mut wp: Vec<f64> = Vec::with_capacity(n_bar as usize + 1);
    let mut wq: Vec<f64> = Vec::with_capacity(n_bar as usize + 1);
    for (b, slot) in batch_ratios.iter_mut().enumerate() {
        let mut num_b = 0.0;
        let mut den_b = 0.0;
        for t in 0..batch {
            let pool_stream = base.substream(b as u64 * batch + t);
            wp.clear();
            wq.clear();
            wp.push(ratio_p[y1]);
            wq.push(ratio_q[y1]);
            for j in 0..n_bar {
                let s = p_y.inv_cdf(pool_stream.uniform(j)) as usize;
                wp.push(ratio_p[s]);
                wq.push(ratio_q[s]);
            }
            let sum_p: f64 = wp.iter().sum();
            let select_prob = wp[0] / sum_p;
            let match_given = conditional_match_probability(&wp, &wq, 0)?;
            num_b += select_prob * (1.0 - match_given);
            den_b += select_prob;
        }
        if den_b <= 0.0 {
            return Err(Error::invalid(format!(
                "conditioning event has zero mass in batch {b}"
            )));
        }
        *slot = num_b / den_b;
        num_total += num_b;
        den_total += den_b;
    }

    let p_hat = num_total / den_total;
    let mean_r: f64 = batch_ratios.iter().sum::<f64>() / 10.0;
    let var_r: f64 = batch_ratios
        .iter()
        .map(|r| (r - mean_r) * (r - mean_r))
        .sum::<f64>()
        / 9.0;
    Ok(ConditionalMismatch {
        p_hat,
        std_err: (var_r / 10.0).sqrt(),
        trials: batch * 10,
    })
}

/// One evaluated bound next to its Monte-Carlo verdict: a row of the bound
/// comparison table.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Which bound produced this row (e.g. "per-pool", "finite-pool",
    /// "concentration").
    pub variant: &'static str,
    pub n: u64,
    pub omega: f64,
    pub d2: f64,
    pub d3: f64,
    pub d5: f64,
    /// The finite-pool correction factor, when the variant has one.
    pub mu: f64,
    pub bound: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}
