//! Multiple importance sampling over stratified proposal pools.
//!
//! A bimodal Gaussian source with modes several hundred standard deviations
//! apart is the stress test for one-shot channel simulation: an i.i.d. pool
//! of `N` proposals misses the source's mode entirely with probability
//! `2^-N`, and when that happens the selected sample is off by the full
//! inter-mode distance. Stratified pools pin half the proposals to each
//! mode, so the catastrophic event has probability exactly zero, at the cost
//! of the pool no longer being exchangeable.
//!
//! Two selectors are compared throughout:
//!
//! * [`mis_select`] weighs each proposal by `target / mixture` and runs the
//!   plain exponential race. The race law `Pr(K=i) = w_i / sum w` holds for
//!   any fixed pool, stratified or not, so the output stays faithful.
//! * [`orc_select`] sorts the shared exponentials ascending and assigns them
//!   to proposals in enumeration order before racing. On exchangeable pools
//!   this leaves the output law unchanged while concentrating the winning
//!   index near 1 (that is its compression mechanism); on stratified pools
//!   the assignment couples the race to the pool layout and the output law
//!   breaks.
//!
//! The rank-based coder needs no change for stratified pools: the winner's
//! position among the sorted shared exponentials is transmitted, exactly as
//! in the plain channel-simulation path.

use crate::errors::{Error, Result};
use crate::model::{Density, GaussMix, Normal, QuantileFn};
use crate::pool::StratifiedPool;
use crate::race::{rank_of, select_index, Selection};
use crate::special::{chi_sq_pvalue, plugin_entropy_bits};
use crate::stream::RandomStream;

/// Bimodal Gaussian source observed through an additive Gaussian channel.
///
/// The source is `X ~ 1/2 N(m, 1) + 1/2 N(-m, 1)`; the channel adds
/// independent `N(0, d)` noise, so the per-source target is `N(x, d)` and
/// the output marginal is the mixture `1/2 N(m, 1+d) + 1/2 N(-m, 1+d)`.
#[derive(Debug, Clone)]
pub struct BimodalModel {
    /// Mode offset: source components sit at `+m` and `-m`.
    pub m: f64,
    /// Channel noise variance (also the target mean distortion).
    pub d: f64,
    /// Source mixture `1/2 N(m,1) + 1/2 N(-m,1)`.
    pub source: GaussMix,
    /// Output marginal `1/2 N(m,1+d) + 1/2 N(-m,1+d)`.
    pub marginal: GaussMix,
}

impl BimodalModel {
    pub fn new(m: f64, d: f64) -> Result<Self> {
        if !(d > 0.0) || !m.is_finite() {
            return Err(Error::invalid(format!(
                "bimodal model needs finite m and d > 0, got m={m}, d={d}"
            )));
        }
        Ok(BimodalModel {
            m,
            d,
            source: GaussMix::symmetric_pair(m, 1.0)?,
            marginal: GaussMix::symmetric_pair(m, 1.0 + d)?,
        })
    }

    /// Channel law `N(x, d)` for source value `x`: the race target.
    pub fn target_given(&self, x: f64) -> Normal {
        Normal { mean: x, var: self.d }
    }

    /// Natural-log importance weight of proposal `y` for source `x`:
    /// `ln N(y; x, d) - ln p_Y(y)`, the denominator being the full mixture.
    #[inline]
    pub fn log_weight(&self, x: f64, y: f64) -> f64 {
        self.target_given(x).log_density(y) - self.marginal.log_density(y)
    }

    /// One source draw: counter `2i` picks the component, `2i+1` places the
    /// sample inside it.
    pub fn draw_source(&self, stream: &RandomStream, i: u64) -> f64 {
        mixture_draw(&self.source, stream, i)
    }

    /// Proposal pool with the first half pinned to the `+m` component and
    /// the second half to the `-m` component.
    pub fn stratified_pool(&self, stream: RandomStream, n: u64) -> Result<StratifiedPool<Normal>> {
        StratifiedPool::new(stream, self.marginal.comps[0], self.marginal.comps[1], n)
    }

    /// Exchangeable pool drawn i.i.d. from the output mixture.
    pub fn iid_pool(&self, stream: RandomStream, n: u64) -> MixturePool {
        MixturePool { stream, mix: self.marginal.clone(), n }
    }
}

/// Draw `i` from a Gaussian mixture using two counters per item: `2i`
/// selects the component, `2i+1` places the value. Lazy and reproducible,
/// like the rest of the pool machinery.
pub fn mixture_draw(mix: &GaussMix, stream: &RandomStream, i: u64) -> f64 {
    let u = stream.uniform(2 * i);
    let mut acc = 0.0;
    let mut comp = mix.comps.len() - 1;
    for (c, &w) in mix.weights.iter().enumerate() {
        acc += w;
        if u < acc {
            comp = c;
            break;
        }
    }
    mix.comps[comp].inv_cdf(stream.uniform(2 * i + 1))
}

/// Lazy i.i.d. pool over a Gaussian mixture.
#[derive(Debug, Clone)]
pub struct MixturePool {
    pub stream: RandomStream,
    pub mix: GaussMix,
    pub n: u64,
}

impl MixturePool {
    #[inline]
    pub fn item(&self, i: u64) -> f64 {
        mixture_draw(&self.mix, &self.stream, i)
    }
}

/// Race selection over a stratified pool with mixture-denominator weights.
///
/// `Pr(index = i)` equals the self-normalized weight of item `i` exactly,
/// for every fixed pool — stratification does not disturb the race law.
pub fn mis_select(
    pool: &StratifiedPool<Normal>,
    model: &BimodalModel,
    x: f64,
    race: &RandomStream,
) -> Result<Selection> {
    select_index(race, pool.n, |i| model.log_weight(x, pool.item(i)))
}

/// Sorted-exponential selection: the ascending order statistics of the
/// shared exponentials are assigned to items in enumeration order, then the
/// usual ratio race runs. Baseline only — on non-exchangeable pools the
/// output law is wrong by construction.
///
/// The order statistics are generated directly through uniform spacings
/// (`S_(k) = S_(k-1) + E_k / (N-k+1)`), avoiding an `O(N log N)` sort per
/// trial; the joint law is identical to sorting `N` i.i.d. draws.
pub fn orc_select<F>(race: &RandomStream, n: u64, log_weight_of: F) -> Result<Selection>
where
    F: Fn(u64) -> f64,
{
    if n == 0 {
        return Err(Error::DegenerateWeights("empty pool".into()));
    }
    let mut s = 0.0f64;
    let mut best: Option<Selection> = None;
    for i in 0..n {
        s += race.exp_draw(i) / (n - i) as f64;
        let lw = log_weight_of(i);
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::invalid(format!(
                "log-weight at index {i} is {lw}; must be finite or -inf"
            )));
        }
        if lw == f64::NEG_INFINITY {
            continue;
        }
        let score = s.ln() - lw;
        if best.map_or(true, |b| score < b.score_ln) {
            best = Some(Selection { index: i, exp: s, score_ln: score, evals: n });
        }
    }
    best.ok_or_else(|| Error::DegenerateWeights(format!("all {n} log-weights are -inf")))
}

/// Chi-square goodness-of-fit p-value of `samples` against a Gaussian
/// `target`, over `bins` equiprobable cells.
pub fn chi_sq_gof_pvalue(samples: &[f64], target: &Normal, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::invalid(format!("need at least 2 bins, got {bins}")));
    }
    if samples.len() < 5 * bins {
        return Err(Error::invalid(format!(
            "need at least 5 samples per cell: {} samples for {bins} bins",
            samples.len()
        )));
    }
    let edges = target.equiprobable_edges(bins);
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let cell = edges.partition_point(|&e| e < x);
        counts[cell] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let stat: f64 = counts
        .iter()
        .map(|&o| {
            let diff = o as f64 - expected;
            diff * diff / expected
        })
        .sum();
    Ok(chi_sq_pvalue(stat, (bins - 1) as f64))
}

/// Which selector produced a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisScheme {
    /// Stratified pool, plain exponential race, rank transmitted.
    CeIs,
    /// i.i.d. mixture pool, sorted-exponential race, index transmitted.
    Orc,
}

impl MisScheme {
    pub fn name(self) -> &'static str {
        match self {
            MisScheme::CeIs => "ce-is",
            MisScheme::Orc => "orc",
        }
    }
}

/// One row of the bias/variance/rate comparison.
#[derive(Debug, Clone, Copy)]
pub struct MisRow {
    pub scheme: MisScheme,
    pub n: u64,
    /// Empirical `E[(Y-X)^2]`; the target level is `d`.
    pub mean_dist: f64,
    /// Empirical `Var((Y-X)^2)`; the target level is `2 d^2`.
    pub var_dist: f64,
    /// Plug-in entropy (bits) of the transmitted-symbol histogram: winner
    /// rank for the race scheme, winner index for the sorted baseline.
    pub rate_bits: f64,
    pub trials: u64,
}

/// Distortion and rate comparison between the stratified race scheme and the
/// sorted-exponential baseline on i.i.d. pools, per pool size.
///
/// Per trial both schemes consume identical substreams (tag 1: source, tag
/// 2: pool, tag 3: race), so the comparison is paired. Requires
/// `trials >= 10_000` — the headline effect at `m = 512` is a `2^-N`-rare
/// catastrophic miss, which smaller runs cannot resolve.
pub fn mis_experiment(
    m: f64,
    d: f64,
    n_list: &[u64],
    trials: u64,
    base: &RandomStream,
) -> Result<Vec<MisRow>> {
    if trials < 10_000 {
        return Err(Error::invalid(format!(
            "comparison needs at least 10000 trials, got {trials}"
        )));
    }
    let model = BimodalModel::new(m, d)?;
    let mut rows = Vec::with_capacity(2 * n_list.len());
    for (grid_idx, &n) in n_list.iter().enumerate() {
        if n < 2 || n % 2 != 0 {
            return Err(Error::invalid(format!("pool sizes must be even and >= 2, got {n}")));
        }
        let mut acc = [DistAcc::default(), DistAcc::default()];
        let mut hist = [vec![0u64; n as usize], vec![0u64; n as usize]];
        for trial in 0..trials {
            let ts = base.substream(grid_idx as u64 * trials + trial);
            let x = model.draw_source(&ts.substream(1), 0);
            let pool_stream = ts.substream(2);
            let race = ts.substream(3);

            let strat = model.stratified_pool(pool_stream.clone(), n)?;
            let sel = mis_select(&strat, &model, x, &race)?;
            let k = rank_of(&race, n, sel.index);
            let y = strat.item(sel.index);
            acc[0].push((y - x) * (y - x));
            hist[0][(k - 1) as usize] += 1;

            let iid = model.iid_pool(pool_stream, n);
            let sel = orc_select(&race, n, |i| model.log_weight(x, iid.item(i)))?;
            let y = iid.item(sel.index);
            acc[1].push((y - x) * (y - x));
            hist[1][sel.index as usize] += 1;
        }
        for (which, scheme) in [(0, MisScheme::CeIs), (1, MisScheme::Orc)] {
            rows.push(MisRow {
                scheme,
                n,
                mean_dist: acc[which].mean(),
                var_dist: acc[which].var(),
                rate_bits: plugin_entropy_bits(&hist[which]),
                trials,
            });
        }
    }
    Ok(rows)
}

#[derive(Default)]
struct DistAcc {
    n: u64,
    sum: f64,
    sumsq: f64,
}

impl DistAcc {
    fn push(&mut self, z: f64) {
        self.n += 1;
        self.sum += z;
        self.sumsq += z * z;
    }
    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
    fn var(&self) -> f64 {
        let m = self.mean();
        (self.sumsq / self.n as f64 - m * m).max(0.0)
    }
}

/// Histogram of decoder outputs for a fixed source value: runs `trials`
/// stratified-pool selections with the given selector and returns the
/// selected samples, for goodness-of-fit testing against `N(x, d)`.
pub fn simulate_outputs(
    model: &BimodalModel,
    x: f64,
    n: u64,
    trials: u64,
    base: &RandomStream,
    selector: MisScheme,
) -> Result<Vec<f64>> {
    let mut ys = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let ts = base.substream(trial);
        let pool = model.stratified_pool(ts.substream(2), n)?;
        let race = ts.substream(3);
        let sel = match selector {
            MisScheme::CeIs => mis_select(&pool, model, x, &race)?,
            MisScheme::Orc => orc_select(&race, n, |i| model.log_weight(x, pool.item(i)))?,
        };
        ys.push(pool.item(sel.index));
    }
    Ok(ys)
}
