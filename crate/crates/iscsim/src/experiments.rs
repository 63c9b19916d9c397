//! Experiment drivers: each configuration kind maps deterministically to a
//! set of CSV tables.
//!
//! Work fans out over (grid point × trial). Every work item draws its
//! randomness from `RandomStream::new(seed, item_index)` (or a substream of
//! it), parallel results are collected in index order, and all reductions
//! run sequentially afterwards — so the emitted bytes are identical at any
//! parallelism degree.

use rayon::prelude::*;
use std::path::PathBuf;

use crate::codec::{mean_log_rank_bound, IndexCoder};
use crate::config::{ExperimentConfig, ExperimentKind, ModeKind};
use crate::errors::{Error, Result};
use crate::gauss::{db_of_mse, GaussChannel, SideInfoChannel};
use crate::matching::{
    conditional_mismatch_discrete, d_moment_discrete, mismatch_bound,
    mismatch_bound_concentration, mu_concentration, mu_finite_pool, BoundReport,
    MatchBoundInputs,
};
use crate::mis::mis_experiment;
use crate::model::{Density, DiscreteDist, QuantileFn};
use crate::race::{normalized_weights, rank_of, select_index};
use crate::report::{bound_cells, mis_cells, Cell, RdRow, Table, BOUND_COLUMNS, MIS_COLUMNS, RD_COLUMNS};
use crate::side_info::{
    feedback_rate_formula, mismatch_probability, run_feedback_round, BinMode, FeedbackConfig,
    FeedbackMode,
};
use crate::stream::RandomStream;

/// Files written by a completed run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
}

/// Build every table for the config without touching the filesystem.
pub fn tables(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
    pool.install(|| match cfg.kind {
        ExperimentKind::ChannelSim => Ok(vec![channel_sim(cfg)?]),
        ExperimentKind::MatchProb => Ok(vec![match_prob(cfg)?]),
        ExperimentKind::RdCurve => Ok(vec![rd_curve(cfg)?]),
        ExperimentKind::FeedbackSweep => Ok(vec![feedback_sweep(cfg)?]),
        ExperimentKind::Mis => Ok(vec![mis(cfg)?]),
        ExperimentKind::Bounds => Ok(vec![bounds(cfg)?]),
    })
}

/// Run the experiment and write its CSV artifacts under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let built = tables(cfg)?;
    let hash = cfg.hash();
    let mut files = Vec::with_capacity(built.len());
    for table in &built {
        files.push(table.write(&cfg.out, hash, cfg.seed)?);
    }
    Ok(RunArtifacts { files })
}

// ---------------------------------------------------------------------------
// channel_sim
// ---------------------------------------------------------------------------

const CHANNEL_SIM_COLUMNS: &[&str] = &[
    "N",
    "sigma2_wv",
    "mean_log2_rank",
    "divergence_bits",
    "rank_bound_bits",
    "elias_mean_bits",
    "elias_bound_bits",
    "trials",
    "seed",
];

/// One-shot channel simulation on the Gaussian test channel: per trial the
/// encoder races a fresh marginal pool for the posterior target and codes
/// the winner's exponential rank. Emits the empirical rank/codelength
/// statistics next to the bounds they must respect.
fn channel_sim(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new("channel_sim.csv", CHANNEL_SIM_COLUMNS);
    let mut grid = Vec::new();
    for &n in &cfg.n {
        for &s2 in &cfg.sigma2 {
            grid.push((n, s2));
        }
    }
    for (gp, &(n, s2)) in grid.iter().enumerate() {
        let channel = GaussChannel::new(1.0, s2)?;
        let marginal = channel.marginal();
        let outs: Vec<(f64, f64, f64)> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let ts = RandomStream::new(cfg.seed, gp as u64 * cfg.trials + trial);
                let v = channel.draw_source(&ts.substream(1), 0);
                let target = channel.target(v);
                let pool_stream = ts.substream(2);
                let lw: Vec<f64> = (0..n)
                    .map(|i| {
                        let w = marginal.inv_cdf(pool_stream.uniform(i));
                        target.log_density(w) - marginal.log_density(w)
                    })
                    .collect();
                let race = ts.substream(3);
                let sel = select_index(&race, n, |i| lw[i as usize])?;
                let rank = rank_of(&race, n, sel.index);
                let lambda = normalized_weights(&lw)?;
                let divergence: f64 = lambda
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| p * (p * n as f64).log2())
                    .sum();
                let elias = IndexCoder::EliasDelta.code_len_bits(rank)? as f64;
                Ok(((rank as f64).log2(), divergence, elias))
            })
            .collect::<Result<_>>()?;
        let t = cfg.trials as f64;
        let mean_log2_rank = outs.iter().map(|o| o.0).sum::<f64>() / t;
        let divergence_bits = outs.iter().map(|o| o.1).sum::<f64>() / t;
        let elias_mean = outs.iter().map(|o| o.2).sum::<f64>() / t;
        // Elias-delta codewords stay within the max-entropy budget for the
        // observed mean log-rank plus the 4-bit coder overhead.
        let elias_bound = mean_log2_rank + (mean_log2_rank + 1.0).log2() + 5.0;
        table.push(&[
            Cell::U(n),
            Cell::F(s2),
            Cell::F(mean_log2_rank),
            Cell::F(divergence_bits),
            Cell::F(mean_log_rank_bound(divergence_bits)),
            Cell::F(elias_mean),
            Cell::F(elias_bound),
            Cell::U(cfg.trials),
            Cell::U(cfg.seed),
        ])?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// match_prob
// ---------------------------------------------------------------------------

const MATCH_PROB_COLUMNS: &[&str] = &[
    "N",
    "L",
    "rate_bits",
    "sigma2_wv",
    "p_match",
    "ci_lo",
    "ci_hi",
    "trials",
    "seed",
];

/// Encoder/decoder agreement frequency for bin-restricted decoding, one row
/// per (pool size, bin count, noise variance); the side-information channel
/// uses the same variance for both observation legs.
fn match_prob(cfg: &ExperimentConfig) -> Result<Table> {
    let mut grid = Vec::new();
    for &n in &cfg.n {
        for &l in &cfg.l {
            for &s2 in &cfg.sigma2 {
                grid.push((n, l, s2));
            }
        }
    }
    let rows: Vec<(u64, u64, f64, f64, f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(gp, &(n, l, s2))| {
            let channel = SideInfoChannel::new(1.0, s2, s2)?;
            let est = mismatch_probability(
                &channel,
                n,
                l,
                BinMode::IndexLsb,
                cfg.trials,
                &RandomStream::new(cfg.seed, gp as u64),
            )?;
            // Report the match probability; the interval endpoints swap
            // under the complement.
            Ok((n, l, s2, 1.0 - est.p_hat, 1.0 - est.ci_hi, 1.0 - est.ci_lo))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new("match_prob.csv", MATCH_PROB_COLUMNS);
    for (n, l, s2, p_match, lo, hi) in rows {
        table.push(&[
            Cell::U(n),
            Cell::U(l),
            Cell::F((l as f64).log2()),
            Cell::F(s2),
            Cell::F(p_match),
            Cell::F(lo),
            Cell::F(hi),
            Cell::U(cfg.trials),
            Cell::U(cfg.seed),
        ])?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// rd_curve and feedback_sweep share the round loop
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
struct RoundAgg {
    forward_bits: u64,
    forward_bits_nominal: u64,
    feedback_bits: u64,
    sq_err: f64,
    mismatches: u64,
    detected: u64,
    undetected: u64,
}

impl RoundAgg {
    fn add(&mut self, other: &RoundAgg) {
        self.forward_bits += other.forward_bits;
        self.forward_bits_nominal += other.forward_bits_nominal;
        self.feedback_bits += other.feedback_bits;
        self.sq_err += other.sq_err;
        self.mismatches += other.mismatches;
        self.detected += other.detected;
        self.undetected += other.undetected;
    }
}

/// One trial of `k` independent coordinates through the feedback protocol.
fn block_trial(
    channel: &SideInfoChannel,
    n: u64,
    fb: &FeedbackConfig,
    k: u32,
    stream: &RandomStream,
) -> Result<RoundAgg> {
    let mut agg = RoundAgg::default();
    for j in 0..u64::from(k) {
        let cs = stream.substream(j);
        let (v, t) = channel.draw_source(&cs.substream(1), 0);
        let tr = run_feedback_round(channel, n, v, t, fb, &cs.substream(2), &cs.substream(3))?;
        agg.forward_bits += u64::from(tr.forward_bits);
        agg.forward_bits_nominal += u64::from(tr.forward_bits_nominal);
        agg.feedback_bits += u64::from(tr.feedback_bits);
        agg.sq_err += (tr.v_hat - v) * (tr.v_hat - v);
        agg.mismatches += u64::from(tr.mismatch_first);
        agg.detected += u64::from(tr.detected);
        agg.undetected += u64::from(tr.undetected_error);
    }
    Ok(agg)
}

fn aggregate_point(
    cfg: &ExperimentConfig,
    gp: usize,
    channel: &SideInfoChannel,
    n: u64,
    fb: &FeedbackConfig,
    k: u32,
) -> Result<RoundAgg> {
    let per_trial: Vec<RoundAgg> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let ts = RandomStream::new(cfg.seed, gp as u64 * cfg.trials + trial);
            block_trial(channel, n, fb, k, &ts)
        })
        .collect::<Result<_>>()?;
    let mut total = RoundAgg::default();
    for a in &per_trial {
        total.add(a);
    }
    Ok(total)
}

/// Modes crossed with their width grids, in config order.
fn mode_points(cfg: &ExperimentConfig) -> Vec<FeedbackMode> {
    let mut out = Vec::new();
    for &mk in &cfg.modes {
        match mk {
            ModeKind::None | ModeKind::Full => out.push(mk.with_width(0)),
            ModeKind::Partial => out.extend(cfg.l2.iter().map(|&w| mk.with_width(w))),
            ModeKind::Hashed => out.extend(cfg.h.iter().map(|&w| mk.with_width(w))),
        }
    }
    out
}

/// Rate–distortion table: blocks of `k` coordinates per trial, nominal
/// forward-bit accounting per sample.
fn rd_curve(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new("rd_points.csv", RD_COLUMNS);
    let modes = mode_points(cfg);
    let mut gp = 0usize;
    for &k in &cfg.k {
        for &n in &cfg.n {
            for &l in &cfg.l {
                for &s2 in &cfg.sigma2 {
                    for &mode in &modes {
                        let channel = SideInfoChannel::new(1.0, s2, s2)?;
                        let fb = FeedbackConfig { l, mode, hash_seed: cfg.seed };
                        let total = aggregate_point(cfg, gp, &channel, n, &fb, k)?;
                        let samples = (cfg.trials * u64::from(k)) as f64;
                        let mse = total.sq_err / samples;
                        let row = RdRow {
                            k,
                            n,
                            l,
                            mode,
                            sigma2_wv: s2,
                            rate_bits_per_sample: total.forward_bits_nominal as f64 / samples,
                            distortion_db: db_of_mse(mse),
                            mse,
                            p_mismatch: total.mismatches as f64 / samples,
                            undetected_err_rate: total.undetected as f64 / samples,
                            trials: cfg.trials,
                        };
                        table.push(&row.cells(cfg.seed))?;
                        gp += 1;
                    }
                }
            }
        }
    }
    Ok(table)
}

const FEEDBACK_COLUMNS: &[&str] = &[
    "N",
    "L",
    "mode",
    "L2_or_h",
    "sigma2_wv",
    "p_mismatch",
    "detected_rate",
    "undetected_err_rate",
    "forward_bits_mean",
    "forward_bits_nominal_mean",
    "feedback_bits_mean",
    "rate_formula_bits",
    "trials",
    "seed",
];

/// Verification sweep across feedback modes: scalar rounds, bit accounting
/// for both conventions, and the closed-form rate identity column.
fn feedback_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new("feedback_sweep.csv", FEEDBACK_COLUMNS);
    let modes = mode_points(cfg);
    let mut gp = 0usize;
    for &n in &cfg.n {
        for &l in &cfg.l {
            for &s2 in &cfg.sigma2 {
                for &mode in &modes {
                    let channel = SideInfoChannel::new(1.0, s2, s2)?;
                    let fb = FeedbackConfig { l, mode, hash_seed: cfg.seed };
                    let total = aggregate_point(cfg, gp, &channel, n, &fb, 1)?;
                    let t = cfg.trials as f64;
                    let p_mismatch = total.mismatches as f64 / t;
                    table.push(&[
                        Cell::U(n),
                        Cell::U(l),
                        Cell::S(mode.name()),
                        Cell::U(u64::from(mode.width())),
                        Cell::F(s2),
                        Cell::F(p_mismatch),
                        Cell::F(total.detected as f64 / t),
                        Cell::F(total.undetected as f64 / t),
                        Cell::F(total.forward_bits as f64 / t),
                        Cell::F(total.forward_bits_nominal as f64 / t),
                        Cell::F(total.feedback_bits as f64 / t),
                        Cell::F(feedback_rate_formula(n, l, p_mismatch)),
                        Cell::U(cfg.trials),
                        Cell::U(cfg.seed),
                    ])?;
                    gp += 1;
                }
            }
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// mis
// ---------------------------------------------------------------------------

/// Stratified-race vs sorted-baseline comparison over the pool-size grid,
/// one (m, d) model per grid pair.
fn mis(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new("mis_results.csv", MIS_COLUMNS);
    let mut gp = 0u64;
    for &m in &cfg.m {
        for &d in &cfg.d {
            let rows = mis_experiment(m, d, &cfg.n, cfg.trials, &RandomStream::new(cfg.seed, gp))?;
            for row in &rows {
                table.push(&mis_cells(row, cfg.seed))?;
            }
            gp += 1;
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

/// The reference finite-alphabet channel for bound evaluation: uniform pool
/// law over four symbols, encoder target (1/2, 1/4, 1/8, 1/8), decoder
/// target reversed, conditioning symbol 0. Density ratios are bounded by
/// ω = 2, so every moment is finite and all three bound variants apply.
fn reference_discrete_fixture() -> Result<(DiscreteDist, DiscreteDist, DiscreteDist, usize)> {
    Ok((
        DiscreteDist::new(&[0.25; 4])?,
        DiscreteDist::new(&[0.5, 0.25, 0.125, 0.125])?,
        DiscreteDist::new(&[0.125, 0.125, 0.25, 0.5])?,
        0,
    ))
}

/// Bound suite against Monte-Carlo truth on the reference discrete channel:
/// per pool size a "per-pool" asymptote row, a "finite-pool" row, and one
/// "concentration" row per slack value, all sharing the measured
/// conditional mismatch probability.
fn bounds(cfg: &ExperimentConfig) -> Result<Table> {
    let (p_y, p_c, q_c, y1) = reference_discrete_fixture()?;
    let inp = MatchBoundInputs::from_discrete(&p_y, &p_c, &q_c, y1)?;
    let d2 = d_moment_discrete(2, &p_y, &p_c)?;
    let mut table = Table::new("bounds.csv", BOUND_COLUMNS);
    for (gp, &n_bar) in cfg.n.iter().enumerate() {
        let est = conditional_mismatch_discrete(
            &p_y,
            &p_c,
            &q_c,
            y1,
            n_bar,
            cfg.trials,
            &RandomStream::new(cfg.seed, gp as u64),
        )?;
        let ci_lo = (est.p_hat - 3.0 * est.std_err).max(0.0);
        let ci_hi = (est.p_hat + 3.0 * est.std_err).min(1.0);
        let mut push = |variant: &'static str, mu: f64, bound: f64| {
            let report = BoundReport {
                variant,
                n: n_bar,
                omega: inp.omega,
                d2,
                d3: inp.d3_rev,
                d5: inp.d5_rev,
                mu,
                bound,
                p_hat: est.p_hat,
                ci_lo,
                ci_hi,
            };
            table.push(&bound_cells(&report, est.trials, cfg.seed))
        };
        // Pool-size-free form: the finite-pool correction replaced by its
        // large-pool limit of one.
        push("per-pool", 1.0, 1.0 - 1.0 / (1.0 + inp.lambda / inp.beta))?;
        push(
            "finite-pool",
            mu_finite_pool(&inp, n_bar)?,
            mismatch_bound(&inp, n_bar)?,
        )?;
        for &eps in &cfg.eps {
            let pool_size = n_bar + 1;
            push(
                "concentration",
                mu_concentration(inp.lambda, inp.beta, inp.omega, pool_size, eps)?,
                mismatch_bound_concentration(inp.lambda, inp.beta, inp.omega, pool_size, eps)?,
            )?;
        }
    }
    Ok(table)
}
