//! End-to-end acceptance checks, one per headline guarantee of the crate.
//!
//! Each test exercises a full pipeline at realistic scale, asserts the
//! stated tolerance, and asserts its own wall-clock budget so regressions
//! in either accuracy or speed fail loudly. Run serially for stable
//! timings:
//!
//! ```text
//! cargo test -p iscsim --test acceptance -- --test-threads=1
//! ```
//!
//! Every numeric target here is either a closed-form bound computed by the
//! library itself or an externally stated reference value; none are
//! regression snapshots of this implementation's own output.

use iscsim::codec::{
    encode, mean_log_rank_bound, pool_size_for_fidelity, proxy_tv_estimate, RateStats,
};
use iscsim::gauss::db_of_mse;
use iscsim::matching::{
    conditional_mismatch_discrete, mismatch_bound, mismatch_mc, mu_finite_pool, MatchBoundInputs,
};
use iscsim::mis::{chi_sq_gof_pvalue, mis_experiment, simulate_outputs, BimodalModel, MisScheme};
use iscsim::model::WeightModel;
use iscsim::race::{select_index, select_index_pruned};
use iscsim::side_info::{
    feedback_rate_formula, mismatch_probability, msb_hash, run_feedback_round,
    side_info_mismatch_bound, BinMode,
};
use iscsim::{
    DiscreteDist, FeedbackConfig, FeedbackMode, GaussChannel, IndexCoder, Normal, ProposalPool,
    RandomStream, SideInfoChannel,
};
use std::time::Instant;

/// Panic if the test exceeded its wall-clock budget.
fn assert_budget(t0: Instant, limit_secs: u64, name: &str) {
    let elapsed = t0.elapsed();
    assert!(
        elapsed.as_secs_f64() < limit_secs as f64,
        "{name}: took {elapsed:.1?}, budget is {limit_secs}s"
    );
}

/// The race winner law is exactly the normalized weights: on a fixed
/// four-item pool, each empirical selection frequency sits within three
/// binomial standard errors of its weight.
#[test]
fn a01_race_law_matches_normalized_weights() {
    let t0 = Instant::now();
    let w = [0.1f64, 0.2, 0.3, 0.4];
    let trials = 1_000_000u64;
    let mut counts = [0u64; 4];
    for trial in 0..trials {
        let race = RandomStream::new(101, trial).substream(3);
        let sel = select_index(&race, 4, |i| w[i as usize].ln()).unwrap();
        counts[sel.index as usize] += 1;
    }
    for i in 0..4 {
        let p_hat = counts[i] as f64 / trials as f64;
        let se = (w[i] * (1.0 - w[i]) / trials as f64).sqrt();
        assert!(
            (p_hat - w[i]).abs() <= 3.0 * se,
            "index {i}: frequency {p_hat:.5} vs weight {} (3se = {:.5})",
            w[i],
            3.0 * se
        );
    }
    assert_budget(t0, 5, "a01");
    println!(
        "PASS a01: frequencies {:?} match weights {w:?} within 3se ({:.2?})",
        counts.map(|c| c as f64 / trials as f64),
        t0.elapsed()
    );
}

/// One-shot codec rate bounds on a Gaussian channel: the measured mean
/// log-rank stays under the divergence-plus-constant bound, and the mean
/// universal codeword length stays under its log-log expansion.
#[test]
fn a02_rank_and_code_length_bounds_hold() {
    let t0 = Instant::now();
    let ch = GaussChannel::new(1.0, 0.01).unwrap();
    let n = 1u64 << 15;
    let trials = 10_000u64;
    let coder = IndexCoder::EliasDelta;
    let mut ranks = Vec::with_capacity(trials as usize);
    let mut div_sum = 0.0;
    for trial in 0..trials {
        let ts = RandomStream::new(202, trial);
        let v = ch.draw_source(&ts.substream(1), 0);
        let pool = ProposalPool::new(ts.substream(2), ch.marginal(), n);
        let model = WeightModel::new(ch.target(v), ch.marginal());
        let enc = encode(&pool, &model, &ts.substream(3), &coder).unwrap();
        ranks.push(enc.rank);
        div_sum += ch.divergence_bits(v);
    }
    let stats = RateStats::from_ranks(&ranks, &coder).unwrap();
    let mean_div = div_sum / trials as f64;
    let rank_bound = mean_log_rank_bound(mean_div);
    assert!(
        stats.mean_log2_rank <= rank_bound,
        "mean log2 rank {:.4} exceeds bound {:.4} (mean divergence {:.4})",
        stats.mean_log2_rank,
        rank_bound,
        mean_div
    );
    let m = stats.mean_log2_rank;
    let code_bound = m + (m + 1.0).log2() + 5.0;
    assert!(
        stats.mean_code_bits <= code_bound,
        "mean code bits {:.4} exceeds bound {:.4}",
        stats.mean_code_bits,
        code_bound
    );
    assert_budget(t0, 120, "a02");
    println!(
        "PASS a02: E[log2 K] = {:.4} <= {:.4}; code bits {:.4} <= {:.4} ({:.2?})",
        stats.mean_log2_rank,
        rank_bound,
        stats.mean_code_bits,
        code_bound,
        t0.elapsed()
    );
}

/// The pool-sizing rule delivers its fidelity guarantee: at the certified
/// pool size for slack 0.1, the measured proxy total variation between
/// simulated outputs and the target stays under the guaranteed 0.4 plus
/// the estimator's own confidence width.
#[test]
fn a03_certified_pool_size_meets_tv_target() {
    let t0 = Instant::now();
    let ch = GaussChannel::new(1.0, 0.25).unwrap();
    let v = 0.0;
    let d = ch.divergence_bits(v);
    let omega = ch.log_weight_bound(v).exp();
    let rule = pool_size_for_fidelity(d, omega, 0.1).unwrap();
    assert!((rule.tv_guarantee - 0.4).abs() < 1e-12);
    let model = WeightModel::new(ch.target(v), ch.marginal());
    let bound = ch.log_weight_bound(v);
    let trials = 128u64;
    let mut sim = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let ts = RandomStream::new(303, i);
        let pool = ProposalPool::new(ts.substream(2), ch.marginal(), rule.n);
        let sel =
            select_index_pruned(&ts.substream(3), rule.n, pool.log_weight_fn(&model), bound)
                .unwrap();
        sim.push(pool.item(sel.index));
    }
    let tv = proxy_tv_estimate(&sim, &ch.target(v), 16, 400, &RandomStream::new(304, 0)).unwrap();
    let limit = rule.tv_guarantee + (tv.ci_hi - tv.ci_lo);
    assert!(
        tv.tv <= limit,
        "proxy TV {:.4} exceeds guarantee {:.4} + CI width {:.4} at N = {}",
        tv.tv,
        rule.tv_guarantee,
        tv.ci_hi - tv.ci_lo,
        rule.n
    );
    assert_budget(t0, 120, "a03");
    println!(
        "PASS a03: N = {} (2^{:.2}), proxy TV {:.4} <= {:.4} ({:.2?})",
        rule.n,
        (rule.n as f64).log2(),
        tv.tv,
        limit,
        t0.elapsed()
    );
}

/// On the four-symbol reference channel the measured conditional mismatch
/// probability sits under both the per-pool asymptote and the finite-pool
/// bound at every pool size, and the finite-pool correction factor
/// decreases strictly toward one.
#[test]
fn a04_conditional_mismatch_under_both_bounds() {
    let t0 = Instant::now();
    let p_y = DiscreteDist::new(&[0.25; 4]).unwrap();
    let p_c = DiscreteDist::new(&[0.5, 0.25, 0.125, 0.125]).unwrap();
    let q_c = DiscreteDist::new(&[0.125, 0.125, 0.25, 0.5]).unwrap();
    let y1 = 0usize;
    let inp = MatchBoundInputs::from_discrete(&p_y, &p_c, &q_c, y1).unwrap();
    let asymptote = 1.0 - 1.0 / (1.0 + inp.lambda / inp.beta);
    let mut prev_mu = f64::INFINITY;
    let mut lines = Vec::new();
    for &n_bar in &[8u64, 64, 512] {
        let est = conditional_mismatch_discrete(
            &p_y,
            &p_c,
            &q_c,
            y1,
            n_bar,
            40_000,
            &RandomStream::new(404, n_bar),
        )
        .unwrap();
        let finite = mismatch_bound(&inp, n_bar).unwrap();
        let mu = mu_finite_pool(&inp, n_bar).unwrap();
        assert!(
            est.p_hat <= asymptote,
            "pool {n_bar}: mismatch {:.4} exceeds per-pool asymptote {asymptote:.4}",
            est.p_hat
        );
        assert!(
            est.p_hat <= finite,
            "pool {n_bar}: mismatch {:.4} exceeds finite-pool bound {finite:.4}",
            est.p_hat
        );
        assert!(mu > 1.0, "pool {n_bar}: correction factor {mu:.4} must stay above 1");
        assert!(
            mu < prev_mu,
            "pool {n_bar}: correction factor {mu:.4} did not decrease (prev {prev_mu:.4})"
        );
        prev_mu = mu;
        lines.push(format!("N_bar={n_bar}: p={:.4} <= {finite:.4}, mu={mu:.3}", est.p_hat));
    }
    assert_budget(t0, 300, "a04");
    println!(
        "PASS a04: asymptote {asymptote:.3}; {} ({:.2?})",
        lines.join("; "),
        t0.elapsed()
    );
}

/// Mismatch between two paired decoders is exactly zero when their targets
/// coincide and grows monotonically as the targets separate.
#[test]
fn a05_mismatch_grows_from_zero_with_target_separation() {
    let t0 = Instant::now();
    let mut prev = -1.0f64;
    let mut rates = Vec::new();
    for &m in &[0.0f64, 0.5, 1.0, 2.0] {
        let proposal = Normal::new(0.0, 1.0 + m * m).unwrap();
        let target_p = Normal::new(m, 1.0).unwrap();
        let target_q = Normal::new(-m, 1.0).unwrap();
        let stats = mismatch_mc(
            &proposal,
            &target_p,
            &target_q,
            64,
            100_000,
            &RandomStream::new(505, m.to_bits()),
        )
        .unwrap();
        if m == 0.0 {
            assert_eq!(
                stats.mismatches, 0,
                "identical targets must agree on every pool, got {} mismatches",
                stats.mismatches
            );
        }
        assert!(
            stats.p_hat >= prev,
            "separation {m}: mismatch {:.4} dropped below previous {prev:.4}",
            stats.p_hat
        );
        prev = stats.p_hat;
        rates.push(stats.p_hat);
    }
    assert_budget(t0, 60, "a05");
    println!(
        "PASS a05: mismatch over separations [0, 0.5, 1, 2] = {rates:?} ({:.2?})",
        t0.elapsed()
    );
}

/// The side-information mismatch probability stays under the
/// information-density integral bound at every bin count.
#[test]
fn a06_side_info_mismatch_under_integral_bound() {
    let t0 = Instant::now();
    let ch = SideInfoChannel::new(1.0, 0.01, 0.01).unwrap();
    let n = 1u64 << 15;
    let mut lines = Vec::new();
    for &l in &[2u64, 8, 32] {
        let est =
            mismatch_probability(&ch, n, l, BinMode::IndexLsb, 10_000, &RandomStream::new(606, l))
                .unwrap();
        let bound = side_info_mismatch_bound(&ch, 1, l, 0.1, 200_000, &RandomStream::new(607, l))
            .unwrap();
        assert!(
            est.p_hat <= bound,
            "L = {l}: mismatch {:.4} exceeds bound {bound:.4}",
            est.p_hat
        );
        lines.push(format!("L={l}: {:.4} <= {bound:.4}", est.p_hat));
    }
    assert_budget(t0, 300, "a06");
    println!("PASS a06: {} ({:.2?})", lines.join("; "), t0.elapsed());
}

/// Rate–distortion operating points of the decision-feedback scheme against
/// the stated reference table.
///
/// This check is expected to fail and is kept failing on purpose: the
/// faithful protocol cannot reach either reference row. Row 1's distortion
/// equals what a no-feedback decoder already achieves, yet its rate exceeds
/// the no-feedback rate — a dominated operating point the correction
/// protocol cannot produce (correcting mismatches strictly lowers
/// distortion). Row 2's distortion is below the floor achievable from the
/// side information alone in this geometry (var(V | T) at sigma2 = 0.001 is
/// -30 dB; the row asks for -24.41 dB *end-to-end including W*, but any
/// consistent fusion lands near -33 dB at this pool size, and the stated
/// 3.425 bits is likewise unreachable from below by the protocol's rate
/// identity). The assertions record the measured points so the gap stays
/// visible.
#[test]
fn a07_rd_operating_points_match_reference_table() {
    let t0 = Instant::now();
    struct Row {
        l2: u32,
        sigma2: f64,
        rate_target: f64,
        db_target: f64,
    }
    let rows = [
        Row { l2: 3, sigma2: 0.01, rate_target: 2.133, db_target: -20.61 },
        Row { l2: 16, sigma2: 0.001, rate_target: 3.425, db_target: -24.41 },
    ];
    let n = 1u64 << 15;
    let trials = 4000u64;
    let mut violations = Vec::new();
    for (ri, row) in rows.iter().enumerate() {
        let ch = SideInfoChannel::new(1.0, row.sigma2, row.sigma2).unwrap();
        let fb = FeedbackConfig {
            l: 2,
            mode: FeedbackMode::Partial { l2: row.l2 },
            hash_seed: 0,
        };
        let mut bits = 0u64;
        let mut sq = 0.0;
        for trial in 0..trials {
            let ts = RandomStream::new(707 + ri as u64, trial);
            let (v, t) = ch.draw_source(&ts.substream(1), 0);
            let tr =
                run_feedback_round(&ch, n, v, t, &fb, &ts.substream(2), &ts.substream(3)).unwrap();
            bits += u64::from(tr.forward_bits_nominal);
            sq += (tr.v_hat - v) * (tr.v_hat - v);
        }
        let rate = bits as f64 / trials as f64;
        let db = db_of_mse(sq / trials as f64);
        println!(
            "a07 row {}: L2 = {}, sigma2 = {}: measured ({rate:.4} bits, {db:.2} dB) \
             vs target ({} bits, {} dB)",
            ri + 1,
            row.l2,
            row.sigma2,
            row.rate_target,
            row.db_target
        );
        if (rate - row.rate_target).abs() > 0.05 {
            violations.push(format!(
                "row {}: rate {rate:.4} vs {} (tolerance 0.05)",
                ri + 1,
                row.rate_target
            ));
        }
        if (db - row.db_target).abs() > 0.5 {
            violations.push(format!(
                "row {}: distortion {db:.2} dB vs {} (tolerance 0.5)",
                ri + 1,
                row.db_target
            ));
        }
    }
    assert_budget(t0, 900, "a07");
    assert!(
        violations.is_empty(),
        "reference-table mismatches (see module docs for why these rows are \
         unreachable by the faithful protocol): {}",
        violations.join("; ")
    );
    println!("PASS a07 ({:.2?})", t0.elapsed());
}

/// With full feedback the measured forward rate matches the closed-form
/// identity rate(p) = log2 L + 1 + (log2 N - log2 L - 1) p, with the
/// mismatch probability estimated on an independent sample.
#[test]
fn a08_full_feedback_rate_matches_closed_form() {
    let t0 = Instant::now();
    let ch = SideInfoChannel::new(1.0, 0.01, 0.01).unwrap();
    let n = 1u64 << 15;
    let l = 2u64;
    let fb = FeedbackConfig { l, mode: FeedbackMode::Full, hash_seed: 0 };
    let half = 5_000u64;
    let run_half = |seed: u64| {
        let mut nominal = Vec::with_capacity(half as usize);
        let mut mismatches = 0u64;
        for trial in 0..half {
            let ts = RandomStream::new(seed, trial);
            let (v, t) = ch.draw_source(&ts.substream(1), 0);
            let tr =
                run_feedback_round(&ch, n, v, t, &fb, &ts.substream(2), &ts.substream(3)).unwrap();
            nominal.push(f64::from(tr.forward_bits_nominal));
            mismatches += u64::from(tr.mismatch_first);
        }
        (nominal, mismatches)
    };
    let (nominal_a, _) = run_half(808);
    let (_, mismatches_b) = run_half(809);
    let mean_a = nominal_a.iter().sum::<f64>() / half as f64;
    let var_a = nominal_a.iter().map(|x| (x - mean_a) * (x - mean_a)).sum::<f64>()
        / (half - 1) as f64;
    let p_b = mismatches_b as f64 / half as f64;
    let formula = feedback_rate_formula(n, l, p_b);
    let slope = (n as f64).log2() - (l as f64).log2() - 1.0;
    let se = (var_a / half as f64 + slope * slope * p_b * (1.0 - p_b) / half as f64).sqrt();
    assert!(
        (mean_a - formula).abs() <= 3.0 * se,
        "measured rate {mean_a:.4} vs formula {formula:.4} (3se = {:.4})",
        3.0 * se
    );
    assert_budget(t0, 120, "a08");
    println!(
        "PASS a08: measured {mean_a:.4} bits vs formula {formula:.4} at p = {p_b:.4} \
         (3se = {:.4}, {:.2?})",
        3.0 * se,
        t0.elapsed()
    );
}

/// Hashed feedback: the undetected-error rate at a one-bit hash lands in
/// the stated band, and the hash itself collides on distinct inputs at
/// exactly the nominal 2^-h rate.
#[test]
fn a09_hashed_feedback_error_and_collision_rates() {
    let t0 = Instant::now();
    let ch = SideInfoChannel::new(1.0, 0.01, 0.01).unwrap();
    let n = 1u64 << 12;
    let fb = FeedbackConfig { l: 2, mode: FeedbackMode::Hashed { h: 1 }, hash_seed: 0x5eed };
    let trials = 10_000u64;
    let mut undetected = 0u64;
    for trial in 0..trials {
        let ts = RandomStream::new(909, trial);
        let (v, t) = ch.draw_source(&ts.substream(1), 0);
        let tr =
            run_feedback_round(&ch, n, v, t, &fb, &ts.substream(2), &ts.substream(3)).unwrap();
        undetected += u64::from(tr.undetected_error);
    }
    let rate = undetected as f64 / trials as f64;
    assert!(
        (rate - 0.131).abs() <= 0.03,
        "undetected-error rate {rate:.4} outside 0.131 +/- 0.03"
    );

    // Collision law of the hash on synthetic distinct inputs drawn from the
    // protocol's own index-prefix space (11 bits here).
    let pairs = 100_000u64;
    let s = RandomStream::new(910, 0);
    let mut collision_lines = Vec::new();
    for &h in &[1u32, 2, 4] {
        let mut collisions = 0u64;
        for i in 0..pairs {
            let x = s.raw(4 * i) & 0x7ff;
            let mut y = s.raw(4 * i + 1) & 0x7ff;
            if y == x {
                y = (y + 1) & 0x7ff;
            }
            let seed = s.raw(4 * i + 2);
            collisions += u64::from(msb_hash(x, h, seed) == msb_hash(y, h, seed));
        }
        let p_hat = collisions as f64 / pairs as f64;
        let p = (0.5f64).powi(h as i32);
        let se = (p * (1.0 - p) / pairs as f64).sqrt();
        assert!(
            (p_hat - p).abs() <= 3.0 * se,
            "h = {h}: collision rate {p_hat:.5} vs nominal {p:.5} (3se = {:.5})",
            3.0 * se
        );
        collision_lines.push(format!("h={h}: {p_hat:.4}"));
    }
    assert_budget(t0, 300, "a09");
    println!(
        "PASS a09: undetected rate {rate:.4} in 0.131 +/- 0.03; collisions {} ({:.2?})",
        collision_lines.join(", "),
        t0.elapsed()
    );
}

/// On the far-separated bimodal source the stratified race keeps the target
/// output law (correct distortion moments, matched rate, healthy
/// goodness-of-fit) while the sorted-exponential baseline collapses onto
/// the wrong mode.
#[test]
fn a10_stratified_race_beats_sorted_baseline() {
    let t0 = Instant::now();
    let rows = mis_experiment(512.0, 1.0, &[512], 1 << 17, &RandomStream::new(99, 0)).unwrap();
    let ce = rows.iter().find(|r| r.scheme == MisScheme::CeIs).unwrap();
    let orc = rows.iter().find(|r| r.scheme == MisScheme::Orc).unwrap();
    assert!(
        (0.95..=1.05).contains(&ce.mean_dist),
        "stratified mean distortion {:.4} outside [0.95, 1.05]",
        ce.mean_dist
    );
    assert!(
        (1.8..=2.2).contains(&ce.var_dist),
        "stratified distortion variance {:.4} outside [1.8, 2.2]",
        ce.var_dist
    );
    assert!(
        (ce.rate_bits - orc.rate_bits).abs() <= 0.1,
        "rates differ by {:.4} bits (stratified {:.4}, baseline {:.4})",
        (ce.rate_bits - orc.rate_bits).abs(),
        ce.rate_bits,
        orc.rate_bits
    );

    let model = BimodalModel::new(512.0, 1.0).unwrap();
    let base = RandomStream::new(4242, 0);
    let x = -512.0;
    let ce_out = simulate_outputs(&model, x, 512, 30_000, &base, MisScheme::CeIs).unwrap();
    let orc_out = simulate_outputs(&model, x, 512, 30_000, &base, MisScheme::Orc).unwrap();
    let target = model.target_given(x);
    let p_ce = chi_sq_gof_pvalue(&ce_out, &target, 64).unwrap();
    let p_orc = chi_sq_gof_pvalue(&orc_out, &target, 64).unwrap();
    assert!(
        p_ce > 1e-3,
        "stratified goodness-of-fit rejected (p = {p_ce:.3e}) — output law is off"
    );
    assert!(
        p_orc < 1e-6,
        "baseline goodness-of-fit did not reject (p = {p_orc:.3e}) — it should collapse"
    );
    assert_budget(t0, 600, "a10");
    println!(
        "PASS a10: stratified mean {:.4}, var {:.4}, rate gap {:.4} bits; \
         GOF p = {p_ce:.2e} vs baseline {p_orc:.2e} ({:.2?})",
        ce.mean_dist,
        ce.var_dist,
        (ce.rate_bits - orc.rate_bits).abs(),
        t0.elapsed()
    );
}
