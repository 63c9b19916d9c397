//! Property tests for the structural invariants of the library: race
//! determinism and scale-freeness, rank bijectivity, uniquely decodable
//! codes, exact matching identities, and config canonicalization.

use proptest::prelude::*;

use iscsim::codec::{BitReader, BitWriter, IndexCoder};
use iscsim::config::{ExperimentConfig, ExperimentKind, ModeKind};
use iscsim::matching::{
    conditional_match_probability, joint_match_probability, per_pool_mismatch_bound,
    race_marginals,
};
use iscsim::race::{index_with_rank, normalized_weights, rank_of, select_index,
    select_index_pruned};
use iscsim::stream::RandomStream;

fn log_weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0..20.0f64, 1..40)
}

proptest! {
    /// The race minimizes ratios, so multiplying every weight by a common
    /// factor (adding a constant in log domain) never changes the winner.
    #[test]
    fn winner_ignores_common_log_weight_shifts(
        key in any::<u64>(),
        sid in any::<u64>(),
        lws in log_weights(),
        c in -30.0..30.0f64,
    ) {
        let race = RandomStream::new(key, sid);
        let n = lws.len() as u64;
        let base = select_index(&race, n, |i| lws[i as usize]).unwrap();
        let shifted = select_index(&race, n, |i| lws[i as usize] + c).unwrap();
        prop_assert_eq!(base.index, shifted.index);
        prop_assert_eq!(base.exp.to_bits(), shifted.exp.to_bits());
        // Scores move by exactly the shift.
        prop_assert!((shifted.score_ln + c - base.score_ln).abs() < 1e-9_f64.max(1e-12 * base.score_ln.abs()));
    }

    /// Threshold pruning is an optimization, not an approximation: winners
    /// are bit-identical to the full scan whenever the bound is valid.
    #[test]
    fn pruned_race_matches_full_scan_bit_for_bit(
        key in any::<u64>(),
        sid in any::<u64>(),
        lws in log_weights(),
        slack in 0.0..8.0f64,
    ) {
        let race = RandomStream::new(key, sid);
        let n = lws.len() as u64;
        let bound = lws.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + slack;
        let full = select_index(&race, n, |i| lws[i as usize]).unwrap();
        let pruned = select_index_pruned(&race, n, |i| lws[i as usize], bound).unwrap();
        prop_assert_eq!(full.index, pruned.index);
        prop_assert_eq!(full.exp.to_bits(), pruned.exp.to_bits());
        prop_assert_eq!(full.score_ln.to_bits(), pruned.score_ln.to_bits());
    }

    /// Exponential ranks are a bijection: every item has a distinct rank in
    /// 1..=N and the inverse lookup recovers the item.
    #[test]
    fn ranks_are_a_permutation_with_exact_inverse(
        key in any::<u64>(),
        sid in any::<u64>(),
        n in 1u64..128,
    ) {
        let race = RandomStream::new(key, sid);
        let mut ranks: Vec<u64> = (0..n).map(|i| rank_of(&race, n, i)).collect();
        for (i, &r) in ranks.iter().enumerate() {
            prop_assert_eq!(index_with_rank(&race, n, r).unwrap(), i as u64);
        }
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (1..=n).collect::<Vec<_>>());
    }

    /// Counter-based streams stay inside the open unit interval and produce
    /// strictly positive exponentials.
    #[test]
    fn stream_draws_stay_in_range(
        key in any::<u64>(),
        sid in any::<u64>(),
        tag in any::<u64>(),
        i in any::<u64>(),
    ) {
        let s = RandomStream::new(key, sid).substream(tag);
        let u = s.uniform(i);
        prop_assert!(u > 0.0 && u < 1.0);
        let e = s.exp_draw(i);
        prop_assert!(e > 0.0 && e.is_finite());
        // Replaying the same coordinates reproduces the same draw.
        let again = RandomStream::new(key, sid).substream(tag);
        prop_assert_eq!(u.to_bits(), again.uniform(i).to_bits());
    }

    /// A concatenated stream of codewords decodes back to the same ranks
    /// with every bit accounted for — unique decodability in use.
    #[test]
    fn elias_codeword_streams_are_uniquely_decodable(
        ks in prop::collection::vec(1u64..(1 << 62), 1..12),
    ) {
        let coder = IndexCoder::elias_delta();
        let mut w = BitWriter::new();
        let mut expected_bits = 0u64;
        for &k in &ks {
            coder.encode_into(k, &mut w).unwrap();
            expected_bits += coder.code_len_bits(k).unwrap();
        }
        prop_assert_eq!(w.len_bits() as u64, expected_bits);
        let bytes = w.as_bytes();
        let mut r = BitReader::new(bytes, expected_bits as usize);
        for &k in &ks {
            prop_assert_eq!(coder.decode_from(&mut r).unwrap(), k);
        }
        prop_assert_eq!(r.bits_remaining(), 0);
    }

    /// Same property for the power-law coder over its table domain.
    #[test]
    fn power_law_codeword_streams_are_uniquely_decodable(
        exponent in 1.05..4.0f64,
        ks in prop::collection::vec(1u64..1000, 1..10),
    ) {
        let coder = IndexCoder::zipf(exponent).unwrap();
        let mut w = BitWriter::new();
        let mut expected_bits = 0u64;
        for &k in &ks {
            coder.encode_into(k, &mut w).unwrap();
            expected_bits += coder.code_len_bits(k).unwrap();
        }
        prop_assert_eq!(w.len_bits() as u64, expected_bits);
        let mut r = BitReader::new(w.as_bytes(), expected_bits as usize);
        for &k in &ks {
            prop_assert_eq!(coder.decode_from(&mut r).unwrap(), k);
        }
        prop_assert_eq!(r.bits_remaining(), 0);
    }

    /// Closed-form matching identities: marginals normalize, the joint is
    /// Fréchet-dominated by both marginals, and the per-pool mismatch bound
    /// dominates the exact conditional mismatch.
    #[test]
    fn per_pool_bound_dominates_exact_conditional_mismatch(
        (wp, wq, k) in (1usize..20).prop_flat_map(|len| (
            prop::collection::vec(0.01..100.0f64, len),
            prop::collection::vec(0.01..100.0f64, len),
            0..len,
        )),
    ) {
        let mp = race_marginals(&wp).unwrap();
        let mq = race_marginals(&wq).unwrap();
        prop_assert!((mp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let joint = joint_match_probability(&wp, &wq, k).unwrap();
        prop_assert!(joint <= mp[k].min(mq[k]) + 1e-12);
        let cond = conditional_match_probability(&wp, &wq, k).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&cond));
        prop_assert!((joint / mp[k] - cond).abs() < 1e-9);
        let bound = per_pool_mismatch_bound(&wp, &wq, k).unwrap();
        prop_assert!(1.0 - cond <= bound + 1e-9, "mismatch {} > bound {}", 1.0 - cond, bound);
    }

    /// Normalized race weights form a distribution and ignore common shifts.
    #[test]
    fn normalized_weights_form_a_shift_invariant_distribution(
        lws in log_weights(),
        c in -25.0..25.0f64,
    ) {
        let a = normalized_weights(&lws).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let shifted: Vec<f64> = lws.iter().map(|x| x + c).collect();
        let b = normalized_weights(&shifted).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    /// A config's canonical text reparses to the same canonical text and
    /// hash, for every experiment kind and any grid contents.
    #[test]
    fn canonical_config_text_is_a_fixed_point(
        kind_idx in 0usize..6,
        n in prop::collection::vec(1u64..4096, 1..4),
        l in prop::collection::vec(1u64..64, 1..3),
        l2 in prop::collection::vec(1u32..32, 1..3),
        h in prop::collection::vec(1u32..32, 1..3),
        sigma2 in prop::collection::vec(0.001..1.0f64, 1..3),
        k in prop::collection::vec(1u32..8, 1..3),
        m in prop::collection::vec(-3.0..3.0f64, 1..3),
        d in prop::collection::vec(0.1..4.0f64, 1..3),
        eps in prop::collection::vec(0.01..0.9f64, 1..3),
        mode_idx in prop::collection::vec(0usize..4, 1..4),
        trials in 1u64..1000,
    ) {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ALL[kind_idx]);
        cfg.n = n;
        cfg.l = l;
        cfg.l2 = l2;
        cfg.h = h;
        cfg.sigma2 = sigma2;
        cfg.k = k;
        cfg.m = m;
        cfg.d = d;
        cfg.eps = eps;
        cfg.modes = mode_idx.into_iter().map(|i| ModeKind::ALL[i]).collect();
        cfg.trials = trials;
        let text = cfg.canonical();
        let reparsed = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(reparsed.canonical(), text);
        prop_assert_eq!(reparsed.hash(), cfg.hash());
    }
}
