//! Compression with decoder side information and decision feedback.
//!
//! The encoder observes V, the decoder observes a correlated T. Both race
//! the same pool of W-marginal samples — the encoder toward p(W|V), the
//! decoder toward p(W|T) — and the encoder sends only the LSB bin of its
//! winner. When the decoder's own race lands elsewhere, a short feedback
//! exchange repairs the disagreement:
//!   full     — decoder echoes its winner; mismatches always corrected
//!   partial  — decoder echoes L2 extra rank bits; cheap but can miss
//!   hashed   — decoder echoes an h-bit hash; detection is probabilistic
//!
//! Run with: cargo run --release --example side_info_feedback

use iscsim::side_info::{
    feedback_rate_formula, mismatch_probability, run_feedback_round, BinMode,
};
use iscsim::stream::RandomStream;
use iscsim::{FeedbackConfig, FeedbackMode, SideInfoChannel};

fn main() -> iscsim::Result<()> {
    let channel = SideInfoChannel::new(1.0, 0.01, 0.01)?;
    let n = 1u64 << 12;
    let l = 2u64;
    let trials = 4_000u64;

    println!(
        "channel: I(W;V|T) = {:.3} bits, fused-estimator MMSE floor = {:.2} dB",
        channel.mutual_info_bits(),
        iscsim::gauss::db_of_mse(channel.fused_mmse())
    );

    // How often do the two races disagree before any feedback?
    let est = mismatch_probability(
        &channel,
        n,
        l,
        BinMode::IndexLsb,
        trials,
        &RandomStream::new(400, 0),
    )?;
    println!(
        "raw mismatch probability at N = {n}, L = {l}: {:.3} [{:.3}, {:.3}]",
        est.p_hat, est.ci_lo, est.ci_hi
    );
    println!(
        "closed-form expected rate with full feedback: {:.3} bits/sample\n",
        feedback_rate_formula(n, l, est.p_hat)
    );

    let modes = [
        FeedbackMode::None,
        FeedbackMode::Full,
        FeedbackMode::Partial { l2: 3 },
        FeedbackMode::Hashed { h: 1 },
        FeedbackMode::Hashed { h: 4 },
    ];
    println!(
        "{:<14} {:>9} {:>9} {:>11} {:>11} {:>9}",
        "mode", "fwd bits", "fb bits", "mismatch", "undetected", "mse(dB)"
    );
    for (mi, &mode) in modes.iter().enumerate() {
        let fb = FeedbackConfig { l, mode, hash_seed: 400 };
        let mut fwd = 0u64;
        let mut back = 0u64;
        let mut mism = 0u64;
        let mut undet = 0u64;
        let mut sq = 0.0;
        for t in 0..trials {
            let ts = RandomStream::new(500 + mi as u64, t);
            let (v, tt) = channel.draw_source(&ts.substream(1), 0);
            let tr = run_feedback_round(
                &channel,
                n,
                v,
                tt,
                &fb,
                &ts.substream(2),
                &ts.substream(3),
            )?;
            fwd += u64::from(tr.forward_bits_nominal);
            back += u64::from(tr.feedback_bits);
            mism += u64::from(tr.mismatch_first);
            undet += u64::from(tr.undetected_error);
            sq += (tr.v_hat - v) * (tr.v_hat - v);
        }
        let tf = trials as f64;
        println!(
            "{:<14} {:>9.3} {:>9.3} {:>11.4} {:>11.4} {:>9.2}",
            format!("{}({})", mode.name(), mode.width()),
            fwd as f64 / tf,
            back as f64 / tf,
            mism as f64 / tf,
            undet as f64 / tf,
            iscsim::gauss::db_of_mse(sq / tf)
        );
    }
    println!(
        "\nfull feedback pays rank bits only on mismatch; hashed feedback trades \
         \nundetected errors (≈ 2^-h of mismatches survive) for a 1-bit echo."
    );
    Ok(())
}
