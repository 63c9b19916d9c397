//! Importance matching: two races sharing the same pool and exponentials
//! but holding different targets. How often do they pick different items?
//!
//! On a four-symbol channel with density ratios bounded by 2, this example
//! evaluates the mismatch probability conditioned on the first party
//! winning with a specific symbol, and stacks it against the three bounds
//! the library provides:
//!   per-pool        — large-pool asymptote of the exact per-pool law
//!   finite-pool     — moment-corrected bound for N in the small regime
//!   concentration   — alternative correction from a weight-sum tail bound
//!
//! Run with: cargo run --release --example matching_bounds

use iscsim::matching::{
    conditional_mismatch_discrete, mismatch_bound, mismatch_bound_concentration,
    mu_concentration, mu_finite_pool, MatchBoundInputs,
};
use iscsim::stream::RandomStream;
use iscsim::DiscreteDist;

fn main() -> iscsim::Result<()> {
    // Shared pool law is uniform; the two parties chase mirrored targets.
    let p_y = DiscreteDist::new(&[0.25; 4])?;
    let p_cond = DiscreteDist::new(&[0.5, 0.25, 0.125, 0.125])?;
    let q_cond = DiscreteDist::new(&[0.125, 0.125, 0.25, 0.5])?;
    let y1 = 0; // condition on the encoder winning with symbol 0

    let inp = MatchBoundInputs::from_discrete(&p_y, &p_cond, &q_cond, y1)?;
    println!(
        "weight-ratio bound w = {:.1}, lambda = {:.3}, beta = {:.3}",
        inp.omega, inp.lambda, inp.beta
    );
    let asymptote = 1.0 - 1.0 / (1.0 + inp.lambda / inp.beta);
    println!("per-pool asymptote: {asymptote:.4}\n");

    println!(
        "{:>6} {:>12} {:>12} {:>14} {:>14}",
        "pool", "measured", "3*stderr", "finite-pool", "concentration"
    );
    let eps = 0.1;
    let mut last = f64::INFINITY;
    for n_bar in [8u64, 64, 512] {
        let est = conditional_mismatch_discrete(
            &p_y,
            &p_cond,
            &q_cond,
            y1,
            n_bar,
            60_000,
            &RandomStream::new(31, n_bar),
        )?;
        let fin = mismatch_bound(&inp, n_bar)?;
        let conc = mismatch_bound_concentration(inp.lambda, inp.beta, inp.omega, n_bar + 1, eps)?;
        println!(
            "{:>6} {:>12.4} {:>12.4} {:>14.4} {:>14.4}",
            n_bar,
            est.p_hat,
            3.0 * est.std_err,
            fin,
            conc
        );
        assert!(est.p_hat - 3.0 * est.std_err <= fin, "bound must dominate");
        // The finite-pool correction factor decreases toward 1 as the pool
        // grows, pulling the bound down to the asymptote.
        let mu = mu_finite_pool(&inp, n_bar)?;
        assert!(mu < last && mu >= 1.0);
        last = mu;
    }

    // The two corrections are informative in different regimes: the
    // finite-pool factor shrinks monotonically toward 1, while the
    // concentration factor is dominated by an exponential tail term until
    // (N-1) * eps^2 >> w^2 and only then collapses toward 1.
    println!("\ncorrection factors (finite-pool is monotone; concentration needs large N):");
    for n_bar in [8u64, 64, 512, 4096, 1 << 16, 1 << 20] {
        println!(
            "  N = {:>8}: finite-pool mu = {:>8.4}, concentration mu' = {:>12.4}",
            n_bar,
            mu_finite_pool(&inp, n_bar)?,
            mu_concentration(inp.lambda, inp.beta, inp.omega, n_bar + 1, eps)?
        );
    }
    Ok(())
}
