//! Small numeric helpers shared across the crate: bit mixing, the normal
//! quantile used to turn counters into Gaussian variates, Riemann zeta for
//! power-law code lengths, and confidence-interval utilities.

/// 64-bit finalizer (SplitMix64): a bijective avalanche mix. Feeding it a
/// Weyl sequence `key + i*PHI64` yields a counter-based generator that passes
/// standard statistical batteries.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Golden-ratio increment for Weyl sequences.
pub const PHI64: u64 = 0x9e37_79b9_7f4a_7c15;

/// FNV-1a over bytes; used to fingerprint canonicalized config text so every
/// CSV artifact can state which configuration produced it.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Inverse standard normal CDF (Acklam's rational approximation, relative
/// error below 1.2e-9 over (0,1)). The bias this leaves in Monte-Carlo
/// estimates is orders of magnitude below their statistical error, and the
/// evaluation is branch-light enough for 10^8-draw pools.
pub fn inv_norm_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        // 1 - p is exact here (p >= 1/2), so the plain logarithm keeps
        // full precision all the way into the tail.
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Riemann zeta on `s > 1` by Euler–Maclaurin: direct sum over the first
/// `n` terms plus tail corrections. Accurate to ~1e-12 for `s >= 1.05`.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta normalization needs exponent > 1");
    let n = 32usize;
    let mut sum = 0.0;
    for k in 1..=n {
        sum += (k as f64).powf(-s);
    }
    let nf = n as f64;
    // Direct sum included f(n), so the boundary term enters with -1/2.
    let tail = nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s);
    // Bernoulli corrections: B2/2! = 1/12, B4/4! = -1/720, B6/6! = 1/30240.
    let t1 = s * nf.powf(-s - 1.0) / 12.0;
    let t2 = -s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0;
    let t3 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * nf.powf(-s - 5.0) / 30240.0;
    sum + tail + t1 + t2 + t3
}

/// `log2(sum_i 2^.. )`-style stabilizer in the natural-log domain:
/// returns `ln(sum_i exp(x_i))`, ignoring `-inf` entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m; // empty or all -inf (or a +inf/NaN poisons it, caller checks)
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Wilson score interval for a binomial proportion.
///
/// Returns `(p_hat, lo, hi)` at confidence given by the normal quantile `z`
/// (1.96 for 95%).
pub fn wilson_ci(successes: u64, trials: u64, z: f64) -> (f64, f64, f64) {
    if trials == 0 {
        return (f64::NAN, 0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (p, (center - half).max(0.0), (center + half).min(1.0))
}

/// Upper-tail p-value of a chi-square statistic with `df` degrees of freedom.
pub fn chi_sq_pvalue(stat: f64, df: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(df / 2.0, stat / 2.0)
}

/// Two-sample Kolmogorov-Smirnov test: `(D, p)` where `D` is the largest CDF
/// gap and `p` the asymptotic two-sided p-value (Stephens' small-sample
/// correction). Suitable for sample sizes in the thousands and up.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    if a.is_empty() || b.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    // Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
    let mut p = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        p += 2.0 * sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (d, p.clamp(0.0, 1.0))
}

/// Plug-in Shannon entropy (bits) of a sample of non-negative counts.
pub fn plugin_entropy_bits(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.log2()
        })
        .sum()
}
