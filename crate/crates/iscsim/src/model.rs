//! Scalar probability models: densities, quantile transforms, and the
//! target/proposal weight models that drive races.
//!
//! Log-densities are natural-log throughout the race machinery; information
//! quantities exposed to users are in bits and say so in their names.

use crate::errors::{Error, Result};
use crate::special::{inv_norm_cdf, log_sum_exp, norm_cdf};

/// Anything with a (natural-log) density on the real line.
pub trait Density {
    fn log_density(&self, y: f64) -> f64;
}

/// Anything a counter-based stream can sample by inverse CDF.
pub trait QuantileFn {
    fn inv_cdf(&self, u: f64) -> f64;
}

/// Scalar normal distribution parameterized by mean and **variance**.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub var: f64,
}

impl Normal {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0 && var.is_finite() && mean.is_finite()) {
            return Err(Error::invalid(format!(
                "normal needs finite mean and positive variance, got ({mean}, {var})"
            )));
        }
        Ok(Normal { mean, var })
    }

    pub fn std_dev(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        norm_cdf((y - self.mean) / self.std_dev())
    }

    /// Equal-probability bin edges (len `bins - 1`), for histogram tests.
    pub fn equiprobable_edges(&self, bins: usize) -> Vec<f64> {
        (1..bins)
            .map(|i| self.inv_cdf(i as f64 / bins as f64))
            .collect()
    }
}

impl Density for Normal {
    #[inline(always)]
    fn log_density(&self, y: f64) -> f64 {
        let d = y - self.mean;
        -0.5 * ((2.0 * std::f64::consts::PI * self.var).ln() + d * d / self.var)
    }
}

impl QuantileFn for Normal {
    #[inline(always)]
    fn inv_cdf(&self, u: f64) -> f64 {
        self.mean + self.std_dev() * inv_norm_cdf(u)
    }
}

/// Finite distribution over symbols `0..k`, used for exactly checkable race
/// and matching fixtures. As a scalar model its support is the integer points
/// `0.0, 1.0, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("discrete distribution needs >= 1 symbol"));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid("discrete probabilities must be finite and >= 0"));
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("discrete probabilities sum to zero"));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(DiscreteDist { probs, cum })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn symbol_of(&self, y: f64) -> usize {
        let s = y.round();
        debug_assert!(s >= 0.0 && (s as usize) < self.probs.len());
        s as usize
    }
}

impl Density for DiscreteDist {
    /// Log-mass of the symbol at `y` (pmf, not a Lebesgue density; weight
    /// ratios between two discrete models are still exactly the mass ratios).
    fn log_density(&self, y: f64) -> f64 {
        let p = self.probs[self.symbol_of(y)];
        if p > 0.0 {
            p.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

impl QuantileFn for DiscreteDist {
    fn inv_cdf(&self, u: f64) -> f64 {
        // partition_point is fine on a sorted cumulative vector.
        let idx = self.cum.partition_point(|&c| c < u);
        idx.min(self.probs.len() - 1) as f64
    }
}

/// Two-component (or more) Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussMix {
    pub weights: Vec<f64>,
    pub comps: Vec<Normal>,
}

impl GaussMix {
    pub fn new(weights: &[f64], comps: &[Normal]) -> Result<Self> {
        if weights.len() != comps.len() || weights.is_empty() {
            return Err(Error::invalid("mixture needs matching, nonempty weights/components"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid("mixture weights must be >= 0 with positive sum"));
        }
        Ok(GaussMix {
            weights: weights.iter().map(|w| w / total).collect(),
            comps: comps.to_vec(),
        })
    }

    /// Even two-component mixture, the shape used by the bimodal experiments.
    pub fn symmetric_pair(m: f64, var: f64) -> Result<Self> {
        GaussMix::new(
            &[0.5, 0.5],
            &[Normal::new(m, var)?, Normal::new(-m, var)?],
        )
    }

    /// Per-component log-densities together with the mixture log-density,
    /// sharing one stabilized evaluation.
    pub fn mixture_densities(&self, y: f64) -> (Vec<f64>, f64) {
        let comps: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.comps)
            .map(|(w, c)| w.ln() + c.log_density(y))
            .collect();
        let mix = log_sum_exp(&comps);
        (comps, mix)
    }
}

impl Density for GaussMix {
    fn log_density(&self, y: f64) -> f64 {
        self.mixture_densities(y).1
    }
}

/// A target/proposal pair: the race weighs proposal item `y` by
/// `target(y) / proposal(y)`.
#[derive(Debug, Clone, Copy)]
pub struct WeightModel<T, P> {
    pub target: T,
    pub proposal: P,
    /// `ln sup_y target(y)/proposal(y)` when a finite bound is known; enables
    /// the threshold-pruned race and the fidelity/rate constants that assume
    /// a bounded ratio.
    pub log_ratio_bound: Option<f64>,
}

impl<T: Density, P: Density> WeightModel<T, P> {
    pub fn new(target: T, proposal: P) -> Self {
        WeightModel {
            target,
            proposal,
            log_ratio_bound: None,
        }
    }

    pub fn with_log_ratio_bound(mut self, ln_bound: f64) -> Self {
        self.log_ratio_bound = Some(ln_bound);
        self
    }

    /// Natural-log importance weight of a proposal located at `y`.
    #[inline(always)]
    pub fn log_weight(&self, y: f64) -> f64 {
        self.target.log_density(y) - self.proposal.log_density(y)
    }

    /// Density ratio `target(y)/proposal(y)`.
    #[inline(always)]
    pub fn weight(&self, y: f64) -> f64 {
        self.log_weight(y).exp()
    }
}

/// `ln sup_y N(t)/N(p)` for a Gaussian target/proposal pair, when finite.
///
/// The ratio is bounded iff the target is strictly narrower than the
/// proposal, or the two coincide.
pub fn gaussian_log_ratio_bound(target: &Normal, proposal: &Normal) -> Option<f64> {
    let (s1, s2) = (target.var, proposal.var);
    let (m1, m2) = (target.mean, proposal.mean);
    if s1 < s2 {
        // Maximize  -((y-m1)^2/s1 - (y-m2)^2/s2)/2 + ln sqrt(s2/s1).
        // Stationary point of the quadratic (coefficient 1/s1 - 1/s2 > 0 in
        // the minimized form, so this is the max of the ratio):
        let y = (m1 * s2 - m2 * s1) / (s2 - s1);
        let q = -0.5 * ((y - m1).powi(2) / s1 - (y - m2).powi(2) / s2);
        Some(0.5 * (s2 / s1).ln() + q)
    } else if s1 == s2 && m1 == m2 {
        Some(0.0)
    } else {
        None
    }
}

/// `sup` of the mass ratio for two distributions on the same finite symbol
/// set; `None` when the target puts mass where the proposal has none.
pub fn discrete_ratio_bound(target: &DiscreteDist, proposal: &DiscreteDist) -> Option<f64> {
    let mut best = 0.0f64;
    for i in 0..target.len() {
        let t = target.prob(i);
        let p = proposal.prob(i);
        if t > 0.0 {
            if p == 0.0 {
                return None;
            }
            best = best.max(t / p);
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_density_integrates_to_one() {
        let n = Normal::new(0.3, 2.0).unwrap();
        let mut acc = 0.0;
        let h = 0.001;
        let mut y = -20.0;
        while y < 20.0 {
            acc += n.log_density(y).exp() * h;
            y += h;
        }
        assert!((acc - 1.0).abs() < 1e-6);
    }

    #[test]
    fn discrete_quantile_hits_frequencies() {
        let d = DiscreteDist::new(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut counts = [0u64; 4];
        let n = 100_000;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64; // stratified grid
            counts[d.inv_cdf(u) as usize] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            let f = *c as f64 / n as f64;
            assert!((f - d.prob(i)).abs() < 1e-4, "symbol {i}: {f}");
        }
    }

    #[test]
    fn mixture_density_consistent_with_components() {
        let mix = GaussMix::symmetric_pair(3.0, 1.5).unwrap();
        let (comps, total) = mix.mixture_densities(1.0);
        let direct = (comps[0].exp() + comps[1].exp()).ln();
        assert!((total - direct).abs() < 1e-12);
    }

    #[test]
    fn gaussian_ratio_bound_matches_grid_max() {
        let t = Normal::new(0.7, 0.25).unwrap();
        let p = Normal::new(0.0, 1.25).unwrap();
        let bound = gaussian_log_ratio_bound(&t, &p).unwrap();
        let mut grid_max = f64::NEG_INFINITY;
        let mut y = -30.0;
        while y < 30.0 {
            grid_max = grid_max.max(t.log_density(y) - p.log_density(y));
            y += 0.0005;
        }
        assert!(grid_max <= bound + 1e-9, "{grid_max} vs {bound}");
        assert!(bound - grid_max < 1e-5, "bound should be attained");
    }

    #[test]
    fn gaussian_ratio_unbounded_cases() {
        let wide = Normal::new(0.0, 2.0).unwrap();
        let narrow = Normal::new(0.0, 1.0).unwrap();
        assert!(gaussian_log_ratio_bound(&wide, &narrow).is_none());
        let shifted = Normal::new(1.0, 1.0).unwrap();
        assert!(gaussian_log_ratio_bound(&shifted, &narrow).is_none());
        assert_eq!(gaussian_log_ratio_bound(&narrow, &narrow), Some(0.0));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(Normal::new(0.0, 0.0).is_err());
        assert!(DiscreteDist::new(&[]).is_err());
        assert!(DiscreteDist::new(&[0.0, 0.0]).is_err());
        assert!(GaussMix::new(&[1.0], &[]).is_err());
    }
}
