//! Lazy proposal pools: proposal `i` is a pure function of the pool stream
//! and the counter `i`, so encoder and decoder materialize exactly the items
//! they need — never the whole pool.

use crate::model::{Density, QuantileFn, WeightModel};
use crate::stream::RandomStream;

/// A pool of `n` i.i.d. proposals drawn from `dist` by inverse CDF.
#[derive(Debug, Clone, Copy)]
pub struct ProposalPool<D> {
    pub stream: RandomStream,
    pub dist: D,
    pub n: u64,
}

impl<D: QuantileFn> ProposalPool<D> {
    pub fn new(stream: RandomStream, dist: D, n: u64) -> Self {
        ProposalPool { stream, dist, n }
    }

    /// Proposal sample `i` (0-based), regenerable at any time.
    #[inline(always)]
    pub fn item(&self, i: u64) -> f64 {
        self.dist.inv_cdf(self.stream.uniform(i))
    }

    /// Materialize the whole pool (tests and small experiments only).
    pub fn collect(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.item(i)).collect()
    }

    /// Race log-weight accessor for a target/proposal weight model.
    pub fn log_weight_fn<'a, T, P>(
        &'a self,
        model: &'a WeightModel<T, P>,
    ) -> impl Fn(u64) -> f64 + 'a
    where
        T: Density,
        P: Density,
    {
        move |i| model.log_weight(self.item(i))
    }
}

/// A two-block stratified pool: items `0..n/2` come from the first
/// component, items `n/2..n` from the second. Together the blocks target the
/// even mixture of the two components, while guaranteeing that *both* modes
/// are represented in every pool — the property plain i.i.d. sampling loses
/// with probability `2^-(N/2)` per mode.
#[derive(Debug, Clone, Copy)]
pub struct StratifiedPool<D> {
    pub stream: RandomStream,
    pub first: D,
    pub second: D,
    pub n: u64,
}

impl<D: QuantileFn> StratifiedPool<D> {
    /// `n` must be even so the two blocks are balanced.
    pub fn new(stream: RandomStream, first: D, second: D, n: u64) -> crate::Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(crate::Error::invalid(format!(
                "stratified pool size must be positive and even, got {n}"
            )));
        }
        Ok(StratifiedPool {
            stream,
            first,
            second,
            n,
        })
    }

    #[inline(always)]
    pub fn item(&self, i: u64) -> f64 {
        let u = self.stream.uniform(i);
        if i < self.n / 2 {
            self.first.inv_cdf(u)
        } else {
            self.second.inv_cdf(u)
        }
    }

    pub fn collect(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.item(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Normal;

    #[test]
    fn pool_items_are_reproducible_and_lazy() {
        let dist = Normal::new(1.0, 4.0).unwrap();
        let pool = ProposalPool::new(RandomStream::new(5, 0), dist, 1000);
        let all = pool.collect();
        assert_eq!(all[737], pool.item(737));
        assert_eq!(all[0], pool.item(0));
    }

    #[test]
    fn pool_matches_marginal_moments() {
        let dist = Normal::new(-2.0, 9.0).unwrap();
        let pool = ProposalPool::new(RandomStream::new(8, 1), dist, 100_000);
        let xs = pool.collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((mean + 2.0).abs() < 0.04, "mean {mean}");
        assert!((var - 9.0).abs() < 0.15, "var {var}");
    }

    #[test]
    fn stratified_blocks_come_from_their_components() {
        let a = Normal::new(100.0, 1.0).unwrap();
        let b = Normal::new(-100.0, 1.0).unwrap();
        let pool = StratifiedPool::new(RandomStream::new(3, 0), a, b, 2000).unwrap();
        for i in 0..1000 {
            assert!(pool.item(i) > 0.0);
            assert!(pool.item(i + 1000) < 0.0);
        }
        assert!(StratifiedPool::new(RandomStream::new(3, 0), a, b, 7).is_err());
    }
}
