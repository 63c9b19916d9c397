//! Gaussian channel geometry.
//!
//! Two settings share the algebra of jointly Gaussian variables:
//!
//! * [`GaussChannel`] — plain one-shot channel simulation. The encoder
//!   holds `V ~ N(0, var_v)` and wants the receiver to obtain a sample of
//!   `W | V = v ~ N(v, var_w_given_v)` using a pool drawn from the marginal
//!   of `W`.
//! * [`SideInfoChannel`] — the decoder additionally observes
//!   `T = V + N(0, var_t_given_v)` and builds its pool (and its race
//!   weights) from the sharper conditional `W | T`.
//!
//! Everything downstream (rate bounds, matching bounds, the rate–distortion
//! experiments) consumes these closed forms, so each one is verified against
//! brute-force quadrature or regression identities in the tests.

use crate::errors::{Error, Result};
use crate::model::{Density, Normal};
use crate::stream::RandomStream;

/// Divergence `D(p || q)` between two normals, in bits.
pub fn kl_normal_bits(p: &Normal, q: &Normal) -> f64 {
    let dm = p.mean - q.mean;
    0.5 * ((q.var / p.var).ln() + p.var / q.var + dm * dm / q.var - 1.0)
        * std::f64::consts::LOG2_E
}

fn check_var(v: f64, name: &str) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Plain channel
// ---------------------------------------------------------------------------

/// Source `V ~ N(0, var_v)`, simulated channel `W | V ~ N(V, var_w_given_v)`,
/// pool drawn from the `W` marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussChannel {
    pub var_v: f64,
    pub var_w_given_v: f64,
}

impl GaussChannel {
    pub fn new(var_v: f64, var_w_given_v: f64) -> Result<Self> {
        check_var(var_v, "source variance")?;
        check_var(var_w_given_v, "channel variance")?;
        Ok(GaussChannel { var_v, var_w_given_v })
    }

    /// Marginal variance of `W`.
    pub fn var_w(&self) -> f64 {
        self.var_v + self.var_w_given_v
    }

    pub fn source(&self) -> Normal {
        Normal::new(0.0, self.var_v).unwrap()
    }

    /// Pool / proposal law: the marginal of `W`.
    pub fn marginal(&self) -> Normal {
        Normal::new(0.0, self.var_w()).unwrap()
    }

    /// Race target for source value `v`.
    pub fn target(&self, v: f64) -> Normal {
        Normal::new(v, self.var_w_given_v).unwrap()
    }

    /// `D(target(v) || marginal)` in bits.
    pub fn divergence_bits(&self, v: f64) -> f64 {
        kl_normal_bits(&self.target(v), &self.marginal())
    }

    /// `I(V; W) = E_V[divergence] = 0.5 log2(var_w / var_w_given_v)`.
    pub fn mutual_info_bits(&self) -> f64 {
        0.5 * (self.var_w() / self.var_w_given_v).log2()
    }

    /// Supremum of the log weight `ln target(v) - ln marginal` over the
    /// alphabet; always finite because the marginal is strictly wider.
    pub fn log_weight_bound(&self, v: f64) -> f64 {
        crate::model::gaussian_log_ratio_bound(&self.target(v), &self.marginal())
            .expect("marginal envelope is strictly wider than the channel")
    }

    pub fn draw_source(&self, stream: &RandomStream, i: u64) -> f64 {
        self.var_v.sqrt() * stream.normal(i)
    }
}

// ---------------------------------------------------------------------------
// Channel with decoder side information
// ---------------------------------------------------------------------------

/// Jointly Gaussian source/side-info/representation triple:
/// `V ~ N(0, var_v)`, `T = V + N(0, var_t_given_v)`,
/// target representation `W | V ~ N(V, var_w_given_v)` with `T - V - W`
/// Markov.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideInfoChannel {
    pub var_v: f64,
    pub var_t_given_v: f64,
    pub var_w_given_v: f64,
}

impl SideInfoChannel {
    pub fn new(var_v: f64, var_t_given_v: f64, var_w_given_v: f64) -> Result<Self> {
        check_var(var_v, "source variance")?;
        check_var(var_t_given_v, "side-info variance")?;
        check_var(var_w_given_v, "channel variance")?;
        Ok(SideInfoChannel { var_v, var_t_given_v, var_w_given_v })
    }

    pub fn var_t(&self) -> f64 {
        self.var_v + self.var_t_given_v
    }

    pub fn var_w(&self) -> f64 {
        self.var_v + self.var_w_given_v
    }

    /// Regression coefficient of `V` on `T`.
    pub fn posterior_coef(&self) -> f64 {
        self.var_v / self.var_t()
    }

    /// `Var(V | T)`.
    pub fn var_v_given_t(&self) -> f64 {
        self.var_v * (1.0 - self.posterior_coef())
    }

    /// `Var(W | T) = Var(V | T) + var_w_given_v`.
    pub fn var_w_given_t(&self) -> f64 {
        self.var_v_given_t() + self.var_w_given_v
    }

    /// `p(V | T = t)`.
    pub fn v_posterior(&self, t: f64) -> Normal {
        Normal::new(self.posterior_coef() * t, self.var_v_given_t()).unwrap()
    }

    /// Decoder pool / proposal law `p(W | T = t)`.
    pub fn decoder_proposal(&self, t: f64) -> Normal {
        Normal::new(self.posterior_coef() * t, self.var_w_given_t()).unwrap()
    }

    /// Encoder race target `p(W | V = v)` (Markov: side info adds nothing
    /// once `V` is known).
    pub fn encoder_target(&self, v: f64) -> Normal {
        Normal::new(v, self.var_w_given_v).unwrap()
    }

    /// Conditional information density
    /// `i(w; v | t) = log2 p(w|v) - log2 p(w|t)` in bits.
    pub fn info_density_bits(&self, w: f64, v: f64, t: f64) -> f64 {
        (self.encoder_target(v).log_density(w) - self.decoder_proposal(t).log_density(w))
            * std::f64::consts::LOG2_E
    }

    /// `I(W; V | T) = 0.5 log2(Var(W|T) / Var(W|V))`.
    pub fn mutual_info_bits(&self) -> f64 {
        0.5 * (self.var_w_given_t() / self.var_w_given_v).log2()
    }

    /// Shared pool law: the marginal of `W`.
    pub fn marginal(&self) -> Normal {
        Normal::new(0.0, self.var_w()).unwrap()
    }

    /// Supremum over `w` of the encoder race log weight
    /// `ln p(w|v) - ln p(w)`; finite because the marginal is strictly wider.
    pub fn encoder_log_weight_bound(&self, v: f64) -> f64 {
        crate::model::gaussian_log_ratio_bound(&self.encoder_target(v), &self.marginal())
            .expect("marginal envelope is strictly wider than the channel")
    }

    /// Supremum over `w` of the decoder race log weight
    /// `ln p(w|t) - ln p(w)`; finite because the marginal is strictly wider.
    pub fn decoder_log_weight_bound(&self, t: f64) -> f64 {
        crate::model::gaussian_log_ratio_bound(&self.decoder_proposal(t), &self.marginal())
            .expect("marginal envelope is strictly wider than the decoder proposal")
    }

    /// Draw `(v, t)`: the source and the decoder's noisy view of it.
    pub fn draw_source(&self, stream: &RandomStream, i: u64) -> (f64, f64) {
        let v = self.var_v.sqrt() * stream.normal(2 * i);
        let t = v + self.var_t_given_v.sqrt() * stream.normal(2 * i + 1);
        (v, t)
    }

    /// Minimum-variance fusion of the received representation `w` with the
    /// side-info posterior: the exact posterior mean `E[V | W = w, T = t]`
    /// when `w` is a true channel output.
    pub fn fuse_estimate(&self, w: f64, t: f64) -> f64 {
        let prec_w = 1.0 / self.var_w_given_v;
        let prec_t = 1.0 / self.var_v_given_t();
        (w * prec_w + self.posterior_coef() * t * prec_t) / (prec_w + prec_t)
    }

    /// Fallback estimate from side information alone: `E[V | T = t]`.
    pub fn side_info_estimate(&self, t: f64) -> f64 {
        self.posterior_coef() * t
    }

    /// `Var(V | W, T)`: the distortion floor when the representation truly
    /// follows the channel and the decoder fuses optimally.
    pub fn fused_mmse(&self) -> f64 {
        1.0 / (1.0 / self.var_w_given_v + 1.0 / self.var_v_given_t())
    }
}

/// Distortion on the decibel scale: `10 log10(mse)`.
pub fn db_of_mse(mse: f64) -> f64 {
    10.0 * mse.log10()
}
