//! Piecewise-constant selection over |t| bands.
//!
//! A `StepPolicy` is the product of the publication and replication-selection
//! probabilities as a step function of the absolute t-ratio. Only ratios of
//! band weights are identified, so the topmost band is pinned to 1 in every
//! externally constructed policy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::special::phi;

/// Default |t| band edges: marginal significance at 1.64, significance at 1.96.
pub const DEFAULT_CUTOFFS: [f64; 2] = [1.64, 1.96];

/// Two-sided significance threshold used throughout.
pub const SIGNIFICANCE_Z: f64 = 1.96;

/// Step function of |t| with weights per band.
///
/// Band membership is left-closed on the significant side: |t| equal to a
/// cutoff belongs to the upper band, so |t| = 1.96 counts as significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy")]
pub struct StepPolicy {
    cutoffs: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPolicy {
    cutoffs: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawPolicy> for StepPolicy {
    type Error = Error;
    fn try_from(raw: RawPolicy) -> Result<Self> {
        StepPolicy::new(raw.cutoffs, raw.weights)
    }
}

impl StepPolicy {
    /// A normalized policy: the top band weight must equal 1.
    pub fn new(cutoffs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let policy = Self::unnormalized(cutoffs, weights)?;
        let top = *policy.weights.last().expect("non-empty weights");
        if top != 1.0 {
            return Err(Error::config(format!(
                "top-band weight must be 1 (weights are identified up to scale), got {top}"
            )));
        }
        Ok(policy)
    }

    /// A policy without the top-band normalization. Used internally where a
    /// common positive rescaling of all weights must leave results unchanged.
    pub fn unnormalized(cutoffs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != cutoffs.len() + 1 {
            return Err(Error::config(format!(
                "need one weight per band: {} cutoffs require {} weights, got {}",
                cutoffs.len(),
                cutoffs.len() + 1,
                weights.len()
            )));
        }
        let mut prev = 0.0;
        for &c in &cutoffs {
            if !(c > prev && c.is_finite()) {
                return Err(Error::config(format!(
                    "cutoffs must be strictly ascending and positive, got {cutoffs:?}"
                )));
            }
            prev = c;
        }
        for &w in &weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::config(format!("band weights must be >= 0, got {w}")));
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::config("all band weights are zero".to_string()));
        }
        Ok(StepPolicy { cutoffs, weights })
    }

    /// Single band, weight 1: every result treated alike.
    pub fn no_bias() -> Self {
        StepPolicy {
            cutoffs: Vec::new(),
            weights: vec![1.0],
        }
    }

    /// The default-cutoff policy (insignificant, marginal, significant bands).
    pub fn default_bands(insig: f64, marginal: f64) -> Result<Self> {
        StepPolicy::new(DEFAULT_CUTOFFS.to_vec(), vec![insig, marginal, 1.0])
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_bands(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn max_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// Index of the band containing |t|.
    #[inline]
    pub fn band_index(&self, t: f64) -> usize {
        let a = t.abs();
        let mut idx = 0;
        for &c in &self.cutoffs {
            if a >= c {
                idx += 1;
            } else {
                break;
            }
        }
        idx
    }

    pub(crate) fn rescaled(&self, c: f64) -> StepPolicy {
        StepPolicy {
            cutoffs: self.cutoffs.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }
}

/// Weight of the band containing t (evaluated on |t|).
#[inline]
pub fn policy_weight(policy: &StepPolicy, t: f64) -> f64 {
    policy.weights[policy.band_index(t)]
}

/// The worked-example publication regimes.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// Every result published.
    NoBias,
    /// Only |t| >= 1.96 published.
    SignificantOnly,
    /// Insignificant results `factor` times more likely to be published.
    InsignificantFavored(f64),
    Custom(StepPolicy),
}

/// Materialize a regime as a step policy.
pub fn regime_policy(regime: &Regime) -> Result<StepPolicy> {
    match regime {
        Regime::NoBias => Ok(StepPolicy::no_bias()),
        Regime::SignificantOnly => StepPolicy::default_bands(0.0, 0.0),
        Regime::InsignificantFavored(factor) => {
            if !(*factor > 0.0 && factor.is_finite()) {
                return Err(Error::config(format!(
                    "insignificant-favored factor must be positive, got {factor}"
                )));
            }
            StepPolicy::default_bands(*factor, *factor)
        }
        Regime::Custom(policy) => Ok(policy.clone()),
    }
}

/// Selection-weighted probability that a normal estimate lands in each band:
/// sum over bands of weight_b * P(X in band b | theta, sigma), with
/// X ~ N(theta, sigma^2). Computed from normal CDF differences; this is the
/// analytic inner integral of the likelihood denominator.
pub fn band_probability(theta: f64, sigma: f64, policy: &StepPolicy) -> f64 {
    debug_assert!(sigma > 0.0);
    let u = theta / sigma;
    let k = policy.cutoffs.len();
    // P(|X/sigma| in [c_b, c_{b+1})) split into the positive and negative legs.
    let mut total = 0.0;
    for (b, &w) in policy.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let lo = if b == 0 { 0.0 } else { policy.cutoffs[b - 1] };
        let hi = if b == k { f64::INFINITY } else { policy.cutoffs[b] };
        let pos = if hi.is_finite() {
            phi(hi - u) - phi(lo - u)
        } else {
            1.0 - phi(lo - u)
        };
        let neg = if hi.is_finite() {
            phi(-lo - u) - phi(-hi - u)
        } else {
            phi(-lo - u)
        };
        total += w * (pos + neg);
    }
    total
}
