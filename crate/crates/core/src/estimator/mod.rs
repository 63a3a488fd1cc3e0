//! Maximum-likelihood estimation of the latent gamma model and selection
//! weights from published (x, sigma) pairs, with robust standard errors and
//! a synthetic-data generator for recovery testing.

mod fit;
mod likelihood;
mod sandwich;
mod simplex;
mod synthetic;

pub use fit::fit_mle;
pub use likelihood::log_likelihood;
pub use sandwich::robust_se;
pub use synthetic::generate_synthetic_dataset;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{StepPolicy, DEFAULT_CUTOFFS};
use crate::stats::GammaParams;

/// One published study: identifier, Fisher-z effect, Fisher-z standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyObservation {
    pub study_id: String,
    pub x: f64,
    pub sigma: f64,
}

/// Published effect-size data.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<StudyObservation>,
}

impl Dataset {
    pub fn new(records: Vec<StudyObservation>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for rec in &records {
            if !(rec.sigma > 0.0 && rec.sigma.is_finite()) {
                return Err(Error::data(format!(
                    "study '{}': sigma must be positive and finite, got {}",
                    rec.study_id, rec.sigma
                )));
            }
            if !rec.x.is_finite() {
                return Err(Error::data(format!(
                    "study '{}': effect must be finite, got {}",
                    rec.study_id, rec.x
                )));
            }
            if !seen.insert(rec.study_id.as_str()) {
                return Err(Error::data(format!(
                    "duplicate study_id '{}'",
                    rec.study_id
                )));
            }
        }
        Ok(Dataset { records })
    }

    pub fn records(&self) -> &[StudyObservation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Quadrature resolution for the likelihood integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes for the per-record convolution over the true effect.
    pub numerator_nodes: usize,
    /// Nodes per dimension of the normalization tensor grid.
    pub denominator_nodes: usize,
    /// Upper tail mass dropped when truncating the gamma domains.
    pub truncation: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            numerator_nodes: 64,
            denominator_nodes: 128,
            truncation: 1e-10,
        }
    }
}

/// Optimizer configuration: multi-start simplex in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Starts drawn around the method-of-moments initial point.
    pub n_starts: usize,
    /// Seed for the start jitter.
    pub seed: u64,
    /// Evaluation budget for each start's screening phase.
    pub screen_evals: u64,
    /// Evaluation budget for polishing the leading starts.
    pub polish_evals: u64,
    /// Simplex diameter (log space) below which a fit counts as converged.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_starts: 8,
            seed: 0,
            screen_evals: 250,
            polish_evals: 1500,
            tol: 1e-6,
        }
    }
}

/// Model structure held fixed during estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// |t| band edges.
    pub cutoffs: Vec<f64>,
    /// Per-band fixed weights; `None` entries are estimated in log space.
    /// The top band is always fixed at 1 (weights are identified up to
    /// scale).
    pub fixed_weights: Vec<Option<f64>>,
    pub quadrature: QuadratureSpec,
    pub fit: FitOptions,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
            fixed_weights: vec![None, None, Some(1.0)],
            quadrature: QuadratureSpec::default(),
            fit: FitOptions::default(),
        }
    }
}

impl ModelSpec {
    /// Fix one band's weight to an exact value.
    pub fn with_fixed_band(mut self, band: usize, value: f64) -> Result<Self> {
        if band + 1 >= self.fixed_weights.len() {
            return Err(Error::config(format!(
                "cannot fix band {band}: only {} non-top bands",
                self.fixed_weights.len().saturating_sub(1)
            )));
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::config(format!(
                "fixed weight must be >= 0, got {value}"
            )));
        }
        self.fixed_weights[band] = Some(value);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fixed_weights.len() != self.cutoffs.len() + 1 {
            return Err(Error::config(format!(
                "{} cutoffs require {} band entries, got {}",
                self.cutoffs.len(),
                self.cutoffs.len() + 1,
                self.fixed_weights.len()
            )));
        }
        let mut prev = 0.0;
        for &c in &self.cutoffs {
            if !(c > prev && c.is_finite()) {
                return Err(Error::config(format!(
                    "cutoffs must be strictly ascending and positive: {:?}",
                    self.cutoffs
                )));
            }
            prev = c;
        }
        match self.fixed_weights.last() {
            Some(Some(w)) if *w == 1.0 => {}
            _ => {
                return Err(Error::config(
                    "top band must be fixed at weight 1 (identification up to scale)",
                ))
            }
        }
        for w in self.fixed_weights.iter().flatten() {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::config(format!("fixed weight must be >= 0, got {w}")));
            }
        }
        if self.quadrature.numerator_nodes < 2 || self.quadrature.denominator_nodes < 2 {
            return Err(Error::config("quadrature needs at least 2 nodes"));
        }
        if !(self.quadrature.truncation > 0.0 && self.quadrature.truncation < 0.5) {
            return Err(Error::config(format!(
                "truncation mass must lie in (0, 0.5), got {}",
                self.quadrature.truncation
            )));
        }
        if self.fit.n_starts == 0 {
            return Err(Error::config("need at least one optimizer start"));
        }
        Ok(())
    }

    /// Band indices whose weights are estimated.
    pub(crate) fn free_bands(&self) -> Vec<usize> {
        self.fixed_weights
            .iter()
            .enumerate()
            .filter_map(|(b, w)| w.is_none().then_some(b))
            .collect()
    }

    pub(crate) fn n_params(&self) -> usize {
        4 + self.free_bands().len()
    }

    /// Human-readable name per free parameter, gamma block first.
    pub(crate) fn param_names(&self) -> Vec<String> {
        let mut names = vec![
            "theta_shape".to_string(),
            "theta_scale".to_string(),
            "sigma_shape".to_string(),
            "sigma_scale".to_string(),
        ];
        for b in self.free_bands() {
            names.push(format!("weight[{b}]"));
        }
        names
    }
}

/// Point estimates: latent gamma parameters plus the full per-band weight
/// vector (fixed bands included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParams {
    pub theta: GammaParams,
    pub sigma: GammaParams,
    pub weights: Vec<f64>,
}

impl FittedParams {
    pub fn policy(&self, spec: &ModelSpec) -> Result<StepPolicy> {
        StepPolicy::unnormalized(spec.cutoffs.clone(), self.weights.clone())
    }
}

/// Fit output. `robust_se` entries align with
/// [theta_shape, theta_scale, sigma_shape, sigma_scale, weight_0, ...,
/// weight_{B-1}] and are `None` for fixed weights (including the top band);
/// the outer `Option` is `None` when the sandwich is unavailable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub params: FittedParams,
    pub loglik: f64,
    pub robust_se: Option<Vec<Option<f64>>>,
    pub converged: bool,
    pub n_evals: u64,
    #[serde(skip, default)]
    pub spec: Option<ModelSpec>,
}

pub(crate) struct ParamVector;

impl ParamVector {
    /// Log-space packing of the free parameters.
    pub fn pack(params: &FittedParams, spec: &ModelSpec) -> Vec<f64> {
        let mut v = vec![
            params.theta.shape().ln(),
            params.theta.scale().ln(),
            params.sigma.shape().ln(),
            params.sigma.scale().ln(),
        ];
        for b in spec.free_bands() {
            v.push(params.weights[b].ln());
        }
        v
    }

    pub fn unpack(lp: &[f64], spec: &ModelSpec) -> Result<FittedParams> {
        let theta = GammaParams::new(lp[0].exp(), lp[1].exp())?;
        let sigma = GammaParams::new(lp[2].exp(), lp[3].exp())?;
        let mut weights: Vec<f64> = Vec::with_capacity(spec.fixed_weights.len());
        let mut free_iter = lp[4..].iter();
        for fixed in &spec.fixed_weights {
            match fixed {
                Some(w) => weights.push(*w),
                None => {
                    let w = free_iter
                        .next()
                        .ok_or_else(|| Error::config("parameter vector too short"))?
                        .exp();
                    if !w.is_finite() {
                        return Err(Error::domain("weight overflow".to_string()));
                    }
                    weights.push(w);
                }
            }
        }
        Ok(FittedParams {
            theta,
            sigma,
            weights,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_invariants() {
        let ok = Dataset::new(vec![
            StudyObservation { study_id: "a".into(), x: 0.3, sigma: 0.2 },
            StudyObservation { study_id: "b".into(), x: -0.1, sigma: 0.4 },
        ]);
        assert!(ok.is_ok());
        let dup = Dataset::new(vec![
            StudyObservation { study_id: "a".into(), x: 0.3, sigma: 0.2 },
            StudyObservation { study_id: "a".into(), x: 0.1, sigma: 0.4 },
        ]);
        assert!(dup.is_err());
        let bad_sigma = Dataset::new(vec![StudyObservation {
            study_id: "a".into(),
            x: 0.3,
            sigma: -0.2,
        }]);
        assert!(bad_sigma.is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::default().validate().is_ok());
        let econ = ModelSpec::default().with_fixed_band(0, 0.0).unwrap();
        assert_eq!(econ.free_bands(), vec![1]);
        assert_eq!(econ.n_params(), 5);
        let mut broken = ModelSpec::default();
        broken.fixed_weights[2] = Some(2.0);
        assert!(broken.validate().is_err());
        assert!(ModelSpec::default().with_fixed_band(2, 0.5).is_err());
    }

    #[test]
    fn pack_unpack_round_trip() {
        let spec = ModelSpec::default().with_fixed_band(0, 0.0).unwrap();
        let params = FittedParams {
            theta: GammaParams::new(1.4, 0.15).unwrap(),
            sigma: GammaParams::new(2.7, 0.1).unwrap(),
            weights: vec![0.0, 0.04, 1.0],
        };
        let lp = ParamVector::pack(&params, &spec);
        assert_eq!(lp.len(), 5);
        let back = ParamVector::unpack(&lp, &spec).unwrap();
        assert!((back.theta.shape() - 1.4).abs() < 1e-12);
        assert_eq!(back.weights[0], 0.0);
        assert!((back.weights[1] - 0.04).abs() < 1e-12);
        assert_eq!(back.weights[2], 1.0);
    }
}
