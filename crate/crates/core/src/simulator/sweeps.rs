//! Counterfactual sweeps over publication regimes.
//!
//! Each grid point reruns the pipeline with the same seed, so every latent
//! draw (true effects, standard errors, estimates, replication noise) is
//! shared across points and only the selection comparisons change.

use serde::{Deserialize, Serialize};

use super::engine::{run_accumulate, LatentSpec};
use crate::error::{Error, Result};
use crate::replication::PowerRule;
use crate::selection::{StepPolicy, DEFAULT_CUTOFFS, SIGNIFICANCE_Z};
use crate::stats::LatentModel;

/// One row of the insignificant-publication sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySweepRow {
    pub beta_p: f64,
    pub replication_rate: f64,
    pub mean_bias: f64,
    pub coverage: f64,
    pub share_significant: f64,
}

/// Sweep the probability of publishing insignificant results. Each grid
/// point runs with weights (beta_p, beta_p, 1) over the default cutoffs and
/// a shared seed (common random numbers).
pub fn policy_sweep(
    latent: &LatentModel,
    beta_grid: &[f64],
    power_rule: &PowerRule,
    n_draws: u64,
    seed: u64,
) -> Result<Vec<PolicySweepRow>> {
    if beta_grid.is_empty() {
        return Err(Error::config("policy sweep: empty beta grid"));
    }
    let mut rows = Vec::with_capacity(beta_grid.len());
    for &beta_p in beta_grid {
        if !(0.0..=1.0).contains(&beta_p) {
            return Err(Error::config(format!(
                "policy sweep: beta_p must lie in [0, 1], got {beta_p}"
            )));
        }
        let policy = StepPolicy::new(DEFAULT_CUTOFFS.to_vec(), vec![beta_p, beta_p, 1.0])?;
        let acc = run_accumulate(
            LatentSpec::Gamma(*latent),
            &policy,
            power_rule,
            n_draws,
            seed,
            SIGNIFICANCE_Z,
            None,
        )?;
        rows.push(PolicySweepRow {
            beta_p,
            replication_rate: acc.replication_rate()?,
            mean_bias: acc.mean_bias()?,
            coverage: acc.coverage()?,
            share_significant: acc.n_sig_pub as f64 / acc.n_published as f64,
        });
    }
    Ok(rows)
}

/// One row of the moderate-significance sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierSweepRow {
    pub beta_p2: f64,
    pub replication_rate: f64,
    pub mean_true_effect: f64,
    pub mean_bias: f64,
}

/// Sweep the relative publication probability of moderately significant
/// results (1.96 <= |t| < kappa) against highly significant ones (|t| >=
/// kappa, weight 1). Insignificant bands are held at zero; by design the
/// replication rate is unaffected by that choice.
pub fn moderate_significance_sweep(
    latent: &LatentModel,
    kappa: f64,
    beta_p2_grid: &[f64],
    power_rule: &PowerRule,
    n_draws: u64,
    seed: u64,
) -> Result<Vec<TierSweepRow>> {
    if !(kappa > SIGNIFICANCE_Z) {
        return Err(Error::domain(format!(
            "moderate-significance cutoff must exceed 1.96, got {kappa}"
        )));
    }
    if beta_p2_grid.is_empty() {
        return Err(Error::config("tier sweep: empty beta_p2 grid"));
    }
    let mut rows = Vec::with_capacity(beta_p2_grid.len());
    for &beta_p2 in beta_p2_grid {
        if !(0.0..=1.0).contains(&beta_p2) {
            return Err(Error::config(format!(
                "tier sweep: beta_p2 must lie in [0, 1], got {beta_p2}"
            )));
        }
        let policy = StepPolicy::new(
            vec![DEFAULT_CUTOFFS[0], DEFAULT_CUTOFFS[1], kappa],
            vec![0.0, 0.0, beta_p2, 1.0],
        )?;
        let acc = run_accumulate(
            LatentSpec::Gamma(*latent),
            &policy,
            power_rule,
            n_draws,
            seed,
            SIGNIFICANCE_Z,
            None,
        )?;
        rows.push(TierSweepRow {
            beta_p2,
            replication_rate: acc.replication_rate()?,
            mean_true_effect: acc.sum_theta_pub / acc.n_published as f64,
            mean_bias: acc.mean_bias()?,
        });
    }
    Ok(rows)
}
