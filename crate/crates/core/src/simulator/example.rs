//! The three-regime worked example: a single research question with true
//! effect 2.5 and unit standard error, replicated under a 90% common power
//! rule, pushed through contrasting publication regimes.

use serde::{Deserialize, Serialize};

use super::engine::{run_accumulate, LatentSpec};
use crate::error::Result;
use crate::replication::PowerRule;
use crate::selection::{regime_policy, Regime, StepPolicy, SIGNIFICANCE_Z};

/// Descriptive statistics for one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    /// Mean published estimate.
    pub e_x: f64,
    /// Mean published estimate minus the true effect.
    pub bias: f64,
    /// Mean published estimate among significant results.
    pub e_x_sig: f64,
    /// Mean replication estimate among significant results.
    pub e_xr_sig: f64,
    /// Share of significant results replicating with the same sign.
    pub replication_rate: f64,
}

/// Pipeline run with a degenerate latent distribution fixed at one
/// (theta, sigma) point. Useful for conditional-law checks as well as the
/// worked example.
pub fn run_fixed_effect(
    theta: f64,
    sigma: f64,
    policy: &StepPolicy,
    power_rule: &PowerRule,
    n_draws: u64,
    seed: u64,
) -> Result<ExampleRow> {
    let acc = run_accumulate(
        LatentSpec::Fixed { theta, sigma },
        policy,
        power_rule,
        n_draws,
        seed,
        SIGNIFICANCE_Z,
        None,
    )?;
    let e_x = acc.sum_x_pub / acc.n_published as f64;
    Ok(ExampleRow {
        e_x,
        bias: acc.mean_bias()?,
        e_x_sig: acc.sum_x_incl / acc.n_included as f64,
        e_xr_sig: acc.sum_xr_incl / acc.n_included as f64,
        replication_rate: acc.replication_rate()?,
    })
}

/// Worked-example statistics for a regime: true effect 2.5, standard error
/// 1, intended power 90%.
pub fn simple_example(regime: &Regime, n_draws: u64, seed: u64) -> Result<ExampleRow> {
    let policy = regime_policy(regime)?;
    run_fixed_effect(
        2.5,
        1.0,
        &policy,
        &PowerRule::CommonMean {
            intended_power: 0.90,
        },
        n_draws,
        seed,
    )
}
