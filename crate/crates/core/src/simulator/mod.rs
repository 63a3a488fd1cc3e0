//! The five-stage truncated sampling pipeline and its aggregate metrics.
//!
//! Per latent study the pipeline draws, in a fixed order that never depends
//! on the policy under evaluation:
//!
//! 1. true effect `theta* ~ Gamma` and standard error `sigma* ~ Gamma`,
//! 2. estimate `x* ~ N(theta*, sigma*^2)`,
//! 3. a publication/selection uniform, compared against
//!    `policy_weight(x*/sigma*) / max_weight`,
//! 4. the replication standard error from the active power rule,
//! 5. replication noise `x_r ~ N(theta*, sigma_r^2)`.
//!
//! Stage-4/5 draws are made for every latent study, published or not, so two
//! runs with the same seed but different policies share every latent draw
//! (common random numbers) and differ only in the selection comparisons.
//!
//! Work is split into fixed-size chunks, each owning the random substream
//! whose id is the chunk index. Partial sums are folded in chunk order, so
//! results are bitwise identical for any worker-thread count.

mod engine;
mod example;
mod metrics;
mod sweeps;

pub use engine::{simulate, simulate_records, SimulationConfig};
pub use example::{run_fixed_effect, simple_example, ExampleRow};
pub use metrics::{
    coverage, generalized_replication_rate, mean_bias, regression_to_mean_ratio,
    simulated_replication_rate, SimulationMetrics,
};
pub use sweeps::{moderate_significance_sweep, policy_sweep, PolicySweepRow, TierSweepRow};

use serde::{Deserialize, Serialize};

/// One latent study after the publication stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    /// True effect (Fisher-z units), drawn positive.
    pub theta: f64,
    /// Study standard error.
    pub sigma: f64,
    /// Estimated effect.
    pub x: f64,
    /// Published (selection Bernoulli against the policy weight).
    pub published: bool,
    /// Chosen for replication; implies `published`.
    pub selected: bool,
}

impl StudyRecord {
    #[inline]
    pub fn t_ratio(&self) -> f64 {
        self.x / self.sigma
    }
}

/// A study together with its replication draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub origin: StudyRecord,
    /// Replication standard error chosen by the power rule.
    pub sigma_r: f64,
    /// Replication estimate, drawn from N(origin.theta, sigma_r^2).
    pub x_r: f64,
}
