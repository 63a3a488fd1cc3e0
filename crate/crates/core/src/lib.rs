//! Modeling toolkit for selective publication and large-scale replication
//! studies: a five-stage truncated sampling simulator, selection-weighted
//! maximum likelihood from published effect sizes, and counterfactual policy
//! sweeps over publication regimes.
//!
//! Effect sizes are Fisher-transformed correlation coefficients throughout;
//! only the regression-to-the-mean ratio converts back to correlation units.

pub mod error;
pub mod estimator;
pub mod presets;
pub mod replication;
pub mod selection;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use estimator::{
    fit_mle, generate_synthetic_dataset, log_likelihood, robust_se, Dataset, FitOptions,
    FittedParams, MleResult, ModelSpec, QuadratureSpec, StudyObservation,
};
pub use replication::{
    common_power_sigma, concavity_radius, generalized_rp, inflection_radius, replication_sigma,
    rp, rp_first_deriv, rp_second_deriv, PowerRule, ReplicationDesign,
};
pub use selection::{
    band_probability, policy_weight, regime_policy, Regime, StepPolicy, DEFAULT_CUTOFFS,
    SIGNIFICANCE_Z,
};
pub use simulator::{
    coverage, generalized_replication_rate, mean_bias, moderate_significance_sweep, policy_sweep,
    regression_to_mean_ratio, run_fixed_effect, simple_example, simulate, simulate_records,
    simulated_replication_rate, ExampleRow, PolicySweepRow, ReplicationRecord, SimulationConfig,
    SimulationMetrics, StudyRecord, TierSweepRow,
};
pub use stats::{
    build_grid, gamma_sample, norm_cdf, norm_pdf, norm_quantile, GammaParams, LatentModel,
    QuadratureGrid, RandomStream,
};
