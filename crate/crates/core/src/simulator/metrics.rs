//! Aggregate replication metrics and the streaming accumulator they share.

use serde::{Deserialize, Serialize};

use super::ReplicationRecord;
use crate::error::{Error, Result};
use crate::selection::SIGNIFICANCE_Z;

/// Aggregate outputs of one simulation run.
///
/// All conditioning sets are over published-and-selected studies; the
/// replication rate additionally conditions on significance of the original
/// at the inclusion threshold. `mc_se` is the binomial standard error of the
/// replication rate, sqrt(p (1 - p) / n_included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationMetrics {
    pub replication_rate: f64,
    pub generalized_rr: f64,
    pub rmr: f64,
    pub mean_bias: f64,
    pub coverage: f64,
    pub share_significant: f64,
    pub n_included: u64,
    pub mc_se: f64,
}

/// Streaming sums over the pipeline output. Addition order is fixed by the
/// caller (sequential within a chunk, chunks folded by index), which is what
/// makes results independent of the worker-thread count.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accumulator {
    pub n_draws: u64,
    // published-and-selected set
    pub n_published: u64,
    pub sum_x_pub: f64,
    pub sum_bias: f64,
    pub sum_theta_pub: f64,
    pub n_covered: u64,
    // significance split at exactly 1.96 (generalized replication rate)
    pub n_sig_pub: u64,
    pub n_gen_success_sig: u64,
    pub n_gen_success_insig: u64,
    // replication-rate conditioning set (significant at the inclusion threshold)
    pub n_included: u64,
    pub n_rr_success: u64,
    pub sum_x_incl: f64,
    pub sum_xr_incl: f64,
    pub sum_tanh_x_incl: f64,
    pub sum_tanh_xr_incl: f64,
}

impl Accumulator {
    /// Fold in one replication record. `inclusion_threshold` is the |t| bound
    /// for entering the replication-rate conditioning set (1.96 by default;
    /// robustness runs may admit near-significant originals).
    pub fn add(&mut self, rec: &ReplicationRecord, inclusion_threshold: f64) {
        self.n_draws += 1;
        let s = rec.origin;
        debug_assert!(!s.selected || s.published, "selected implies published");
        if !(s.published && s.selected) {
            return;
        }
        self.n_published += 1;
        self.sum_x_pub += s.x;
        self.sum_bias += s.x - s.theta;
        self.sum_theta_pub += s.theta;
        let half_width = SIGNIFICANCE_Z * s.sigma;
        if s.theta > s.x - half_width && s.theta < s.x + half_width {
            self.n_covered += 1;
        }

        let replication_significant = rec.x_r.abs() >= SIGNIFICANCE_Z * rec.sigma_r;
        let same_sign = (rec.x_r > 0.0) == (s.x > 0.0);
        let success = replication_significant && same_sign;

        if s.t_ratio().abs() >= SIGNIFICANCE_Z {
            self.n_sig_pub += 1;
            if success {
                self.n_gen_success_sig += 1;
            }
        } else if !replication_significant {
            self.n_gen_success_insig += 1;
        }

        if s.t_ratio().abs() >= inclusion_threshold {
            self.n_included += 1;
            if success {
                self.n_rr_success += 1;
            }
            self.sum_x_incl += s.x;
            self.sum_xr_incl += rec.x_r;
            self.sum_tanh_x_incl += s.x.tanh();
            self.sum_tanh_xr_incl += rec.x_r.tanh();
        }
    }

    pub fn combine(&mut self, other: &Accumulator) {
        self.n_draws += other.n_draws;
        self.n_published += other.n_published;
        self.sum_x_pub += other.sum_x_pub;
        self.sum_bias += other.sum_bias;
        self.sum_theta_pub += other.sum_theta_pub;
        self.n_covered += other.n_covered;
        self.n_sig_pub += other.n_sig_pub;
        self.n_gen_success_sig += other.n_gen_success_sig;
        self.n_gen_success_insig += other.n_gen_success_insig;
        self.n_included += other.n_included;
        self.n_rr_success += other.n_rr_success;
        self.sum_x_incl += other.sum_x_incl;
        self.sum_xr_incl += other.sum_xr_incl;
        self.sum_tanh_x_incl += other.sum_tanh_x_incl;
        self.sum_tanh_xr_incl += other.sum_tanh_xr_incl;
    }

    pub fn replication_rate(&self) -> Result<f64> {
        if self.n_included == 0 {
            return Err(Error::EmptyConditioningSet(
                "no published significant originals to compute a replication rate".into(),
            ));
        }
        Ok(self.n_rr_success as f64 / self.n_included as f64)
    }

    pub fn rmr(&self) -> Result<f64> {
        if self.n_included == 0 {
            return Err(Error::EmptyConditioningSet(
                "no published significant originals to compute the regression-to-the-mean ratio"
                    .into(),
            ));
        }
        if self.sum_tanh_x_incl == 0.0 {
            return Err(Error::numerical(
                "regression-to-the-mean ratio: mean original effect is zero",
            ));
        }
        Ok(self.sum_tanh_xr_incl / self.sum_tanh_x_incl)
    }

    pub fn generalized_rr(&self) -> Result<f64> {
        if self.n_published == 0 {
            return Err(Error::EmptyConditioningSet(
                "no published studies to compute the generalized replication rate".into(),
            ));
        }
        Ok((self.n_gen_success_sig + self.n_gen_success_insig) as f64 / self.n_published as f64)
    }

    pub fn mean_bias(&self) -> Result<f64> {
        if self.n_published == 0 {
            return Err(Error::EmptyConditioningSet(
                "no published studies to compute mean bias".into(),
            ));
        }
        Ok(self.sum_bias / self.n_published as f64)
    }

    pub fn coverage(&self) -> Result<f64> {
        if self.n_published == 0 {
            return Err(Error::EmptyConditioningSet(
                "no published studies to compute coverage".into(),
            ));
        }
        Ok(self.n_covered as f64 / self.n_published as f64)
    }

    pub fn metrics(&self) -> Result<SimulationMetrics> {
        let rr = self.replication_rate()?;
        Ok(SimulationMetrics {
            replication_rate: rr,
            generalized_rr: self.generalized_rr()?,
            rmr: self.rmr()?,
            mean_bias: self.mean_bias()?,
            coverage: self.coverage()?,
            share_significant: self.n_sig_pub as f64 / self.n_published as f64,
            n_included: self.n_included,
            mc_se: (rr * (1.0 - rr) / self.n_included as f64).sqrt(),
        })
    }
}

fn accumulate(records: &[ReplicationRecord]) -> Accumulator {
    let mut acc = Accumulator::default();
    for rec in records {
        acc.add(rec, SIGNIFICANCE_Z);
    }
    acc
}

/// Share of published, selected, significant originals whose replication is
/// significant at 5% with the same sign. Insignificant originals are
/// excluded by construction.
pub fn simulated_replication_rate(records: &[ReplicationRecord]) -> Result<f64> {
    accumulate(records).replication_rate()
}

/// Mean back-transformed (tanh) replication effect over mean original
/// effect among the replication-rate conditioning set.
pub fn regression_to_mean_ratio(records: &[ReplicationRecord]) -> Result<f64> {
    accumulate(records).rmr()
}

/// Success share where significant originals must replicate significantly
/// with the same sign and insignificant originals must replicate
/// insignificantly; taken over all published, selected studies.
pub fn generalized_replication_rate(records: &[ReplicationRecord]) -> Result<f64> {
    accumulate(records).generalized_rr()
}

/// Sample mean of (x - theta) over published studies.
pub fn mean_bias(records: &[ReplicationRecord]) -> Result<f64> {
    accumulate(records).mean_bias()
}

/// Share of published studies whose nominal 95% interval covers the true
/// effect.
pub fn coverage(records: &[ReplicationRecord]) -> Result<f64> {
    accumulate(records).coverage()
}
