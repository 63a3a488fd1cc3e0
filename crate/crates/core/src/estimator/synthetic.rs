//! Synthetic published datasets drawn from the observation model: latent
//! studies are rejection-sampled through the publication Bernoulli until the
//! requested number pass, and only (x, sigma) is recorded.

use super::{Dataset, StudyObservation};
use crate::error::{Error, Result};
use crate::selection::{policy_weight, StepPolicy};
use crate::stats::gamma::draw_gamma;
use crate::stats::{LatentModel, RandomStream};

/// Latent draws per substream, mirroring the simulation engine's layout.
const CHUNK: u64 = 1 << 16;

pub fn generate_synthetic_dataset(
    latent: &LatentModel,
    policy: &StepPolicy,
    n_published: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_published == 0 {
        return Err(Error::config("need n_published >= 1"));
    }
    let max_weight = policy.max_weight();
    let mut records = Vec::with_capacity(n_published);
    let mut attempts: u64 = 0;
    let mut chunk_idx: u64 = 0;
    while records.len() < n_published {
        let mut rng = RandomStream::new(seed, chunk_idx).rng();
        for _ in 0..CHUNK {
            attempts += 1;
            let theta = draw_gamma(&latent.theta, &mut rng);
            let sigma = draw_gamma(&latent.sigma, &mut rng);
            let x = theta + sigma * rng.next_normal();
            let u = rng.next_uniform();
            if u < policy_weight(policy, x / sigma) / max_weight {
                records.push(StudyObservation {
                    study_id: format!("syn{:06}", records.len() + 1),
                    x,
                    sigma,
                });
                if records.len() == n_published {
                    break;
                }
            }
        }
        chunk_idx += 1;
        if attempts >= 1_000_000 && (records.len() as f64) < 1e-6 * attempts as f64 {
            return Err(Error::config(format!(
                "publication acceptance probability below 1e-6: {} accepted in {} attempts",
                records.len(),
                attempts
            )));
        }
    }
    Dataset::new(records)
}
