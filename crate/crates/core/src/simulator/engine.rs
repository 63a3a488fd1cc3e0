//! Chunked, thread-count-invariant simulation engine.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::metrics::{Accumulator, SimulationMetrics};
use super::{ReplicationRecord, StudyRecord};
use crate::error::{Error, Result};
use crate::replication::{power_margin, PowerRule};
use crate::selection::{policy_weight, StepPolicy, SIGNIFICANCE_Z};
use crate::stats::gamma::draw_gamma;
use crate::stats::rng::{RandomStream, StreamRng};
use crate::stats::LatentModel;

/// Studies per random substream. Fixed so that chunk boundaries, and hence
/// results, do not depend on the number of worker threads.
const CHUNK_SIZE: u64 = 1 << 16;

/// Full configuration of one pipeline run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub latent: LatentModel,
    pub policy: StepPolicy,
    pub power_rule: PowerRule,
    /// Latent draws; at least 10^4.
    pub n_draws: u64,
    pub seed: u64,
    /// |t| bound for the replication-rate conditioning set. 1.96 by default;
    /// robustness runs may admit near-significant originals by lowering it.
    pub inclusion_threshold: f64,
    /// Worker threads; `None` falls back to METAREP_THREADS and then to the
    /// machine's parallelism. The value never affects results.
    pub threads: Option<usize>,
}

impl SimulationConfig {
    pub fn new(latent: LatentModel, policy: StepPolicy, power_rule: PowerRule) -> Self {
        SimulationConfig {
            latent,
            policy,
            power_rule,
            n_draws: 10_000_000,
            seed: 0,
            inclusion_threshold: SIGNIFICANCE_Z,
            threads: None,
        }
    }

    pub fn with_draws(mut self, n_draws: u64) -> Self {
        self.n_draws = n_draws;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_draws < 10_000 {
            return Err(Error::config(format!(
                "n_draws must be at least 10^4, got {}",
                self.n_draws
            )));
        }
        if !(self.inclusion_threshold > 0.0 && self.inclusion_threshold.is_finite()) {
            return Err(Error::config(format!(
                "inclusion threshold must be positive, got {}",
                self.inclusion_threshold
            )));
        }
        self.power_rule.validate()?;
        Ok(())
    }
}

/// How latent studies arise: the estimated joint gamma model, or a single
/// fixed (theta, sigma) as in the worked example.
#[derive(Debug, Clone, Copy)]
pub(crate) enum LatentSpec {
    Gamma(LatentModel),
    Fixed { theta: f64, sigma: f64 },
}

/// Power rule with per-run constants resolved ahead of the hot loop.
enum PreparedRule<'a> {
    Mean { margin: f64 },
    Realized { pool: &'a [f64] },
    Original,
}

impl<'a> PreparedRule<'a> {
    fn prepare(rule: &'a PowerRule) -> Result<Self> {
        rule.validate()?;
        Ok(match rule {
            PowerRule::CommonMean { intended_power } => PreparedRule::Mean {
                margin: power_margin(*intended_power)?,
            },
            PowerRule::CommonRealized { ratio_pool } => {
                PreparedRule::Realized { pool: ratio_pool }
            }
            PowerRule::OriginalPower => PreparedRule::Original,
        })
    }

    /// Replication standard error for one study. Always consumes the same
    /// number of draws for a given rule, whether or not the study publishes.
    #[inline]
    fn sigma_r(&self, x: f64, sigma: f64, rng: &mut StreamRng) -> f64 {
        match self {
            PreparedRule::Mean { margin } => x.abs() / margin,
            PreparedRule::Realized { pool } => x.abs() / pool[rng.next_index(pool.len())],
            PreparedRule::Original => sigma,
        }
    }
}

#[inline]
fn draw_latent(spec: &LatentSpec, rng: &mut StreamRng) -> (f64, f64) {
    match spec {
        LatentSpec::Gamma(model) => (
            draw_gamma(&model.theta, rng),
            draw_gamma(&model.sigma, rng),
        ),
        LatentSpec::Fixed { theta, sigma } => (*theta, *sigma),
    }
}

/// Draw one study and its replication; the fixed stage order is documented
/// on the module.
#[inline]
fn draw_record(
    spec: &LatentSpec,
    policy: &StepPolicy,
    max_weight: f64,
    rule: &PreparedRule,
    rng: &mut StreamRng,
) -> Result<ReplicationRecord> {
    let (theta, sigma) = draw_latent(spec, rng);
    let x = theta + sigma * rng.next_normal();
    if x == 0.0 {
        return Err(Error::numerical(
            "drew an estimate exactly equal to zero; sign convention undefined",
        ));
    }
    let u_pub = rng.next_uniform();
    let sigma_r = rule.sigma_r(x, sigma, rng);
    let z_r = rng.next_normal();
    let x_r = theta + sigma_r * z_r;
    let published = u_pub < policy_weight(policy, x / sigma) / max_weight;
    Ok(ReplicationRecord {
        origin: StudyRecord {
            theta,
            sigma,
            x,
            published,
            selected: published,
        },
        sigma_r,
        x_r,
    })
}

fn resolve_threads(requested: Option<usize>) -> usize {
    requested
        .or_else(|| {
            std::env::var("METAREP_THREADS")
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1)
}

/// Map fixed-size chunks through `work` and fold the results in chunk order.
/// The chunk decomposition and the fold are independent of `threads`.
pub(crate) fn run_chunked<T, F>(n_draws: u64, threads: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64, u64) -> Result<T> + Sync,
{
    let n_chunks = n_draws.div_ceil(CHUNK_SIZE);
    let bounds = |i: u64| {
        let start = i * CHUNK_SIZE;
        let end = (start + CHUNK_SIZE).min(n_draws);
        (start, end)
    };
    if threads <= 1 || n_chunks <= 1 {
        let mut out = Vec::with_capacity(n_chunks as usize);
        for i in 0..n_chunks {
            let (start, end) = bounds(i);
            out.push(work(i, start, end)?);
        }
        return Ok(out);
    }

    let slots: Mutex<Vec<Option<Result<T>>>> =
        Mutex::new((0..n_chunks).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(n_chunks as usize) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed) as u64;
                if i >= n_chunks {
                    break;
                }
                let (start, end) = bounds(i);
                let result = work(i, start, end);
                slots.lock().expect("chunk slots")[i as usize] = Some(result);
            });
        }
    });
    let collected = slots.into_inner().expect("chunk slots");
    collected
        .into_iter()
        .map(|slot| slot.expect("every chunk computed"))
        .collect()
}

/// Run the pipeline and return the folded accumulator.
pub(crate) fn run_accumulate(
    spec: LatentSpec,
    policy: &StepPolicy,
    rule: &PowerRule,
    n_draws: u64,
    seed: u64,
    inclusion_threshold: f64,
    threads: Option<usize>,
) -> Result<Accumulator> {
    let max_weight = policy.max_weight();
    let threads = resolve_threads(threads);
    let partials = run_chunked(n_draws, threads, |chunk_idx, start, end| {
        let prepared = PreparedRule::prepare(rule)?;
        let mut rng = RandomStream::new(seed, chunk_idx).rng();
        let mut acc = Accumulator::default();
        for _ in start..end {
            let rec = draw_record(&spec, policy, max_weight, &prepared, &mut rng)?;
            acc.add(&rec, inclusion_threshold);
        }
        Ok(acc)
    })?;
    let mut total = Accumulator::default();
    for p in &partials {
        total.combine(p);
    }
    Ok(total)
}

/// Execute the five-stage pipeline and aggregate every metric.
/// Deterministic given the seed, independent of the thread count.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationMetrics> {
    config.validate()?;
    let acc = run_accumulate(
        LatentSpec::Gamma(config.latent),
        &config.policy,
        &config.power_rule,
        config.n_draws,
        config.seed,
        config.inclusion_threshold,
        config.threads,
    )?;
    acc.metrics()
}

/// Materialize the pipeline output as records; intended for modest `n_draws`.
/// Draws are identical to the streaming path with the same configuration.
pub fn simulate_records(config: &SimulationConfig) -> Result<Vec<ReplicationRecord>> {
    config.validate()?;
    let max_weight = config.policy.max_weight();
    let threads = resolve_threads(config.threads);
    let chunks = run_chunked(config.n_draws, threads, |chunk_idx, start, end| {
        let prepared = PreparedRule::prepare(&config.power_rule)?;
        let mut rng = RandomStream::new(config.seed, chunk_idx).rng();
        let mut records = Vec::with_capacity((end - start) as usize);
        for _ in start..end {
            records.push(draw_record(
                &LatentSpec::Gamma(config.latent),
                &config.policy,
                max_weight,
                &prepared,
                &mut rng,
            )?);
        }
        Ok(records)
    })?;
    Ok(chunks.into_iter().flatten().collect())
}
