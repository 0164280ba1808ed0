//! The lock-free executor: run configuration, the per-edge update rules and
//! the epoch loop shared by every scheduler.

mod plan;
mod step;

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use plan::{chunk_ranges, EpochPlan};
pub use step::{
    busy_wait, dense_full_edge_step, dense_single_component_step, hogwild_step,
    single_component_step, with_replacement_step, StepWorkspace,
};
pub(crate) use step::{
    dense_with_replacement_step, shared_full_edge_step, shared_with_replacement_step,
};

use crate::error::{Error, Result};
use crate::problems::{objective_unchecked, CostFunction};
use crate::schedulers::SchedulerRegistry;

/// Constant stepsize within an epoch, multiplied by `beta` between epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub gamma0: f64,
    pub beta: f64,
}

impl StepSchedule {
    pub fn new(gamma0: f64, beta: f64) -> Result<Self> {
        let s = Self { gamma0, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::param(format!(
                "gamma must be > 0, got {}",
                self.gamma0
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::param(format!(
                "beta must be in (0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// `γ₀ β^epoch`, formed by `epoch` successive multiplications so that
    /// consecutive epochs differ by exactly one factor of `β`.
    pub fn gamma(&self, epoch: usize) -> f64 {
        (0..epoch).fold(self.gamma0, |g, _| g * self.beta)
    }
}

/// How edges are assigned to updates within an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Shuffle the edges, split them among the workers, and update every
    /// variable of each edge.
    #[default]
    FullEdgeWithoutReplacement,
    /// Sample an edge uniformly, then one of its variables, and update only
    /// that variable with the stepsize scaled by `|e|`.
    SingleComponentWithReplacement,
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingMode::FullEdgeWithoutReplacement => "full-edge-without-replacement",
            SamplingMode::SingleComponentWithReplacement => "single-component-with-replacement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Registered scheduler name (`hogwild`, `serial`, `rr`, `aig`, `avg`).
    pub scheduler: String,
    pub threads: usize,
    pub epochs: usize,
    #[serde(default)]
    pub mode: SamplingMode,
    pub seed: u64,
    /// Busy-wait inserted after every gradient computation.
    #[serde(default)]
    pub delay_ns: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheduler: "hogwild".into(),
            threads: 1,
            epochs: 20,
            mode: SamplingMode::default(),
            seed: 0,
            delay_ns: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::param("threads must be >= 1"));
        }
        if self.epochs == 0 {
            return Err(Error::param("epochs must be >= 1"));
        }
        Ok(())
    }

    pub fn with_scheduler(mut self, name: &str) -> Self {
        self.scheduler = name.to_string();
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }
}

/// Result of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scheduler: String,
    pub threads: usize,
    pub epochs: usize,
    pub mode: SamplingMode,
    /// Time spent in the epoch loop, excluding the objective evaluations at
    /// the epoch barriers.
    pub wall_seconds: f64,
    /// Full objective at the end of each epoch.
    pub objectives: Vec<f64>,
    /// Stepsize used during each epoch.
    pub gammas: Vec<f64>,
    pub updates_performed: u64,
    pub gradient_evaluations: u64,
    /// Failed lock acquisitions (AIG only).
    pub lock_contentions: u64,
    pub train_metric: Option<f64>,
    pub final_iterate: Vec<f64>,
    /// Global commit sequence, recorded only by schedulers asked to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commit_log: Option<Vec<u64>>,
}

impl RunReport {
    pub fn final_objective(&self) -> f64 {
        *self.objectives.last().expect("at least one epoch")
    }

    /// SHA-256 over the little-endian bytes of the final iterate.
    pub fn iterate_digest(&self) -> String {
        digest_iterate(&self.final_iterate)
    }
}

pub fn digest_iterate(x: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in x {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Runs the scheduler named in `config` from the built-in registry.
pub fn run(
    problem: &dyn CostFunction,
    config: &RunConfig,
    schedule: &StepSchedule,
) -> Result<RunReport> {
    SchedulerRegistry::builtin()
        .get(&config.scheduler)?
        .run(problem, config, schedule)
}

/// Independent random streams derived from the run seed.
pub(crate) mod streams {
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const WORKER: u64 = 0x574f_524b;
    pub const INIT: u64 = 0x494e_4954;
    pub const INSTANCE: u64 = 0x494e_5354;
}

/// SplitMix64-style mixing of a seed with stream tags.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut z = seed ^ 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        z = z
            .wrapping_add(p.wrapping_mul(0xBF58_476D_1CE4_E5B9))
            .wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

pub(crate) fn initial_seed(seed: u64) -> u64 {
    derive_seed(seed, &[streams::INIT])
}

pub(crate) fn worker_rng(seed: u64, worker: usize, epoch: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(
        seed,
        &[streams::WORKER, worker as u64, epoch as u64],
    ))
}

/// Counters accumulated by the workers of one epoch.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct WorkerStats {
    pub updates: u64,
    pub gradients: u64,
    pub contentions: u64,
}

impl WorkerStats {
    pub fn merge(&mut self, o: WorkerStats) {
        self.updates += o.updates;
        self.gradients += o.gradients;
        self.contentions += o.contentions;
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".into()
    }
}

/// Runs `work(worker)` on `threads` scoped threads and joins them all. A
/// panicking worker turns into [`Error::WorkerPanic`].
pub(crate) fn run_workers<F>(threads: usize, work: F) -> Result<WorkerStats>
where
    F: Fn(usize) -> WorkerStats + Sync,
{
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let work = &work;
                s.spawn(move || work(w))
            })
            .collect();
        let mut total = WorkerStats::default();
        let mut failure = None;
        for h in handles {
            match h.join() {
                Ok(stats) => total.merge(stats),
                Err(p) => failure = Some(panic_message(p)),
            }
        }
        match failure {
            Some(msg) => Err(Error::WorkerPanic(msg)),
            None => Ok(total),
        }
    })
}

/// The epoch loop shared by every scheduler: run an epoch at `γ₀β^k`,
/// stop the clock, record the objective on a quiescent iterate.
pub(crate) fn drive_epochs<E, S>(
    name: &str,
    problem: &dyn CostFunction,
    config: &RunConfig,
    schedule: &StepSchedule,
    mut run_epoch: E,
    mut current: S,
) -> Result<RunReport>
where
    E: FnMut(usize, f64) -> Result<WorkerStats>,
    S: FnMut() -> Vec<f64>,
{
    let mut objectives = Vec::with_capacity(config.epochs);
    let mut gammas = Vec::with_capacity(config.epochs);
    let mut totals = WorkerStats::default();
    let mut wall = 0.0;
    for epoch in 0..config.epochs {
        let gamma = schedule.gamma(epoch);
        let start = Instant::now();
        let stats = run_epoch(epoch, gamma)?;
        wall += start.elapsed().as_secs_f64();
        totals.merge(stats);
        gammas.push(gamma);
        objectives.push(objective_unchecked(problem, &current()));
    }
    let final_iterate = current();
    Ok(RunReport {
        scheduler: name.to_string(),
        threads: config.threads,
        epochs: config.epochs,
        mode: config.mode,
        wall_seconds: wall,
        objectives,
        gammas,
        updates_performed: totals.updates,
        gradient_evaluations: totals.gradients,
        lock_contentions: totals.contentions,
        train_metric: problem.train_metric(&final_iterate),
        final_iterate,
        commit_log: None,
    })
}

/// Shared argument checks for every scheduler.
pub(crate) fn check_run(
    name: &str,
    problem: &dyn CostFunction,
    config: &RunConfig,
    schedule: &StepSchedule,
) -> Result<()> {
    config.validate()?;
    schedule.validate()?;
    if config.mode == SamplingMode::SingleComponentWithReplacement
        && !problem.supports_single_component()
    {
        return Err(Error::Unsupported {
            scheduler: name.to_string(),
            what: format!("single-component updates on {} problems", problem.family()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert!(StepSchedule::new(0.0, 0.9).is_err());
        assert!(StepSchedule::new(0.1, 0.0).is_err());
        assert!(StepSchedule::new(0.1, 1.1).is_err());
        assert!(StepSchedule::new(0.1, 1.0).is_ok());
    }

    #[test]
    fn gamma_decays_geometrically() {
        let s = StepSchedule::new(0.5, 0.9).unwrap();
        assert_eq!(s.gamma(0), 0.5);
        for k in 0..40 {
            assert_eq!(s.gamma(k + 1), s.gamma(k) * 0.9);
            let want = 0.5 * 0.9f64.powf(k as f64);
            assert!(((s.gamma(k) - want) / want).abs() <= 1e-13, "epoch {k}");
        }
    }

    #[test]
    fn seeds_differ_by_stream() {
        let a = derive_seed(7, &[streams::WORKER, 0, 0]);
        let b = derive_seed(7, &[streams::WORKER, 1, 0]);
        let c = derive_seed(7, &[streams::WORKER, 0, 1]);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, derive_seed(7, &[streams::WORKER, 0, 0]));
    }

    #[test]
    fn worker_panic_becomes_error() {
        let r = run_workers(2, |w| {
            if w == 1 {
                panic!("boom");
            }
            WorkerStats::default()
        });
        assert!(matches!(r, Err(Error::WorkerPanic(m)) if m.contains("boom")));
    }
}
