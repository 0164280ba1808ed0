use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use crossbeam_utils::Backoff;

use super::Scheduler;
use crate::engine::{
    busy_wait, check_run, drive_epochs, initial_seed, run_workers, EpochPlan, RunConfig, RunReport,
    SamplingMode, StepSchedule, StepWorkspace, WorkerStats,
};
use crate::error::{Error, Result};
use crate::problems::CostFunction;
use crate::shared::SharedVector;

/// Round-robin: gradients are computed concurrently, but worker `w`'s
/// `i`-th write waits for ticket `i·p + w`, so commits happen in one fixed
/// global order each epoch.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundRobin {
    /// Record the global ticket of every commit in `RunReport::commit_log`.
    pub record_commits: bool,
}

impl RoundRobin {
    pub fn with_commit_log() -> Self {
        Self {
            record_commits: true,
        }
    }
}

impl Scheduler for RoundRobin {
    fn name(&self) -> &str {
        "rr"
    }

    fn run(
        &self,
        problem: &dyn CostFunction,
        config: &RunConfig,
        schedule: &StepSchedule,
    ) -> Result<RunReport> {
        check_run(self.name(), problem, config, schedule)?;
        if config.mode != SamplingMode::FullEdgeWithoutReplacement {
            return Err(Error::Unsupported {
                scheduler: self.name().into(),
                what: format!("{} sampling", config.mode),
            });
        }
        let x = SharedVector::from_slice(&problem.initial_point(initial_seed(config.seed)));
        let m = problem.num_terms();
        let p = config.threads;
        let turn = AtomicU64::new(0);
        let log_len = if self.record_commits {
            m * config.epochs
        } else {
            0
        };
        let log: Vec<AtomicU64> = (0..log_len).map(|_| AtomicU64::new(0)).collect();
        let log_pos = AtomicUsize::new(0);
        let graph = problem.hypergraph();

        let mut report = drive_epochs(
            self.name(),
            problem,
            config,
            schedule,
            |epoch, gamma| {
                let plan = EpochPlan::new(m, p, config.seed, epoch);
                turn.store(0, Ordering::SeqCst);
                let base = (epoch * m) as u64;
                run_workers(p, |w| {
                    let mut ws = StepWorkspace::default();
                    let chunk = plan.chunk(w);
                    for (i, &e) in chunk.iter().enumerate() {
                        let vars = graph.edge_vars(e);
                        ws.xe.clear();
                        ws.xe.extend(vars.iter().map(|&v| x.get(v)));
                        ws.delta.clear();
                        ws.delta.resize(vars.len(), 0.0);
                        problem.local_update(e, &ws.xe, gamma, &mut ws.delta, &mut ws.scratch);
                        busy_wait(config.delay_ns);

                        // Chunk lengths differ by at most one and the longer
                        // ones come first, so tickets 0..m are all issued.
                        let ticket = (i * p + w) as u64;
                        let backoff = Backoff::new();
                        while turn.load(Ordering::Acquire) != ticket {
                            backoff.snooze();
                        }
                        for (&v, &d) in vars.iter().zip(&ws.delta) {
                            x.add(v, d);
                        }
                        if !log.is_empty() {
                            let slot = log_pos.fetch_add(1, Ordering::Relaxed);
                            log[slot].store(base + ticket, Ordering::Relaxed);
                        }
                        turn.store(ticket + 1, Ordering::Release);
                    }
                    let n = chunk.len() as u64;
                    WorkerStats {
                        updates: n,
                        gradients: n,
                        contentions: 0,
                    }
                })
            },
            || x.snapshot(),
        )?;
        if self.record_commits {
            report.commit_log = Some(log.iter().map(|t| t.load(Ordering::Relaxed)).collect());
        }
        Ok(report)
    }
}
