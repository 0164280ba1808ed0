use std::sync::atomic::{AtomicBool, Ordering};

use crossbeam_utils::Backoff;

use super::Scheduler;
use crate::engine::{
    busy_wait, check_run, drive_epochs, initial_seed, run_workers, EpochPlan, RunConfig, RunReport,
    SamplingMode, StepSchedule, StepWorkspace, WorkerStats,
};
use crate::error::{Error, Result};
use crate::problems::CostFunction;
use crate::shared::SharedVector;

/// One spinlock per variable.
#[derive(Debug)]
pub struct LockTable {
    locks: Box<[AtomicBool]>,
}

impl LockTable {
    pub fn new(n: usize) -> Self {
        Self {
            locks: (0..n).map(|_| AtomicBool::new(false)).collect(),
        }
    }

    /// Acquires every lock in `vars`, which must be strictly increasing so
    /// that all workers lock in the same global order. Returns the number
    /// of failed acquisition attempts.
    pub fn acquire_all(&self, vars: &[usize]) -> u64 {
        let mut contended = 0;
        for &v in vars {
            let lock = &self.locks[v];
            let backoff = Backoff::new();
            while lock
                .compare_exchange(false, true, Ordering::Acquire, Ordering::Relaxed)
                .is_err()
            {
                contended += 1;
                backoff.snooze();
            }
        }
        contended
    }

    pub fn release_all(&self, vars: &[usize]) {
        for &v in vars.iter().rev() {
            self.locks[v].store(false, Ordering::Release);
        }
    }

    pub fn is_locked(&self, v: usize) -> bool {
        self.locks[v].load(Ordering::Relaxed)
    }
}

/// Locks every variable of an edge for the whole read, compute and write,
/// so each update sees a consistent `x_e`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Aig;

impl Scheduler for Aig {
    fn name(&self) -> &str {
        "aig"
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
        let locks = LockTable::new(problem.dim());
        let m = problem.num_terms();
        let p = config.threads;
        let graph = problem.hypergraph();
        drive_epochs(
            self.name(),
            problem,
            config,
            schedule,
            |epoch, gamma| {
                let plan = EpochPlan::new(m, p, config.seed, epoch);
                run_workers(p, |w| {
                    let mut ws = StepWorkspace::default();
                    let mut contentions = 0;
                    let chunk = plan.chunk(w);
                    for &e in chunk {
                        let vars = graph.edge_vars(e);
                        contentions += locks.acquire_all(vars);
                        ws.xe.clear();
                        ws.xe.extend(vars.iter().map(|&v| x.get(v)));
                        ws.delta.clear();
                        ws.delta.resize(vars.len(), 0.0);
                        problem.local_update(e, &ws.xe, gamma, &mut ws.delta, &mut ws.scratch);
                        busy_wait(config.delay_ns);
                        for (&v, &d) in vars.iter().zip(&ws.delta) {
                            x.add(v, d);
                        }
                        locks.release_all(vars);
                    }
                    let n = chunk.len() as u64;
                    WorkerStats {
                        updates: n,
                        gradients: n,
                        contentions,
                    }
                })
            },
            || x.snapshot(),
        )
    }
}
