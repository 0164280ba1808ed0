use super::Scheduler;
use crate::engine::{
    check_run, dense_full_edge_step, dense_with_replacement_step, drive_epochs, initial_seed,
    worker_rng, EpochPlan, RunConfig, RunReport, SamplingMode, StepSchedule, StepWorkspace,
    WorkerStats,
};
use crate::error::Result;
use crate::problems::CostFunction;

/// Single-threaded reference on a plain vector. Ignores `threads`, visits
/// edges in the same order as a one-worker lock-free run, and so produces a
/// bit-identical iterate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Serial {
    /// Runs one epoch on `x` in place. Shared with the averaging scheduler.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn epoch(
        problem: &dyn CostFunction,
        x: &mut [f64],
        mode: SamplingMode,
        seed: u64,
        epoch: usize,
        gamma: f64,
        delay_ns: u64,
        ws: &mut StepWorkspace,
    ) -> WorkerStats {
        let m = problem.num_terms();
        match mode {
            SamplingMode::FullEdgeWithoutReplacement => {
                let plan = EpochPlan::new(m, 1, seed, epoch);
                for &e in &plan.order {
                    dense_full_edge_step(problem, x, e, gamma, delay_ns, ws);
                }
            }
            SamplingMode::SingleComponentWithReplacement => {
                let mut rng = worker_rng(seed, 0, epoch);
                for _ in 0..m {
                    dense_with_replacement_step(problem, x, gamma, delay_ns, &mut rng, ws);
                }
            }
        }
        WorkerStats {
            updates: m as u64,
            gradients: m as u64,
            contentions: 0,
        }
    }
}

impl Scheduler for Serial {
    fn name(&self) -> &str {
        "serial"
    }

    fn run(
        &self,
        problem: &dyn CostFunction,
        config: &RunConfig,
        schedule: &StepSchedule,
    ) -> Result<RunReport> {
        check_run(self.name(), problem, config, schedule)?;
        let mut x = problem.initial_point(initial_seed(config.seed));
        let mut ws = StepWorkspace::default();
        let cell = std::cell::RefCell::new(&mut x);
        let mut report = drive_epochs(
            self.name(),
            problem,
            config,
            schedule,
            |epoch, gamma| {
                Ok(Self::epoch(
                    problem,
                    &mut cell.borrow_mut(),
                    config.mode,
                    config.seed,
                    epoch,
                    gamma,
                    config.delay_ns,
                    &mut ws,
                ))
            },
            || cell.borrow().to_vec(),
        )?;
        report.threads = 1;
        Ok(report)
    }
}
