use super::Scheduler;
use crate::engine::{
    check_run, chunk_ranges, drive_epochs, initial_seed, run_workers, shared_full_edge_step,
    shared_with_replacement_step, worker_rng, EpochPlan, RunConfig, RunReport, SamplingMode,
    StepSchedule, StepWorkspace, WorkerStats,
};
use crate::error::Result;
use crate::problems::CostFunction;
use crate::shared::SharedVector;

/// Lock-free: workers read and write the shared vector with no
/// coordination beyond per-component atomic adds.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hogwild;

impl Scheduler for Hogwild {
    fn name(&self) -> &str {
        "hogwild"
    }

    fn run(
        &self,
        problem: &dyn CostFunction,
        config: &RunConfig,
        schedule: &StepSchedule,
    ) -> Result<RunReport> {
        check_run(self.name(), problem, config, schedule)?;
        let x = SharedVector::from_slice(&problem.initial_point(initial_seed(config.seed)));
        let m = problem.num_terms();
        let p = config.threads;
        let delay = config.delay_ns;
        drive_epochs(
            self.name(),
            problem,
            config,
            schedule,
            |epoch, gamma| match config.mode {
                SamplingMode::FullEdgeWithoutReplacement => {
                    let plan = EpochPlan::new(m, p, config.seed, epoch);
                    run_workers(p, |w| {
                        let mut ws = StepWorkspace::default();
                        let chunk = plan.chunk(w);
                        for &e in chunk {
                            shared_full_edge_step(problem, &x, e, gamma, delay, &mut ws);
                        }
                        let n = chunk.len() as u64;
                        WorkerStats {
                            updates: n,
                            gradients: n,
                            contentions: 0,
                        }
                    })
                }
                SamplingMode::SingleComponentWithReplacement => {
                    let sizes = chunk_ranges(m, p);
                    run_workers(p, |w| {
                        let mut ws = StepWorkspace::default();
                        let mut rng = worker_rng(config.seed, w, epoch);
                        let n = sizes[w].len();
                        for _ in 0..n {
                            shared_with_replacement_step(
                                problem, &x, gamma, delay, &mut rng, &mut ws,
                            );
                        }
                        WorkerStats {
                            updates: n as u64,
                            gradients: n as u64,
                            contentions: 0,
                        }
                    })
                }
            },
            || x.snapshot(),
        )
    }
}
