use std::sync::Mutex;

use super::{Scheduler, Serial};
use crate::engine::{
    check_run, derive_seed, drive_epochs, initial_seed, run_workers, streams, RunConfig, RunReport,
    StepSchedule, StepWorkspace,
};
use crate::error::Result;
use crate::problems::CostFunction;

/// `p` independent serial runs, each a full pass per epoch with its own
/// edge order. The instances never exchange state; the reported iterate
/// and per-epoch objectives are those of their average. Instance 0 uses the
/// run seed itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct Averaging;

pub(crate) fn instance_seed(seed: u64, instance: usize) -> u64 {
    if instance == 0 {
        seed
    } else {
        derive_seed(seed, &[streams::INSTANCE, instance as u64])
    }
}

fn average(instances: &[Mutex<Vec<f64>>]) -> Vec<f64> {
    let p = instances.len() as f64;
    let mut mean = vec![0.0; instances[0].lock().unwrap().len()];
    for inst in instances {
        for (m, v) in mean.iter_mut().zip(inst.lock().unwrap().iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= p;
    }
    mean
}

impl Scheduler for Averaging {
    fn name(&self) -> &str {
        "avg"
    }

    fn run(
        &self,
        problem: &dyn CostFunction,
        config: &RunConfig,
        schedule: &StepSchedule,
    ) -> Result<RunReport> {
        check_run(self.name(), problem, config, schedule)?;
        let x0 = problem.initial_point(initial_seed(config.seed));
        let p = config.threads;
        // Each worker locks only its own instance, so the mutexes are never
        // contended; they exist to hand out `&mut` access across threads.
        let instances: Vec<Mutex<Vec<f64>>> = (0..p).map(|_| Mutex::new(x0.clone())).collect();
        drive_epochs(
            self.name(),
            problem,
            config,
            schedule,
            |epoch, gamma| {
                run_workers(p, |w| {
                    let mut x = instances[w].lock().unwrap();
                    let mut ws = StepWorkspace::default();
                    Serial::epoch(
                        problem,
                        &mut x,
                        config.mode,
                        instance_seed(config.seed, w),
                        epoch,
                        gamma,
                        config.delay_ns,
                        &mut ws,
                    )
                })
            },
            || average(&instances),
        )
    }
}
