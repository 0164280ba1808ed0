//! Execution strategies behind a common trait, looked up by name.
//!
//! | name     | strategy                                                    |
//! |----------|-------------------------------------------------------------|
//! | `hogwild`| lock-free atomic updates on a shared vector                 |
//! | `serial` | one thread, plain vector                                    |
//! | `rr`     | round-robin: updates committed in a fixed global order      |
//! | `aig`    | per-variable spinlocks held for the whole edge update       |
//! | `avg`    | independent serial runs, reported through their mean        |

mod aig;
mod avg;
mod hogwild;
mod round_robin;
mod serial;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use aig::{Aig, LockTable};
pub use avg::Averaging;
pub use hogwild::Hogwild;
pub use round_robin::RoundRobin;
pub use serial::Serial;

use crate::engine::{RunConfig, RunReport, StepSchedule};
use crate::error::{Error, Result};
use crate::problems::CostFunction;

pub trait Scheduler: Send + Sync {
    fn name(&self) -> &str;

    fn run(
        &self,
        problem: &dyn CostFunction,
        config: &RunConfig,
        schedule: &StepSchedule,
    ) -> Result<RunReport>;
}

#[derive(Clone, Default)]
pub struct SchedulerRegistry {
    entries: BTreeMap<String, Arc<dyn Scheduler>>,
}

impl SchedulerRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding every built-in scheduler.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Hogwild));
        r.register(Arc::new(Serial));
        r.register(Arc::new(RoundRobin::default()));
        r.register(Arc::new(Aig));
        r.register(Arc::new(Averaging));
        r
    }

    /// Adds `scheduler`, replacing any entry with the same name.
    pub fn register(&mut self, scheduler: Arc<dyn Scheduler>) {
        self.entries.insert(scheduler.name().to_string(), scheduler);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Scheduler>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownScheduler {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

impl std::fmt::Debug for SchedulerRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        let r = SchedulerRegistry::builtin();
        assert_eq!(r.names(), vec!["aig", "avg", "hogwild", "rr", "serial"]);
        for n in r.names() {
            assert_eq!(r.get(&n).unwrap().name(), n);
        }
    }

    #[test]
    fn unknown_name_lists_alternatives() {
        let err = SchedulerRegistry::builtin().get("lockfree").err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("lockfree") && msg.contains("hogwild"), "{msg}");
    }
}
