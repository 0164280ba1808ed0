//! Lock-free parallel stochastic gradient descent for sparse separable
//! cost functions.
//!
//! A cost `f(x) = Σ_e f_e(x_e)` induces a hypergraph whose edges are the
//! variable sets of the terms. Workers pick edges and apply subgradient
//! updates to a shared vector without locks; the sparsity statistics of the
//! hypergraph govern how much the resulting interference costs.

pub mod bench;
pub mod engine;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod problems;
pub mod schedulers;
pub mod shared;
pub mod theory;

pub use engine::{run, RunConfig, RunReport, SamplingMode, StepSchedule};
pub use error::{Error, Result};
pub use hypergraph::{GraphStats, Hypergraph, StatsMode};
pub use problems::{CostFunction, Family};
pub use schedulers::{Scheduler, SchedulerRegistry};
pub use shared::{AtomicF64, SharedVector};
