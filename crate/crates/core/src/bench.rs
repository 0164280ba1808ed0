//! Thread and delay sweeps against the serial baseline.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{RunConfig, StepSchedule};
use crate::error::{Error, Result};
use crate::hypergraph::GraphStats;
use crate::io::DatasetSpec;
use crate::problems::{full_objective, CostFunction};
use crate::schedulers::SchedulerRegistry;

/// One CSV row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheduler: String,
    pub threads: usize,
    pub delay_ns: u64,
    pub wall_seconds: f64,
    /// Serial median wall time over this row's wall time.
    pub speedup: f64,
    pub final_objective: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "scheduler,threads,delay_ns,wall_seconds,speedup,final_objective,seed";

/// Settings shared by every row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub config: RunConfig,
    pub schedule: StepSchedule,
    pub repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<GraphStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn rows_for(&self, scheduler: &str) -> impl Iterator<Item = &SweepRow> + '_ {
        let name = scheduler.to_string();
        self.rows.iter().filter(move |r| r.scheduler == name)
    }

    /// Median speedup of `scheduler` at `threads` and `delay_ns`.
    pub fn median_speedup(&self, scheduler: &str, threads: usize, delay_ns: u64) -> Option<f64> {
        let v: Vec<f64> = self
            .rows_for(scheduler)
            .filter(|r| r.threads == threads && r.delay_ns == delay_ns)
            .map(|r| r.speedup)
            .collect();
        (!v.is_empty()).then(|| median(v))
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty(), "median of nothing");
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs the serial baseline `repeats` times and returns its row.
fn serial_row(
    registry: &SchedulerRegistry,
    problem: &dyn CostFunction,
    base: &RunConfig,
    schedule: &StepSchedule,
    repeats: usize,
    delay_ns: u64,
) -> Result<SweepRow> {
    let serial = registry.get("serial")?;
    let config = RunConfig {
        scheduler: "serial".into(),
        threads: 1,
        delay_ns,
        ..base.clone()
    };
    let mut walls = Vec::with_capacity(repeats);
    let mut objective = f64::NAN;
    for _ in 0..repeats {
        let r = serial.run(problem, &config, schedule)?;
        walls.push(r.wall_seconds);
        objective = r.final_objective();
    }
    Ok(SweepRow {
        scheduler: "serial".into(),
        threads: 1,
        delay_ns,
        wall_seconds: median(walls),
        speedup: 1.0,
        final_objective: objective,
        seed: base.seed,
    })
}

#[allow(clippy::too_many_arguments)]
fn scheduler_rows(
    registry: &SchedulerRegistry,
    problem: &dyn CostFunction,
    base: &RunConfig,
    schedule: &StepSchedule,
    name: &str,
    threads: usize,
    delay_ns: u64,
    repeats: usize,
    serial_wall: f64,
    rows: &mut Vec<SweepRow>,
) -> Result<()> {
    let scheduler = registry.get(name)?;
    let config = RunConfig {
        scheduler: name.into(),
        threads,
        delay_ns,
        ..base.clone()
    };
    for _ in 0..repeats {
        let r = scheduler.run(problem, &config, schedule)?;
        rows.push(SweepRow {
            scheduler: name.into(),
            threads,
            delay_ns,
            wall_seconds: r.wall_seconds,
            speedup: serial_wall / r.wall_seconds,
            final_objective: r.final_objective(),
            seed: base.seed,
        });
    }
    Ok(())
}

fn check_repeats(repeats: usize) -> Result<()> {
    if repeats == 0 {
        Err(Error::param("repeats must be >= 1"))
    } else {
        Ok(())
    }
}

/// One serial baseline row, then one row per (scheduler, thread count,
/// repeat). A `serial` entry in `schedulers` is folded into the baseline.
pub fn thread_sweep(
    registry: &SchedulerRegistry,
    problem: &dyn CostFunction,
    schedulers: &[String],
    threads: &[usize],
    repeats: usize,
    base: &RunConfig,
    schedule: &StepSchedule,
) -> Result<SweepReport> {
    check_repeats(repeats)?;
    for s in schedulers {
        registry.get(s)?;
    }
    let baseline = serial_row(registry, problem, base, schedule, repeats, base.delay_ns)?;
    let serial_wall = baseline.wall_seconds;
    let mut rows = vec![baseline];
    for name in schedulers.iter().filter(|s| s.as_str() != "serial") {
        for &p in threads {
            scheduler_rows(
                registry,
                problem,
                base,
                schedule,
                name,
                p,
                base.delay_ns,
                repeats,
                serial_wall,
                &mut rows,
            )?;
        }
    }
    Ok(SweepReport {
        metadata: SweepMetadata {
            config: base.clone(),
            schedule: *schedule,
            repeats,
            dataset: None,
            stats: None,
        },
        rows,
    })
}

/// For each delay: a serial baseline row at that delay, then `hogwild` and
/// `rr` rows at `threads` workers.
pub fn delay_sweep(
    registry: &SchedulerRegistry,
    problem: &dyn CostFunction,
    delays: &[u64],
    threads: usize,
    repeats: usize,
    base: &RunConfig,
    schedule: &StepSchedule,
) -> Result<SweepReport> {
    check_repeats(repeats)?;
    let mut rows = Vec::new();
    for &delay in delays {
        let baseline = serial_row(registry, problem, base, schedule, repeats, delay)?;
        let serial_wall = baseline.wall_seconds;
        rows.push(baseline);
        for name in ["hogwild", "rr"] {
            scheduler_rows(
                registry,
                problem,
                base,
                schedule,
                name,
                threads,
                delay,
                repeats,
                serial_wall,
                &mut rows,
            )?;
        }
    }
    Ok(SweepReport {
        metadata: SweepMetadata {
            config: base.clone(),
            schedule: *schedule,
            repeats,
            dataset: None,
            stats: None,
        },
        rows,
    })
}

/// Result of [`gamma_search`]: the chosen stepsize and every probe made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSearch {
    pub gamma: f64,
    pub probes: Vec<(f64, f64)>,
}

/// Heuristic search for the largest converging stepsize. A probe runs two
/// serial epochs at `γ` and counts as converging when the objective is
/// finite and below its starting value. From `start`, doubles while probes
/// converge, otherwise halves until one does.
pub fn gamma_search(
    problem: &dyn CostFunction,
    base: &RunConfig,
    beta: f64,
    start: f64,
) -> Result<GammaSearch> {
    let serial = SchedulerRegistry::builtin().get("serial")?;
    let config = RunConfig {
        scheduler: "serial".into(),
        epochs: 2,
        threads: 1,
        ..base.clone()
    };
    let x0 = problem.initial_point(crate::engine::initial_seed(base.seed));
    let f0 = full_objective(problem, &x0)?;
    let mut probes = Vec::new();
    let mut probe = |gamma: f64| -> Result<bool> {
        let r = serial.run(problem, &config, &StepSchedule::new(gamma, beta)?)?;
        let f = r.final_objective();
        probes.push((gamma, f));
        Ok(f.is_finite() && f < f0)
    };
    let mut gamma = start;
    if probe(gamma)? {
        for _ in 0..40 {
            if !probe(gamma * 2.0)? {
                break;
            }
            gamma *= 2.0;
        }
    } else {
        let mut found = false;
        for _ in 0..60 {
            gamma /= 2.0;
            if probe(gamma)? {
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::param("no converging stepsize found"));
        }
    }
    Ok(GammaSearch { gamma, probes })
}
