use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{Error, Result};
use crate::problems::{gather, CostFunction};
use crate::shared::SharedVector;

/// Per-worker buffers reused across steps so the hot loop never allocates.
#[derive(Debug, Default, Clone)]
pub struct StepWorkspace {
    pub xe: Vec<f64>,
    pub delta: Vec<f64>,
    pub scratch: Vec<f64>,
}

impl StepWorkspace {
    fn prepare(&mut self, len: usize) {
        self.delta.clear();
        self.delta.resize(len, 0.0);
    }
}

/// Spins for `ns` nanoseconds without yielding the core.
#[inline]
pub fn busy_wait(ns: u64) {
    if ns == 0 {
        return;
    }
    let until = Instant::now() + Duration::from_nanos(ns);
    while Instant::now() < until {
        std::hint::spin_loop();
    }
}

fn gather_shared(vars: &[usize], x: &SharedVector, xe: &mut Vec<f64>) {
    xe.clear();
    xe.extend(vars.iter().map(|&v| x.get(v)));
}

/// One lock-free full-edge step: read `x_e` component by component, compute
/// the update, and add it atomically to the edge's variables only.
pub fn hogwild_step(
    problem: &dyn CostFunction,
    x: &SharedVector,
    edge: usize,
    gamma: f64,
    ws: &mut StepWorkspace,
) -> Result<()> {
    check_edge(problem, edge)?;
    check_shared(problem, x)?;
    shared_full_edge_step(problem, x, edge, gamma, 0, ws);
    Ok(())
}

pub(crate) fn shared_full_edge_step(
    problem: &dyn CostFunction,
    x: &SharedVector,
    edge: usize,
    gamma: f64,
    delay_ns: u64,
    ws: &mut StepWorkspace,
) {
    let vars = problem.hypergraph().edge_vars(edge);
    gather_shared(vars, x, &mut ws.xe);
    ws.prepare(vars.len());
    problem.local_update(edge, &ws.xe, gamma, &mut ws.delta, &mut ws.scratch);
    busy_wait(delay_ns);
    for (&v, &d) in vars.iter().zip(&ws.delta) {
        x.add(v, d);
    }
}

/// Updates only the `pos`-th variable of `edge` by `−γ |e| G_e[pos]`.
pub fn single_component_step(
    problem: &dyn CostFunction,
    x: &SharedVector,
    edge: usize,
    pos: usize,
    gamma: f64,
    ws: &mut StepWorkspace,
) -> Result<()> {
    check_edge(problem, edge)?;
    check_shared(problem, x)?;
    let vars = problem.hypergraph().edge_vars(edge);
    if pos >= vars.len() {
        return Err(Error::IndexOutOfRange {
            index: pos,
            len: vars.len(),
        });
    }
    shared_single_component(problem, x, edge, pos, gamma, 0, ws);
    Ok(())
}

fn shared_single_component(
    problem: &dyn CostFunction,
    x: &SharedVector,
    edge: usize,
    pos: usize,
    gamma: f64,
    delay_ns: u64,
    ws: &mut StepWorkspace,
) {
    let vars = problem.hypergraph().edge_vars(edge);
    gather_shared(vars, x, &mut ws.xe);
    ws.prepare(vars.len());
    problem.local_subgradient(edge, &ws.xe, &mut ws.delta);
    busy_wait(delay_ns);
    x.add(vars[pos], -gamma * vars.len() as f64 * ws.delta[pos]);
}

/// Samples `e` uniformly from the edges and `v` uniformly from `e`, then
/// applies [`single_component_step`]. Returns the sampled `(edge, pos)`.
pub fn with_replacement_step<R: Rng + ?Sized>(
    problem: &dyn CostFunction,
    x: &SharedVector,
    gamma: f64,
    rng: &mut R,
    ws: &mut StepWorkspace,
) -> Result<(usize, usize)> {
    if !problem.supports_single_component() {
        return Err(Error::Unsupported {
            scheduler: "hogwild".into(),
            what: format!("single-component updates on {} problems", problem.family()),
        });
    }
    check_shared(problem, x)?;
    let (edge, pos) = sample_component(problem, rng);
    shared_single_component(problem, x, edge, pos, gamma, 0, ws);
    Ok((edge, pos))
}

pub(crate) fn sample_component<R: Rng + ?Sized>(
    problem: &dyn CostFunction,
    rng: &mut R,
) -> (usize, usize) {
    let h = problem.hypergraph();
    let edge = rng.random_range(0..h.num_edges());
    let pos = rng.random_range(0..h.edge_vars(edge).len());
    (edge, pos)
}

pub(crate) fn shared_with_replacement_step<R: Rng + ?Sized>(
    problem: &dyn CostFunction,
    x: &SharedVector,
    gamma: f64,
    delay_ns: u64,
    rng: &mut R,
    ws: &mut StepWorkspace,
) {
    let (edge, pos) = sample_component(problem, rng);
    shared_single_component(problem, x, edge, pos, gamma, delay_ns, ws);
}

/// Full-edge step on a plain vector; the arithmetic matches
/// [`hogwild_step`] exactly.
pub fn dense_full_edge_step(
    problem: &dyn CostFunction,
    x: &mut [f64],
    edge: usize,
    gamma: f64,
    delay_ns: u64,
    ws: &mut StepWorkspace,
) {
    let vars = problem.hypergraph().edge_vars(edge);
    gather(vars, x, &mut ws.xe);
    ws.prepare(vars.len());
    problem.local_update(edge, &ws.xe, gamma, &mut ws.delta, &mut ws.scratch);
    busy_wait(delay_ns);
    for (&v, &d) in vars.iter().zip(&ws.delta) {
        x[v] += d;
    }
}

/// Single-component step on a plain vector.
pub fn dense_single_component_step(
    problem: &dyn CostFunction,
    x: &mut [f64],
    edge: usize,
    pos: usize,
    gamma: f64,
    delay_ns: u64,
    ws: &mut StepWorkspace,
) {
    let vars = problem.hypergraph().edge_vars(edge);
    gather(vars, x, &mut ws.xe);
    ws.prepare(vars.len());
    problem.local_subgradient(edge, &ws.xe, &mut ws.delta);
    busy_wait(delay_ns);
    x[vars[pos]] += -gamma * vars.len() as f64 * ws.delta[pos];
}

pub(crate) fn dense_with_replacement_step<R: Rng + ?Sized>(
    problem: &dyn CostFunction,
    x: &mut [f64],
    gamma: f64,
    delay_ns: u64,
    rng: &mut R,
    ws: &mut StepWorkspace,
) {
    let (edge, pos) = sample_component(problem, rng);
    dense_single_component_step(problem, x, edge, pos, gamma, delay_ns, ws);
}

fn check_edge(problem: &dyn CostFunction, edge: usize) -> Result<()> {
    let m = problem.num_terms();
    if edge >= m {
        return Err(Error::EdgeOutOfRange { edge, edges: m });
    }
    Ok(())
}

fn check_shared(problem: &dyn CostFunction, x: &SharedVector) -> Result<()> {
    if x.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    Ok(())
}
