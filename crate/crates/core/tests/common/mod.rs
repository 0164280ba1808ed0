//! Oracles and fixtures shared by the integration test targets.
#![allow(dead_code)]

use hogwild::problems::{
    CostFunction, CutProblem, McProblem, SeparableQuadratic, SparseVec, SvmProblem,
};
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// O(|E|²·Ω²) pairwise oracle returning (Ω, max degree, max conflicts).
pub fn brute_force_stats(n: usize, edges: &[Vec<usize>]) -> (usize, usize, usize) {
    let omega = edges.iter().map(Vec::len).max().unwrap();
    let max_deg = (0..n)
        .map(|v| edges.iter().filter(|e| e.contains(&v)).count())
        .max()
        .unwrap_or(0);
    let max_conf = edges
        .iter()
        .map(|e| {
            edges
                .iter()
                .filter(|f| e.iter().any(|v| f.contains(v)))
                .count()
        })
        .max()
        .unwrap();
    (omega, max_deg, max_conf)
}

/// Exact Euclidean projection onto the simplex by enumerating every
/// candidate support.
pub fn active_set_projection(y: &[f64]) -> Vec<f64> {
    let d = y.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << d) {
        let support: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let theta = (support.iter().map(|&i| y[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut x = vec![0.0; d];
        let mut feasible = true;
        for &i in &support {
            x[i] = y[i] - theta;
            if x[i] < -1e-15 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, x));
        }
    }
    best.unwrap().1
}

pub const FD_STEP: f64 = 1e-6;

/// Largest `|G_e/|E| − fd| / max(|G_e/|E||, 1)` over the components of
/// `xe`, with `fd` the central difference of `f_e`.
pub fn edge_fd_error(problem: &dyn CostFunction, e: usize, xe: &[f64]) -> f64 {
    let m = problem.num_terms() as f64;
    let mut g = vec![0.0; xe.len()];
    problem.local_subgradient(e, xe, &mut g);
    let mut x = xe.to_vec();
    let mut worst = 0.0f64;
    for i in 0..xe.len() {
        x[i] = xe[i] + FD_STEP;
        let up = problem.local_value(e, &x);
        x[i] = xe[i] - FD_STEP;
        let down = problem.local_value(e, &x);
        x[i] = xe[i];
        let fd = (up - down) / (2.0 * FD_STEP);
        let got = g[i] / m;
        worst = worst.max((got - fd).abs() / got.abs().max(1.0));
    }
    worst
}

pub fn gather(problem: &dyn CostFunction, e: usize, x: &[f64]) -> Vec<f64> {
    problem
        .hypergraph()
        .edge_vars(e)
        .iter()
        .map(|&v| x[v])
        .collect()
}

/// Worst finite-difference error over `points` random `(x, e)` draws,
/// skipping draws for which `near_kink(e, x)` holds.
pub fn family_fd_error(
    problem: &dyn CostFunction,
    rng: &mut ChaCha8Rng,
    points: usize,
    near_kink: impl Fn(usize, &[f64]) -> bool,
) -> f64 {
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < points {
        let x: Vec<f64> = (0..problem.dim())
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let e = rng.random_range(0..problem.num_terms());
        if near_kink(e, &x) {
            continue;
        }
        worst = worst.max(edge_fd_error(problem, e, &gather(problem, e, &x)));
        checked += 1;
    }
    worst
}

pub fn svm_near_kink(p: &SvmProblem) -> impl Fn(usize, &[f64]) -> bool + '_ {
    |e, x| (p.margin(e, x) - 1.0).abs() < 1e-3
}

pub fn cut_near_kink(p: &CutProblem) -> impl Fn(usize, &[f64]) -> bool + '_ {
    |e, x| {
        let xe = gather(p, e, x);
        let d = xe.len() / 2;
        (0..d).any(|i| (xe[i] - xe[d + i]).abs() < 1e-3)
    }
}

pub fn smooth(_: usize, _: &[f64]) -> bool {
    false
}

pub fn random_svm(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SvmProblem {
    let examples = (0..m)
        .map(|_| {
            let k = rng.random_range(1..=4.min(n));
            let mut idx = index::sample(rng, n, k).into_vec();
            idx.sort_unstable();
            let vals = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (SparseVec::new(idx, vals).unwrap(), y)
        })
        .collect();
    SvmProblem::new(n, examples, rng.random_range(0.01..1.0)).unwrap()
}

pub fn random_mc(rng: &mut ChaCha8Rng) -> McProblem {
    let (rows, cols) = (3, 4);
    let mut cells = index::sample(rng, rows * cols, 7).into_vec();
    cells.sort_unstable();
    let entries = cells
        .into_iter()
        .map(|c| (c / cols, c % cols, rng.random_range(-2.0..2.0)))
        .collect();
    McProblem::new(rows, cols, 2, 0.3, entries).unwrap()
}

pub fn random_cut(rng: &mut ChaCha8Rng) -> CutProblem {
    let arcs = (0..6)
        .map(|_| {
            let u = rng.random_range(0..5);
            let v = (u + rng.random_range(1..5)) % 5;
            (u, v, rng.random_range(0.5..3.0))
        })
        .collect();
    CutProblem::new(5, 3, arcs).unwrap()
}

pub fn random_quadratic(rng: &mut ChaCha8Rng) -> SeparableQuadratic {
    let terms = (0..6)
        .map(|_| {
            let k = rng.random_range(1..=3);
            let mut vars = index::sample(rng, 6, k).into_vec();
            vars.sort_unstable();
            let t = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            (vars, rng.random_range(0.1..2.0), t)
        })
        .collect();
    SeparableQuadratic::new(6, terms).unwrap()
}
