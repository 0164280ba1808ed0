//! Seeded synthetic generators.

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::problems::SparseVec;

/// Labeled examples around a planted separator.
#[derive(Debug, Clone)]
pub struct SvmSample {
    pub examples: Vec<(SparseVec, f64)>,
    pub separator: Vec<f64>,
}

/// `examples` examples over `features` features, each with exactly `nnz`
/// distinct features carrying positive values of unit total norm. The label
/// is the sign of the planted N(0, 1) separator's margin, flipped with
/// probability `noise`.
pub fn svm(
    examples: usize,
    features: usize,
    nnz: usize,
    noise: f64,
    seed: u64,
) -> Result<SvmSample> {
    if nnz == 0 || nnz > features {
        return Err(Error::param(format!(
            "nonzeros per example must be in 1..={features}, got {nnz}"
        )));
    }
    if examples == 0 {
        return Err(Error::param("examples must be >= 1"));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::param(format!(
            "label noise must be in [0, 1], got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let separator: Vec<f64> = (0..features).map(|_| rng.sample(StandardNormal)).collect();
    let mut out = Vec::with_capacity(examples);
    for _ in 0..examples {
        let mut indices = index::sample(&mut rng, features, nnz).into_vec();
        indices.sort_unstable();
        let mut values: Vec<f64> = (0..nnz).map(|_| rng.random_range(0.05..1.0)).collect();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        values.iter_mut().for_each(|v| *v /= norm);
        let margin: f64 = indices
            .iter()
            .zip(&values)
            .map(|(&u, v)| separator[u] * v)
            .sum();
        let mut y = if margin >= 0.0 { 1.0 } else { -1.0 };
        if rng.random::<f64>() < noise {
            y = -y;
        }
        out.push((SparseVec { indices, values }, y));
    }
    Ok(SvmSample {
        examples: out,
        separator,
    })
}

/// A planted low-rank matrix split into observed and held-out cells.
#[derive(Debug, Clone)]
pub struct McSample {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// Row-major `rows × rank`.
    pub left: Vec<f64>,
    /// Row-major `cols × rank`.
    pub right: Vec<f64>,
    pub observed: Vec<(usize, usize, f64)>,
    /// Every unobserved cell, noise-free.
    pub held_out: Vec<(usize, usize, f64)>,
}

impl McSample {
    pub fn planted(&self, u: usize, v: usize) -> f64 {
        let r = self.rank;
        (0..r)
            .map(|i| self.left[u * r + i] * self.right[v * r + i])
            .sum()
    }
}

/// Factors with i.i.d. N(0, 1/√r) entries, so planted cells have unit
/// variance. Exactly `round(fraction · rows · cols)` cells are observed,
/// chosen uniformly, with optional Gaussian noise of standard deviation
/// `noise`.
pub fn matrix_completion(
    rows: usize,
    cols: usize,
    rank: usize,
    fraction: f64,
    noise: f64,
    seed: u64,
) -> Result<McSample> {
    if rows == 0 || cols == 0 || rank == 0 {
        return Err(Error::param("rows, cols and rank must be >= 1"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param(format!(
            "observed fraction must be in (0, 1], got {fraction}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::param(format!("noise must be >= 0, got {noise}")));
    }
    let cells = rows * cols;
    let count = ((fraction * cells as f64).round() as usize).clamp(1, cells);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = Normal::new(0.0, (rank as f64).powf(-0.25)).expect("valid deviation");
    let left: Vec<f64> = (0..rows * rank).map(|_| factor.sample(&mut rng)).collect();
    let right: Vec<f64> = (0..cols * rank).map(|_| factor.sample(&mut rng)).collect();
    let mut picked = index::sample(&mut rng, cells, count).into_vec();
    picked.sort_unstable();
    let mut sample = McSample {
        rows,
        cols,
        rank,
        left,
        right,
        observed: Vec::with_capacity(count),
        held_out: Vec::with_capacity(cells - count),
    };
    let mut next = picked.iter().peekable();
    for cell in 0..cells {
        let (u, v) = (cell / cols, cell % cols);
        let z = sample.planted(u, v);
        if next.peek() == Some(&&cell) {
            next.next();
            let eps: f64 = if noise > 0.0 {
                noise * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            sample.observed.push((u, v, z + eps));
        } else {
            sample.held_out.push((u, v, z));
        }
    }
    Ok(sample)
}

/// `(u, v, weight)`.
pub type Arc = (usize, usize, f64);

/// Weighted arcs of a `side³` grid with 6-connectivity: each node links to
/// its +x, +y and +z neighbours, `3·side²·(side−1)` arcs in total. Weights
/// are integers drawn uniformly from `1..=max_weight`.
pub fn grid_cut(side: usize, max_weight: u32, seed: u64) -> Result<(usize, Vec<Arc>)> {
    if side < 2 {
        return Err(Error::param(format!("grid side must be >= 2, got {side}")));
    }
    if max_weight == 0 {
        return Err(Error::param("max weight must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |x: usize, y: usize, z: usize| (x * side + y) * side + z;
    let mut arcs = Vec::with_capacity(3 * side * side * (side - 1));
    for x in 0..side {
        for y in 0..side {
            for z in 0..side {
                let here = id(x, y, z);
                let neighbours = [
                    (x + 1 < side).then(|| id(x + 1, y, z)),
                    (y + 1 < side).then(|| id(x, y + 1, z)),
                    (z + 1 < side).then(|| id(x, y, z + 1)),
                ];
                for there in neighbours.into_iter().flatten() {
                    arcs.push((here, there, rng.random_range(1..=max_weight) as f64));
                }
            }
        }
    }
    Ok((side * side * side, arcs))
}

/// Random geometric graph: `nodes` points uniform in the unit cube, an arc
/// between every pair closer than `radius`, weights as in [`grid_cut`].
pub fn geometric_cut(
    nodes: usize,
    radius: f64,
    max_weight: u32,
    seed: u64,
) -> Result<(usize, Vec<Arc>)> {
    if nodes < 2 {
        return Err(Error::param("need at least 2 nodes"));
    }
    if radius.is_nan() || radius <= 0.0 || max_weight == 0 {
        return Err(Error::param("radius and max weight must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 3]> = (0..nodes)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    let r2 = radius * radius;
    let mut arcs = Vec::new();
    for i in 0..nodes {
        for j in i + 1..nodes {
            let d2: f64 = (0..3).map(|k| (pts[i][k] - pts[j][k]).powi(2)).sum();
            if d2 < r2 {
                arcs.push((i, j, rng.random_range(1..=max_weight) as f64));
            }
        }
    }
    if arcs.is_empty() {
        return Err(Error::param("radius too small: no arcs generated"));
    }
    Ok((nodes, arcs))
}
