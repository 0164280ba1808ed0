use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CostFunction, Curvature, Family};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, HypergraphBuilder};

/// Low-rank matrix completion by factorization `Z ≈ L Rᵀ`:
///
/// `f_uv(L_u, R_v) = (L_u·R_v − Z_uv)² + μ/(2|E_u−|) ‖L_u‖² + μ/(2|E_−v|) ‖R_v‖²`
///
/// Decision vector layout: `L` row-major (`n_r·r` scalars) followed by `R`
/// row-major (`n_c·r` scalars).
#[derive(Debug, Clone)]
pub struct McProblem {
    rows: usize,
    cols: usize,
    rank: usize,
    mu: f64,
    entries: Vec<(usize, usize, f64)>,
    row_counts: Vec<u32>,
    col_counts: Vec<u32>,
    graph: Hypergraph,
    scale: f64,
}

impl McProblem {
    pub fn new(
        rows: usize,
        cols: usize,
        rank: usize,
        mu: f64,
        entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::param("rank must be >= 1"));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::param(format!("mu must be >= 0, got {mu}")));
        }
        if entries.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        let mut row_counts = vec![0u32; rows];
        let mut col_counts = vec![0u32; cols];
        let n = (rows + cols) * rank;
        let mut builder =
            HypergraphBuilder::with_capacity(n, entries.len(), 2 * rank * entries.len());
        let mut vars = Vec::with_capacity(2 * rank);
        for (i, &(u, v, z)) in entries.iter().enumerate() {
            if u >= rows || v >= cols {
                return Err(Error::param(format!(
                    "entry ({u}, {v}) outside a {rows}x{cols} matrix"
                )));
            }
            if !z.is_finite() {
                return Err(Error::param(format!("entry ({u}, {v}) is not finite")));
            }
            row_counts[u] += 1;
            col_counts[v] += 1;
            vars.clear();
            vars.extend(u * rank..(u + 1) * rank);
            let r0 = rows * rank + v * rank;
            vars.extend(r0..r0 + rank);
            builder.push(&vars, i);
        }
        let graph = builder.finish();
        let scale = entries.len() as f64;
        Ok(Self {
            rows,
            cols,
            rank,
            mu,
            entries,
            row_counts,
            col_counts,
            graph,
            scale,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// `|E_u−|` for every row.
    pub fn row_counts(&self) -> &[u32] {
        &self.row_counts
    }

    /// `|E_−v|` for every column.
    pub fn col_counts(&self) -> &[u32] {
        &self.col_counts
    }

    pub fn left_offset(&self, u: usize) -> usize {
        u * self.rank
    }

    pub fn right_offset(&self, v: usize) -> usize {
        (self.rows + v) * self.rank
    }

    pub fn predict(&self, x: &[f64], u: usize, v: usize) -> f64 {
        let l = &x[self.left_offset(u)..self.left_offset(u) + self.rank];
        let r = &x[self.right_offset(v)..self.right_offset(v) + self.rank];
        l.iter().zip(r).map(|(a, b)| a * b).sum()
    }

    /// Root-mean-square error of `L Rᵀ` over the given entries.
    pub fn rmse(&self, x: &[f64], entries: &[(usize, usize, f64)]) -> f64 {
        if entries.is_empty() {
            return 0.0;
        }
        let sse: f64 = entries
            .iter()
            .map(|&(u, v, z)| {
                let r = self.predict(x, u, v) - z;
                r * r
            })
            .sum();
        (sse / entries.len() as f64).sqrt()
    }
}

impl CostFunction for McProblem {
    fn family(&self) -> Family {
        Family::MatrixCompletion
    }

    fn hypergraph(&self) -> &Hypergraph {
        &self.graph
    }

    fn local_value(&self, edge: usize, xe: &[f64]) -> f64 {
        let (u, v, z) = self.entries[edge];
        let (l, r) = xe.split_at(self.rank);
        let dot: f64 = l.iter().zip(r).map(|(a, b)| a * b).sum();
        let ln: f64 = l.iter().map(|a| a * a).sum();
        let rn: f64 = r.iter().map(|a| a * a).sum();
        let res = dot - z;
        res * res
            + self.mu / (2.0 * self.row_counts[u] as f64) * ln
            + self.mu / (2.0 * self.col_counts[v] as f64) * rn
    }

    fn local_subgradient(&self, edge: usize, xe: &[f64], grad: &mut [f64]) {
        let (u, v, z) = self.entries[edge];
        let k = self.rank;
        let (l, r) = xe.split_at(k);
        let dot: f64 = l.iter().zip(r).map(|(a, b)| a * b).sum();
        let res2 = 2.0 * (dot - z);
        let lw = self.mu / self.row_counts[u] as f64;
        let rw = self.mu / self.col_counts[v] as f64;
        for i in 0..k {
            grad[i] = (res2 * r[i] + lw * l[i]) * self.scale;
            grad[k + i] = (res2 * l[i] + rw * r[i]) * self.scale;
        }
    }

    /// Factors i.i.d. uniform on `[−0.5/√r, 0.5/√r]`.
    fn initial_point(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 0.5 / (self.rank as f64).sqrt();
        (0..self.dim())
            .map(|_| rng.random_range(-bound..=bound))
            .collect()
    }

    /// The factorized objective is nonconvex: no strong convexity and no
    /// global gradient Lipschitz constant.
    fn curvature(&self) -> Curvature {
        Curvature {
            strong_convexity: 0.0,
            smoothness: None,
        }
    }

    fn train_metric(&self, x: &[f64]) -> Option<f64> {
        Some(self.rmse(x, &self.entries))
    }
}
