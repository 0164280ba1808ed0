use super::{CostFunction, Curvature, Family};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// `f_e(x_e) = w_e ‖x_e − t_e‖²`. Smooth and strongly convex with a
/// closed-form minimizer, which makes it the reference problem for checking
/// convergence bounds.
#[derive(Debug, Clone)]
pub struct SeparableQuadratic {
    graph: Hypergraph,
    weights: Vec<f64>,
    /// Targets aligned with the hypergraph's flat variable array.
    targets: Vec<f64>,
    scale: f64,
}

impl SeparableQuadratic {
    /// `terms[i] = (vars, weight, targets)`.
    pub fn new(n: usize, terms: Vec<(Vec<usize>, f64, Vec<f64>)>) -> Result<Self> {
        let mut edges = Vec::with_capacity(terms.len());
        let mut weights = Vec::with_capacity(terms.len());
        let mut targets = Vec::new();
        for (i, (vars, w, t)) in terms.into_iter().enumerate() {
            if vars.len() != t.len() {
                return Err(Error::param(format!(
                    "term {i}: targets do not match variables"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::param(format!("term {i}: weight must be > 0")));
            }
            edges.push(vars);
            weights.push(w);
            targets.extend(t);
        }
        let graph = Hypergraph::new(n, edges)?;
        Ok(Self {
            scale: graph.num_edges() as f64,
            graph,
            weights,
            targets,
        })
    }

    /// `Σ_v (x_v − target)²` written as one singleton term per variable.
    pub fn singletons(n: usize, target: f64) -> Result<Self> {
        Self::new(n, (0..n).map(|v| (vec![v], 1.0, vec![target])).collect())
    }

    fn edge_targets(&self, e: usize) -> &[f64] {
        let start = self.graph.edge_offset(e);
        &self.targets[start..start + self.graph.edge_vars(e).len()]
    }

    /// Diagonal of the Hessian of `f`.
    fn hessian_diagonal(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.graph.n()];
        for e in 0..self.graph.num_edges() {
            for &v in self.graph.edge_vars(e) {
                h[v] += 2.0 * self.weights[e];
            }
        }
        h
    }

    /// The exact minimizer; variables in no term are set to 0.
    pub fn minimizer(&self) -> Vec<f64> {
        let mut num = vec![0.0; self.graph.n()];
        let mut den = vec![0.0; self.graph.n()];
        for e in 0..self.graph.num_edges() {
            let w = self.weights[e];
            for (&v, &t) in self.graph.edge_vars(e).iter().zip(self.edge_targets(e)) {
                num[v] += w * t;
                den[v] += w;
            }
        }
        num.iter()
            .zip(&den)
            .map(|(a, b)| if *b > 0.0 { a / b } else { 0.0 })
            .collect()
    }
}

impl CostFunction for SeparableQuadratic {
    fn family(&self) -> Family {
        Family::Quadratic
    }

    fn hypergraph(&self) -> &Hypergraph {
        &self.graph
    }

    fn local_value(&self, edge: usize, xe: &[f64]) -> f64 {
        let t = self.edge_targets(edge);
        self.weights[edge]
            * xe.iter()
                .zip(t)
                .map(|(x, t)| (x - t) * (x - t))
                .sum::<f64>()
    }

    fn local_subgradient(&self, edge: usize, xe: &[f64], grad: &mut [f64]) {
        let w2 = 2.0 * self.weights[edge] * self.scale;
        for ((g, x), t) in grad.iter_mut().zip(xe).zip(self.edge_targets(edge)) {
            *g = w2 * (x - t);
        }
    }

    fn initial_point(&self, _seed: u64) -> Vec<f64> {
        vec![0.0; self.graph.n()]
    }

    /// The Hessian is diagonal, so `c` and `L` are its extreme entries over
    /// the variables that appear in some term.
    fn curvature(&self) -> Curvature {
        let h: Vec<f64> = self
            .hessian_diagonal()
            .into_iter()
            .filter(|&v| v > 0.0)
            .collect();
        Curvature {
            strong_convexity: h.iter().copied().fold(f64::INFINITY, f64::min),
            smoothness: Some(h.iter().copied().fold(0.0, f64::max)),
        }
    }
}
