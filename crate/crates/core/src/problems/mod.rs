//! Separable cost functions `f(x) = Σ_e f_e(x_e)`.
//!
//! Every family works on *local* coordinates: the values of `x` on an
//! edge's variables, in the edge's (ascending) variable order. The engine
//! gathers those values from shared memory, asks the problem for an update,
//! and scatters it back.

mod cut;
mod mc;
mod quadratic;
pub mod simplex;
mod svm;

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cut::CutProblem;
pub use mc::McProblem;
pub use quadratic::SeparableQuadratic;
pub use simplex::project_simplex;
pub use svm::SvmProblem;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Svm,
    MatrixCompletion,
    GraphCut,
    Quadratic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Svm => "svm",
            Family::MatrixCompletion => "matrix_completion",
            Family::GraphCut => "graph_cut",
            Family::Quadratic => "quadratic",
        })
    }
}

/// Analytic curvature information for the whole objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    /// Strong convexity modulus; 0 when the objective is not strongly convex.
    pub strong_convexity: f64,
    /// Gradient Lipschitz constant, if the family has one (or a documented
    /// proxy for it).
    pub smoothness: Option<f64>,
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVec {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::param(format!(
                "sparse vector has {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(
                "sparse vector indices must be strictly increasing",
            ));
        }
        Ok(Self { indices, values })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| dense.get(i).copied().unwrap_or(0.0) * v)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

/// A separable cost function over a sparse hypergraph.
///
/// Implementations are immutable and shared across worker threads. All
/// per-edge methods take the local values `xe` of the edge's variables.
pub trait CostFunction: Send + Sync {
    fn family(&self) -> Family;

    fn hypergraph(&self) -> &Hypergraph;

    fn dim(&self) -> usize {
        self.hypergraph().n()
    }

    fn num_terms(&self) -> usize {
        self.hypergraph().num_edges()
    }

    /// `f_e` at the local point.
    fn local_value(&self, edge: usize, xe: &[f64]) -> f64;

    /// `G_e`: a subgradient of `f_e` multiplied by `|E|`.
    fn local_subgradient(&self, edge: usize, xe: &[f64], grad: &mut [f64]);

    /// The additive change a full-edge step applies to `xe`. The default is
    /// `-γ G_e`; constrained families also project.
    fn local_update(
        &self,
        edge: usize,
        xe: &[f64],
        gamma: f64,
        delta: &mut [f64],
        _scratch: &mut Vec<f64>,
    ) {
        self.local_subgradient(edge, xe, delta);
        for d in delta.iter_mut() {
            *d *= -gamma;
        }
    }

    /// False for families whose steps must keep blocks of variables
    /// feasible, which a single-coordinate update cannot do.
    fn supports_single_component(&self) -> bool {
        true
    }

    fn initial_point(&self, seed: u64) -> Vec<f64>;

    /// Draws local values for an edge from the region iterates are expected
    /// to occupy; used to estimate the gradient bound `M`.
    fn sample_local_point(&self, _edge: usize, rng: &mut ChaCha8Rng, xe: &mut [f64]) {
        for v in xe.iter_mut() {
            *v = rng.random_range(-1.0..=1.0);
        }
    }

    fn curvature(&self) -> Curvature;

    /// Family-specific training-set quality metric (SVM misclassification
    /// rate, MC RMSE). `None` when the family has none.
    fn train_metric(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

fn check_edge(problem: &dyn CostFunction, edge: usize) -> Result<()> {
    let m = problem.num_terms();
    if edge >= m {
        return Err(Error::EdgeOutOfRange { edge, edges: m });
    }
    Ok(())
}

fn check_dim(problem: &dyn CostFunction, x: &[f64]) -> Result<()> {
    if x.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn gather(vars: &[usize], x: &[f64], xe: &mut Vec<f64>) {
    xe.clear();
    xe.extend(vars.iter().map(|&v| x[v]));
}

/// `f_e(x_e)` on a dense snapshot.
pub fn term_value(problem: &dyn CostFunction, edge: usize, x: &[f64]) -> Result<f64> {
    check_edge(problem, edge)?;
    check_dim(problem, x)?;
    let mut xe = Vec::new();
    gather(problem.hypergraph().edge_vars(edge), x, &mut xe);
    Ok(problem.local_value(edge, &xe))
}

/// `G_e(x)` on a dense snapshot, supported on the edge's variables.
pub fn term_subgradient(problem: &dyn CostFunction, edge: usize, x: &[f64]) -> Result<SparseVec> {
    check_edge(problem, edge)?;
    check_dim(problem, x)?;
    let vars = problem.hypergraph().edge_vars(edge);
    let mut xe = Vec::new();
    gather(vars, x, &mut xe);
    let mut g = vec![0.0; vars.len()];
    problem.local_subgradient(edge, &xe, &mut g);
    Ok(SparseVec {
        indices: vars.to_vec(),
        values: g,
    })
}

/// `Σ_e f_e(x_e)`, summed in edge order.
pub fn full_objective(problem: &dyn CostFunction, x: &[f64]) -> Result<f64> {
    check_dim(problem, x)?;
    Ok(objective_unchecked(problem, x))
}

pub(crate) fn objective_unchecked(problem: &dyn CostFunction, x: &[f64]) -> f64 {
    let h = problem.hypergraph();
    let mut xe = Vec::new();
    let mut total = 0.0;
    for e in 0..h.num_edges() {
        gather(h.edge_vars(e), x, &mut xe);
        total += problem.local_value(e, &xe);
    }
    total
}

pub fn induced_hypergraph(problem: &dyn CostFunction) -> Hypergraph {
    problem.hypergraph().clone()
}
