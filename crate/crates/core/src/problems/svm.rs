use super::{CostFunction, Curvature, Family, SparseVec};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, HypergraphBuilder};

/// Sparse hinge-loss SVM with the ridge penalty split across examples:
///
/// `f_α(x) = max(1 − y_α xᵀz_α, 0) + λ Σ_{u∈e_α} x_u² / d_u`
///
/// where `d_u` counts the examples in which feature `u` is nonzero, so the
/// split terms sum back to `λ‖x‖²` over observed features.
#[derive(Debug, Clone)]
pub struct SvmProblem {
    graph: Hypergraph,
    /// Feature values, aligned with the hypergraph's flat variable array.
    values: Vec<f64>,
    labels: Vec<f64>,
    lambda: f64,
    degree: Vec<u32>,
    scale: f64,
}

impl SvmProblem {
    /// `n` is the feature count; labels must be ±1 and every example must
    /// have at least one nonzero feature.
    pub fn new(n: usize, examples: Vec<(SparseVec, f64)>, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::param(format!("lambda must be >= 0, got {lambda}")));
        }
        if examples.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        let nnz = examples.iter().map(|(z, _)| z.len()).sum();
        let mut builder = HypergraphBuilder::with_capacity(n, examples.len(), nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut labels = Vec::with_capacity(examples.len());
        let mut degree = vec![0u32; n];
        for (i, (z, y)) in examples.iter().enumerate() {
            if *y != 1.0 && *y != -1.0 {
                return Err(Error::param(format!(
                    "example {i}: label must be ±1, got {y}"
                )));
            }
            if z.is_empty() {
                return Err(Error::param(format!("example {i} has no nonzero features")));
            }
            for &u in &z.indices {
                if u >= n {
                    return Err(Error::IndexOutOfRange { index: u, len: n });
                }
                degree[u] += 1;
            }
            builder.push(&z.indices, i);
            values.extend_from_slice(&z.values);
            labels.push(*y);
        }
        let graph = builder.finish();
        let scale = graph.num_edges() as f64;
        Ok(Self {
            graph,
            values,
            labels,
            lambda,
            degree,
            scale,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::param(format!("lambda must be >= 0, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn num_features(&self) -> usize {
        self.graph.n()
    }

    pub fn num_examples(&self) -> usize {
        self.labels.len()
    }

    /// Per-feature example counts `d_u`.
    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    pub fn example(&self, i: usize) -> (SparseVec, f64) {
        let vars = self.graph.edge_vars(i);
        (
            SparseVec {
                indices: vars.to_vec(),
                values: self.feature_values(i).to_vec(),
            },
            self.labels[i],
        )
    }

    fn feature_values(&self, i: usize) -> &[f64] {
        let start = self.graph.edge_offset(i);
        &self.values[start..start + self.graph.edge_vars(i).len()]
    }

    pub fn margin(&self, i: usize, x: &[f64]) -> f64 {
        let vars = self.graph.edge_vars(i);
        let dot: f64 = vars
            .iter()
            .zip(self.feature_values(i))
            .map(|(&u, &z)| x[u] * z)
            .sum();
        self.labels[i] * dot
    }

    /// Fraction of examples with `y xᵀz ≤ 0`.
    pub fn misclassification_rate(&self, x: &[f64]) -> f64 {
        let wrong = (0..self.num_examples())
            .filter(|&i| self.margin(i, x) <= 0.0)
            .count();
        wrong as f64 / self.num_examples() as f64
    }

    /// Largest singular value of the example matrix, by power iteration.
    fn data_spectral_norm(&self) -> f64 {
        let n = self.num_features();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut norm = 0.0;
        for _ in 0..100 {
            let mut w = vec![0.0; n];
            for i in 0..self.num_examples() {
                let vars = self.graph.edge_vars(i);
                let zs = self.feature_values(i);
                let dot: f64 = vars.iter().zip(zs).map(|(&u, &z)| v[u] * z).sum();
                for (&u, &z) in vars.iter().zip(zs) {
                    w[u] += dot * z;
                }
            }
            let wn = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if wn == 0.0 {
                return 0.0;
            }
            for (a, b) in v.iter_mut().zip(&w) {
                *a = b / wn;
            }
            norm = wn;
        }
        norm.sqrt()
    }
}

impl CostFunction for SvmProblem {
    fn family(&self) -> Family {
        Family::Svm
    }

    fn hypergraph(&self) -> &Hypergraph {
        &self.graph
    }

    fn local_value(&self, edge: usize, xe: &[f64]) -> f64 {
        let vars = self.graph.edge_vars(edge);
        let zs = self.feature_values(edge);
        let mut dot = 0.0;
        let mut reg = 0.0;
        for ((&u, &z), &xu) in vars.iter().zip(zs).zip(xe) {
            dot += xu * z;
            reg += xu * xu / self.degree[u] as f64;
        }
        (1.0 - self.labels[edge] * dot).max(0.0) + self.lambda * reg
    }

    fn local_subgradient(&self, edge: usize, xe: &[f64], grad: &mut [f64]) {
        let vars = self.graph.edge_vars(edge);
        let zs = self.feature_values(edge);
        let y = self.labels[edge];
        let dot: f64 = zs.iter().zip(xe).map(|(z, x)| z * x).sum();
        // At the kink (margin exactly 1) the hinge contributes 0.
        let active = y * dot < 1.0;
        for (i, ((&u, &z), &xu)) in vars.iter().zip(zs).zip(xe).enumerate() {
            let mut g = 2.0 * self.lambda * xu / self.degree[u] as f64;
            if active {
                g -= y * z;
            }
            grad[i] = g * self.scale;
        }
    }

    fn initial_point(&self, _seed: u64) -> Vec<f64> {
        vec![0.0; self.num_features()]
    }

    /// `c = 2λ` on the observed features. Hinge loss has no Lipschitz
    /// gradient; `L` is the proxy `2λ + ‖Z‖₂²`, the curvature of the hinge
    /// smoothed over a unit-width margin band.
    fn curvature(&self) -> Curvature {
        let z = self.data_spectral_norm();
        Curvature {
            strong_convexity: 2.0 * self.lambda,
            smoothness: Some(2.0 * self.lambda + z * z),
        }
    }

    fn train_metric(&self, x: &[f64]) -> Option<f64> {
        Some(self.misclassification_rate(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{full_objective, term_subgradient, term_value};

    fn toy(lambda: f64) -> SvmProblem {
        let z = SparseVec::new(vec![0, 2], vec![1.0, -2.0]).unwrap();
        SvmProblem::new(3, vec![(z, 1.0)], lambda).unwrap()
    }

    #[test]
    fn value_at_zero() {
        assert_eq!(term_value(&toy(0.0), 0, &[0.0; 3]).unwrap(), 1.0);
    }

    #[test]
    fn active_hinge_subgradient() {
        let g = term_subgradient(&toy(0.5), 0, &[0.0; 3]).unwrap();
        assert_eq!(g.indices, vec![0, 2]);
        assert_eq!(g.values, vec![-1.0, 2.0]);
    }

    #[test]
    fn inactive_hinge_subgradient() {
        // margin = 2 ≥ 1, only the split regularizer 2·λ·x_0/d_0 = 2 remains.
        let g = term_subgradient(&toy(0.5), 0, &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.values, vec![2.0, 0.0]);
    }

    #[test]
    fn kink_takes_zero_hinge_element() {
        let g = term_subgradient(&toy(0.0), 0, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.values, vec![0.0, 0.0]);
    }

    #[test]
    fn separable_data_has_zero_objective() {
        let z1 = SparseVec::new(vec![0], vec![1.0]).unwrap();
        let z2 = SparseVec::new(vec![1], vec![1.0]).unwrap();
        let p = SvmProblem::new(2, vec![(z1, 1.0), (z2, -1.0)], 0.0).unwrap();
        assert_eq!(full_objective(&p, &[3.0, -1.0]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let z = SparseVec::new(vec![0], vec![1.0]).unwrap();
        assert!(SvmProblem::new(1, vec![(z.clone(), 2.0)], 0.0).is_err());
        assert!(SvmProblem::new(1, vec![(SparseVec::default(), 1.0)], 0.0).is_err());
        assert!(SvmProblem::new(1, vec![(z, 1.0)], -1.0).is_err());
        assert!(matches!(
            term_value(&toy(0.0), 0, &[0.0; 2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn induced_edges_are_nonzero_features() {
        let z = SparseVec::new(vec![3, 9], vec![1.0, 1.0]).unwrap();
        let p = SvmProblem::new(10, vec![(z, 1.0)], 0.0).unwrap();
        assert_eq!(p.hypergraph().edge_vars(0), &[3, 9]);
    }
}
