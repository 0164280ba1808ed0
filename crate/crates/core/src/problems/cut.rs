use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::simplex::project_simplex_in_place;
use super::{CostFunction, Curvature, Family};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, HypergraphBuilder};

/// Multiway cut relaxation: `Σ_{(u,v)} w_uv ‖x_u − x_v‖₁` with every node's
/// block `x_u` constrained to the `D`-dimensional probability simplex.
///
/// Node `u` owns variables `u·D .. (u+1)·D`. Arcs are stored with `u < v`
/// so an edge's variables are the `u` block followed by the `v` block.
#[derive(Debug, Clone)]
pub struct CutProblem {
    nodes: usize,
    d: usize,
    arcs: Vec<(usize, usize, f64)>,
    graph: Hypergraph,
    scale: f64,
}

impl CutProblem {
    pub fn new(nodes: usize, d: usize, arcs: Vec<(usize, usize, f64)>) -> Result<Self> {
        if d < 2 {
            return Err(Error::param(format!(
                "simplex dimension must be >= 2, got {d}"
            )));
        }
        if arcs.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        let mut builder =
            HypergraphBuilder::with_capacity(nodes * d, arcs.len(), 2 * d * arcs.len());
        let mut normalized = Vec::with_capacity(arcs.len());
        let mut vars = Vec::with_capacity(2 * d);
        for (i, &(u, v, w)) in arcs.iter().enumerate() {
            if u == v {
                return Err(Error::param(format!("arc {i}: self-loop on node {u}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::param(format!(
                    "arc {i}: weight must be > 0, got {w}"
                )));
            }
            if u >= nodes || v >= nodes {
                return Err(Error::param(format!(
                    "arc {i}: node index out of range for {nodes} nodes"
                )));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            vars.clear();
            vars.extend(a * d..(a + 1) * d);
            vars.extend(b * d..(b + 1) * d);
            builder.push(&vars, i);
            normalized.push((a, b, w));
        }
        let graph = builder.finish();
        Ok(Self {
            nodes,
            d,
            scale: normalized.len() as f64,
            arcs: normalized,
            graph,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn simplex_dim(&self) -> usize {
        self.d
    }

    /// Arcs with `u < v`.
    pub fn arcs(&self) -> &[(usize, usize, f64)] {
        &self.arcs
    }

    fn random_simplex_point(rng: &mut ChaCha8Rng, out: &mut [f64]) {
        // Normalized exponentials are uniform on the simplex.
        let mut total = 0.0;
        for v in out.iter_mut() {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            *v = -u.ln();
            total += *v;
        }
        for v in out.iter_mut() {
            *v /= total;
        }
    }
}

impl CostFunction for CutProblem {
    fn family(&self) -> Family {
        Family::GraphCut
    }

    fn hypergraph(&self) -> &Hypergraph {
        &self.graph
    }

    fn local_value(&self, edge: usize, xe: &[f64]) -> f64 {
        let w = self.arcs[edge].2;
        let (a, b) = xe.split_at(self.d);
        w * a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>()
    }

    fn local_subgradient(&self, edge: usize, xe: &[f64], grad: &mut [f64]) {
        let w = self.arcs[edge].2 * self.scale;
        let d = self.d;
        for i in 0..d {
            let diff = xe[i] - xe[d + i];
            // sign(0) = 0 at the kink.
            let s = if diff > 0.0 {
                w
            } else if diff < 0.0 {
                -w
            } else {
                0.0
            };
            grad[i] = s;
            grad[d + i] = -s;
        }
    }

    /// Projected subgradient step: both node blocks are moved along `−γ G_e`
    /// and projected back onto the simplex; the returned delta is the
    /// difference from the values that were read.
    fn local_update(
        &self,
        edge: usize,
        xe: &[f64],
        gamma: f64,
        delta: &mut [f64],
        scratch: &mut Vec<f64>,
    ) {
        let d = self.d;
        self.local_subgradient(edge, xe, delta);
        for (g, &x) in delta.iter_mut().zip(xe) {
            *g = x - gamma * *g;
        }
        project_simplex_in_place(&mut delta[..d], scratch);
        project_simplex_in_place(&mut delta[d..], scratch);
        for (y, &x) in delta.iter_mut().zip(xe) {
            *y -= x;
        }
    }

    fn supports_single_component(&self) -> bool {
        false
    }

    /// Each node starts at an independent uniform point on the simplex.
    fn initial_point(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; self.dim()];
        for block in x.chunks_mut(self.d) {
            Self::random_simplex_point(&mut rng, block);
        }
        x
    }

    fn sample_local_point(&self, _edge: usize, rng: &mut ChaCha8Rng, xe: &mut [f64]) {
        for block in xe.chunks_mut(self.d) {
            Self::random_simplex_point(rng, block);
        }
    }

    /// Piecewise linear: neither strongly convex nor smooth.
    fn curvature(&self) -> Curvature {
        Curvature {
            strong_convexity: 0.0,
            smoothness: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{full_objective, term_value};

    #[test]
    fn opposite_vertices() {
        let p = CutProblem::new(2, 2, vec![(0, 1, 2.0)]).unwrap();
        assert_eq!(term_value(&p, 0, &[1.0, 0.0, 0.0, 1.0]).unwrap(), 4.0);
        assert_eq!(p.hypergraph().edge_vars(0), &[0, 1, 2, 3]);
        assert_eq!(p.dim(), 4);
    }

    #[test]
    fn identical_points_cost_nothing() {
        let p = CutProblem::new(3, 3, vec![(0, 1, 1.0), (1, 2, 5.0)]).unwrap();
        let x = [0.2, 0.3, 0.5].repeat(3);
        assert_eq!(full_objective(&p, &x).unwrap(), 0.0);
    }

    #[test]
    fn reversed_arc_is_normalized() {
        let p = CutProblem::new(3, 2, vec![(2, 0, 1.0)]).unwrap();
        assert_eq!(p.arcs()[0], (0, 2, 1.0));
        assert_eq!(p.hypergraph().edge_vars(0), &[0, 1, 4, 5]);
    }

    #[test]
    fn update_keeps_blocks_on_simplex() {
        let p = CutProblem::new(2, 3, vec![(0, 1, 1.0)]).unwrap();
        let xe = [0.6, 0.3, 0.1, 0.1, 0.1, 0.8];
        let mut delta = vec![0.0; 6];
        p.local_update(0, &xe, 0.05, &mut delta, &mut Vec::new());
        let new: Vec<f64> = xe.iter().zip(&delta).map(|(a, b)| a + b).collect();
        for block in new.chunks(3) {
            assert!((block.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(block.iter().all(|&v| v >= 0.0));
        }
        // The step moves the blocks toward each other.
        assert!(p.local_value(0, &new) < p.local_value(0, &xe));
    }

    #[test]
    fn rejects_bad_arcs() {
        assert!(CutProblem::new(2, 2, vec![(0, 0, 1.0)]).is_err());
        assert!(CutProblem::new(2, 2, vec![(0, 1, -1.0)]).is_err());
        assert!(CutProblem::new(2, 1, vec![(0, 1, 1.0)]).is_err());
    }
}
