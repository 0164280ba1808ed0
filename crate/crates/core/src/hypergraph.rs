//! The hypergraph induced by a separable cost function and its sparsity
//! statistics.
//!
//! Each cost term `f_e` touches a small set of coordinates `e`; those sets
//! are the hyperedges. Edges are stored in compressed form (one flat array
//! of variable indices plus offsets) because the large problems have
//! millions of short edges.

use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A borrowed view of one hyperedge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge<'a> {
    pub id: usize,
    /// Sorted, distinct variable indices.
    pub vars: &'a [usize],
    /// Index into the owning problem's data (example row, matrix entry, arc).
    pub payload: usize,
}

impl Edge<'_> {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    offsets: Vec<usize>,
    vars: Vec<usize>,
    payloads: Vec<usize>,
}

/// A single broken invariant found by [`Hypergraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoEdges,
    EmptyEdge { edge: usize },
    IndexOutOfRange { edge: usize, index: usize, n: usize },
    NotStrictlyIncreasing { edge: usize, position: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoEdges => write!(f, "hypergraph has no edges"),
            Violation::EmptyEdge { edge } => write!(f, "edge {edge}: empty edge"),
            Violation::IndexOutOfRange { edge, index, n } => {
                write!(f, "edge {edge}: index {index} ≥ n ({n})")
            }
            Violation::NotStrictlyIncreasing { edge, position } => write!(
                f,
                "edge {edge}: variables not strictly increasing at position {position}"
            ),
        }
    }
}

impl Hypergraph {
    /// Builds a hypergraph and checks every invariant.
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let h = Self::from_edges_unchecked(n, edges);
        h.validate().map_err(|v| {
            let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
            Error::InvalidHypergraph(msgs.join("; "))
        })?;
        Ok(h)
    }

    /// Builds without validation; payload of each edge is its position.
    pub fn from_edges_unchecked(n: usize, edges: Vec<Vec<usize>>) -> Self {
        let mut b = HypergraphBuilder::with_capacity(n, edges.len(), 0);
        for (i, e) in edges.iter().enumerate() {
            b.push(e, i);
        }
        b.finish()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.payloads.len()
    }

    pub fn edge(&self, id: usize) -> Edge<'_> {
        Edge {
            id,
            vars: self.edge_vars(id),
            payload: self.payloads[id],
        }
    }

    #[inline]
    pub fn edge_vars(&self, id: usize) -> &[usize] {
        &self.vars[self.offsets[id]..self.offsets[id + 1]]
    }

    /// Start of the edge's slice in the flat variable array. Problems keep
    /// per-nonzero data (e.g. feature values) aligned with this layout.
    #[inline]
    pub fn edge_offset(&self, id: usize) -> usize {
        self.offsets[id]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = Edge<'_>> + '_ {
        (0..self.num_edges()).map(move |i| self.edge(i))
    }

    /// Total number of (edge, variable) incidences.
    pub fn nnz(&self) -> usize {
        self.vars.len()
    }

    /// Every violated invariant, each tagged with the offending edge.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.num_edges() == 0 {
            out.push(Violation::NoEdges);
        }
        for e in self.edges() {
            if e.vars.is_empty() {
                out.push(Violation::EmptyEdge { edge: e.id });
                continue;
            }
            for (pos, &v) in e.vars.iter().enumerate() {
                if v >= self.n {
                    out.push(Violation::IndexOutOfRange {
                        edge: e.id,
                        index: v,
                        n: self.n,
                    });
                }
                if pos > 0 && e.vars[pos - 1] >= v {
                    out.push(Violation::NotStrictlyIncreasing {
                        edge: e.id,
                        position: pos,
                    });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Number of edges containing each variable.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &v in &self.vars {
            deg[v] += 1;
        }
        deg
    }

    /// Variable -> incident edges, in compressed form.
    fn incidence(&self) -> (Vec<usize>, Vec<usize>) {
        let deg = self.degrees();
        let mut offsets = Vec::with_capacity(self.n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets.clone();
        let mut edges = vec![0usize; self.vars.len()];
        for e in 0..self.num_edges() {
            for &v in self.edge_vars(e) {
                edges[cursor[v]] = e;
                cursor[v] += 1;
            }
        }
        (offsets, edges)
    }

    /// Number of edges sharing at least one variable with `edge`, the edge
    /// itself included.
    fn conflict_count(
        &self,
        edge: usize,
        inc: &(Vec<usize>, Vec<usize>),
        stamp: &mut [usize],
        generation: usize,
    ) -> usize {
        let (offsets, incident) = inc;
        let mut count = 0;
        for &v in self.edge_vars(edge) {
            for &other in &incident[offsets[v]..offsets[v + 1]] {
                if stamp[other] != generation {
                    stamp[other] = generation;
                    count += 1;
                }
            }
        }
        count
    }

    /// Computes Ω, Δ and ρ.
    ///
    /// Ω and Δ are always exact. In sampled mode ρ is the maximum over `k`
    /// edges drawn uniformly without replacement, which can only
    /// under-estimate the exact value.
    pub fn compute_stats(&self, mode: StatsMode) -> Result<GraphStats> {
        let m = self.num_edges();
        if m == 0 {
            return Err(Error::EmptyHypergraph);
        }
        self.validate().map_err(|v| {
            Error::InvalidHypergraph(
                v.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            )
        })?;

        let omega = (0..m).map(|e| self.edge_vars(e).len()).max().unwrap_or(0);
        let max_deg = self.degrees().into_iter().max().unwrap_or(0);

        let inc = self.incidence();
        let mut stamp = vec![usize::MAX; m];
        let (candidates, exact): (Vec<usize>, bool) = match mode {
            StatsMode::Exact => ((0..m).collect(), true),
            StatsMode::Sampled { k, seed } => {
                if k == 0 {
                    return Err(Error::param("sampled statistics need k >= 1"));
                }
                if k >= m {
                    ((0..m).collect(), true)
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (index::sample(&mut rng, m, k).into_vec(), false)
                }
            }
        };
        let mut max_conflicts = 0;
        for (generation, &e) in candidates.iter().enumerate() {
            let c = self.conflict_count(e, &inc, &mut stamp, generation);
            max_conflicts = max_conflicts.max(c);
        }

        Ok(GraphStats {
            omega,
            delta: max_deg as f64 / m as f64,
            rho: max_conflicts as f64 / m as f64,
            exact,
        })
    }
}

/// Incremental construction in the compressed layout.
#[derive(Debug, Default)]
pub struct HypergraphBuilder {
    n: usize,
    offsets: Vec<usize>,
    vars: Vec<usize>,
    payloads: Vec<usize>,
}

impl HypergraphBuilder {
    pub fn with_capacity(n: usize, edges: usize, nnz: usize) -> Self {
        let mut offsets = Vec::with_capacity(edges + 1);
        offsets.push(0);
        Self {
            n,
            offsets,
            vars: Vec::with_capacity(nnz),
            payloads: Vec::with_capacity(edges),
        }
    }

    pub fn push(&mut self, vars: &[usize], payload: usize) {
        self.vars.extend_from_slice(vars);
        self.offsets.push(self.vars.len());
        self.payloads.push(payload);
    }

    pub fn finish(mut self) -> Hypergraph {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        Hypergraph {
            n: self.n,
            offsets: self.offsets,
            vars: self.vars,
            payloads: self.payloads,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum StatsMode {
    Exact,
    Sampled { k: usize, seed: u64 },
}

/// Ω, Δ, ρ of a hypergraph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    /// Largest edge size.
    pub omega: usize,
    /// Largest fraction of edges containing one variable.
    pub delta: f64,
    /// Largest fraction of edges intersecting one edge.
    pub rho: f64,
    pub exact: bool,
}
