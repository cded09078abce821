//! Undirected graphs, maximal-independent-set columns, instance I/O and
//! column seeding.

mod dimacs;
mod generate;
pub(crate) mod sampling;

use std::borrow::Cow;
use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

pub use dimacs::{emit_dimacs, parse_dimacs};
pub use generate::generate_random_graph;
pub use sampling::{
    dual_seeded_columns, greedy_mis_in_order, sample_random_mis, warm_start_columns,
    DEFAULT_WARM_START_RESTARTS,
};

/// Largest vertex count stored with bitset adjacency rows.
pub const BITSET_ADJACENCY_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
enum Adjacency {
    Bits(Vec<FixedBitSet>),
    Sets(Vec<HashSet<usize>>),
}

/// Immutable simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    adjacency: Adjacency,
    density: f64,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph from unordered pairs. Duplicates and reversed pairs are
    /// merged; self-loops and out-of-range endpoints are rejected.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::Contract(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Contract(format!("self-loop at vertex {u}")));
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();

        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let adjacency = if n <= BITSET_ADJACENCY_LIMIT {
            Adjacency::Bits(
                neighbors
                    .iter()
                    .map(|list| {
                        let mut row = FixedBitSet::with_capacity(n);
                        for &v in list {
                            row.insert(v);
                        }
                        row
                    })
                    .collect(),
            )
        } else {
            Adjacency::Sets(
                neighbors
                    .iter()
                    .map(|list| list.iter().copied().collect())
                    .collect(),
            )
        };

        let density = edge_density(n, edges.len());
        Ok(Self {
            n,
            edges,
            neighbors,
            adjacency,
            density,
        })
    }

    pub fn edgeless(n: usize) -> Self {
        Self::new(n, []).expect("edgeless graph is valid")
    }

    pub fn complete(n: usize) -> Self {
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(n, pairs).expect("complete graph is valid")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v))).expect("path is valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted list of `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `2|E| / (n(n-1))`, zero for graphs with fewer than two vertices.
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        match &self.adjacency {
            Adjacency::Bits(rows) => rows[u].contains(v),
            Adjacency::Sets(sets) => sets[u].contains(&v),
        }
    }

    /// Bitset adjacency rows, borrowed when stored that way.
    pub fn adjacency_bits(&self) -> Cow<'_, [FixedBitSet]> {
        match &self.adjacency {
            Adjacency::Bits(rows) => Cow::Borrowed(rows),
            Adjacency::Sets(_) => Cow::Owned(
                self.neighbors
                    .iter()
                    .map(|list| {
                        let mut row = FixedBitSet::with_capacity(self.n);
                        for &v in list {
                            row.insert(v);
                        }
                        row
                    })
                    .collect(),
            ),
        }
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: perm.len(),
                context: "relabel permutation",
            });
        }
        Self::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    pub fn is_independent(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(k, &u)| {
            u < self.n && vertices[k + 1..].iter().all(|&v| u != v && !self.adjacent(u, v))
        })
    }

    /// Every vertex outside `vertices` has a neighbour inside it.
    pub fn is_maximal_independent(&self, vertices: &[usize]) -> bool {
        if !self.is_independent(vertices) {
            return false;
        }
        let mut member = vec![false; self.n];
        for &v in vertices {
            member[v] = true;
        }
        (0..self.n)
            .filter(|&v| !member[v])
            .all(|v| self.neighbors[v].iter().any(|&u| member[u]))
    }
}

pub(crate) fn edge_density(n: usize, m: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        2.0 * m as f64 / (n as f64 * (n as f64 - 1.0))
    }
}

/// A maximal independent set, kept as a sorted vertex list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column(Vec<usize>);

impl Column {
    /// Sorts and deduplicates; does not check independence.
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Self(vertices)
    }

    /// Builds a column and checks it is a maximal independent set of `g`.
    pub fn checked(g: &Graph, vertices: Vec<usize>) -> Result<Self> {
        let col = Self::new(vertices);
        col.validate(g)?;
        Ok(col)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.0.iter().any(|&v| v >= g.n()) {
            return Err(Error::Contract(format!("column {:?} has out-of-range vertex", self.0)));
        }
        if !g.is_independent(&self.0) {
            return Err(Error::Contract(format!("column {:?} is not independent", self.0)));
        }
        if !g.is_maximal_independent(&self.0) {
            return Err(Error::Contract(format!("column {:?} is not maximal", self.0)));
        }
        Ok(())
    }

    /// Adds vertices in ascending index order until no more fit.
    pub fn extend_to_maximal(self, g: &Graph) -> Self {
        Self(extend_maximal(g, self.0))
    }
}

pub(crate) fn extend_maximal(g: &Graph, mut vertices: Vec<usize>) -> Vec<usize> {
    let mut blocked = vec![false; g.n()];
    for &v in &vertices {
        blocked[v] = true;
        for &u in g.neighbors(v) {
            blocked[u] = true;
        }
    }
    for v in 0..g.n() {
        if !blocked[v] {
            vertices.push(v);
            blocked[v] = true;
            for &u in g.neighbors(v) {
                blocked[u] = true;
            }
        }
    }
    vertices.sort_unstable();
    vertices
}
