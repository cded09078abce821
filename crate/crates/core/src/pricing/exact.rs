use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use super::{check_weights, PricingResult};
use crate::error::Result;
use crate::graph::{Column, Graph};
use crate::scalar::Scalar;

struct Search<'a, T> {
    adj: &'a [FixedBitSet],
    weights: &'a [T],
    /// Vertices by descending weight, ties by ascending index.
    order: Vec<usize>,
    best: Option<(T, Vec<usize>)>,
    chosen: Vec<usize>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
    // scratch for the clique-cover bound
    cover: Vec<FixedBitSet>,
}

impl<T: Scalar> Search<'_, T> {
    /// Upper bound on the weight any independent subset of `cand` can reach:
    /// the smaller of the plain candidate sum and a greedy clique-cover bound
    /// (an independent set meets each clique at most once).
    fn bound(&mut self, cand: &FixedBitSet) -> T {
        let mut sum = T::zero();
        let mut cover_bound = T::zero();
        let mut used = 0usize;
        for &v in &self.order {
            if !cand.contains(v) {
                continue;
            }
            let w = self.weights[v].clone();
            sum = sum + w.clone();
            match self.cover[..used].iter_mut().find(|common| common.contains(v)) {
                Some(common) => common.intersect_with(&self.adj[v]),
                None => {
                    if used == self.cover.len() {
                        self.cover.push(FixedBitSet::with_capacity(cand.len()));
                    }
                    self.cover[used].clone_from(&self.adj[v]);
                    used += 1;
                    cover_bound = cover_bound + w;
                }
            }
        }
        T::min_of(sum, cover_bound)
    }

    fn expand(&mut self, mut cand: FixedBitSet, weight: T) {
        self.nodes += 1;
        if self.nodes % 256 == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out {
            return;
        }
        let Some(v) = self.order.iter().copied().find(|&v| cand.contains(v)) else {
            if self.best.as_ref().map_or(true, |(bw, _)| weight > *bw) {
                self.best = Some((weight, self.chosen.clone()));
            }
            return;
        };
        if let Some((bw, _)) = &self.best {
            let bw = bw.clone();
            if weight.clone() + self.bound(&cand) <= bw {
                return;
            }
        }

        let mut include = cand.clone();
        include.difference_with(&self.adj[v]);
        include.set(v, false);
        self.chosen.push(v);
        self.expand(include, weight.clone() + self.weights[v].clone());
        self.chosen.pop();

        cand.set(v, false);
        self.expand(cand, weight);
    }
}

/// Exact maximum weight independent set by branch and bound (branch on the
/// heaviest undecided vertex, include before exclude). The optimum is extended
/// to a maximal set in ascending index order. If `time_limit` elapses the
/// incumbent is returned with `proven_optimal = false`.
pub fn price_exact<T: Scalar>(
    g: &Graph,
    pi: &[T],
    time_limit: Option<Duration>,
) -> Result<PricingResult<T>> {
    check_weights(g, pi)?;
    let adj = g.adjacency_bits();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| {
        pi[b]
            .partial_cmp(&pi[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut search = Search {
        adj: &adj,
        weights: pi,
        order,
        best: None,
        chosen: Vec::new(),
        deadline: time_limit.map(|t| Instant::now() + t),
        nodes: 0,
        timed_out: false,
        cover: Vec::new(),
    };
    let mut all = FixedBitSet::with_capacity(g.n());
    all.insert_range(..);
    search.expand(all, T::zero());

    let members = search.best.map(|(_, set)| set).unwrap_or_default();
    let column = Column::new(members).extend_to_maximal(g);
    log::trace!("exact pricing: {} nodes, timed out {}", search.nodes, search.timed_out);
    Ok(PricingResult::from_column(column, pi, !search.timed_out))
}
