use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_weights, reduced_cost, PricingResult};
use crate::error::Result;
use crate::graph::{Column, Graph};
use crate::scalar::{indexed_sum, Scalar};

/// Restart count used by [`price_heuristic`]: `max(8, n / 16)`.
pub fn default_restarts(n: usize) -> usize {
    (n / 16).max(8)
}

struct LocalSearch<'a, T> {
    g: &'a Graph,
    w: &'a [T],
    forbidden: &'a [bool],
    member: Vec<bool>,
    tight: Vec<u32>,
}

impl<'a, T: Scalar> LocalSearch<'a, T> {
    fn new(g: &'a Graph, w: &'a [T], forbidden: &'a [bool]) -> Self {
        Self {
            g,
            w,
            forbidden,
            member: vec![false; g.n()],
            tight: vec![0; g.n()],
        }
    }

    fn insert(&mut self, v: usize) {
        self.member[v] = true;
        for &u in self.g.neighbors(v) {
            self.tight[u] += 1;
        }
    }

    fn remove(&mut self, v: usize) {
        self.member[v] = false;
        for &u in self.g.neighbors(v) {
            self.tight[u] -= 1;
        }
    }

    fn free(&self, v: usize) -> bool {
        !self.member[v] && !self.forbidden[v] && self.tight[v] == 0
    }

    fn start_from(&mut self, order: &[usize]) {
        for v in order {
            if self.free(*v) {
                self.insert(*v);
            }
        }
    }

    fn sole_member_neighbor(&self, v: usize) -> usize {
        *self
            .g
            .neighbors(v)
            .iter()
            .find(|&&u| self.member[u])
            .expect("1-tight vertex has a member neighbour")
    }

    /// Applies the first improving move found; false at a local optimum.
    fn improve_once(&mut self) -> bool {
        let n = self.g.n();
        let zero = T::zero();
        for v in 0..n {
            if self.free(v) && self.w[v] > zero {
                self.insert(v);
                return true;
            }
        }
        // (1,1): swap a member for a heavier non-member it alone blocks
        for v in 0..n {
            if !self.member[v] && !self.forbidden[v] && self.tight[v] == 1 {
                let u = self.sole_member_neighbor(v);
                if self.w[v] > self.w[u] {
                    self.remove(u);
                    self.insert(v);
                    return true;
                }
            }
        }
        // (1,2): swap a member for two non-adjacent vertices it alone blocks
        for u in 0..n {
            if !self.member[u] {
                continue;
            }
            let blocked: Vec<usize> = self
                .g
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&v| !self.forbidden[v] && self.tight[v] == 1)
                .collect();
            let mut best: Option<(T, usize, usize)> = None;
            for (a, &v1) in blocked.iter().enumerate() {
                for &v2 in &blocked[a + 1..] {
                    if self.g.adjacent(v1, v2) {
                        continue;
                    }
                    let gain = self.w[v1].clone() + self.w[v2].clone();
                    if gain > self.w[u] && best.as_ref().map_or(true, |(b, _, _)| gain > *b) {
                        best = Some((gain, v1, v2));
                    }
                }
            }
            if let Some((_, v1, v2)) = best {
                self.remove(u);
                self.insert(v1);
                self.insert(v2);
                return true;
            }
        }
        false
    }

    fn members(&self) -> Vec<usize> {
        (0..self.g.n()).filter(|&v| self.member[v]).collect()
    }
}

/// Multi-start local search avoiding `forbidden` vertices during the search;
/// the best set found is extended to a maximal independent set of the whole
/// graph (ascending index order). `effort` counts improvement passes.
pub(crate) fn local_search_mis<T: Scalar>(
    g: &Graph,
    weights: &[T],
    forbidden: &[bool],
    effort: usize,
    seed: u64,
) -> Column {
    let restarts = default_restarts(g.n());
    let per_restart = (effort / restarts).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.n()).collect();
    let mut best: Option<(T, Vec<usize>)> = None;

    for _ in 0..restarts {
        order.shuffle(&mut rng);
        let mut search = LocalSearch::new(g, weights, forbidden);
        search.start_from(&order);
        for _ in 0..per_restart {
            if !search.improve_once() {
                break;
            }
        }
        let members = search.members();
        let weight = indexed_sum(weights, &members);
        if best.as_ref().map_or(true, |(bw, _)| weight > *bw) {
            best = Some((weight, members));
        }
    }
    Column::new(best.map(|(_, m)| m).unwrap_or_default()).extend_to_maximal(g)
}

/// Heuristic pricing: never claims optimality.
pub fn price_heuristic<T: Scalar>(
    g: &Graph,
    pi: &[T],
    effort: usize,
    seed: u64,
) -> Result<PricingResult<T>> {
    check_weights(g, pi)?;
    let forbidden = vec![false; g.n()];
    let column = local_search_mis(g, pi, &forbidden, effort, seed);
    let rc = reduced_cost(pi, &column);
    Ok(PricingResult {
        column,
        reduced_cost: rc,
        proven_optimal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_random_graph;
    use crate::pricing::price_exact;
    use rand::Rng;

    #[test]
    fn triangle_finds_best_singleton() {
        let g = Graph::complete(3);
        for seed in 0..20 {
            let r = price_heuristic::<f64>(&g, &[0.2, 0.7, 0.5], 10, seed).unwrap();
            assert_eq!(r.column.vertices(), &[1]);
            assert!((r.reduced_cost - 0.3).abs() < 1e-12);
            assert!(!r.proven_optimal);
        }
    }

    #[test]
    fn path_finds_outer_pair() {
        for seed in 0..20 {
            let r = price_heuristic::<f64>(&Graph::path(3), &[0.6, 0.2, 0.6], 10, seed).unwrap();
            assert_eq!(r.column.vertices(), &[0, 2]);
        }
    }

    #[test]
    fn edgeless_takes_all() {
        let r = price_heuristic::<f64>(&Graph::edgeless(4), &[0.3, 0.3, 0.3, 0.3], 5, 1).unwrap();
        assert_eq!(r.column.vertices(), &[0, 1, 2, 3]);
        assert!(r.reduced_cost < 0.0);
    }

    #[test]
    fn never_beats_exact_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..30 {
            let g = generate_random_graph(30, 0.3, seed);
            let w: Vec<f64> = (0..30).map(|_| rng.gen()).collect();
            let h = price_heuristic(&g, &w, 100, seed).unwrap();
            let again = price_heuristic(&g, &w, 100, seed).unwrap();
            let e = price_exact(&g, &w, None).unwrap();
            assert_eq!(h, again);
            assert!(h.reduced_cost >= e.reduced_cost - 1e-12);
            h.column.validate(&g).unwrap();
        }
    }
}
