use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Column, Graph};
use crate::pricing::heuristic::local_search_mis;
use crate::scalar::{indexed_sum, Scalar};

pub const DEFAULT_WARM_START_RESTARTS: usize = 10;

/// Greedy maximal independent set: starts from `anchor` (if any) and adds
/// each vertex of `order` that has no neighbour in the working set.
pub fn greedy_mis_in_order(g: &Graph, order: &[usize], anchor: Option<usize>) -> Column {
    let mut blocked = vec![false; g.n()];
    let mut members = Vec::new();
    let mut take = |v: usize, blocked: &mut Vec<bool>| {
        members.push(v);
        blocked[v] = true;
        for &u in g.neighbors(v) {
            blocked[u] = true;
        }
    };
    if let Some(a) = anchor {
        take(a, &mut blocked);
    }
    for &v in order {
        if !blocked[v] {
            take(v, &mut blocked);
        }
    }
    Column::new(members)
}

/// Random maximal independent set from a seeded vertex permutation,
/// optionally forced to contain `anchor`.
pub fn sample_random_mis(g: &Graph, seed: u64, anchor: Option<usize>) -> Column {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(g, &mut rng, anchor)
}

pub(crate) fn sample_with_rng(g: &Graph, rng: &mut impl Rng, anchor: Option<usize>) -> Column {
    if let Some(a) = anchor {
        assert!(a < g.n(), "anchor {a} out of range");
    }
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    greedy_mis_in_order(g, &order, anchor)
}

/// Smallest-feasible-colour greedy in a fixed vertex order.
fn greedy_coloring(g: &Graph, order: &[usize]) -> Vec<Vec<usize>> {
    let mut color = vec![usize::MAX; g.n()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut used = Vec::new();
    for &v in order {
        used.clear();
        used.resize(classes.len() + 1, false);
        for &u in g.neighbors(v) {
            if color[u] != usize::MAX {
                used[color[u]] = true;
            }
        }
        let c = used.iter().position(|&taken| !taken).expect("one colour is free");
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(v);
        color[v] = c;
    }
    classes
}

/// Initial columns from the best of `restarts` randomized greedy colourings
/// (descending degree, seeded tie-breaks), each colour class extended to a
/// maximal independent set in ascending index order.
pub fn warm_start_columns(g: &Graph, restarts: usize, seed: u64) -> Vec<Column> {
    assert!(restarts >= 1, "warm start needs at least one restart");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Vec<Vec<usize>>> = None;
    for _ in 0..restarts {
        let mut keyed: Vec<(usize, u64, usize)> = (0..g.n())
            .map(|v| (usize::MAX - g.degree(v), rng.gen::<u64>(), v))
            .collect();
        keyed.sort_unstable();
        let order: Vec<usize> = keyed.into_iter().map(|(_, _, v)| v).collect();
        let classes = greedy_coloring(g, &order);
        if best.as_ref().map_or(true, |b| classes.len() < b.len()) {
            best = Some(classes);
        }
    }
    let columns: BTreeSet<Column> = best
        .unwrap_or_default()
        .into_iter()
        .map(|class| Column::new(class).extend_to_maximal(g))
        .collect();
    columns.into_iter().collect()
}

/// Up to `k` distinct columns with small reduced cost `1 - Σ ŷ_i`, found by
/// repeated heuristic weighted search where each found column spawns new
/// searches that forbid one of its members. Sorted by ascending reduced cost.
pub fn dual_seeded_columns<T: Scalar>(
    g: &Graph,
    yhat: &[T],
    k: usize,
    seed: u64,
) -> Vec<Column> {
    assert!(k >= 1, "need at least one column");
    assert_eq!(yhat.len(), g.n(), "prediction length");
    let attempts = (5 * k).max(10);
    let effort = 50 * g.n().max(1);
    let mut found: BTreeSet<Column> = BTreeSet::new();
    let mut seen_exclusions: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<usize>> = VecDeque::from([Vec::new()]);
    let mut forbidden = vec![false; g.n()];

    for attempt in 0..attempts {
        let Some(excluded) = queue.pop_front() else { break };
        forbidden.iter_mut().for_each(|f| *f = false);
        for &v in &excluded {
            forbidden[v] = true;
        }
        let column = local_search_mis(g, yhat, &forbidden, effort, seed.wrapping_add(attempt as u64));
        if found.insert(column.clone()) {
            let mut members = column.vertices().to_vec();
            members.sort_by(|&a, &b| {
                yhat[b]
                    .partial_cmp(&yhat[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            for v in members {
                let mut next = excluded.clone();
                next.push(v);
                next.sort_unstable();
                if seen_exclusions.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }

    let mut ranked: Vec<(T, Column)> = found
        .into_iter()
        .map(|c| (T::one() - indexed_sum(yhat, c.vertices()), c))
        .collect();
    ranked.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.1.cmp(&b.1))
    });
    ranked.into_iter().take(k).map(|(_, c)| c).collect()
}
