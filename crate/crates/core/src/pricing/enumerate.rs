use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{Column, Graph};

/// Largest graph [`enumerate_all_mis`] will accept.
pub const ENUMERATION_LIMIT: usize = 25;

/// Every maximal independent set of `g`, as maximal cliques of the complement
/// via Bron–Kerbosch with Tomita pivoting. Output is sorted.
pub fn enumerate_all_mis(g: &Graph) -> Result<Vec<Column>> {
    let n = g.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::GuardLimit {
            what: "maximal independent set enumeration",
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let adj = g.adjacency_bits();
    let complement: Vec<FixedBitSet> = (0..n)
        .map(|v| {
            let mut row = FixedBitSet::with_capacity(n);
            row.insert_range(..);
            row.difference_with(&adj[v]);
            row.set(v, false);
            row
        })
        .collect();

    let mut out = Vec::new();
    let mut p = FixedBitSet::with_capacity(n);
    p.insert_range(..);
    let x = FixedBitSet::with_capacity(n);
    let mut r = Vec::new();
    bron_kerbosch(&complement, &mut r, p, x, &mut out);
    out.sort();
    Ok(out)
}

fn bron_kerbosch(
    nbr: &[FixedBitSet],
    r: &mut Vec<usize>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    out: &mut Vec<Column>,
) {
    if p.is_clear() && x.is_clear() {
        out.push(Column::new(r.clone()));
        return;
    }
    let pivot = p
        .union(&x)
        .max_by_key(|&u| (p.intersection(&nbr[u]).count(), std::cmp::Reverse(u)))
        .expect("P ∪ X non-empty");
    let candidates: Vec<usize> = p.difference(&nbr[pivot]).collect();
    for v in candidates {
        r.push(v);
        let mut p_next = p.clone();
        p_next.intersect_with(&nbr[v]);
        let mut x_next = x.clone();
        x_next.intersect_with(&nbr[v]);
        bron_kerbosch(nbr, r, p_next, x_next, out);
        r.pop();
        p.set(v, false);
        x.insert(v);
    }
}
