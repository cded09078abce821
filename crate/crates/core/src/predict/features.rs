use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::sampling::sample_with_rng;
use crate::graph::{Column, Graph};

pub const NUM_FEATURES: usize = 9;

/// Per-vertex statistics, normalized within the instance:
/// `[freq, card_max, card_min, card_mean, avgdeg_max, avgdeg_min,
/// avgdeg_mean, degree, density]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Samples `5n` random maximal independent sets plus one anchored at each
/// vertex, then computes normalized features.
pub fn compute_features(g: &Graph, seed: u64) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<Column> = (0..5 * g.n()).map(|_| sample_with_rng(g, &mut rng, None)).collect();
    let anchored: Vec<Column> = (0..g.n()).map(|v| sample_with_rng(g, &mut rng, Some(v))).collect();
    normalize(&raw_features(g, &random, &anchored))
}

/// Unnormalized features. Frequency uses `random` only; the set statistics
/// use every sample containing the vertex. A vertex in no sample gets zeros.
pub fn raw_features(g: &Graph, random: &[Column], anchored: &[Column]) -> Vec<[f64; NUM_FEATURES]> {
    let n = g.n();
    let degrees = g.degrees();
    let mut freq = vec![0usize; n];
    for s in random {
        for &v in s.vertices() {
            freq[v] += 1;
        }
    }
    // (max, min, sum) of cardinality and of average degree, plus count
    let mut card = vec![(f64::MIN, f64::MAX, 0.0); n];
    let mut avg = vec![(f64::MIN, f64::MAX, 0.0); n];
    let mut count = vec![0usize; n];
    for s in random.iter().chain(anchored) {
        if s.is_empty() {
            continue;
        }
        let size = s.len() as f64;
        let avg_deg = s.vertices().iter().map(|&v| degrees[v] as f64).sum::<f64>() / size;
        for &v in s.vertices() {
            count[v] += 1;
            for (acc, x) in [(&mut card[v], size), (&mut avg[v], avg_deg)] {
                acc.0 = acc.0.max(x);
                acc.1 = acc.1.min(x);
                acc.2 += x;
            }
        }
    }
    let density = g.density();
    (0..n)
        .map(|v| {
            let f1 = if random.is_empty() {
                0.0
            } else {
                freq[v] as f64 / random.len() as f64
            };
            let stats = |(hi, lo, sum): (f64, f64, f64)| {
                if count[v] == 0 {
                    [0.0; 3]
                } else {
                    [hi, lo, sum / count[v] as f64]
                }
            };
            let [f2, f3, f4] = stats(card[v]);
            let [f5, f6, f7] = stats(avg[v]);
            [f1, f2, f3, f4, f5, f6, f7, degrees[v] as f64, density]
        })
        .collect()
}

/// Min-max scaling of each column into `[0, 1]`; constant columns become 0.5.
pub fn normalize(raw: &[[f64; NUM_FEATURES]]) -> Vec<FeatureVector> {
    let mut lo = [f64::INFINITY; NUM_FEATURES];
    let mut hi = [f64::NEG_INFINITY; NUM_FEATURES];
    for row in raw {
        for k in 0..NUM_FEATURES {
            lo[k] = lo[k].min(row[k]);
            hi[k] = hi[k].max(row[k]);
        }
    }
    raw.iter()
        .map(|row| {
            let mut out = [0.5; NUM_FEATURES];
            for k in 0..NUM_FEATURES {
                let span = hi[k] - lo[k];
                if span > 0.0 {
                    out[k] = ((row[k] - lo[k]) / span).clamp(0.0, 1.0);
                }
            }
            FeatureVector(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_random_graph;
    use crate::pricing::enumerate_all_mis;

    #[test]
    fn path_exhaustive_samples() {
        let g = Graph::path(3);
        let all = enumerate_all_mis(&g).unwrap();
        let raw = raw_features(&g, &all, &[]);
        for row in &raw {
            assert_eq!(row[0], 0.5);
        }
        assert_eq!(raw[1][1..4], [1.0, 1.0, 1.0]);
        assert_eq!(raw[1][4..7], [2.0, 2.0, 2.0]);
        assert_eq!(raw[0][4..7], [1.0, 1.0, 1.0]);
        assert_eq!(raw[0][1..4], [2.0, 2.0, 2.0]);
    }

    #[test]
    fn edgeless_is_constant() {
        let g = Graph::edgeless(3);
        for f in compute_features(&g, 4) {
            assert_eq!(f.0, [0.5; NUM_FEATURES]);
        }
    }

    #[test]
    fn bounded_and_deterministic() {
        for seed in 0..5 {
            let g = generate_random_graph(25, 0.3, seed);
            let a = compute_features(&g, seed);
            assert_eq!(a, compute_features(&g, seed));
            assert_eq!(a.len(), 25);
            assert!(a.iter().all(|f| f.0.iter().all(|x| (0.0..=1.0).contains(x))));
        }
    }
}
