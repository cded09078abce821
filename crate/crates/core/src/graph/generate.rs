use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Graph;

/// Erdős–Rényi `G(n, p)`: each unordered pair is drawn independently, in
/// lexicographic pair order, from a ChaCha stream seeded with `seed`.
pub fn generate_random_graph(n: usize, p: f64, seed: u64) -> Graph {
    assert!((0.0..=1.0).contains(&p), "edge probability {p} outside [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                pairs.push((u, v));
            }
        }
    }
    Graph::new(n, pairs).expect("generated pairs are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        assert_eq!(generate_random_graph(5, 0.0, 7).num_edges(), 0);
        assert_eq!(generate_random_graph(5, 1.0, 7).num_edges(), 10);
    }

    #[test]
    fn binomial_edge_count() {
        // mean 4950 * 0.5 = 2475, sigma = sqrt(2475 * 0.5)
        let m = generate_random_graph(100, 0.5, 1).num_edges() as f64;
        let sigma = (2475.0f64 * 0.5).sqrt();
        assert!((m - 2475.0).abs() <= 4.0 * sigma, "edge count {m}");
    }

    #[test]
    fn seeded_reproducibility() {
        let a = generate_random_graph(30, 0.3, 11);
        let b = generate_random_graph(30, 0.3, 11);
        let c = generate_random_graph(30, 0.3, 12);
        assert_eq!(a.edges(), b.edges());
        assert_ne!(a.edges(), c.edges());
    }
}
