//! Pricing: maximum weight independent set under dual weights, returning the
//! minimum reduced cost column `1 - Σ_{i∈s} π_i`.

mod enumerate;
mod exact;
pub(crate) mod heuristic;

use crate::error::{Error, Result};
use crate::graph::{Column, Graph};
use crate::scalar::{indexed_sum, Scalar};

pub use enumerate::{enumerate_all_mis, ENUMERATION_LIMIT};
pub use exact::price_exact;
pub use heuristic::{default_restarts, price_heuristic};

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult<T> {
    pub column: Column,
    pub reduced_cost: T,
    pub proven_optimal: bool,
}

impl<T: Scalar> PricingResult<T> {
    pub(crate) fn from_column(column: Column, weights: &[T], proven_optimal: bool) -> Self {
        let reduced_cost = reduced_cost(weights, &column);
        Self {
            column,
            reduced_cost,
            proven_optimal,
        }
    }
}

/// `1 - Σ_{i∈s} π_i`, summed in ascending vertex order.
pub fn reduced_cost<T: Scalar>(weights: &[T], column: &Column) -> T {
    T::one() - indexed_sum(weights, column.vertices())
}

pub(crate) fn check_weights<T: Scalar>(g: &Graph, weights: &[T]) -> Result<()> {
    if weights.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: weights.len(),
            context: "pricing weights",
        });
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| **w < T::zero()) {
        return Err(Error::Contract(format!("negative pricing weight {w} at vertex {i}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_cost_of_column() {
        let c = Column::new(vec![0, 2]);
        assert!((reduced_cost::<f64>(&[0.6, 0.2, 0.6], &c) - (-0.2)).abs() < 1e-12);
    }

    #[test]
    fn weight_checks() {
        let g = Graph::path(3);
        assert!(check_weights::<f64>(&g, &[0.0, 1.0, 0.5]).is_ok());
        assert!(matches!(check_weights::<f64>(&g, &[0.0, -1.0, 0.5]), Err(Error::Contract(_))));
        assert!(matches!(check_weights::<f64>(&g, &[0.0]), Err(Error::DimensionMismatch { .. })));
    }
}
