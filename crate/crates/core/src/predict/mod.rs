//! Dual-value prediction: per-vertex features, FFNN and GCN regressors,
//! training, and the averaged-label pipeline.

mod features;
mod labels;
mod model;
mod train;

pub use features::{compute_features, normalize, raw_features, FeatureVector, NUM_FEATURES};
pub use labels::{collect_labels, collect_labels_with, LabelConfig, Labels};
pub use model::{gcn_inputs, Gradient, Layer, Model, ModelKind, ModelMetadata, GCN_INPUT_WIDTH};
pub use train::{
    dataset_mse, instance_loss_gradient, train, InstanceData, TrainConfig, TrainOutcome, TrainingSet, TRAINING_CSV_HEADER,
};

use crate::graph::Graph;
use crate::lp::DualVector;

/// `degree / max_degree`; all ones on an edgeless graph.
pub fn predict_degree_baseline(g: &Graph) -> DualVector<f64> {
    let max = g.max_degree();
    if max == 0 {
        return DualVector::new(vec![1.0; g.n()]);
    }
    DualVector::new((0..g.n()).map(|v| (g.degree(v) as f64 / max as f64).clamp(0.0, 1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_baseline_examples() {
        assert_eq!(predict_degree_baseline(&Graph::complete(3)).0, vec![1.0; 3]);
        assert_eq!(predict_degree_baseline(&Graph::path(3)).0, vec![0.5, 1.0, 0.5]);
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let y = predict_degree_baseline(&star).0;
        assert_eq!(y[0], 1.0);
        assert!(y[1..].iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(predict_degree_baseline(&Graph::edgeless(2)).0, vec![1.0; 2]);
    }
}
