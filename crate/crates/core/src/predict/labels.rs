use serde::{Deserialize, Serialize};

use crate::colgen::{run_colgen, CgConfig, CgStatus, StabPolicy};
use crate::error::{Error, Result};
use crate::graph::{warm_start_columns, Column, Graph, DEFAULT_WARM_START_RESTARTS};
use crate::lp::{
    build_grdp, default_iter_limit, optimal_face_vertices, random_face_objective, solve_lp,
    LpStatus,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelConfig {
    /// Face samples per degenerate direction.
    pub resample_factor: usize,
    /// Optional cap on the number of face samples.
    pub max_samples: Option<usize>,
    pub warm_start_restarts: usize,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            resample_factor: 10,
            max_samples: None,
            warm_start_restarts: DEFAULT_WARM_START_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    /// Target per vertex, indexed by vertex.
    pub targets: Vec<f64>,
    pub objective: f64,
    /// Degenerate directions of the final restricted dual.
    pub degeneracy: usize,
    /// Optimal points averaged (1 when the optimum is unique).
    pub samples: usize,
    pub columns: Vec<Column>,
    pub cg_iterations: usize,
}

/// Solves the instance with classic column generation, then averages
/// extreme points of the optimal dual face found under random objectives.
pub fn collect_labels(g: &Graph, config: &CgConfig) -> Result<Labels> {
    collect_labels_with(g, config, &LabelConfig::default())
}

pub fn collect_labels_with(g: &Graph, config: &CgConfig, labels: &LabelConfig) -> Result<Labels> {
    let init = warm_start_columns(g, labels.warm_start_restarts.max(1), config.seed);
    let cg = run_colgen::<f64>(g, StabPolicy::classic(), config, &init, None)?;
    if cg.status != CgStatus::Converged {
        return Err(Error::Contract(format!(
            "column generation ended {} after {} iterations",
            cg.status.as_str(),
            cg.iterations
        )));
    }
    let lp = build_grdp(g, &cg.columns, &vec![0.0; g.n()], 0.0)?;
    let limit = default_iter_limit(lp.num_vars, lp.rows.len() + 1);
    let base = solve_lp(&lp, limit)?;
    if base.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("final restricted dual ended {:?}", base.status)));
    }
    let k = base.zero_reduced_cost_count;
    let mut m = labels.resample_factor * k;
    if let Some(cap) = labels.max_samples {
        m = m.min(cap);
    }
    let (targets, samples) = if m == 0 {
        (base.values.clone(), 1)
    } else {
        let objectives: Vec<Vec<f64>> = (0..m)
            .map(|i| random_face_objective(g.n(), config.seed.wrapping_mul(1_000_003).wrapping_add(i as u64)))
            .collect();
        let points = optimal_face_vertices(&lp, &base, &objectives, limit)?;
        let mut mean = vec![0.0; g.n()];
        for p in &points {
            for (acc, v) in mean.iter_mut().zip(&p.values) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v = (*v / m as f64).clamp(0.0, 1.0));
        (mean, m)
    };
    Ok(Labels {
        targets,
        objective: base.objective,
        degeneracy: k,
        samples,
        columns: cg.columns,
        cg_iterations: cg.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_random_graph;

    #[test]
    fn triangle_unique() {
        let l = collect_labels(&Graph::complete(3), &CgConfig::default()).unwrap();
        assert!(l.targets.iter().all(|t| (t - 1.0).abs() < 1e-9));
    }

    #[test]
    fn path_face_average() {
        for seed in 1..4 {
            let cfg = CgConfig {
                seed,
                ..CgConfig::default()
            };
            let l = collect_labels(&Graph::path(3), &cfg).unwrap();
            assert!(l.degeneracy > 0);
            assert!((l.targets[1] - 1.0).abs() < 1e-6);
            assert!((l.targets[0] + l.targets[2] - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn edgeless_pair() {
        let l = collect_labels(&Graph::edgeless(2), &CgConfig::default()).unwrap();
        assert_eq!(l.columns, vec![Column::new(vec![0, 1])]);
        assert!((l.targets[0] + l.targets[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn labels_are_feasible() {
        for seed in 0..5 {
            let g = generate_random_graph(12, 0.4, seed);
            let l = collect_labels(&g, &CgConfig::default()).unwrap();
            for c in &l.columns {
                let s: f64 = c.vertices().iter().map(|&v| l.targets[v]).sum();
                assert!(s <= 1.0 + 1e-6);
            }
            let z: f64 = l.targets.iter().sum();
            assert!((z - l.objective).abs() < 1e-6);
        }
    }

    #[test]
    fn non_convergence_is_an_error() {
        let cfg = CgConfig {
            max_iterations: 1,
            ..CgConfig::default()
        };
        assert!(collect_labels(&generate_random_graph(15, 0.5, 1), &cfg).is_err());
    }
}
