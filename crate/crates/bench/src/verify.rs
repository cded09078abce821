use ascg_core::colgen::{CgConfig, CgResult, CgStatus, PricingMode};
use ascg_core::predict::Model;
use ascg_core::Graph;
use rayon::prelude::*;

use crate::error::Result;
use crate::methods::Method;
use crate::oracle::oracle_lp_bound;
use crate::runner::{solve, Instance, Models, SolveOptions};

/// Agreement tolerance between a column generation objective and the oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

/// `count` seeded random graphs with 6 to 14 vertices cycling through edge
/// probabilities 0.2, 0.5 and 0.8, then K3, C5 and P3.
pub fn suite_instances(count: usize, seed: u64) -> Vec<Instance> {
    const PROBS: [f64; 3] = [0.2, 0.5, 0.8];
    let mut out: Vec<Instance> = (0..count as u64)
        .map(|i| Instance::generated(6 + (i % 9) as usize, PROBS[(i % 3) as usize], seed.wrapping_add(i)))
        .collect();
    out.push(Instance { id: "k3".into(), graph: Graph::complete(3) });
    out.push(Instance { id: "c5".into(), graph: Graph::cycle(5) });
    out.push(Instance { id: "p3".into(), graph: Graph::path(3) });
    out
}

/// Untrained networks. Prediction quality does not affect the bound, so these
/// are enough to exercise the learned variants when no model is supplied.
pub fn untrained_models(seed: u64) -> Result<Models> {
    Ok(Models {
        ffnn: Some(Model::new_ffnn(32, 3, seed)?),
        gcn: Some(Model::new_gcn(32, 20, seed)?),
    })
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub instance: String,
    pub method: Method,
    pub mode: PricingMode,
    pub oracle: f64,
    pub result: CgResult<f64>,
}

impl OracleRun {
    pub fn agrees(&self) -> bool {
        self.result.status == CgStatus::Converged
            && (self.result.objective - self.oracle).abs() <= ORACLE_TOLERANCE
    }
}

/// Solves every instance with every method under both pricing modes and pairs
/// each result with the enumeration bound. Order is deterministic.
pub fn run_oracle_suite(
    instances: &[Instance],
    methods: &[Method],
    models: &Models,
    seed: u64,
    diagnostic_gap: bool,
) -> Result<Vec<OracleRun>> {
    let oracles: Vec<f64> = instances
        .par_iter()
        .map(|inst| oracle_lp_bound(&inst.graph))
        .collect::<Result<_>>()?;
    let modes = [PricingMode::Exact, PricingMode::HeuristicWithExactFallback];
    let cells: Vec<(usize, Method, PricingMode)> = (0..instances.len())
        .flat_map(|i| methods.iter().flat_map(move |&m| modes.map(|mode| (i, m, mode))))
        .collect();
    cells
        .par_iter()
        .map(|&(i, method, mode)| {
            let options = SolveOptions {
                cg: CgConfig {
                    pricing_mode: mode,
                    diagnostic_gap,
                    record_duals: true,
                    ..CgConfig::default()
                },
                ..SolveOptions::default()
            };
            let (_, result) = solve(&instances[i], method, models, seed, &options)?;
            Ok(OracleRun {
                instance: instances[i].id.clone(),
                method,
                mode,
                oracle: oracles[i],
                result,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_agrees() {
        let insts = suite_instances(4, 3);
        assert_eq!(insts.len(), 7);
        let runs = run_oracle_suite(&insts, &Method::ALL, &untrained_models(1).unwrap(), 1, false).unwrap();
        assert_eq!(runs.len(), 7 * 8 * 2);
        for r in &runs {
            assert!(r.agrees(), "{} {} {:?}: {} vs {}", r.instance, r.method, r.mode, r.result.objective, r.oracle);
        }
    }
}
