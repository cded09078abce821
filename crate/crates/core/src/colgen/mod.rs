//! Column generation over the (generalized) restricted dual with
//! penalization-style stabilization.

mod policy;
mod trace;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Column, Graph};
use crate::lp::{
    build_grdp_with, default_iter_limit, GrdpLayout, LpStatus, PivotRule, Simplex,
};
use crate::pricing::{price_exact, price_heuristic, PricingResult};
use crate::scalar::Scalar;

pub use policy::{
    lagrangian_bound, lagrangian_gap, lagrangian_gap_diagnostic, update_epsilon_adaptive,
    update_epsilon_fixed, StabKind, StabPolicy, DEFAULT_FLOOR,
};
pub use trace::{write_duals_npy, write_trace_csv, TRACE_CSV_HEADER};

/// Reduced costs below this add a column.
pub const ADD_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PricingMode {
    Exact,
    /// Heuristic first; exact only when the heuristic finds nothing negative.
    HeuristicWithExactFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgConfig {
    pub max_iterations: usize,
    pub time_limit: Duration,
    /// Per-call limit for exact pricing, on top of the run limit.
    pub pricing_time_limit: Option<Duration>,
    pub pricing_mode: PricingMode,
    pub heuristic_effort: usize,
    pub seed: u64,
    pub record_duals: bool,
    pub diagnostic_gap: bool,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            time_limit: Duration::from_secs(3600),
            pricing_time_limit: None,
            pricing_mode: PricingMode::Exact,
            heuristic_effort: 400,
            seed: 1,
            record_duals: false,
            diagnostic_gap: false,
        }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Contract("max_iterations must be >= 1".into()));
        }
        if self.time_limit.is_zero() {
            return Err(Error::Contract("time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    /// `Σ π_i` of the stabilized iterate (penalty terms excluded).
    pub objective: f64,
    /// Objective of the penalized problem actually solved.
    pub grdp_objective: f64,
    pub reduced_cost: f64,
    pub pricing_proven: bool,
    pub epsilon_used: f64,
    pub epsilon_next: f64,
    pub lagrangian_bound: Option<f64>,
    /// Unpenalized restricted-dual optimum, when the gap diagnostic is on.
    pub rdp_objective: Option<f64>,
    pub lagrangian_gap: Option<f64>,
    pub column_added: bool,
    pub pricing_seconds: f64,
    pub lp_seconds: f64,
    pub duals: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CgStatus {
    Converged,
    IterationLimit,
    TimeLimit,
}

impl CgStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CgStatus::Converged => "converged",
            CgStatus::IterationLimit => "iteration_limit",
            CgStatus::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgResult<T> {
    /// Final `Σ π`; the LP bound when converged.
    pub objective: T,
    pub duals: Vec<T>,
    pub iterations: usize,
    pub columns: Vec<Column>,
    pub status: CgStatus,
    pub trace: Vec<IterationRecord>,
    pub wall_seconds: f64,
    pub pricing_seconds: f64,
    pub lp_seconds: f64,
}

struct Priced<T> {
    result: PricingResult<T>,
    /// Whether an exact pricing ran and found no negative column.
    exact_failed: bool,
}

struct Driver<'a, T> {
    g: &'a Graph,
    policy: StabPolicy,
    config: &'a CgConfig,
    layout: GrdpLayout,
    columns: Vec<Column>,
    seen: HashSet<Column>,
    simplex: Simplex<T>,
    epsilon: T,
    /// Penalty carried by fixed kinds while the first iterate runs unpenalized.
    pending_epsilon: T,
    reference: Vec<T>,
    start: Instant,
}

fn mix_seed(seed: u64, iteration: usize) -> u64 {
    seed ^ (iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn build_simplex<T: Scalar>(
    g: &Graph,
    layout: GrdpLayout,
    columns: &[Column],
    reference: &[T],
    epsilon: &T,
    rule: PivotRule,
) -> Result<Simplex<T>> {
    // deviation rows first so their indices never move
    let mut lp = build_grdp_with(g, &[], reference, epsilon.clone(), layout.penalized)?;
    for column in columns {
        lp.rows.push(layout.column_row(column));
    }
    lp.validate()?;
    let mut s = Simplex::new(&lp);
    s.set_pivot_rule(rule);
    Ok(s)
}

impl<'a, T: Scalar> Driver<'a, T> {
    fn rebuild(&mut self, rule: PivotRule) -> Result<()> {
        self.simplex = build_simplex(
            self.g,
            self.layout,
            &self.columns,
            &self.reference,
            &self.epsilon,
            rule,
        )?;
        Ok(())
    }

    fn set_reference(&mut self, reference: Vec<T>) {
        let n = self.g.n();
        let updates: Vec<(usize, T)> = reference
            .iter()
            .enumerate()
            .flat_map(|(i, y)| [(i, -y.clone()), (n + i, y.clone())])
            .collect();
        self.simplex.set_rhs_many(updates);
        self.reference = reference;
    }

    fn solve_lp(&mut self) -> Result<()> {
        let limit = default_iter_limit(self.simplex.num_vars(), self.simplex.num_rows());
        match self.simplex.solve(limit) {
            LpStatus::Optimal => Ok(()),
            status => Err(Error::Lp(format!(
                "restricted dual ended {status:?} with {} columns",
                self.columns.len()
            ))),
        }
    }

    fn remaining(&self) -> Duration {
        self.config.time_limit.saturating_sub(self.start.elapsed())
    }

    fn price(&self, pi: &[T], iteration: usize) -> Result<Priced<T>> {
        let threshold = -T::tolerance(ADD_THRESHOLD);
        if self.config.pricing_mode == PricingMode::HeuristicWithExactFallback {
            let seed = mix_seed(self.config.seed, iteration);
            let h = price_heuristic(self.g, pi, self.config.heuristic_effort, seed)?;
            if h.reduced_cost < threshold {
                return Ok(Priced {
                    result: h,
                    exact_failed: false,
                });
            }
        }
        let limit = match self.config.pricing_time_limit {
            Some(t) => t.min(self.remaining()),
            None => self.remaining(),
        };
        let result = price_exact(self.g, pi, Some(limit))?;
        let exact_failed = result.proven_optimal && result.reduced_cost >= threshold;
        Ok(Priced {
            result,
            exact_failed,
        })
    }

    fn next_epsilon(&self, priced: &Priced<T>, first: bool) -> T {
        let floor = T::from_f64_lossy(self.policy.floor);
        match self.policy.kind {
            StabKind::Classic => T::zero(),
            StabKind::AdaptiveMl { .. } => {
                update_epsilon_adaptive(priced.result.reduced_cost.clone(), floor)
            }
            StabKind::PreviousIterate { .. } | StabKind::FixedMl { .. } => {
                let current = if first && self.epsilon.is_zero() {
                    self.pending_epsilon.clone()
                } else {
                    self.epsilon.clone()
                };
                if priced.exact_failed && !self.policy.halving {
                    T::zero()
                } else {
                    update_epsilon_fixed(current, !priced.exact_failed, floor)
                }
            }
        }
    }
}

/// Runs column generation from `initial_columns`. Prediction-based policies
/// need `yhat`; it is clipped into `[0, 1]`.
pub fn run_colgen<T: Scalar>(
    g: &Graph,
    policy: StabPolicy,
    config: &CgConfig,
    initial_columns: &[Column],
    yhat: Option<&[T]>,
) -> Result<CgResult<T>> {
    let start = Instant::now();
    policy.validate()?;
    config.validate()?;
    let n = g.n();
    let yhat: Option<Vec<T>> = match (policy.needs_prediction(), yhat) {
        (true, None) => {
            return Err(Error::Contract(format!("{:?} needs a prediction", policy.kind)))
        }
        (_, Some(y)) if y.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: y.len(),
                context: "prediction",
            })
        }
        (true, Some(y)) => Some(
            y.iter()
                .map(|v| T::min_of(T::max_of(v.clone(), T::zero()), T::one()))
                .collect(),
        ),
        (false, _) => None,
    };

    let mut columns = Vec::new();
    let mut seen = HashSet::new();
    for c in initial_columns {
        c.validate(g)?;
        if seen.insert(c.clone()) {
            columns.push(c.clone());
        }
    }

    let eps0 = T::from_f64_lossy(policy.epsilon0().unwrap_or(0.0));
    let (epsilon, pending_epsilon) = match policy.kind {
        StabKind::Classic => (T::zero(), T::zero()),
        StabKind::PreviousIterate { .. } => (T::zero(), eps0),
        StabKind::FixedMl { .. } | StabKind::AdaptiveMl { .. } => (eps0.clone(), eps0),
    };
    let reference = yhat.unwrap_or_else(|| vec![T::zero(); n]);
    let layout = GrdpLayout {
        n,
        penalized: policy.kind != StabKind::Classic,
    };
    let simplex = build_simplex(g, layout, &columns, &reference, &epsilon, PivotRule::Dantzig)?;
    let mut driver = Driver {
        g,
        policy,
        config,
        layout,
        columns,
        seen,
        simplex,
        epsilon,
        pending_epsilon,
        reference,
        start,
    };

    let mut trace = Vec::new();
    let mut status = CgStatus::IterationLimit;
    let mut last_pi: Vec<T> = vec![T::zero(); n];
    let mut last_objective = T::zero();
    let (mut pricing_total, mut lp_total) = (0.0, 0.0);
    let mut retried = false;
    let mut index = 0;

    while index < config.max_iterations {
        if start.elapsed() >= config.time_limit {
            status = CgStatus::TimeLimit;
            break;
        }
        let first = index == 0;
        let lp_start = Instant::now();
        driver.simplex.set_objective(&layout.objective(&driver.epsilon));
        driver.solve_lp()?;
        let lp_seconds = lp_start.elapsed().as_secs_f64();
        let values = driver.simplex.values();
        let pi: Vec<T> = values[..n].to_vec();
        let z = pi.iter().fold(T::zero(), |acc, v| acc + v.clone());
        let grdp_objective = driver.simplex.objective_value();

        let price_start = Instant::now();
        let priced = driver.price(&pi, index + 1)?;
        let pricing_seconds = price_start.elapsed().as_secs_f64();
        lp_total += lp_seconds;
        pricing_total += pricing_seconds;

        let rc = priced.result.reduced_cost.clone();
        let negative = rc < -T::tolerance(ADD_THRESHOLD);
        if negative && driver.seen.contains(&priced.result.column) {
            if retried {
                return Err(Error::Numerical(format!(
                    "column {:?} priced again at reduced cost {rc} after a Bland re-solve",
                    priced.result.column.vertices()
                )));
            }
            log::warn!("duplicate column priced; re-solving with Bland's rule");
            retried = true;
            driver.rebuild(PivotRule::Bland)?;
            continue;
        }
        retried = false;
        index += 1;

        let proven = priced.result.proven_optimal;
        let timed_out = !proven && !negative;
        let bound = if proven {
            Some(lagrangian_bound(z.clone(), rc.clone(), true)?)
        } else {
            None
        };
        let (rdp_objective, gap) = match (&bound, config.diagnostic_gap) {
            (Some(_), true) => {
                let (gap, z_rdp) =
                    lagrangian_gap_diagnostic(g, &driver.columns, z.clone(), rc.clone())?;
                (Some(z_rdp.as_f64()), Some(gap.as_f64()))
            }
            _ => (None, None),
        };

        let converged = driver.epsilon.is_zero() && priced.exact_failed;
        let epsilon_next = if converged || timed_out {
            T::zero()
        } else {
            driver.next_epsilon(&priced, first)
        };

        trace.push(IterationRecord {
            index,
            objective: z.as_f64(),
            grdp_objective: grdp_objective.as_f64(),
            reduced_cost: rc.as_f64(),
            pricing_proven: proven,
            epsilon_used: driver.epsilon.as_f64(),
            epsilon_next: epsilon_next.as_f64(),
            lagrangian_bound: bound.as_ref().map(Scalar::as_f64),
            rdp_objective,
            lagrangian_gap: gap,
            column_added: negative,
            pricing_seconds,
            lp_seconds,
            duals: config
                .record_duals
                .then(|| pi.iter().map(Scalar::as_f64).collect()),
        });
        last_objective = z;
        last_pi = pi.clone();

        if converged {
            status = CgStatus::Converged;
            break;
        }
        if timed_out {
            status = CgStatus::TimeLimit;
            break;
        }
        if negative {
            let column = priced.result.column;
            let (coefs, rhs) = layout.column_row::<T>(&column);
            driver.simplex.add_row(coefs, rhs);
            driver.seen.insert(column.clone());
            driver.columns.push(column);
        }
        if let StabKind::PreviousIterate { .. } = policy.kind {
            driver.set_reference(pi);
        }
        driver.epsilon = epsilon_next;
    }

    let result = CgResult {
        objective: last_objective,
        duals: last_pi,
        iterations: trace.len(),
        columns: driver.columns,
        status,
        trace,
        wall_seconds: start.elapsed().as_secs_f64(),
        pricing_seconds: pricing_total,
        lp_seconds: lp_total,
    };
    log::debug!(
        "colgen {:?}: {} iterations, objective {}",
        result.status,
        result.iterations,
        result.objective
    );
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::warm_start_columns;

    fn exact() -> CgConfig {
        CgConfig::default()
    }

    #[test]
    fn triangle_classic() {
        let g = Graph::complete(3);
        let r = run_colgen::<f64>(&g, StabPolicy::classic(), &exact(), &[Column::new(vec![0])], None)
            .unwrap();
        assert_eq!(r.status, CgStatus::Converged);
        assert!((r.objective - 3.0).abs() < 1e-9);
        // the box already caps each π_i at 1, so {0} alone proves the bound
        assert_eq!(r.iterations, 1);
        let r = run_colgen::<f64>(&g, StabPolicy::classic(), &exact(), &[], None).unwrap();
        assert!((r.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn five_cycle_classic() {
        let g = Graph::cycle(5);
        let init = warm_start_columns(&g, 10, 1);
        let r = run_colgen::<f64>(&g, StabPolicy::classic(), &exact(), &init, None).unwrap();
        assert_eq!(r.status, CgStatus::Converged);
        assert!((r.objective - 2.5).abs() < 1e-9);
    }

    #[test]
    fn path_adaptive_with_optimal_prediction() {
        let g = Graph::path(3);
        let init = [Column::new(vec![0, 2]), Column::new(vec![1])];
        let r = run_colgen(
            &g,
            StabPolicy::adaptive_ml(1.0),
            &exact(),
            &init,
            Some(&[0.5f64, 1.0, 0.5][..]),
        )
        .unwrap();
        assert_eq!(r.status, CgStatus::Converged);
        assert!(r.iterations <= 2, "{:?}", r.trace);
        assert!((r.objective - 2.0).abs() < 1e-9);
        assert_eq!(r.trace.last().unwrap().epsilon_next, 0.0);
    }

    #[test]
    fn all_policies_agree() {
        let g = crate::graph::generate_random_graph(12, 0.4, 3);
        let init = warm_start_columns(&g, 10, 1);
        let yhat = vec![0.3f64; 12];
        let mut objectives = Vec::new();
        for policy in [
            StabPolicy::classic(),
            StabPolicy::previous_iterate(1.0),
            StabPolicy::fixed_ml(0.1),
            StabPolicy::adaptive_ml(1.0),
        ] {
            for mode in [PricingMode::Exact, PricingMode::HeuristicWithExactFallback] {
                let cfg = CgConfig {
                    pricing_mode: mode,
                    ..exact()
                };
                let r = run_colgen(&g, policy, &cfg, &init, Some(&yhat[..])).unwrap();
                assert_eq!(r.status, CgStatus::Converged);
                let last = r.trace.last().unwrap();
                assert_eq!(last.epsilon_used, 0.0);
                assert!(last.pricing_proven && last.reduced_cost >= -1e-7);
                objectives.push(r.objective);
            }
        }
        for z in &objectives {
            assert!((z - objectives[0]).abs() < 1e-6, "{objectives:?}");
        }
    }

    #[test]
    fn previous_iterate_starts_unpenalized() {
        let g = crate::graph::generate_random_graph(10, 0.5, 8);
        let r = run_colgen::<f64>(
            &g,
            StabPolicy::previous_iterate(1.0),
            &exact(),
            &[Column::new(vec![0]).extend_to_maximal(&g)],
            None,
        )
        .unwrap();
        assert_eq!(r.trace[0].epsilon_used, 0.0);
        if r.iterations > 1 {
            assert_eq!(r.trace[0].epsilon_next, 1.0);
        }
    }

    #[test]
    fn exact_rational_run() {
        use num_rational::BigRational;
        let g = Graph::cycle(5);
        let r = run_colgen::<BigRational>(&g, StabPolicy::classic(), &exact(), &[], None).unwrap();
        assert_eq!(r.objective, crate::scalar::ratio(5, 2));
    }

    #[test]
    fn iteration_limit_and_contracts() {
        let g = Graph::cycle(7);
        let cfg = CgConfig {
            max_iterations: 1,
            ..exact()
        };
        let r = run_colgen::<f64>(&g, StabPolicy::classic(), &cfg, &[], None).unwrap();
        assert_eq!((r.status, r.iterations), (CgStatus::IterationLimit, 1));
        assert!(run_colgen::<f64>(&g, StabPolicy::fixed_ml(0.1), &exact(), &[], None).is_err());
        let bad = [Column::new(vec![0, 1])];
        assert!(run_colgen::<f64>(&g, StabPolicy::classic(), &exact(), &bad, None).is_err());
    }

    #[test]
    fn deterministic_trace() {
        let g = crate::graph::generate_random_graph(14, 0.3, 5);
        let cfg = CgConfig {
            pricing_mode: PricingMode::HeuristicWithExactFallback,
            ..exact()
        };
        let run = || {
            let r = run_colgen(&g, StabPolicy::adaptive_ml(1.0), &cfg, &[], Some(&vec![0.4; 14][..]))
                .unwrap();
            r.trace
                .iter()
                .map(|t| (t.objective, t.reduced_cost, t.epsilon_used))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
