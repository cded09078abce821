use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinearProgram, LpSolution, LpStatus, Simplex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slack allowed on the pinned original objective.
pub const FACE_PIN_TOLERANCE: f64 = 1e-7;

/// Uniform `[0, 1)` objective coefficients from a seeded stream.
pub fn random_face_objective<T: Scalar>(num_vars: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_vars).map(|_| T::from_f64_lossy(rng.gen::<f64>())).collect()
}

/// Extreme point of the optimal face of `lp` that maximizes `random_objective`:
/// the original rows plus `c·x ≥ z* - 1e-7`.
pub fn optimal_face_vertex<T: Scalar>(
    lp: &LinearProgram<T>,
    base_solution: &LpSolution<T>,
    random_objective: &[T],
    iter_limit: usize,
) -> Result<LpSolution<T>> {
    if base_solution.status != LpStatus::Optimal {
        return Err(Error::Contract("face search needs an optimal base solution".into()));
    }
    if random_objective.len() != lp.num_vars {
        return Err(Error::DimensionMismatch {
            expected: lp.num_vars,
            actual: random_objective.len(),
            context: "random face objective",
        });
    }
    let mut pinned = lp.clone();
    pinned.rows.push(pin_row(lp, &base_solution.objective));
    pinned.objective = random_objective.to_vec();
    let mut simplex = Simplex::new(&pinned);
    let status = simplex.solve(iter_limit);
    if status != LpStatus::Optimal {
        return Err(Error::Lp(format!("face re-optimization ended {status:?}")));
    }
    Ok(simplex.solution(status))
}

/// As [`optimal_face_vertex`] for many objectives, re-optimizing each from the
/// previous optimal basis of the pinned problem.
pub fn optimal_face_vertices<T: Scalar>(
    lp: &LinearProgram<T>,
    base_solution: &LpSolution<T>,
    objectives: &[Vec<T>],
    iter_limit: usize,
) -> Result<Vec<LpSolution<T>>> {
    if base_solution.status != LpStatus::Optimal {
        return Err(Error::Contract("face search needs an optimal base solution".into()));
    }
    let mut pinned = lp.clone();
    pinned.rows.push(pin_row(lp, &base_solution.objective));
    let mut simplex = Simplex::new(&pinned);
    let mut out = Vec::with_capacity(objectives.len());
    for objective in objectives {
        if objective.len() != lp.num_vars {
            return Err(Error::DimensionMismatch {
                expected: lp.num_vars,
                actual: objective.len(),
                context: "random face objective",
            });
        }
        simplex.set_objective(objective);
        let status = simplex.solve(iter_limit);
        if status != LpStatus::Optimal {
            return Err(Error::Lp(format!("face re-optimization ended {status:?}")));
        }
        out.push(simplex.solution(status));
    }
    Ok(out)
}

/// `-c·x ≤ -(z* - tol)`.
pub(crate) fn pin_row<T: Scalar>(lp: &LinearProgram<T>, optimum: &T) -> super::Row<T> {
    let coefs = lp
        .objective
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j, -c.clone()))
        .collect();
    (coefs, T::tolerance(FACE_PIN_TOLERANCE) - optimum.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Column, Graph};
    use crate::lp::{build_grdp, solve_lp};

    fn rdp(g: &Graph, sets: &[&[usize]]) -> LinearProgram<f64> {
        let cols: Vec<Column> = sets.iter().map(|s| Column::new(s.to_vec())).collect();
        build_grdp(g, &cols, &vec![0.0; g.n()], 0.0).unwrap()
    }

    #[test]
    fn path_face_endpoints() {
        let lp = rdp(&Graph::path(3), &[&[0, 2], &[1]]);
        let base = solve_lp(&lp, 100).unwrap();
        let left = optimal_face_vertex(&lp, &base, &[1.0, 0.0, 0.1], 100).unwrap();
        let right = optimal_face_vertex(&lp, &base, &[0.1, 0.0, 1.0], 100).unwrap();
        for (got, want) in [(left.values, [1.0, 1.0, 0.0]), (right.values, [0.0, 1.0, 1.0])] {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-6, "{got:?}");
            }
        }
    }

    #[test]
    fn unique_optimum_is_fixed() {
        let lp = rdp(&Graph::complete(3), &[&[0], &[1], &[2]]);
        let base = solve_lp(&lp, 100).unwrap();
        for seed in 0..5 {
            let obj = random_face_objective::<f64>(3, seed);
            let v = optimal_face_vertex(&lp, &base, &obj, 100).unwrap();
            assert!(v.values.iter().all(|x| (x - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn warm_batch_matches_cold() {
        let g = Graph::cycle(5);
        let lp = build_grdp(
            &g,
            &crate::pricing::enumerate_all_mis(&g).unwrap(),
            &[0.0; 5],
            0.0f64,
        )
        .unwrap();
        let base = solve_lp(&lp, 100).unwrap();
        let objs: Vec<Vec<f64>> = (0..6).map(|s| random_face_objective(5, s)).collect();
        let warm = optimal_face_vertices(&lp, &base, &objs, 1000).unwrap();
        for (obj, w) in objs.iter().zip(&warm) {
            let cold = optimal_face_vertex(&lp, &base, obj, 1000).unwrap();
            assert!((cold.objective - w.objective).abs() < 1e-9);
            assert!(lp.max_violation(&w.values) < 1e-7);
        }
    }

    #[test]
    fn requires_optimal_base() {
        let lp = rdp(&Graph::path(3), &[&[0, 2], &[1]]);
        let mut base = solve_lp(&lp, 100).unwrap();
        base.status = LpStatus::IterationLimit;
        assert!(optimal_face_vertex(&lp, &base, &[1.0, 0.0, 0.0], 100).is_err());
    }
}
