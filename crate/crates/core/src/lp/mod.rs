//! Linear programs in `max c·x, A x ≤ b, l ≤ x ≤ u` form, the simplex engine,
//! and the (generalized) restricted dual problem solved at each CG iteration.

mod face;
mod grdp;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use face::{
    optimal_face_vertex, optimal_face_vertices, random_face_objective, FACE_PIN_TOLERANCE,
};
pub use grdp::{build_grdp, build_grdp_with, GrdpLayout};
pub use simplex::{PivotRule, Simplex, SimplexStats};

/// One `Σ a_j x_j ≤ b` row in sparse form.
pub type Row<T> = (Vec<(usize, T)>, T);

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub num_vars: usize,
    /// Maximized.
    pub objective: Vec<T>,
    pub rows: Vec<Row<T>>,
    pub lower_bound: Vec<T>,
    pub upper_bound: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub values: Vec<T>,
    pub objective: T,
    /// Basic variables at value ≤ 1e-9.
    pub zero_basic_count: usize,
    /// Nonbasic variables with zero reduced cost; counts the directions of
    /// alternative optima (the zero-valued basics of the complementary problem).
    pub zero_reduced_cost_count: usize,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        for (what, len) in [
            ("objective", self.objective.len()),
            ("lower bounds", self.lower_bound.len()),
            ("upper bounds", self.upper_bound.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: len,
                    context: what,
                });
            }
        }
        for (i, (coefs, _)) in self.rows.iter().enumerate() {
            if let Some((j, _)) = coefs.iter().find(|(j, _)| *j >= n) {
                return Err(Error::Contract(format!("row {i} references variable {j} >= {n}")));
            }
        }
        for j in 0..n {
            if self.lower_bound[j] > self.upper_bound[j] {
                return Err(Error::Contract(format!("variable {j} has lower > upper")));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound by `values`.
    pub fn max_violation(&self, values: &[T]) -> T {
        let mut worst = T::zero();
        for (coefs, b) in &self.rows {
            let lhs = coefs
                .iter()
                .fold(T::zero(), |acc, (j, a)| acc + a.clone() * values[*j].clone());
            worst = T::max_of(worst, lhs - b.clone());
        }
        for j in 0..self.num_vars {
            worst = T::max_of(worst, self.lower_bound[j].clone() - values[j].clone());
            worst = T::max_of(worst, values[j].clone() - self.upper_bound[j].clone());
        }
        worst
    }

    pub fn evaluate(&self, values: &[T]) -> T {
        self.objective
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (c, x)| acc + c.clone() * x.clone())
    }
}

/// Solves `lp` from a slack basis with at most `iter_limit` simplex steps.
pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>, iter_limit: usize) -> Result<LpSolution<T>> {
    lp.validate()?;
    let mut simplex = Simplex::new(lp);
    let status = simplex.solve(iter_limit);
    Ok(simplex.solution(status))
}

/// Default pivot budget for an LP of the given shape.
pub fn default_iter_limit(num_vars: usize, num_rows: usize) -> usize {
    50_000 + 50 * (num_vars + num_rows)
}

/// Per-vertex values in `[0, 1]`: dual iterates, reference points and predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVector<T>(pub Vec<T>);

impl<T: Scalar> DualVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Copy with every entry clipped into `[0, 1]`.
    pub fn clipped(&self) -> Self {
        Self(
            self.0
                .iter()
                .map(|v| T::min_of(T::max_of(v.clone(), T::zero()), T::one()))
                .collect(),
        )
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.0.len(),
                context: "dual vector",
            });
        }
        let tol = T::tolerance(1e-9);
        if let Some((i, v)) = self
            .0
            .iter()
            .enumerate()
            .find(|(_, v)| **v < -tol.clone() || **v > T::one() + tol.clone())
        {
            return Err(Error::Contract(format!("dual entry {i} = {v} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::as_f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(obj: Vec<f64>, rows: Vec<Row<f64>>) -> LinearProgram<f64> {
        let n = obj.len();
        LinearProgram {
            num_vars: n,
            objective: obj,
            rows,
            lower_bound: vec![0.0; n],
            upper_bound: vec![1.0; n],
        }
    }

    #[test]
    fn single_variable_cap() {
        let sol = solve_lp(&boxed(vec![1.0], vec![(vec![(0, 1.0)], 0.5)]), 100).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 0.5).abs() < 1e-12);
        assert!((sol.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_variable_sum() {
        let sol: LpSolution<f64> = solve_lp(
            &boxed(vec![1.0, 1.0], vec![(vec![(0, 1.0), (1, 1.0)], 1.0)]),
            100,
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_lower_bounds() {
        let lp: LinearProgram<f64> = LinearProgram {
            num_vars: 1,
            objective: vec![-1.0],
            rows: vec![(vec![(0, -1.0)], 0.5)],
            lower_bound: vec![-1.0],
            upper_bound: vec![1.0],
        };
        let sol = solve_lp(&lp, 100).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_status() {
        let lp = boxed(
            vec![1.0, 1.0, 1.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], 1.0),
                (vec![(1, 1.0), (2, 1.0)], 1.0),
                (vec![(0, 1.0), (2, 1.0)], 1.0),
            ],
        );
        assert_eq!(solve_lp(&lp, 1).unwrap().status, LpStatus::IterationLimit);
    }

    #[test]
    fn validation_errors() {
        let mut lp = boxed(vec![1.0], vec![(vec![(1, 1.0)], 1.0)]);
        assert!(solve_lp(&lp, 10).is_err());
        lp.rows.clear();
        lp.lower_bound[0] = 2.0;
        assert!(lp.validate().is_err());
    }

    #[test]
    fn dual_vector_checks() {
        assert!(DualVector::new(vec![0.0, 1.0]).check(2).is_ok());
        assert!(DualVector::new(vec![0.0, 1.1]).check(2).is_err());
        assert!(DualVector::new(vec![0.0]).check(2).is_err());
        assert_eq!(DualVector::new(vec![-0.2, 1.7]).clipped().0, vec![0.0, 1.0]);
    }
}
