use super::{LinearProgram, Row};
use crate::error::{Error, Result};
use crate::graph::{Column, Graph};
use crate::scalar::Scalar;

/// Variable and row layout of a (generalized) restricted dual problem.
///
/// Variables: `π` at `0..n`, then (when penalized) `w⁻` at `n..2n` and `w⁺`
/// at `2n..3n`. Rows: one per column, then (when penalized) the lower
/// deviation rows `-π_i - w⁻_i ≤ -ŷ_i` and upper rows `π_i - w⁺_i ≤ ŷ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrdpLayout {
    pub n: usize,
    pub penalized: bool,
}

impl GrdpLayout {
    pub fn num_vars(&self) -> usize {
        if self.penalized {
            3 * self.n
        } else {
            self.n
        }
    }

    pub fn w_minus(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn w_plus(&self, i: usize) -> usize {
        2 * self.n + i
    }

    pub fn objective<T: Scalar>(&self, epsilon: &T) -> Vec<T> {
        let mut c = vec![T::one(); self.n];
        if self.penalized {
            c.extend(std::iter::repeat(-epsilon.clone()).take(2 * self.n));
        }
        c
    }

    pub fn column_row<T: Scalar>(&self, column: &Column) -> Row<T> {
        (
            column.vertices().iter().map(|&i| (i, T::one())).collect(),
            T::one(),
        )
    }

    pub fn lower_deviation_row<T: Scalar>(&self, i: usize, reference: &T) -> Row<T> {
        (
            vec![(i, -T::one()), (self.w_minus(i), -T::one())],
            -reference.clone(),
        )
    }

    pub fn upper_deviation_row<T: Scalar>(&self, i: usize, reference: &T) -> Row<T> {
        (
            vec![(i, T::one()), (self.w_plus(i), -T::one())],
            reference.clone(),
        )
    }
}

/// Restricted dual over `columns`, penalizing deviation from `yhat` at rate
/// `epsilon`. With `epsilon = 0` the deviation variables and rows are omitted.
pub fn build_grdp<T: Scalar>(
    g: &Graph,
    columns: &[Column],
    yhat: &[T],
    epsilon: T,
) -> Result<LinearProgram<T>> {
    if yhat.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: yhat.len(),
            context: "reference point",
        });
    }
    if epsilon < T::zero() {
        return Err(Error::Contract(format!("negative penalty {epsilon}")));
    }
    build_grdp_with(g, columns, yhat, epsilon.clone(), !epsilon.is_zero())
}

/// As [`build_grdp`] but always keeping (or always dropping) the deviation block.
pub fn build_grdp_with<T: Scalar>(
    g: &Graph,
    columns: &[Column],
    yhat: &[T],
    epsilon: T,
    penalized: bool,
) -> Result<LinearProgram<T>> {
    let layout = GrdpLayout { n: g.n(), penalized };
    let mut rows = Vec::with_capacity(columns.len() + if penalized { 2 * g.n() } else { 0 });
    for column in columns {
        if column.vertices().iter().any(|&v| v >= g.n()) {
            return Err(Error::Contract(format!("column {:?} out of range", column.vertices())));
        }
        rows.push(layout.column_row(column));
    }
    if penalized {
        for (i, y) in yhat.iter().enumerate() {
            rows.push(layout.lower_deviation_row(i, y));
        }
        for (i, y) in yhat.iter().enumerate() {
            rows.push(layout.upper_deviation_row(i, y));
        }
    }
    let num_vars = layout.num_vars();
    Ok(LinearProgram {
        num_vars,
        objective: layout.objective(&epsilon),
        rows,
        lower_bound: vec![T::zero(); num_vars],
        upper_bound: vec![T::one(); num_vars],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, LpStatus};

    fn cols(sets: &[&[usize]]) -> Vec<Column> {
        sets.iter().map(|s| Column::new(s.to_vec())).collect()
    }

    #[test]
    fn k3_standard_rdp() {
        let g = Graph::complete(3);
        let lp = build_grdp(&g, &cols(&[&[0], &[1], &[2]]), &[0.0; 3], 0.0f64).unwrap();
        assert_eq!((lp.num_vars, lp.rows.len()), (3, 3));
        let sol = solve_lp(&lp, 1000).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-12);
        assert!(sol.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn path_standard_rdp() {
        let g = Graph::path(3);
        let lp = build_grdp(&g, &cols(&[&[0, 2], &[1]]), &[0.0; 3], 0.0f64).unwrap();
        let sol = solve_lp(&lp, 1000).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!((sol.values[1] - 1.0).abs() < 1e-12);
        assert!((sol.values[0] + sol.values[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penalized_rdp_pins_optimal_prediction() {
        let g = Graph::path(3);
        let lp = build_grdp(&g, &cols(&[&[0, 2], &[1]]), &[0.5, 1.0, 0.5], 1.0f64).unwrap();
        assert_eq!((lp.num_vars, lp.rows.len()), (9, 8));
        let sol = solve_lp(&lp, 1000).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-12);
        for (v, want) in sol.values[..3].iter().zip([0.5, 1.0, 0.5]) {
            assert!((v - want).abs() < 1e-12, "{:?}", sol.values);
        }
        assert!(sol.values[3..].iter().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Graph::path(3);
        assert!(build_grdp(&g, &[], &[0.0; 2], 0.0).is_err());
        assert!(build_grdp(&g, &[], &[0.0; 3], -1.0).is_err());
    }
}
