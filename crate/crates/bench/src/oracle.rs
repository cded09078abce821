use ascg_core::lp::{build_grdp, default_iter_limit, solve_lp, LpStatus};
use ascg_core::pricing::enumerate_all_mis;
use ascg_core::{Error, Graph};
use num_rational::BigRational;

use crate::error::Result;

/// Fractional chromatic number from the dual LP over every maximal
/// independent set. Refuses graphs above the enumeration limit.
pub fn oracle_lp_bound(g: &Graph) -> Result<f64> {
    let columns = enumerate_all_mis(g)?;
    let lp = build_grdp(g, &columns, &vec![0.0; g.n()], 0.0)?;
    let sol = solve_lp(&lp, default_iter_limit(lp.num_vars, lp.rows.len()))?;
    check(sol.status)?;
    Ok(sol.objective)
}

/// As [`oracle_lp_bound`] in exact rational arithmetic.
pub fn oracle_lp_bound_exact(g: &Graph) -> Result<BigRational> {
    let columns = enumerate_all_mis(g)?;
    let zero = BigRational::from_integer(0.into());
    let lp = build_grdp(g, &columns, &vec![zero.clone(); g.n()], zero)?;
    let sol = solve_lp(&lp, default_iter_limit(lp.num_vars, lp.rows.len()))?;
    check(sol.status)?;
    Ok(sol.objective)
}

fn check(status: LpStatus) -> Result<()> {
    if status != LpStatus::Optimal {
        return Err(Error::Lp(format!("oracle LP ended {status:?}")).into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ascg_core::scalar::ratio;

    #[test]
    fn small_graphs() {
        assert!((oracle_lp_bound(&Graph::complete(3)).unwrap() - 3.0).abs() < 1e-12);
        assert!((oracle_lp_bound(&Graph::cycle(5)).unwrap() - 2.5).abs() < 1e-12);
        assert!((oracle_lp_bound(&Graph::path(3)).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(oracle_lp_bound_exact(&Graph::cycle(5)).unwrap(), ratio(5, 2));
        assert_eq!(oracle_lp_bound_exact(&Graph::cycle(7)).unwrap(), ratio(7, 3));
    }

    #[test]
    fn guard() {
        assert!(oracle_lp_bound(&Graph::edgeless(26)).is_err());
    }
}
