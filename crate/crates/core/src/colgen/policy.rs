use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Column, Graph};
use crate::lp::{build_grdp, default_iter_limit, solve_lp, LpStatus};
use crate::scalar::Scalar;

pub const DEFAULT_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StabKind {
    Classic,
    /// Reference point is the previous dual iterate.
    PreviousIterate { epsilon0: f64 },
    /// Reference point is a prediction, penalty fixed up to halving.
    FixedMl { epsilon0: f64 },
    /// Reference point is a prediction, penalty recomputed from the reduced cost.
    AdaptiveMl { epsilon0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabPolicy {
    pub kind: StabKind,
    /// Penalties below this snap to zero.
    pub floor: f64,
    /// Fixed-penalty kinds halve on a failed exact pricing; without halving
    /// the penalty drops straight to zero instead.
    pub halving: bool,
}

impl StabPolicy {
    pub fn new(kind: StabKind) -> Self {
        Self {
            kind,
            floor: DEFAULT_FLOOR,
            halving: true,
        }
    }

    pub fn classic() -> Self {
        Self::new(StabKind::Classic)
    }

    pub fn previous_iterate(epsilon0: f64) -> Self {
        Self::new(StabKind::PreviousIterate { epsilon0 })
    }

    pub fn fixed_ml(epsilon0: f64) -> Self {
        Self::new(StabKind::FixedMl { epsilon0 })
    }

    pub fn adaptive_ml(epsilon0: f64) -> Self {
        Self::new(StabKind::AdaptiveMl { epsilon0 })
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn epsilon0(&self) -> Option<f64> {
        match self.kind {
            StabKind::Classic => None,
            StabKind::PreviousIterate { epsilon0 }
            | StabKind::FixedMl { epsilon0 }
            | StabKind::AdaptiveMl { epsilon0 } => Some(epsilon0),
        }
    }

    /// True for the kinds that stabilize toward a prediction.
    pub fn needs_prediction(&self) -> bool {
        matches!(self.kind, StabKind::FixedMl { .. } | StabKind::AdaptiveMl { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor >= 0.0) {
            return Err(Error::Contract(format!("penalty floor {} must be >= 0", self.floor)));
        }
        if let Some(e) = self.epsilon0() {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Contract(format!("initial penalty {e} must be positive")));
            }
        }
        Ok(())
    }
}

fn apply_floor<T: Scalar>(epsilon: T, floor: &T) -> T {
    if epsilon < *floor {
        T::zero()
    } else {
        epsilon
    }
}

/// `c / (c - 1)` for negative `c`, otherwise 0; then the floor.
pub fn update_epsilon_adaptive<T: Scalar>(reduced_cost: T, floor: T) -> T {
    if reduced_cost < T::zero() {
        let raw = reduced_cost.clone() / (reduced_cost - T::one());
        apply_floor(raw, &floor)
    } else {
        T::zero()
    }
}

/// Keeps `current` while pricing makes progress, halves it otherwise.
pub fn update_epsilon_fixed<T: Scalar>(current: T, priced_negative: bool, floor: T) -> T {
    if priced_negative {
        return current;
    }
    let two = T::one() + T::one();
    apply_floor(current / two, &floor)
}

/// `z / (1 - c*)`. Only valid for a proven-optimal reduced cost. At the zero
/// dual vector (`c* = 1`) the bound is the trivial 0.
pub fn lagrangian_bound<T: Scalar>(objective: T, reduced_cost: T, proven_optimal: bool) -> Result<T> {
    if !proven_optimal {
        return Err(Error::Contract(
            "Lagrangian bound needs a proven-optimal reduced cost".into(),
        ));
    }
    let denom = T::one() - reduced_cost.clone();
    if denom <= T::zero() {
        if objective.is_zero() {
            return Ok(T::zero());
        }
        return Err(Error::Contract(format!("reduced cost {reduced_cost} leaves 1 - c <= 0")));
    }
    Ok(objective / denom)
}

/// `1 - bound / rdp_objective`.
pub fn lagrangian_gap<T: Scalar>(bound: T, rdp_objective: T) -> T {
    T::one() - bound / rdp_objective
}

/// Solves the unpenalized restricted dual over `columns` and returns
/// `(gap, rdp_objective)` for the stabilized iterate's objective and c*.
pub fn lagrangian_gap_diagnostic<T: Scalar>(
    g: &Graph,
    columns: &[Column],
    pi_eps_objective: T,
    reduced_cost: T,
) -> Result<(T, T)> {
    let bound = lagrangian_bound(pi_eps_objective, reduced_cost, true)?;
    let lp = build_grdp(g, columns, &vec![T::zero(); g.n()], T::zero())?;
    let sol = solve_lp(&lp, default_iter_limit(lp.num_vars, lp.rows.len()))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("restricted dual ended {:?}", sol.status)));
    }
    Ok((lagrangian_gap(bound, sol.objective.clone()), sol.objective))
}
