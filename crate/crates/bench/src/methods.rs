use std::fmt;
use std::str::FromStr;

use ascg_core::predict::ModelKind;
use ascg_core::StabPolicy;

use crate::error::BenchError;

/// Penalty of the fixed-penalty prediction variants.
pub const FIXED_ML_EPSILON: f64 = 0.1;
/// Penalty of the previous-iterate baseline.
pub const PREVIOUS_ITERATE_EPSILON: f64 = 1.0;
/// Starting penalty of the adaptive variants.
pub const ADAPTIVE_EPSILON0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predictor {
    Degree,
    Ffnn,
    Gcn,
}

impl Predictor {
    pub fn model_kind(self) -> ModelKind {
        match self {
            Predictor::Degree => ModelKind::DegreeBaseline,
            Predictor::Ffnn => ModelKind::Ffnn,
            Predictor::Gcn => ModelKind::Gcn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Classic,
    Scg,
    ScgMl(Predictor),
    AscgMl(Predictor),
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Classic,
        Method::Scg,
        Method::ScgMl(Predictor::Degree),
        Method::ScgMl(Predictor::Ffnn),
        Method::ScgMl(Predictor::Gcn),
        Method::AscgMl(Predictor::Degree),
        Method::AscgMl(Predictor::Ffnn),
        Method::AscgMl(Predictor::Gcn),
    ];

    pub fn predictor(self) -> Option<Predictor> {
        match self {
            Method::ScgMl(p) | Method::AscgMl(p) => Some(p),
            _ => None,
        }
    }

    /// Whether a trained model file is required.
    pub fn needs_model(self) -> bool {
        matches!(self.predictor(), Some(Predictor::Ffnn | Predictor::Gcn))
    }

    /// Stabilization policy; `epsilon0` overrides the method's default penalty.
    pub fn policy(self, epsilon0: Option<f64>, floor: f64) -> StabPolicy {
        let policy = match self {
            Method::Classic => StabPolicy::classic(),
            Method::Scg => StabPolicy::previous_iterate(epsilon0.unwrap_or(PREVIOUS_ITERATE_EPSILON)),
            Method::ScgMl(_) => StabPolicy::fixed_ml(epsilon0.unwrap_or(FIXED_ML_EPSILON)),
            Method::AscgMl(_) => StabPolicy::adaptive_ml(epsilon0.unwrap_or(ADAPTIVE_EPSILON0)),
        };
        policy.with_floor(floor)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = |p: &Predictor| match p {
            Predictor::Degree => "deg",
            Predictor::Ffnn => "ffnn",
            Predictor::Gcn => "gcn",
        };
        match self {
            Method::Classic => write!(f, "classic"),
            Method::Scg => write!(f, "scg"),
            Method::ScgMl(p) => write!(f, "scg-{}", suffix(p)),
            Method::AscgMl(p) => write!(f, "ascg-{}", suffix(p)),
        }
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| BenchError::Usage(format!("unknown method {s:?}")))
    }
}
