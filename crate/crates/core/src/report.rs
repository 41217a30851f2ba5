use serde::{Serialize, Serializer};

use crate::scalar::Rational;
use crate::schedule::{Schedule, Variant};

/// Size and progress counters. Solvers fill in the fields that apply to them.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arcs: Option<u64>,
    /// Discretization parameter of the graph solvers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Target interval width of the binary search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_plus: Option<f64>,
    /// A priori bound on `UB - LB` when one is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,
    /// Number of enumerated candidates (closed-form and brute-force solvers).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<u64>,
}

/// Result of a solver run: a feasible schedule with its value (the upper
/// bound) and a certified lower bound on the optimum.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solver: &'static str,
    pub variant: Variant,
    pub schedule: Schedule,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Exact optimal value, for the solvers that compute one.
    #[serde(serialize_with = "serialize_opt_rational", skip_serializing_if = "Option::is_none")]
    pub exact_value: Option<Rational>,
    /// Set when the lower bound is an infimum that no schedule attains.
    pub no_optimal_solution: bool,
    pub stats: SolveStats,
    pub wall_time_s: f64,
}

fn serialize_opt_rational<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl SolveReport {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }

    /// `100 * (UB - LB) / LB`, undefined when `LB = 0`.
    pub fn gap_percent(&self) -> Option<f64> {
        gap_percent(self.lower_bound, self.upper_bound)
    }
}

pub fn gap_percent(lb: f64, ub: f64) -> Option<f64> {
    if lb > 0.0 {
        Some(100.0 * (ub - lb) / lb)
    } else {
        None
    }
}
