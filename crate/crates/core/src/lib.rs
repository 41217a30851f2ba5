//! Timetabling for shuttles that carry a known cumulative demand of users.
//!
//! A shuttle of capacity `C` departs `S` times (or shuttles come back after
//! `pi` minutes and depart repeatedly), each user waits from arrival until
//! its departure, and loading takes `nu` minutes per user. The crate
//! minimizes the maximum or the average wait. See [`solver::solve_instance`]
//! for the entry point.

pub mod demand;
pub mod error;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod schedule;
pub mod solver;
pub mod synthetic;

pub use demand::{CurveKind, DemandCurve, Profile};
pub use error::{Error, Result};
pub use report::{SolveReport, SolveStats};
pub use scalar::{Rational, Scalar};
pub use schedule::{
    check_feasible, eval_gave, eval_gmax, eval_gmax_alt, eval_objective, Constraint, ExactSchedule, FeasibilityReport, Instance, Objective,
    Schedule, Variant,
};
pub use solver::{solve_instance, SolveParams};
