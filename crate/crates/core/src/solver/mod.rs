//! Solvers and the variant dispatcher.

pub mod constant;
pub mod noreturn_ave;
pub mod noreturn_max;
pub mod return_max;
pub mod step;

use std::time::Instant;

use crate::demand::CurveKind;
use crate::error::{Error, Result};
use crate::report::{SolveReport, SolveStats};
use crate::scalar::Rational;
use crate::schedule::{eval_objective, Instance, Schedule, Variant};

/// Tuning knobs shared by the dispatcher and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    /// Interval width at which the binary search stops.
    pub rho: f64,
    /// Grid resolution of the average-waiting graph.
    pub m_ave: usize,
    /// Grid resolution of the return graph.
    pub m_return: usize,
    /// Lift the fleet-size guard of the return graph solver.
    pub force: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            rho: 1e-4,
            m_ave: 16,
            m_return: 8,
            force: false,
        }
    }
}

impl SolveParams {
    /// Sets both grid resolutions.
    pub fn with_m(mut self, m: usize) -> Self {
        self.m_ave = m;
        self.m_return = m;
        self
    }
}

/// Picks the most specific solver for the instance: closed forms for
/// constant demand, the exact DP for step demand without loading time, and
/// the approximation schemes otherwise.
pub fn solve_instance(instance: &Instance, params: &SolveParams) -> Result<SolveReport> {
    let kind = instance.demand.kind();
    match instance.variant {
        Variant::NoreturnMax | Variant::NoreturnAve if kind == CurveKind::Constant => constant::solve_noreturn(instance),
        Variant::NoreturnMax if kind == CurveKind::Step && instance.nu == 0.0 => step::solve_max(instance),
        Variant::NoreturnAve if kind == CurveKind::Step && instance.nu == 0.0 => step::solve_ave(instance),
        Variant::NoreturnMax => noreturn_max::solve(instance, params.rho),
        Variant::NoreturnAve => noreturn_ave::solve(instance, params.m_ave),
        Variant::ReturnMax if kind == CurveKind::Constant => constant::solve_return_max(instance),
        Variant::ReturnMax => return_max::solve(instance, params.m_return, params.force),
        Variant::ReturnAveConstant if kind == CurveKind::Constant => constant::solve_return_ave(instance),
        Variant::ReturnAveConstant => Err(Error::Unsupported(
            "average waiting time with returns is only solved for constant demand".into(),
        )),
    }
}

/// Assembles a report whose upper bound is the exact objective of the
/// returned schedule. A lower bound that exceeds it by rounding noise only
/// is pulled down to it.
pub(crate) fn finish(
    solver: &'static str,
    instance: &Instance,
    schedule: Schedule,
    lower_bound: f64,
    exact_value: Option<Rational>,
    stats: SolveStats,
    started: Instant,
) -> SolveReport {
    let upper_bound = eval_objective(instance, &schedule);
    let lower_bound = if lower_bound > upper_bound && lower_bound - upper_bound <= 1e-9 {
        upper_bound
    } else {
        lower_bound
    };
    SolveReport {
        solver,
        variant: instance.variant,
        schedule,
        lower_bound,
        upper_bound,
        exact_value,
        no_optimal_solution: false,
        stats,
        wall_time_s: started.elapsed().as_secs_f64(),
    }
}

pub(crate) fn require_fleet(instance: &Instance) -> Result<()> {
    if instance.fleet_covers_demand() {
        Ok(())
    } else {
        Err(Error::Infeasible(format!(
            "C*S = {} < D(T) = {}",
            instance.capacity * instance.shuttles as f64,
            instance.total_demand()
        )))
    }
}
