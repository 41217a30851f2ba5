//! Binary search on the maximum waiting time without returns.
//!
//! For a candidate bound `h` the loads are built greedily: each departure
//! takes the largest load that keeps the wait of its first passenger within
//! `h`, and leaves at `h + tau(y_{j-1})`. The bound is achievable exactly when
//! the `S` greedy loads reach `D(T)`, and achievability is monotone in `h`.

use std::time::Instant;

use super::{finish, require_fleet};
use crate::error::{domain, Result};
use crate::report::{SolveReport, SolveStats};
use crate::schedule::{Instance, Schedule};

/// Greedy schedule for bound `h`, or `None` when `S` departures do not
/// reach `D(T)`. Once everyone is served the remaining departures repeat the
/// last one empty.
pub fn greedy_schedule(instance: &Instance, h: f64) -> Option<Schedule> {
    let profile = instance.demand.float();
    let total = *profile.total();
    let (nu, cap) = (instance.nu, instance.capacity);
    let s = instance.shuttles;
    let mut d = Vec::with_capacity(s);
    let mut y = Vec::with_capacity(s);
    let mut prev = 0.0;
    for _ in 0..s {
        if prev == total {
            let last = *d.last().expect("served users imply a departure");
            d.push(last);
            y.push(total);
            continue;
        }
        let next = profile.sup_feasible_load(&prev, &h, &nu, &cap);
        d.push(h + profile.tau(&prev));
        y.push(next);
        prev = next;
    }
    (prev == total).then_some(Schedule { d, y })
}

pub fn is_achievable(instance: &Instance, h: f64) -> bool {
    greedy_schedule(instance, h).is_some()
}

/// Upper end of the initial search interval, `T + nu*D(T)`.
pub fn initial_upper(instance: &Instance) -> f64 {
    instance.horizon() + instance.nu * instance.total_demand()
}

/// Bisects until the certified interval `[h-, h+]` is at most `rho` wide.
pub fn solve(instance: &Instance, rho: f64) -> Result<SolveReport> {
    let started = Instant::now();
    if !(rho.is_finite() && rho > 0.0) {
        return domain(format!("rho must be positive, got {rho}"));
    }
    require_fleet(instance)?;
    let mut hi = initial_upper(instance);
    let mut lo = 0.0_f64;
    let mut best = greedy_schedule(instance, hi).expect("the trivial bound is achievable when C*S >= D(T)");
    let mut iterations = 0u64;
    if let Some(s) = greedy_schedule(instance, lo) {
        best = s;
        hi = lo;
    }
    while hi - lo > rho {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        match greedy_schedule(instance, mid) {
            Some(s) => {
                best = s;
                hi = mid;
            }
            None => lo = mid,
        }
    }
    let stats = SolveStats {
        iterations: Some(iterations),
        rho: Some(rho),
        h_minus: Some(lo),
        h_plus: Some(hi),
        gap_bound: Some(rho),
        ..Default::default()
    };
    Ok(finish("noreturn_max_bisection", instance, best, lo, None, stats, started))
}

/// Relative mode: `rho = eps * (T + nu*D(T)) / S`, which yields a
/// `(1 + eps)`-approximation when the demand is increasing.
pub fn solve_relative(instance: &Instance, eps: f64) -> Result<SolveReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return domain(format!("eps must be positive, got {eps}"));
    }
    solve(instance, eps * initial_upper(instance) / instance.shuttles as f64)
}

/// `ceil(log2((T + nu*D(T)) / rho)) + 1`.
pub fn iteration_bound(instance: &Instance, rho: f64) -> u64 {
    (initial_upper(instance) / rho).log2().ceil().max(0.0) as u64 + 1
}
