//! Exact solvers for constant demand, where all `D` users are waiting at time 0.
//!
//! Without returns the equal split `y_j = jD/S` departing at `nu*D/S` is
//! optimal for both objectives. With returns the maximum waiting time has a
//! closed form, and the average waiting time splits into `S` identical
//! single-shuttle problems
//!
//! ```text
//! min (1/D_s) (sum_j (j-1) pi x_j + nu/2 sum_j x_j^2) + nu D_s / 2
//! s.t. sum_j x_j = D_s, 0 <= x_j <= C
//! ```
//!
//! whose optimal loads are `a` full trips followed by an arithmetic
//! progression with common difference `-pi/nu`.

use std::time::Instant;

use num_traits::Zero;
use serde::Serialize;

use super::{finish, require_fleet};
use crate::demand::CurveKind;
use crate::error::{precondition, Error, Result};
use crate::report::{SolveReport, SolveStats};
use crate::scalar::{ceil_nonneg, floor_nonneg, Rational, Scalar};
use crate::schedule::{ExactSchedule, Instance};

/// Above this many full-load candidates the enumeration is refused.
const MAX_CANDIDATES: u64 = 1_000_000;

/// Trips used for the near-optimal schedule when no optimum exists.
const MIN_TRIPS_WITHOUT_RETURN_TIME: u64 = 64;

struct ExactData {
    total: Rational,
    cap: Rational,
    nu: Rational,
    pi: Rational,
    s: Rational,
}

fn exact_data(instance: &Instance) -> Result<ExactData> {
    if instance.demand.kind() != CurveKind::Constant {
        return precondition("this solver requires constant demand");
    }
    Ok(ExactData {
        total: instance.demand.exact().total().clone(),
        cap: Rational::from_f64(instance.capacity),
        nu: Rational::from_f64(instance.nu),
        pi: Rational::from_f64(instance.pi),
        s: Rational::from_usize(instance.shuttles),
    })
}

/// Equal split over the fleet, all shuttles leaving at `nu*D/S`.
pub fn solve_noreturn(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    let e = exact_data(instance)?;
    require_fleet(instance)?;
    let share = e.total.clone() / e.s.clone();
    let value = e.nu.clone() * share.clone();
    let y = (1..=instance.shuttles).map(|j| share.clone() * Rational::from_usize(j)).collect();
    let d = vec![value.clone(); instance.shuttles];
    let schedule = ExactSchedule { d, y }.to_float();
    let stats = SolveStats {
        candidates: Some(1),
        ..Default::default()
    };
    Ok(finish(
        "constant_noreturn",
        instance,
        schedule,
        value.to_f64(),
        Some(value),
        stats,
        started,
    ))
}

/// Loads of one shuttle expanded to the synchronized fleet schedule: round
/// `i` has every shuttle carry `x_i` and leave at `(i-1)*pi + nu*Y_i`, with
/// `Y_i` the per-shuttle cumulative load.
fn synchronized_schedule(trips: &[Rational], nu: &Rational, pi: &Rational, s: usize) -> ExactSchedule {
    let mut d = Vec::with_capacity(trips.len() * s);
    let mut y = Vec::with_capacity(trips.len() * s);
    let mut per_shuttle = Rational::zero();
    for (i, x) in trips.iter().enumerate() {
        let before = per_shuttle.clone() * Rational::from_usize(s);
        per_shuttle += x.clone();
        let dep = pi.clone() * Rational::from_usize(i) + nu.clone() * per_shuttle.clone();
        for k in 1..=s {
            y.push(before.clone() + x.clone() * Rational::from_usize(k));
            d.push(dep.clone());
        }
    }
    ExactSchedule { d, y }
}

/// `nu*D/S + (ceil(D/(C*S)) - 1) * pi`, attained by synchronized full trips.
pub fn return_max_value(instance: &Instance) -> Result<Rational> {
    let e = exact_data(instance)?;
    let rounds = ceil_nonneg(&(e.total.clone() / (e.cap.clone() * e.s.clone())));
    Ok(e.nu * e.total / e.s + e.pi * Rational::from_usize(rounds as usize - 1))
}

pub fn solve_return_max(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    let e = exact_data(instance)?;
    let value = return_max_value(instance)?;
    let share = e.total.clone() / e.s.clone();
    let trips = full_trips(&share, &e.cap);
    let schedule = synchronized_schedule(&trips, &e.nu, &e.pi, instance.shuttles).to_float();
    let stats = SolveStats {
        candidates: Some(1),
        ..Default::default()
    };
    Ok(finish(
        "constant_return_max",
        instance,
        schedule,
        value.to_f64(),
        Some(value),
        stats,
        started,
    ))
}

/// `C, C, ..., remainder` summing to `share`.
fn full_trips(share: &Rational, cap: &Rational) -> Vec<Rational> {
    let m = ceil_nonneg(&(share.clone() / cap.clone())) as usize;
    let mut trips = vec![cap.clone(); m];
    if let Some(last) = trips.last_mut() {
        *last = share.clone() - cap.clone() * Rational::from_usize(m - 1);
    }
    trips
}

/// One candidate of the single-shuttle average problem: `a` full trips, then
/// trips `a+1..=theta` in arithmetic progression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktCandidate {
    pub a: u64,
    pub theta: u64,
    #[serde(skip)]
    pub x: Vec<Rational>,
    #[serde(skip)]
    pub objective: Rational,
    /// Whether every load lies in `[0, C]`.
    pub admissible: bool,
}

/// Smallest `k >= 0` with `k(k+1) >= q`.
fn smallest_triangular_cover(q: &Rational) -> u64 {
    if *q <= Rational::zero() {
        return 0;
    }
    let qf: f64 = Scalar::to_f64(q);
    let mut k = (((1.0 + 4.0 * qf).sqrt() - 1.0) / 2.0).ceil().max(0.0) as u64;
    let tri = |k: u64| Rational::from_integer((k as i64 * (k as i64 + 1)).into());
    while tri(k) < *q {
        k += 1;
    }
    while k > 0 && tri(k - 1) >= *q {
        k -= 1;
    }
    k
}

/// Single-shuttle objective `(1/D_s)(sum (j-1) pi x_j + nu/2 sum x_j^2) + nu D_s/2`.
pub fn single_shuttle_objective(x: &[Rational], share: &Rational, nu: &Rational, pi: &Rational) -> Rational {
    let half = Rational::new(1.into(), 2.into());
    let mut lin = Rational::zero();
    let mut sq = Rational::zero();
    for (j, xj) in x.iter().enumerate() {
        lin += pi.clone() * Rational::from_usize(j) * xj.clone();
        sq += xj.clone() * xj.clone();
    }
    (lin + half.clone() * nu.clone() * sq) / share.clone() + half * nu.clone() * share.clone()
}

/// Enumerates the candidates for per-shuttle demand `share`, requiring
/// `nu > 0` and `pi > 0`.
pub fn kkt_candidates(share: &Rational, cap: &Rational, nu: &Rational, pi: &Rational) -> Result<Vec<KktCandidate>> {
    if !(*nu > Rational::zero() && *pi > Rational::zero()) {
        return precondition("the candidate form needs nu > 0 and pi > 0");
    }
    let a_max = floor_nonneg(&(share.clone() / cap.clone()));
    if a_max >= MAX_CANDIDATES {
        return Err(Error::Resource(format!("{a_max} candidates exceed the enumeration budget")));
    }
    let two = Rational::from_usize(2);
    let step = pi.clone() / nu.clone();
    let mut out = Vec::with_capacity(a_max as usize + 1);
    for a in 0..=a_max {
        let rest = share.clone() - cap.clone() * Rational::from_usize(a as usize);
        let k = smallest_triangular_cover(&(two.clone() * nu.clone() * rest.clone() / pi.clone()));
        let b = a + k;
        let mut x = vec![cap.clone(); a as usize];
        if k > 0 {
            let mean = rest.clone() / Rational::from_usize(k as usize);
            let centre = Rational::new(((a + b + 1) as i64).into(), 2.into());
            for j in (a + 1)..=b {
                x.push(mean.clone() + step.clone() * (centre.clone() - Rational::from_usize(j as usize)));
            }
        }
        let admissible = x.iter().all(|v| *v >= Rational::zero() && v <= cap);
        let objective = single_shuttle_objective(&x, share, nu, pi);
        out.push(KktCandidate {
            a,
            theta: b,
            x,
            objective,
            admissible,
        });
    }
    Ok(out)
}

/// Minimizes the average waiting time with returns. With `pi = 0` and
/// `nu > 0` the infimum `nu*D/(2S)` is not attained; the report then carries
/// it as lower bound with `no_optimal_solution` set, and a 64-trip (or more)
/// equal split as schedule.
pub fn solve_return_ave(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    let e = exact_data(instance)?;
    let share = e.total.clone() / e.s.clone();
    let zero = Rational::zero();
    let s = instance.shuttles;

    if e.nu == zero {
        // Loading is free: each trip costs only its round, so fill trips in order.
        let trips = full_trips(&share, &e.cap);
        let value = single_shuttle_objective(&trips, &share, &e.nu, &e.pi);
        let schedule = synchronized_schedule(&trips, &e.nu, &e.pi, s).to_float();
        let stats = SolveStats {
            candidates: Some(1),
            ..Default::default()
        };
        return Ok(finish(
            "constant_return_ave",
            instance,
            schedule,
            value.to_f64(),
            Some(value),
            stats,
            started,
        ));
    }
    if e.pi == zero {
        let infimum = e.nu.clone() * share.clone() / Rational::from_usize(2);
        let n = ceil_nonneg(&(share.clone() / e.cap.clone())).max(MIN_TRIPS_WITHOUT_RETURN_TIME);
        let trips = vec![share.clone() / Rational::from_usize(n as usize); n as usize];
        let schedule = synchronized_schedule(&trips, &e.nu, &e.pi, s).to_float();
        let stats = SolveStats {
            candidates: Some(1),
            ..Default::default()
        };
        let mut report = finish("constant_return_ave", instance, schedule, infimum.to_f64(), None, stats, started);
        report.no_optimal_solution = true;
        return Ok(report);
    }
    let candidates = kkt_candidates(&share, &e.cap, &e.nu, &e.pi)?;
    let n_candidates = candidates.len() as u64;
    let best = candidates
        .into_iter()
        .filter(|c| c.admissible)
        .reduce(|best, c| if c.objective < best.objective { c } else { best })
        .ok_or_else(|| Error::Infeasible("no admissible candidate".into()))?;
    let schedule = synchronized_schedule(&best.x, &e.nu, &e.pi, s).to_float();
    let stats = SolveStats {
        candidates: Some(n_candidates),
        ..Default::default()
    };
    let value = best.objective;
    Ok(finish(
        "constant_return_ave",
        instance,
        schedule,
        value.to_f64(),
        Some(value),
        stats,
        started,
    ))
}
