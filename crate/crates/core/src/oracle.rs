//! Brute-force reference solvers for small instances.
//!
//! They enumerate load vectors on a grid of cumulative loads and give every
//! candidate its earliest departures, so each returned value is that of a
//! feasible schedule and therefore an upper bound on the optimum. The report
//! carries the oracle value in both bound fields; it is not a certificate.
//! Arithmetic is exact throughout.
//!
//! The average problem with returns under constant demand has continuous
//! optimal loads that no grid contains, so its oracle solves the convex
//! per-shuttle allocation by water-filling instead.

use std::time::Instant;

use num_traits::Zero;

use crate::demand::CurveKind;
use crate::error::{precondition, Error, Result};
use crate::report::{SolveReport, SolveStats};
use crate::scalar::{max_of, Rational, Scalar};
use crate::schedule::{canonical_return_departures_with, gave_with, ExactSchedule, Instance, Objective};
use crate::solver::return_max::departure_bound;
use crate::solver::step::StepGraph;

/// Maximum number of enumeration nodes before giving up.
pub const BUDGET: u64 = 10_000_000;

struct Grid {
    values: Vec<Rational>,
    bar: Vec<Rational>,
    tau: Vec<Rational>,
    integral: Vec<Rational>,
}

fn load_grid(instance: &Instance, grid: usize) -> Result<Grid> {
    if grid == 0 {
        return precondition("the oracle grid needs at least one step");
    }
    let profile = instance.demand.exact();
    let total = profile.total().clone();
    let mut values: Vec<Rational> = (0..=grid)
        .map(|k| total.clone() * Rational::from_usize(k) / Rational::from_usize(grid))
        .collect();
    if instance.demand.kind() == CurveKind::Step {
        values.extend(StepGraph::build(instance)?.vertices);
    }
    values.sort();
    values.dedup();
    let zero = Rational::zero();
    Ok(Grid {
        bar: values.iter().map(|v| profile.bar_tau(v)).collect(),
        tau: values.iter().map(|v| profile.tau(v)).collect(),
        integral: values.iter().map(|v| profile.integrate_bar_tau(&zero, v)).collect(),
        values,
    })
}

struct Search<'a> {
    grid: &'a Grid,
    cap: Rational,
    nu: Rational,
    pi: Option<Rational>,
    objective: Objective,
    /// Exact number of departures, or the maximum when `strict`.
    depth: usize,
    /// Loads strictly increase and the path may stop early.
    strict: bool,
    nodes: u64,
    path: Vec<usize>,
    best: Option<(Rational, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, prev: usize, d_prev: Option<Rational>, acc: Rational) -> Result<()> {
        self.nodes += 1;
        if self.nodes > BUDGET {
            return Err(Error::Resource(format!("oracle enumeration exceeds {BUDGET} nodes")));
        }
        if let Some((b, _)) = &self.best {
            if acc >= *b {
                return Ok(());
            }
        }
        let g = self.grid;
        let last = g.values.len() - 1;
        let j = self.path.len();
        if prev == last && (self.strict || j == self.depth) {
            self.best = Some((acc, self.path.clone()));
            return Ok(());
        }
        if j == self.depth {
            return Ok(());
        }
        let remaining = Rational::from_usize(self.depth - j) * self.cap.clone();
        let first = if self.strict { prev + 1 } else { prev };
        for v in first..=last {
            let x = g.values[v].clone() - g.values[prev].clone();
            if x > self.cap {
                break;
            }
            if g.values[last].clone() - g.values[prev].clone() > remaining {
                break;
            }
            let mut d = g.bar[v].clone() + self.nu.clone() * x.clone();
            if let Some(p) = &d_prev {
                d = max_of(d, p.clone());
                if let Some(pi) = &self.pi {
                    d = max_of(d, p.clone() + pi.clone() + self.nu.clone() * x.clone());
                }
            }
            let next = match self.objective {
                Objective::Max if x.is_zero() => acc.clone(),
                Objective::Max => max_of(acc.clone(), d.clone() - g.tau[prev].clone()),
                Objective::Ave => acc.clone() + d.clone() * x - (g.integral[v].clone() - g.integral[prev].clone()),
            };
            self.path.push(v);
            self.run(v, Some(d), next)?;
            self.path.pop();
        }
        Ok(())
    }
}

fn report(
    solver: &'static str,
    instance: &Instance,
    value: Rational,
    schedule: ExactSchedule,
    nodes: u64,
    started: Instant,
) -> SolveReport {
    SolveReport {
        solver,
        variant: instance.variant,
        schedule: schedule.to_float(),
        lower_bound: value.to_f64(),
        upper_bound: value.to_f64(),
        exact_value: Some(value),
        no_optimal_solution: false,
        stats: SolveStats {
            iterations: Some(nodes),
            ..Default::default()
        },
        wall_time_s: started.elapsed().as_secs_f64(),
    }
}

fn departures(instance: &Instance, grid: &Grid, path: &[usize], with_return: bool) -> ExactSchedule {
    let y: Vec<Rational> = path.iter().map(|&i| grid.values[i].clone()).collect();
    let nu = Rational::from_f64(instance.nu);
    let profile = instance.demand.exact();
    let d = if with_return {
        canonical_return_departures_with(profile, &nu, &Rational::from_f64(instance.pi), instance.shuttles, &y)
    } else {
        crate::schedule::canonical_departures_with(profile, &nu, &y)
    };
    ExactSchedule { d, y }
}

/// Best no-return schedule whose `S` cumulative loads lie on the grid
/// `{k D(T)/grid}` (plus the step-graph loads for step demand).
pub fn brute_noreturn(instance: &Instance, grid: usize, objective: Objective) -> Result<SolveReport> {
    let started = Instant::now();
    if !instance.fleet_covers_demand() {
        return Err(Error::Infeasible("C*S < D(T)".into()));
    }
    let g = load_grid(instance, grid)?;
    let mut search = Search {
        grid: &g,
        cap: Rational::from_f64(instance.capacity),
        nu: Rational::from_f64(instance.nu),
        pi: None,
        objective,
        depth: instance.shuttles,
        strict: false,
        nodes: 0,
        path: Vec::new(),
        best: None,
    };
    search.run(0, None, Rational::zero())?;
    let nodes = search.nodes;
    let (acc, path) = search
        .best
        .ok_or_else(|| Error::Infeasible("no grid schedule serves everyone".into()))?;
    let value = match objective {
        Objective::Max => acc,
        Objective::Ave => acc / instance.demand.exact().total().clone(),
    };
    let schedule = departures(instance, &g, &path, false);
    Ok(report("oracle_noreturn", instance, value, schedule, nodes, started))
}

/// Best single-shuttle schedule with returns for the maximum waiting time,
/// over strictly increasing grid loads and up to the departure-count bound
/// of optimal schedules.
pub fn brute_return_max(instance: &Instance, grid: usize) -> Result<SolveReport> {
    let started = Instant::now();
    if instance.shuttles != 1 {
        return Err(Error::Unsupported("the return oracle enumerates a single shuttle only".into()));
    }
    if instance.pi <= 0.0 {
        return precondition("the return oracle needs pi > 0");
    }
    let g = load_grid(instance, grid)?;
    let depth = departure_bound(instance).floor().max(1.0) as usize;
    let mut search = Search {
        grid: &g,
        cap: Rational::from_f64(instance.capacity),
        nu: Rational::from_f64(instance.nu),
        pi: Some(Rational::from_f64(instance.pi)),
        objective: Objective::Max,
        depth,
        strict: true,
        nodes: 0,
        path: Vec::new(),
        best: None,
    };
    search.run(0, None, Rational::zero())?;
    let nodes = search.nodes;
    let (value, path) = search
        .best
        .ok_or_else(|| Error::Infeasible("no grid schedule within the departure bound".into()))?;
    let schedule = departures(instance, &g, &path, true);
    Ok(report("oracle_return_max", instance, value, schedule, nodes, started))
}

/// Optimal single-shuttle trips for `share` users present at time 0:
/// minimizes `sum (j-1) pi x_j + nu/2 sum x_j^2` over `0 <= x_j <= C`,
/// `sum x_j = share`. The minimizer is `x_j = clamp((lambda - (j-1) pi)/nu, 0, C)`
/// for the multiplier `lambda` that makes the loads add up.
pub fn water_fill(share: f64, cap: f64, nu: f64, pi: f64) -> Vec<f64> {
    if share <= 0.0 {
        return Vec::new();
    }
    if nu == 0.0 {
        let n = (share / cap).ceil() as usize;
        return (0..n).map(|j| (share - j as f64 * cap).min(cap)).collect();
    }
    let loads = |lambda: f64| -> Vec<f64> {
        let mut x = Vec::new();
        let mut j = 0usize;
        loop {
            let v = ((lambda - j as f64 * pi) / nu).clamp(0.0, cap);
            if v <= 0.0 {
                break;
            }
            x.push(v);
            j += 1;
        }
        x
    };
    let sum = |lambda: f64| loads(lambda).iter().sum::<f64>();
    let (mut lo, mut hi) = (0.0_f64, nu * cap + pi);
    while sum(hi) < share {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sum(mid) < share {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = loads(hi);
    // absorb the bisection residue into the last loads below capacity
    let mut excess = x.iter().sum::<f64>() - share;
    for v in x.iter_mut().rev() {
        let take = excess.min(*v);
        *v -= take;
        excess -= take;
    }
    while x.last() == Some(&0.0) {
        x.pop();
    }
    x
}

fn shuttle_cost(share: f64, cap: f64, nu: f64, pi: f64) -> f64 {
    let x = water_fill(share, cap, nu, pi);
    let lin: f64 = x.iter().enumerate().map(|(j, v)| j as f64 * pi * v).sum();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    lin + 0.5 * nu * (sq + share * share)
}

/// Average waiting time with returns under constant demand, for one or two
/// shuttles. With two shuttles the demand split is found by ternary search
/// on the convex total cost; the loads of each shuttle come from
/// [`water_fill`]. The value is the exact objective of the resulting
/// schedule with earliest departures.
pub fn brute_return_ave_constant(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    if instance.demand.kind() != CurveKind::Constant {
        return precondition("the water-filling oracle needs constant demand");
    }
    if instance.pi <= 0.0 {
        return precondition("the water-filling oracle needs pi > 0");
    }
    let (d, c, nu, pi) = (instance.total_demand(), instance.capacity, instance.nu, instance.pi);
    let shares = match instance.shuttles {
        1 => vec![d],
        2 => {
            let cost = |a: f64| shuttle_cost(a, c, nu, pi) + shuttle_cost(d - a, c, nu, pi);
            let (mut lo, mut hi) = (0.0, d);
            for _ in 0..300 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if cost(m1) <= cost(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let a = 0.5 * (lo + hi);
            // snap to the symmetric split when it is as good
            let a = if (cost(d / 2.0) - cost(a)).abs() <= 1e-12 { d / 2.0 } else { a };
            vec![a, d - a]
        }
        s => return Err(Error::Unsupported(format!("the water-filling oracle handles S <= 2, got {s}"))),
    };
    let trips: Vec<Vec<f64>> = shares.iter().map(|&sh| water_fill(sh, c, nu, pi)).collect();
    let rounds = trips.iter().map(Vec::len).max().unwrap_or(0);
    let mut y = Vec::new();
    let mut acc = Rational::zero();
    for i in 0..rounds {
        for t in &trips {
            acc += Rational::from_f64(t.get(i).copied().unwrap_or(0.0));
            y.push(acc.clone());
        }
    }
    // the float loads may miss D(T) by rounding; the last nonempty trip absorbs it
    let total = instance.demand.exact().total().clone();
    let fix = total.clone() - acc;
    if let Some(pos) = (0..y.len()).rev().find(|&k| k == 0 || y[k] > y[k - 1]) {
        for v in y.iter_mut().skip(pos) {
            *v += fix.clone();
        }
    }
    let profile = instance.demand.exact();
    let d_exact = canonical_return_departures_with(profile, &Rational::from_f64(nu), &Rational::from_f64(pi), instance.shuttles, &y);
    let value = gave_with(profile, &d_exact, &y);
    Ok(report(
        "oracle_return_ave_constant",
        instance,
        value,
        ExactSchedule { d: d_exact, y },
        rounds as u64,
        started,
    ))
}
