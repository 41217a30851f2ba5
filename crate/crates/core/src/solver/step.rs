//! Exact solver for step demand when boarding takes no time.
//!
//! Users arrive in `K` batches. Some optimal schedule only uses cumulative
//! loads of the form `D(t_k) + C q` or `C q`, and with `nu = 0` each departure leaves
//! at `bar_tau(y_j)`. Both objectives then become path problems with exactly
//! `S` arcs over these load values: a bottleneck path for the maximum
//! waiting time and a shortest path for the average.

use std::time::Instant;

use num_traits::Zero;

use super::{finish, require_fleet};
use crate::demand::CurveKind;
use crate::error::{precondition, Result};
use crate::report::{SolveReport, SolveStats};
use crate::scalar::{floor_nonneg, max_of, Rational, Scalar};
use crate::schedule::{ExactSchedule, Instance};

/// Candidate cumulative loads `{C q} ∪ {D(t_k) + C q}` up to `D(T)`, sorted.
/// The multiples of `C` are needed when a batch larger than `C` is split
/// over several departures before any earlier level.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraph {
    pub vertices: Vec<Rational>,
    /// `Q = floor(D(T) / C)`.
    pub q_max: u64,
    capacity: Rational,
}

impl StepGraph {
    pub fn build(instance: &Instance) -> Result<StepGraph> {
        if instance.demand.kind() != CurveKind::Step {
            return precondition("this solver requires step demand");
        }
        let profile = instance.demand.exact();
        let total = profile.total().clone();
        let capacity = Rational::from_f64(instance.capacity);
        let q_max = floor_nonneg(&(total.clone() / capacity.clone()));
        let mut vertices = vec![Rational::zero()];
        let mut levels: Vec<Rational> = profile.points().iter().map(|p| p.1.clone()).collect();
        levels.dedup();
        for base in &levels {
            let mut v = base.clone();
            for _ in 0..=q_max {
                if v > total {
                    break;
                }
                vertices.push(v.clone());
                v += capacity.clone();
            }
        }
        vertices.sort();
        vertices.dedup();
        Ok(StepGraph { vertices, q_max, capacity })
    }

    /// For each vertex, the index of the first vertex within capacity below it.
    fn window_starts(&self) -> Vec<usize> {
        let v = &self.vertices;
        let mut lo = 0;
        (0..v.len())
            .map(|i| {
                while v[i].clone() - v[lo].clone() > self.capacity {
                    lo += 1;
                }
                lo
            })
            .collect()
    }

    pub fn arc_count(&self) -> u64 {
        self.window_starts().iter().enumerate().map(|(i, &lo)| (i - lo + 1) as u64).sum()
    }
}

fn check(instance: &Instance) -> Result<StepGraph> {
    let graph = StepGraph::build(instance)?;
    if instance.nu != 0.0 {
        return precondition("the step-demand solver requires nu = 0");
    }
    require_fleet(instance)?;
    Ok(graph)
}

/// DP over exactly `S` arcs. `combine(label, u, v)` extends the label of `u`
/// along arc `(u, v)`; ties keep the smallest predecessor.
fn layered_dp(graph: &StepGraph, s: usize, combine: impl Fn(&Rational, usize, usize) -> Rational) -> (Rational, Vec<usize>) {
    let n = graph.vertices.len();
    let starts = graph.window_starts();
    let mut cur: Vec<Option<Rational>> = vec![None; n];
    cur[0] = Some(Rational::zero());
    let mut preds: Vec<Vec<usize>> = Vec::with_capacity(s);
    for _ in 0..s {
        let mut next: Vec<Option<Rational>> = vec![None; n];
        let mut pred = vec![usize::MAX; n];
        for v in 0..n {
            for (u, slot) in cur.iter().enumerate().take(v + 1).skip(starts[v]) {
                if let Some(label) = slot {
                    let cand = combine(label, u, v);
                    if next[v].as_ref().is_none_or(|b| cand < *b) {
                        next[v] = Some(cand);
                        pred[v] = u;
                    }
                }
            }
        }
        preds.push(pred);
        cur = next;
    }
    let last = n - 1;
    let value = cur[last].clone().expect("C*S >= D(T) guarantees a path");
    let mut path = vec![last; s];
    let mut v = last;
    for k in (0..s).rev() {
        path[k] = v;
        v = preds[k][v];
    }
    (value, path)
}

fn schedule_from_path(instance: &Instance, graph: &StepGraph, path: &[usize]) -> ExactSchedule {
    let profile = instance.demand.exact();
    let y: Vec<Rational> = path.iter().map(|&i| graph.vertices[i].clone()).collect();
    let d = y.iter().map(|v| profile.bar_tau(v)).collect();
    ExactSchedule { d, y }
}

fn stats(graph: &StepGraph) -> SolveStats {
    SolveStats {
        vertices: Some(graph.vertices.len() as u64),
        arcs: Some(graph.arc_count()),
        ..Default::default()
    }
}

/// Exact minimum of the maximum waiting time.
pub fn solve_max(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    let graph = check(instance)?;
    let profile = instance.demand.exact();
    let bar: Vec<Rational> = graph.vertices.iter().map(|v| profile.bar_tau(v)).collect();
    let tau: Vec<Rational> = graph.vertices.iter().map(|v| profile.tau(v)).collect();
    let (value, path) = layered_dp(&graph, instance.shuttles, |label, u, v| {
        max_of(label.clone(), bar[v].clone() - tau[u].clone())
    });
    let schedule = schedule_from_path(instance, &graph, &path).to_float();
    Ok(finish(
        "step_exact_max",
        instance,
        schedule,
        value.to_f64(),
        Some(value),
        stats(&graph),
        started,
    ))
}

/// Exact minimum of the average waiting time.
pub fn solve_ave(instance: &Instance) -> Result<SolveReport> {
    let started = Instant::now();
    let graph = check(instance)?;
    let profile = instance.demand.exact();
    let zero = Rational::zero();
    let bar: Vec<Rational> = graph.vertices.iter().map(|v| profile.bar_tau(v)).collect();
    let integral: Vec<Rational> = graph.vertices.iter().map(|v| profile.integrate_bar_tau(&zero, v)).collect();
    let (sum, path) = layered_dp(&graph, instance.shuttles, |label, u, v| {
        let x = graph.vertices[v].clone() - graph.vertices[u].clone();
        label.clone() + bar[v].clone() * x - (integral[v].clone() - integral[u].clone())
    });
    let value = sum / profile.total().clone();
    let schedule = schedule_from_path(instance, &graph, &path).to_float();
    Ok(finish(
        "step_exact_ave",
        instance,
        schedule,
        value.to_f64(),
        Some(value),
        stats(&graph),
        started,
    ))
}
