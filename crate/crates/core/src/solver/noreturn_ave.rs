//! Average waiting time without returns: shortest paths in a discretized
//! state graph.
//!
//! Loads are rounded down to the grid `eta = C/M`. A vertex `(z, r)` records
//! the rounded cumulative load `r` after a departure together with the
//! rounded load `z` of that departure, both as multiples of `eta`. Arc weights
//! underestimate the waiting time of the users carried by the departure, so
//! the lightest path with at most `S` arcs from `(0, 0)` to the last row
//! gives a lower bound. Inflating its departure times by `j*gamma*eta`
//! yields a feasible schedule whose value exceeds the bound by at most
//! `B(M) = O(S^2 / M)`.
//!
//! The weight of an arc only depends on its source row `r` and its new load
//! `z'`, and the admissible predecessors of `(z', r + z')` in row `r` are
//! exactly those with `z` below a threshold. Each DP layer therefore reduces
//! to prefix minima along the rows, in `O(M R)` time.

use std::time::Instant;

use num_traits::Zero;

use super::{finish, require_fleet};
use crate::demand::DemandCurve;
use crate::error::{domain, precondition, Error, Result};
use crate::report::{SolveReport, SolveStats};
use crate::scalar::{floor_nonneg, max_of, min_of, Rational, Scalar};
use crate::schedule::{canonical_departures_with, ExactSchedule, Instance, Schedule};

/// Slack added to the float admissibility test.
const ADMISSIBILITY_SLACK: f64 = 1e-12;

/// Refuse graphs whose DP tables would exceed this many bytes.
const MEMORY_BUDGET: f64 = 3.0e9;

/// `int_y^{y2} (d - bar_tau(u)) du`, evaluated exactly.
pub fn f_ave(curve: &DemandCurve, d: f64, y: f64, y2: f64) -> Result<f64> {
    if y > y2 {
        return domain(format!("f_ave needs y <= y2, got {y} > {y2}"));
    }
    if y < 0.0 {
        return domain(format!("f_ave load {y} is negative"));
    }
    let (d, a, b) = (Rational::from_f64(d), Rational::from_f64(y), Rational::from_f64(y2));
    Ok(f_ave_exact(curve, &d, &a, &b).to_f64())
}

fn f_ave_exact(curve: &DemandCurve, d: &Rational, y: &Rational, y2: &Rational) -> Rational {
    d.clone() * (y2.clone() - y.clone()) - curve.exact().integrate_bar_tau(y, y2)
}

/// `gamma = 2 (1/alpha + 2 nu)`.
pub fn gamma(alpha: f64, nu: f64) -> f64 {
    2.0 * (1.0 / alpha + 2.0 * nu)
}

/// A priori bound on `UB - LB`:
/// `((T + nu C)/D + gamma (S+1)) eta + gamma (S+1)^2 eta^2 / D`.
pub fn gap_bound(instance: &Instance, m: usize) -> f64 {
    let d = instance.total_demand();
    let eta = instance.capacity / m as f64;
    let g = gamma(instance.demand.min_slope(), instance.nu);
    let s1 = instance.shuttles as f64 + 1.0;
    ((instance.horizon() + instance.nu * instance.capacity) / d + g * s1) * eta + g * s1 * s1 * eta * eta / d
}

/// The discretized graph in index units: vertex `(iz, ir)` stands for
/// `(iz * eta, ir * eta)`; `(0, 0)` is the start vertex.
#[derive(Debug, Clone)]
pub struct AveGraph {
    pub m: usize,
    /// `R = floor(D(T) M / C)`, the index of the target row.
    pub rows: usize,
    pub eta: f64,
    pub alpha: f64,
    pub gamma: f64,
    width: usize,
    /// Weight of any arc from row `ir` with new load `iz'`, at `ir * width + iz'`.
    weight: Vec<f64>,
    /// Largest admissible predecessor load index for the same key.
    zmax: Vec<u16>,
}

impl AveGraph {
    pub fn build(instance: &Instance, m: usize) -> Result<AveGraph> {
        if m == 0 {
            return domain("M must be at least 1");
        }
        if m >= u16::MAX as usize {
            return domain(format!("M = {m} is too large"));
        }
        let curve = &instance.demand;
        let alpha_exact = curve.exact().min_slope();
        if alpha_exact <= Rational::zero() {
            return precondition("the demand must increase with a positive minimum slope");
        }
        let total = curve.exact().total();
        let cap = Rational::from_f64(instance.capacity);
        let eta_exact = cap.clone() / Rational::from_usize(m);
        if eta_exact >= *total {
            return precondition(format!("eta = C/M must be below D(T); increase M above {m}"));
        }
        let rows = floor_nonneg(&(total.clone() / eta_exact)) as usize;
        let width = m + 1;
        let layers = instance.shuttles.min(rows);
        let cells = (rows + 1) * width;
        let bytes = layers as f64 * cells as f64 * 2.0 + cells as f64 * 30.0;
        if bytes > MEMORY_BUDGET {
            return Err(Error::Resource(format!("graph with M = {m} needs about {:.1} GB", bytes / 1e9)));
        }

        let profile = curve.float();
        let eta = instance.capacity / m as f64;
        let alpha = alpha_exact.to_f64();
        let gamma = gamma(alpha, instance.nu);
        let nu = instance.nu;
        // bar_tau and its running integral sampled on the grid rows 0..=R+1
        let grid: Vec<f64> = (0..=rows + 1).map(|i| i as f64 * eta).collect();
        let bt: Vec<f64> = grid.iter().map(|y| profile.bar_tau(y)).collect();
        let mut integral = vec![0.0; grid.len()];
        for i in 1..grid.len() {
            integral[i] = integral[i - 1] + profile.integrate_bar_tau(&grid[i - 1], &grid[i]);
        }

        let mut weight = vec![f64::INFINITY; cells];
        let mut zmax = vec![0u16; cells];
        for ir in 0..rows {
            for izp in 1..=m.min(rows - ir) {
                let irp = ir + izp;
                let zp = izp as f64 * eta;
                let dep = bt[irp] + nu * (zp - eta);
                let key = ir * width + izp;
                weight[key] = dep * (zp - eta) - (integral[irp] - integral[ir + 1]);
                if ir == 0 {
                    continue;
                }
                let rhs = bt[irp] - bt[ir] + nu * zp + 0.5 * gamma * eta + ADMISSIBILITY_SLACK;
                zmax[key] = if nu == 0.0 {
                    m as u16
                } else {
                    let fits = |iz: usize| nu * (iz as f64 * eta) <= rhs;
                    let mut z = ((rhs / (nu * eta)).floor().clamp(1.0, m as f64)) as usize;
                    while z < m && fits(z + 1) {
                        z += 1;
                    }
                    while z > 1 && !fits(z) {
                        z -= 1;
                    }
                    z as u16
                };
            }
        }
        Ok(AveGraph {
            m,
            rows,
            eta,
            alpha,
            gamma,
            width,
            weight,
            zmax,
        })
    }

    pub fn vertex_count(&self) -> u64 {
        1 + (self.m * self.rows) as u64
    }

    /// Number of arcs, counting every vertex of the product grid.
    pub fn arc_count(&self) -> u64 {
        let mut n = 0u64;
        for ir in 0..self.rows {
            for izp in 1..=self.m.min(self.rows - ir) {
                n += if ir == 0 { 1 } else { self.zmax[ir * self.width + izp] as u64 };
            }
        }
        n
    }

    /// Every arc as `((iz, ir), (iz', ir'), weight)`.
    pub fn arcs(&self) -> impl Iterator<Item = ((usize, usize), (usize, usize), f64)> + '_ {
        (0..self.rows).flat_map(move |ir| {
            (1..=self.m.min(self.rows - ir)).flat_map(move |izp| {
                let key = ir * self.width + izp;
                let (lo, hi) = if ir == 0 { (0, 0) } else { (1, self.zmax[key] as usize) };
                (lo..=hi).map(move |iz| ((iz, ir), (izp, ir + izp), self.weight[key]))
            })
        })
    }

    /// Lightest path with at most `max_arcs` arcs from the start to the last
    /// row. Ties go to the smaller final load, then to fewer arcs. Returns the
    /// float weight and the vertices after the start.
    pub fn shortest_path(&self, max_arcs: usize) -> Option<(f64, Vec<(usize, usize)>)> {
        let (w, m, rows) = (self.width, self.m, self.rows);
        let cells = (rows + 1) * w;
        let mut cur = vec![f64::INFINITY; cells];
        cur[0] = 0.0;
        let mut pm_val = vec![f64::INFINITY; cells];
        let mut pm_arg = vec![0u16; cells];
        let mut preds: Vec<Vec<u16>> = Vec::new();
        let mut best: Option<(f64, usize, usize)> = None;
        for k in 1..=max_arcs.min(rows) {
            for ir in 0..rows {
                let row = ir * w;
                let (mut v, mut a) = (f64::INFINITY, 0u16);
                for iz in 0..=m {
                    if cur[row + iz] < v {
                        v = cur[row + iz];
                        a = iz as u16;
                    }
                    pm_val[row + iz] = v;
                    pm_arg[row + iz] = a;
                }
            }
            let mut next = vec![f64::INFINITY; cells];
            let mut pred = vec![0u16; cells];
            let mut any = false;
            for ir in 0..rows {
                let row = ir * w;
                for izp in 1..=m.min(rows - ir) {
                    let key = row + izp;
                    let zm = self.zmax[key] as usize;
                    let v = pm_val[row + zm];
                    if v.is_finite() {
                        let target = (ir + izp) * w + izp;
                        next[target] = v + self.weight[key];
                        pred[target] = pm_arg[row + zm];
                        any = true;
                    }
                }
            }
            for iz in 1..=m {
                let v = next[rows * w + iz];
                if v.is_finite() {
                    let cand = (v, iz, k);
                    let better = match best {
                        None => true,
                        Some(b) => cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2) < (b.1, b.2)),
                    };
                    if better {
                        best = Some(cand);
                    }
                }
            }
            preds.push(pred);
            if !any {
                break;
            }
            cur = next;
        }
        let (value, mut iz, k) = best?;
        let mut ir = rows;
        let mut path = Vec::with_capacity(k);
        for layer in (0..k).rev() {
            path.push((iz, ir));
            let piz = preds[layer][ir * w + iz] as usize;
            ir -= iz;
            iz = piz;
        }
        debug_assert_eq!((iz, ir), (0, 0));
        path.reverse();
        Some((value, path))
    }
}

/// Schedule built from a path, in exact arithmetic. `path` lists the
/// `(iz, ir)` vertices after the start.
pub fn reconstruct(instance: &Instance, m: usize, path: &[(usize, usize)]) -> ExactSchedule {
    let profile = instance.demand.exact();
    let total = profile.total().clone();
    let horizon = profile.horizon().clone();
    let cap = Rational::from_f64(instance.capacity);
    let nu = Rational::from_f64(instance.nu);
    let eta = cap.clone() / Rational::from_usize(m);
    let alpha = profile.min_slope();
    let two = Rational::from_usize(2);
    let gamma = two.clone() * (alpha.recip() + two * nu.clone());
    let n = path.len();
    let mut y: Vec<Rational> = Vec::with_capacity(instance.shuttles);
    let mut d: Vec<Rational> = Vec::with_capacity(instance.shuttles);
    let mut prev = Rational::zero();
    for (j, &(_, ir)) in path.iter().enumerate() {
        let r = eta.clone() * Rational::from_usize(ir);
        let yj = min_of(min_of(r + eta.clone(), prev.clone() + cap.clone()), total.clone());
        let dj =
            profile.bar_tau(&yj) + nu.clone() * (yj.clone() - prev.clone()) + Rational::from_usize(j + 1) * gamma.clone() * eta.clone();
        y.push(yj.clone());
        d.push(dj);
        prev = yj;
    }
    if n < instance.shuttles {
        let last_d = d.last().cloned().unwrap_or_else(Rational::zero);
        let tail_d = max_of(last_d, horizon + nu * (total.clone() - prev));
        for _ in n..instance.shuttles {
            y.push(total.clone());
            d.push(tail_d.clone());
        }
    }
    ExactSchedule { d, y }
}

/// Exact total weight of a path.
pub fn path_weight(instance: &Instance, m: usize, path: &[(usize, usize)]) -> Rational {
    let curve = &instance.demand;
    let nu = Rational::from_f64(instance.nu);
    let eta = Rational::from_f64(instance.capacity) / Rational::from_usize(m);
    let mut prev_ir = 0usize;
    let mut sum = Rational::zero();
    for &(iz, ir) in path {
        let r = eta.clone() * Rational::from_usize(ir);
        let z = eta.clone() * Rational::from_usize(iz);
        let start = eta.clone() * Rational::from_usize(prev_ir + 1);
        let dep = curve.exact().bar_tau(&r) + nu.clone() * (z - eta.clone());
        sum += f_ave_exact(curve, &dep, &start, &r);
        prev_ir = ir;
    }
    sum
}

/// Solves and also returns the path, for inspection.
pub fn solve_with_path(instance: &Instance, m: usize) -> Result<(SolveReport, Vec<(usize, usize)>)> {
    let started = Instant::now();
    let graph = AveGraph::build(instance, m)?;
    require_fleet(instance)?;
    let (_, path) = graph
        .shortest_path(instance.shuttles)
        .ok_or_else(|| Error::Infeasible("no path reaches the last row".into()))?;
    let lb = path_weight(instance, m, &path) / instance.demand.exact().total().clone();
    let raw = reconstruct(instance, m, &path);
    // Earliest departures for the same loads sit at or before the raw ones.
    let nu = Rational::from_f64(instance.nu);
    let d = canonical_departures_with(instance.demand.exact(), &nu, &raw.y);
    let schedule: Schedule = ExactSchedule { d, y: raw.y }.to_float();
    let stats = SolveStats {
        iterations: Some(path.len() as u64),
        vertices: Some(graph.vertex_count()),
        arcs: Some(graph.arc_count()),
        m: Some(m),
        gap_bound: Some(gap_bound(instance, m)),
        ..Default::default()
    };
    let report = finish("noreturn_ave_graph", instance, schedule, lb.to_f64(), None, stats, started);
    Ok((report, path))
}

pub fn solve(instance: &Instance, m: usize) -> Result<SolveReport> {
    solve_with_path(instance, m).map(|(r, _)| r)
}
