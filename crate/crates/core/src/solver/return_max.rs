//! Maximum waiting time when shuttles come back after each trip.
//!
//! The fleet is followed round by round. A vertex `(z, q, r)` of the state
//! graph describes one round: `r_k` is the rounded cumulative load after the
//! departure of shuttle `k`, `q_k` the rounded time at which that shuttle
//! starts loading, and `z` the load of the round's first departure. All three
//! are multiples of `eta = C/M` (times of the grid step in minutes). An arc
//! links consecutive rounds when every shuttle had time to come back, and is
//! weighted by a lower estimate of the worst wait in the new round. The
//! lightest bottleneck path to the last load row is a lower bound on the
//! optimum, and inflating its departures yields a feasible schedule.
//!
//! The state space grows like `M^(3S)`, so the solver refuses fleets larger
//! than two unless forced. With a single shuttle the vertices are swept in
//! order of increasing load with prefix minima over loading start times, which
//! keeps the work at `O(M^2 Q R)` and the memory at one predecessor per vertex.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use num_traits::Zero;

use super::finish;
use crate::demand::DemandCurve;
use crate::error::{domain, precondition, Error, Result};
use crate::report::{SolveReport, SolveStats};
use crate::scalar::{ceil_nonneg, floor_nonneg, max_of, min_of, Rational, Scalar};
use crate::schedule::{canonical_return_departures_with, ExactSchedule, Instance};

const INDEX_SLACK: f64 = 1e-9;
const MEMORY_BUDGET: f64 = 3.0e9;
const MAX_STATES: usize = 20_000_000;
const START: u32 = u32::MAX;

/// `max(l, bar_tau(y2)) + nu (y2 - y) - tau(y)` for `y2 >= y`. At equality the
/// user ranked `y` still rides, so the formula applies there too; it is 0
/// whenever `l <= tau(y)` on a strictly increasing curve. The graph also calls
/// the exact form with `y2 < y` for an empty leg, which weighs 0.
pub fn f_max(curve: &DemandCurve, nu: f64, l: f64, y: f64, y2: f64) -> Result<f64> {
    if y2 < y {
        return domain(format!("f_max needs y <= y2, got {y} > {y2}"));
    }
    if y < 0.0 || y > curve.total() {
        return domain(format!("f_max load {y} outside [0, D(T)]"));
    }
    let (l, a, b, nu) = (
        Rational::from_f64(l),
        Rational::from_f64(y),
        Rational::from_f64(y2),
        Rational::from_f64(nu),
    );
    Ok(f_max_exact(curve, &nu, &l, &a, &b).to_f64())
}

fn f_max_exact(curve: &DemandCurve, nu: &Rational, l: &Rational, y: &Rational, y2: &Rational) -> Rational {
    if y2 < y {
        return Rational::zero();
    }
    let p = curve.exact();
    max_of(l.clone(), p.bar_tau(y2)) + nu.clone() * (y2.clone() - y.clone()) - p.tau(y)
}

/// `ceil(D(T) / (C S))`.
fn full_rounds(instance: &Instance) -> u64 {
    let total = instance.demand.exact().total().clone();
    let fleet = Rational::from_f64(instance.capacity) * Rational::from_usize(instance.shuttles);
    ceil_nonneg(&(total / fleet))
}

/// `T+ = T + nu D(T)/S + (ceil(D(T)/(CS)) - 1) pi`, a bound on when the last
/// loading starts in some optimal schedule.
pub fn t_plus(instance: &Instance) -> f64 {
    let s = instance.shuttles as f64;
    instance.horizon() + instance.nu * instance.total_demand() / s + (full_rounds(instance) - 1) as f64 * instance.pi
}

/// `(2 ceil(T/pi) + 1) S + (nu/pi + 1/C) D(T)`: no optimal schedule has more
/// nonempty departures.
pub fn departure_bound(instance: &Instance) -> f64 {
    let s = instance.shuttles as f64;
    let d = instance.total_demand();
    (2.0 * (instance.horizon() / instance.pi).ceil() + 1.0) * s + (instance.nu / instance.pi + 1.0 / instance.capacity) * d
}

/// One round of a path, in grid units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundState {
    pub z: usize,
    pub q: Vec<usize>,
    pub r: Vec<usize>,
}

/// Grid data shared by both path searches.
struct ReturnGrid {
    m: usize,
    s: usize,
    eta: f64,
    nu: f64,
    rows: usize,
    qmax: usize,
    /// Arc slack in grid units: `1 + nu - pi/eta`.
    shift: f64,
    bar_tau: Vec<f64>,
    tau: Vec<f64>,
    /// Smallest start index whose demand covers each row.
    qmin: Vec<usize>,
    /// Leg weights are raised to at least this value. A second search with
    /// the optimal bottleneck here ranks the optimal paths by end time.
    floor: f64,
}

impl ReturnGrid {
    fn build(instance: &Instance, m: usize) -> Result<ReturnGrid> {
        if m == 0 {
            return domain("M must be at least 1");
        }
        if instance.pi <= 0.0 {
            return precondition("the return graph needs a positive return time");
        }
        let profile = instance.demand.exact();
        if profile.min_slope() <= Rational::zero() {
            return precondition("the demand must increase with a positive minimum slope");
        }
        let total = profile.total().clone();
        let eta_exact = Rational::from_f64(instance.capacity) / Rational::from_usize(m);
        if eta_exact >= total {
            return precondition(format!("eta = C/M must be below D(T); increase M above {m}"));
        }
        let rows = floor_nonneg(&(total / eta_exact)) as usize;
        let eta = instance.capacity / m as f64;
        let qmax = (t_plus(instance) / eta).floor() as usize + 1;
        let float = instance.demand.float();
        let grid: Vec<f64> = (0..=rows + 1).map(|i| i as f64 * eta).collect();
        let bar_tau = grid.iter().map(|y| float.bar_tau(y)).collect();
        let tau = grid.iter().map(|y| float.tau(y)).collect();
        let mut qmin = vec![0usize; rows + 1];
        let mut iq = 0usize;
        for (ir, slot) in qmin.iter_mut().enumerate() {
            while iq < qmax && (ir as f64 * eta) > float.eval(&(iq as f64 * eta)) + INDEX_SLACK {
                iq += 1;
            }
            *slot = iq;
        }
        Ok(ReturnGrid {
            m,
            s: instance.shuttles,
            eta,
            nu: instance.nu,
            rows,
            qmax,
            shift: 1.0 + instance.nu - instance.pi / eta,
            bar_tau,
            tau,
            qmin,
            floor: 0.0,
        })
    }

    /// Lower estimate of the wait of a departure loading from `q` that takes
    /// the users of rows `(src, dst]`.
    fn leg_weight(&self, q: usize, src_row: usize, dst_row: usize) -> f64 {
        let from = src_row + 1;
        if dst_row < from {
            return self.floor;
        }
        let l = (q as f64 - 1.0) * self.eta;
        let w = l.max(self.bar_tau[dst_row]) + self.nu * (dst_row - from) as f64 * self.eta - self.tau[from];
        w.max(self.floor)
    }

    /// Order on complete paths: bottleneck, then (in the second search) the
    /// last start index, then rounds.
    fn ends_before(&self, a: &Label, qa: usize, b: &Label, qb: usize) -> bool {
        if !a.reached() {
            return false;
        }
        if self.floor > 0.0 && a.b == b.b && qa != qb {
            return qa < qb;
        }
        a.better(b)
    }

    fn state_weight(&self, z: usize, q: &[usize], r: &[usize]) -> f64 {
        let mut w = 0.0_f64;
        let mut prev = r[0] - z;
        for k in 0..q.len() {
            w = w.max(self.leg_weight(q[k], prev, r[k]));
            prev = r[k];
        }
        w
    }

    /// Whether a shuttle that started loading at `q_src` with load `z_src`
    /// can start again at `q_dst`.
    fn admits(&self, q_src: usize, z_src: usize, q_dst: usize) -> bool {
        q_src as f64 + self.nu * z_src as f64 - self.shift - INDEX_SLACK <= q_dst as f64
    }

    /// Largest admissible `q_src` for given `z_src` and `q_dst`, if any.
    fn latest_source(&self, z_src: usize, q_dst: usize) -> Option<usize> {
        let guess = (q_dst as f64 + self.shift - self.nu * z_src as f64).floor();
        let mut q = guess.clamp(-1.0, self.qmax as f64) as i64;
        while q < self.qmax as i64 && self.admits((q + 1) as usize, z_src, q_dst) {
            q += 1;
        }
        while q >= 0 && !self.admits(q as usize, z_src, q_dst) {
            q -= 1;
        }
        (q >= 0).then_some(q as usize)
    }

    /// Smallest admissible `q_dst` for given source.
    fn earliest_target(&self, q_src: usize, z_src: usize) -> usize {
        let guess = (q_src as f64 + self.nu * z_src as f64 - self.shift).ceil().max(0.0) as usize;
        let mut q = guess;
        while q > 0 && self.admits(q_src, z_src, q - 1) {
            q -= 1;
        }
        while !self.admits(q_src, z_src, q) {
            q += 1;
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    b: f64,
    rounds: u32,
}

impl Label {
    const NONE: Label = Label {
        b: f64::INFINITY,
        rounds: u32::MAX,
    };

    fn better(&self, other: &Label) -> bool {
        self.b < other.b || (self.b == other.b && self.rounds < other.rounds)
    }

    fn reached(&self) -> bool {
        self.b.is_finite()
    }
}

struct PathResult {
    bottleneck: f64,
    rounds: Vec<RoundState>,
    vertices: u64,
    arcs: u64,
}

/// Single-shuttle sweep. Rows are processed by increasing load; inside a row
/// the loaded states come first (their predecessors lie in earlier rows),
/// then the empty ones by increasing start time.
fn single_shuttle_sweep(g: &ReturnGrid) -> Result<PathResult> {
    let (m, rows) = (g.m, g.rows);
    let qn = g.qmax + 1;
    let win = m + 1;
    let plane = (m + 1) * qn;
    let bytes = (rows + 1) as f64 * plane as f64 * 4.0 + win as f64 * plane as f64 * 24.0;
    if bytes > MEMORY_BUDGET {
        return Err(Error::Resource(format!(
            "return graph with M = {m} needs about {:.1} GB",
            bytes / 1e9
        )));
    }
    if g.shift - INDEX_SLACK >= 0.0 {
        return Err(Error::Precondition("single-shuttle sweep needs pi > (1 + nu) eta".into()));
    }
    // prefix minima over q per (row slot, z): label and arg q
    let mut pre = vec![(Label::NONE, 0u32); win * plane];
    let mut pre_count = vec![0u32; win * plane];
    let mut pred = vec![START; (rows + 1) * plane];
    let mut row_lab = vec![Label::NONE; plane];
    let mut best: Option<(Label, usize, usize)> = None;
    let mut vertices = 1u64;
    let mut arcs = 0u64;

    let lookup = |pre: &[(Label, u32)], pre_count: &[u32], slot: usize, z_lo: usize, q_dst: usize, arcs: &mut u64| {
        let mut cand = (Label::NONE, START);
        for iz in z_lo..=m {
            if let Some(lim) = g.latest_source(iz, q_dst) {
                let at = slot * plane + iz * qn + lim;
                *arcs += pre_count[at] as u64;
                let (lab, arg) = pre[at];
                if lab.better(&cand.0) {
                    cand = (lab, (iz * qn) as u32 + arg);
                }
            }
        }
        cand
    };

    for ir in 1..=rows {
        let slot = ir % win;
        row_lab.fill(Label::NONE);
        let qlo = g.qmin[ir];
        for iz in 1..=m.min(ir) {
            let src = ir - iz;
            for iq in qlo..=g.qmax {
                vertices += 1;
                let (cand, from) = if src == 0 {
                    arcs += 1;
                    (Label { b: 0.0, rounds: 0 }, START)
                } else {
                    lookup(&pre, &pre_count, src % win, 0, iq, &mut arcs)
                };
                if cand.reached() {
                    let w = g.leg_weight(iq, src, ir);
                    row_lab[iz * qn + iq] = Label {
                        b: cand.b.max(w),
                        rounds: cand.rounds + 1,
                    };
                    pred[ir * plane + iz * qn + iq] = from;
                }
            }
        }
        // prefix minima of the loaded states of this row
        for iz in 1..=m {
            let mut acc = (Label::NONE, 0u32);
            let mut count = 0u32;
            for iq in 0..qn {
                let lab = row_lab[iz * qn + iq];
                if iz <= ir && iq >= qlo {
                    count += 1;
                }
                if lab.better(&acc.0) {
                    acc = (lab, iq as u32);
                }
                pre[slot * plane + iz * qn + iq] = acc;
                pre_count[slot * plane + iz * qn + iq] = count;
            }
        }
        // empty departures stay in this row
        let mut acc = (Label::NONE, 0u32);
        let mut count = 0u32;
        for iq in 0..qn {
            if iq >= qlo {
                vertices += 1;
                let (cand, from) = lookup(&pre, &pre_count, slot, 0, iq, &mut arcs);
                if cand.reached() {
                    row_lab[iq] = Label {
                        b: cand.b,
                        rounds: cand.rounds + 1,
                    };
                    pred[ir * plane + iq] = from;
                }
                count += 1;
            }
            let lab = row_lab[iq];
            if lab.better(&acc.0) {
                acc = (lab, iq as u32);
            }
            pre[slot * plane + iq] = acc;
            pre_count[slot * plane + iq] = count;
        }
        if ir == rows {
            for iz in 0..=m {
                for iq in 0..qn {
                    let lab = row_lab[iz * qn + iq];
                    let wins = match best {
                        None => lab.reached(),
                        Some((b, _, bq)) => g.ends_before(&lab, iq, &b, bq),
                    };
                    if wins {
                        best = Some((lab, iz, iq));
                    }
                }
            }
        }
    }
    let (lab, mut iz, mut iq) = best.ok_or_else(|| Error::Infeasible("no path reaches the last row".into()))?;
    let mut ir = rows;
    let mut path = Vec::new();
    loop {
        path.push(RoundState {
            z: iz,
            q: vec![iq],
            r: vec![ir],
        });
        let p = pred[ir * plane + iz * qn + iq];
        if p == START {
            break;
        }
        ir -= iz;
        iz = p as usize / qn;
        iq = p as usize % qn;
    }
    path.reverse();
    Ok(PathResult {
        bottleneck: lab.b,
        rounds: path,
        vertices,
        arcs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    b: f64,
    rounds: u32,
    node: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .b
            .total_cmp(&self.b)
            .then(other.rounds.cmp(&self.rounds))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Calls `emit(state)` for every successor of `state` (layout `[z, q.., r..]`).
fn successors(g: &ReturnGrid, state: &[u32], is_start: bool, emit: &mut dyn FnMut(&[u32])) {
    let s = g.s;
    let lowq: Vec<usize> = if is_start {
        vec![0; s]
    } else {
        let z = state[0] as usize;
        let (q, r) = (&state[1..=s], &state[s + 1..]);
        (0..s)
            .map(|k| {
                let load = r[k] as usize - if k == 0 { r[0] as usize - z } else { r[k - 1] as usize };
                g.earliest_target(q[k] as usize, load)
            })
            .collect()
    };
    let r_last = state[2 * s] as usize;
    let mut buf = vec![0u32; 1 + 2 * s];
    for zp in 0..=g.m {
        let r1 = r_last + zp;
        if r1 > g.rows {
            break;
        }
        buf[0] = zp as u32;
        buf[s + 1] = r1 as u32;
        fill_r(g, &lowq, 1, &mut buf, emit);
    }
}

fn fill_r(g: &ReturnGrid, lowq: &[usize], k: usize, buf: &mut [u32], emit: &mut dyn FnMut(&[u32])) {
    let s = g.s;
    if k == s {
        if buf[2 * s] == 0 {
            return;
        }
        fill_q(g, lowq, 0, buf, emit);
        return;
    }
    let prev = buf[s + k] as usize;
    for r in prev..=(prev + g.m).min(g.rows) {
        buf[s + 1 + k] = r as u32;
        fill_r(g, lowq, k + 1, buf, emit);
    }
}

fn fill_q(g: &ReturnGrid, lowq: &[usize], k: usize, buf: &mut [u32], emit: &mut dyn FnMut(&[u32])) {
    let s = g.s;
    if k == s {
        emit(buf);
        return;
    }
    let mut lo = lowq[k].max(g.qmin[buf[s + 1 + k] as usize]);
    if k > 0 {
        lo = lo.max(buf[k] as usize);
    }
    for q in lo..=g.qmax {
        buf[1 + k] = q as u32;
        fill_q(g, lowq, k + 1, buf, emit);
    }
}

fn split_state(g: &ReturnGrid, st: &[u32]) -> RoundState {
    let s = g.s;
    RoundState {
        z: st[0] as usize,
        q: st[1..=s].iter().map(|&v| v as usize).collect(),
        r: st[s + 1..].iter().map(|&v| v as usize).collect(),
    }
}

/// Bottleneck Dijkstra over lazily generated states, for any fleet size.
fn bottleneck_search(g: &ReturnGrid) -> Result<PathResult> {
    let s = g.s;
    let start: Box<[u32]> = vec![0u32; 1 + 2 * s].into_boxed_slice();
    let mut states: Vec<Box<[u32]>> = vec![start.clone()];
    let mut labels: Vec<Label> = vec![Label { b: 0.0, rounds: 0 }];
    let mut preds: Vec<u32> = vec![START];
    let mut done: Vec<bool> = vec![false];
    let mut index: HashMap<Box<[u32]>, u32> = HashMap::new();
    index.insert(start, 0);
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem {
        b: 0.0,
        rounds: 0,
        node: 0,
    });
    let mut arcs = 0u64;
    let mut overflow = false;
    // the first search stops at the first final state; the second keeps
    // going through every state at the optimal bottleneck
    let mut finish: Option<(Label, usize, usize)> = None;
    let found = |finish: Option<(Label, usize, usize)>, states: &[Box<[u32]>], preds: &[u32], vertices: u64, arcs: u64| {
        let (lab, u, _) = finish.expect("a final state was recorded");
        let mut path = Vec::new();
        let mut v = u;
        while v != 0 {
            path.push(split_state(g, &states[v]));
            v = preds[v] as usize;
        }
        path.reverse();
        PathResult {
            bottleneck: lab.b,
            rounds: path,
            vertices,
            arcs,
        }
    };
    while let Some(item) = heap.pop() {
        let u = item.node as usize;
        if done[u] {
            continue;
        }
        if let Some((lab, _, _)) = finish {
            if item.b > lab.b {
                break;
            }
        }
        done[u] = true;
        let here = labels[u];
        if u != 0 && states[u][2 * s] as usize == g.rows {
            let q_end = states[u][1..=s].iter().copied().max().unwrap_or(0) as usize;
            let wins = match finish {
                None => true,
                Some((b, _, bq)) => g.ends_before(&here, q_end, &b, bq),
            };
            if wins {
                finish = Some((here, u, q_end));
            }
            if g.floor <= 0.0 {
                break;
            }
            continue;
        }
        let current = states[u].clone();
        successors(g, &current, u == 0, &mut |next| {
            arcs += 1;
            let st = split_state(g, next);
            let w = g.state_weight(st.z, &st.q, &st.r);
            let cand = Label {
                b: here.b.max(w),
                rounds: here.rounds + 1,
            };
            let id = match index.get(next) {
                Some(&id) => id as usize,
                None => {
                    if states.len() >= MAX_STATES {
                        overflow = true;
                        return;
                    }
                    let id = states.len();
                    states.push(next.into());
                    labels.push(Label::NONE);
                    preds.push(START);
                    done.push(false);
                    index.insert(next.into(), id as u32);
                    id
                }
            };
            if !done[id] && cand.better(&labels[id]) {
                labels[id] = cand;
                preds[id] = u as u32;
                heap.push(HeapItem {
                    b: cand.b,
                    rounds: cand.rounds,
                    node: id as u32,
                });
            }
        });
        if overflow {
            return Err(Error::Resource(format!("return graph exceeds {MAX_STATES} states")));
        }
    }
    if finish.is_none() {
        return Err(Error::Infeasible("no path reaches the last row".into()));
    }
    Ok(found(finish, &states, &preds, states.len() as u64, arcs))
}

/// Schedule read off a path, before the ordering repair: round `i`, shuttle
/// `k` gives departure `j = iS + k`, plus at most one trailing departure
/// carrying the users above the last grid row.
pub fn reconstruct_raw(instance: &Instance, m: usize, path: &[RoundState]) -> ExactSchedule {
    let s = instance.shuttles;
    let profile = instance.demand.exact();
    let total = profile.total().clone();
    let cap = Rational::from_f64(instance.capacity);
    let nu = Rational::from_f64(instance.nu);
    let pi = Rational::from_f64(instance.pi);
    let eta = cap.clone() / Rational::from_usize(m);
    let one = Rational::from_usize(1);
    let gamma = one + Rational::from_usize(2) * nu.clone() + profile.min_slope().recip();
    let mut y: Vec<Rational> = Vec::new();
    let mut d: Vec<Rational> = Vec::new();
    let mut prev_y = Rational::zero();
    let mut prev_r = 0usize;
    for st in path {
        for k in 0..s {
            let j = y.len() + 1;
            let yj = if st.r[k] > prev_r {
                let r = eta.clone() * Rational::from_usize(st.r[k]);
                min_of(min_of(r + eta.clone(), prev_y.clone() + cap.clone()), total.clone())
            } else {
                prev_y.clone()
            };
            let q = eta.clone() * Rational::from_usize(st.q[k]);
            let dj = max_of(q, profile.bar_tau(&yj))
                + Rational::from_usize(j) * gamma.clone() * eta.clone()
                + nu.clone() * (yj.clone() - prev_y.clone());
            y.push(yj.clone());
            d.push(dj);
            prev_y = yj;
            prev_r = st.r[k];
        }
    }
    if prev_y < total {
        let j = y.len() + 1;
        let back = if j > s { d[j - 1 - s].clone() + pi } else { Rational::zero() };
        d.push(max_of(back, profile.horizon().clone()) + nu * (total.clone() - prev_y));
        y.push(total);
    }
    ExactSchedule { d, y }
}

/// Forward pass enforcing ordering, readiness and shuttle availability:
/// `d_j = max(d_j, d_{j-1}, bar_tau(y_j) + nu x_j, d_{j-S} + pi + nu x_j)`.
pub fn repair(instance: &Instance, schedule: &mut ExactSchedule) -> bool {
    let s = instance.shuttles;
    let profile = instance.demand.exact();
    let nu = Rational::from_f64(instance.nu);
    let pi = Rational::from_f64(instance.pi);
    let mut changed = false;
    for i in 0..schedule.d.len() {
        let x = schedule.y[i].clone() - if i > 0 { schedule.y[i - 1].clone() } else { Rational::zero() };
        let mut need = profile.bar_tau(&schedule.y[i]) + nu.clone() * x.clone();
        if i > 0 {
            need = max_of(need, schedule.d[i - 1].clone());
        }
        if i >= s {
            need = max_of(need, schedule.d[i - s].clone() + pi.clone() + nu.clone() * x);
        }
        if need > schedule.d[i] {
            schedule.d[i] = need;
            changed = true;
        }
    }
    changed
}

/// Same loads at their earliest feasible departure times. The raw schedule is
/// feasible, so every earliest time is at or before the raw one and the
/// objective cannot grow. With one shuttle an empty departure only costs a
/// round trip, so those are dropped first.
pub fn retime(instance: &Instance, raw: &ExactSchedule) -> ExactSchedule {
    let mut y = raw.y.clone();
    if instance.shuttles == 1 {
        let mut last = Rational::zero();
        y.retain(|v| {
            let keep = *v > last;
            if keep {
                last = v.clone();
            }
            keep
        });
    }
    let nu = Rational::from_f64(instance.nu);
    let pi = Rational::from_f64(instance.pi);
    let d = canonical_return_departures_with(instance.demand.exact(), &nu, &pi, instance.shuttles, &y);
    ExactSchedule { d, y }
}

/// Exact bottleneck weight of a path.
pub fn path_bottleneck(instance: &Instance, m: usize, path: &[RoundState]) -> Rational {
    let nu = Rational::from_f64(instance.nu);
    let eta = Rational::from_f64(instance.capacity) / Rational::from_usize(m);
    let at = |i: usize| eta.clone() * Rational::from_usize(i);
    let mut b = Rational::zero();
    for st in path {
        let mut prev = st.r[0] - st.z;
        for k in 0..st.r.len() {
            let w = f_max_exact(&instance.demand, &nu, &(at(st.q[k]) - eta.clone()), &at(prev + 1), &at(st.r[k]));
            b = max_of(b, w);
            prev = st.r[k];
        }
    }
    b
}

fn search(instance: &Instance, m: usize, force: bool, generic: bool) -> Result<(ReturnGrid, PathResult)> {
    if instance.shuttles > 2 && !force {
        return precondition(format!(
            "S = {} > 2 makes the return graph impractically large; force to proceed",
            instance.shuttles
        ));
    }
    let mut grid = ReturnGrid::build(instance, m)?;
    let fast = instance.shuttles == 1 && !generic && grid.shift + INDEX_SLACK < 0.0;
    let run = |g: &ReturnGrid| if fast { single_shuttle_sweep(g) } else { bottleneck_search(g) };
    let first = run(&grid)?;
    // Many paths share the optimal bottleneck. The one reaching the last row
    // earliest lags least behind the demand and rebuilds into a tighter
    // schedule.
    grid.floor = first.bottleneck;
    let second = run(&grid)?;
    Ok((
        grid,
        PathResult {
            bottleneck: first.bottleneck,
            vertices: first.vertices + second.vertices,
            arcs: first.arcs + second.arcs,
            rounds: second.rounds,
        },
    ))
}

/// Solves and also returns the path, for inspection. `generic` forces the
/// Dijkstra search even for a single shuttle.
pub fn solve_with_path(instance: &Instance, m: usize, force: bool, generic: bool) -> Result<(SolveReport, Vec<RoundState>)> {
    let started = Instant::now();
    let (_, found) = search(instance, m, force, generic)?;
    let lb = path_bottleneck(instance, m, &found.rounds);
    let exact = retime(instance, &reconstruct_raw(instance, m, &found.rounds));
    let stats = SolveStats {
        iterations: Some(found.rounds.len() as u64),
        vertices: Some(found.vertices),
        arcs: Some(found.arcs),
        m: Some(m),
        ..Default::default()
    };
    let report = finish("return_max_graph", instance, exact.to_float(), lb.to_f64(), None, stats, started);
    Ok((report, found.rounds))
}

pub fn solve(instance: &Instance, m: usize, force: bool) -> Result<SolveReport> {
    solve_with_path(instance, m, force, false).map(|(r, _)| r)
}

/// Float bottleneck found by the search, without reconstruction.
pub fn bottleneck_value(instance: &Instance, m: usize, generic: bool) -> Result<f64> {
    search(instance, m, true, generic).map(|(_, r)| r.bottleneck)
}
