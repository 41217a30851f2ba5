//! Instances, schedules, feasibility checking and objective evaluation.
//!
//! A schedule is a pair of sequences: departure times `d_1 <= d_2 <= ...` and
//! cumulative loads `y_1 <= y_2 <= ...` with the implicit `y_0 = 0`. The
//! `j`-th departure carries the users ranked in `(y_{j-1}, y_j]` and is run by
//! shuttle `((j - 1) mod S) + 1`.
//!
//! Every evaluation is performed in exact rational arithmetic on the float
//! inputs and rounded once at the end, so two schedules that differ only in
//! the last bit of an entry are compared faithfully.

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;

use serde::{Deserialize, Serialize};

use crate::demand::{DemandCurve, Profile};
use crate::error::{domain, Error, Result};
use crate::scalar::{max_of, Rational, Scalar};

/// Absolute tolerance applied by [`check_feasible`] and the load checks of
/// [`canonicalize_departures`].
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    NoreturnMax,
    NoreturnAve,
    ReturnMax,
    ReturnAveConstant,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::NoreturnMax,
        Variant::NoreturnAve,
        Variant::ReturnMax,
        Variant::ReturnAveConstant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::NoreturnMax => "noreturn_max",
            Variant::NoreturnAve => "noreturn_ave",
            Variant::ReturnMax => "return_max",
            Variant::ReturnAveConstant => "return_ave_constant",
        }
    }

    pub fn allows_return(self) -> bool {
        matches!(self, Variant::ReturnMax | Variant::ReturnAveConstant)
    }

    pub fn objective(self) -> Objective {
        match self {
            Variant::NoreturnMax | Variant::ReturnMax => Objective::Max,
            Variant::NoreturnAve | Variant::ReturnAveConstant => Objective::Ave,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown variant '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Max,
    Ave,
}

/// Problem data. The horizon `T` is owned by the demand curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub variant: Variant,
    pub capacity: f64,
    pub nu: f64,
    pub pi: f64,
    pub shuttles: usize,
    pub demand: DemandCurve,
}

impl Instance {
    pub fn new(variant: Variant, capacity: f64, nu: f64, pi: f64, shuttles: usize, demand: DemandCurve) -> Result<Self> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return domain(format!("capacity must be positive, got {capacity}"));
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return domain(format!("loading rate must be nonnegative, got {nu}"));
        }
        if !(pi.is_finite() && pi >= 0.0) {
            return domain(format!("return time must be nonnegative, got {pi}"));
        }
        if shuttles == 0 {
            return domain("the fleet needs at least one shuttle");
        }
        Ok(Instance {
            variant,
            capacity,
            nu,
            pi,
            shuttles,
            demand,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.demand.horizon()
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.total()
    }

    /// Whether `C * S >= D(T)`, i.e. the no-return problem is feasible.
    pub fn fleet_covers_demand(&self) -> bool {
        Rational::from_f64(self.capacity) * Rational::from_usize(self.shuttles) >= *self.demand.exact().total()
    }

    pub fn with_variant(&self, variant: Variant) -> Instance {
        Instance { variant, ..self.clone() }
    }

    pub fn with_shuttles(&self, shuttles: usize) -> Result<Instance> {
        Instance::new(self.variant, self.capacity, self.nu, self.pi, shuttles, self.demand.clone())
    }
}

/// Departure times `d` and cumulative loads `y`, both of length `N`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub d: Vec<f64>,
    pub y: Vec<f64>,
}

impl Schedule {
    pub fn new(d: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if d.len() != y.len() {
            return domain(format!("{} departure times but {} loads", d.len(), y.len()));
        }
        Ok(Schedule { d, y })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Load `x_j = y_j - y_{j-1}` of departure `j` (1-based).
    pub fn load(&self, j: usize) -> f64 {
        let prev = if j >= 2 { self.y[j - 2] } else { 0.0 };
        self.y[j - 1] - prev
    }

    pub fn loads(&self) -> Vec<f64> {
        (1..=self.len()).map(|j| self.load(j)).collect()
    }

    /// Shuttle running departure `j` (1-based) in a fleet of `s` shuttles.
    pub fn shuttle_of(j: usize, s: usize) -> usize {
        (j - 1) % s + 1
    }

    pub fn nonempty_departures(&self) -> usize {
        (1..=self.len()).filter(|&j| self.load(j) > 0.0).count()
    }

    pub fn to_exact(&self) -> ExactSchedule {
        ExactSchedule {
            d: self.d.iter().map(|&v| Rational::from_f64(v)).collect(),
            y: self.y.iter().map(|&v| Rational::from_f64(v)).collect(),
        }
    }
}

/// A schedule with rational entries, used where results must be exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSchedule {
    pub d: Vec<Rational>,
    pub y: Vec<Rational>,
}

impl ExactSchedule {
    pub fn to_float(&self) -> Schedule {
        Schedule {
            d: self.d.iter().map(Scalar::to_f64).collect(),
            y: self.y.iter().map(Scalar::to_f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint {
    /// `x_j <= C`
    #[serde(rename = "i")]
    Capacity,
    /// `y_{j-1} <= y_j`
    #[serde(rename = "ii")]
    LoadOrder,
    /// `d_{j-1} <= d_j`
    #[serde(rename = "iii")]
    DepartureOrder,
    /// every user is served
    #[serde(rename = "iv")]
    Completion,
    /// departure after the last passenger arrived and boarded
    #[serde(rename = "v")]
    Readiness,
    /// a shuttle is back before its next departure
    #[serde(rename = "vi")]
    Return,
}

impl Constraint {
    pub fn id(self) -> &'static str {
        match self {
            Constraint::Capacity => "i",
            Constraint::LoadOrder => "ii",
            Constraint::DepartureOrder => "iii",
            Constraint::Completion => "iv",
            Constraint::Readiness => "v",
            Constraint::Return => "vi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    /// 1-based departure index.
    pub index: usize,
    /// Amount by which the constraint is exceeded.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        FeasibilityReport {
            feasible: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, c: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }
}

/// Checks the no-return constraints (i) to (v), plus (vi) when
/// `allow_return` is set. Without returns the schedule must have exactly `S`
/// departures; with returns any finite length ending at `D(T)` is accepted.
pub fn check_feasible(instance: &Instance, schedule: &Schedule, allow_return: bool) -> FeasibilityReport {
    let n = schedule.len();
    let mut out = Vec::new();
    if schedule.y.len() != n {
        out.push(Violation {
            constraint: Constraint::Completion,
            index: n.min(schedule.y.len()),
            magnitude: f64::INFINITY,
        });
        return FeasibilityReport::from_violations(out);
    }
    for j in 1..=n {
        let (d, y) = (schedule.d[j - 1], schedule.y[j - 1]);
        if !d.is_finite() || d < 0.0 {
            out.push(Violation {
                constraint: Constraint::Readiness,
                index: j,
                magnitude: f64::INFINITY,
            });
        }
        if !y.is_finite() || y < 0.0 {
            out.push(Violation {
                constraint: Constraint::LoadOrder,
                index: j,
                magnitude: f64::INFINITY,
            });
        }
    }
    if !out.is_empty() {
        return FeasibilityReport::from_violations(out);
    }
    let ex = schedule.to_exact();
    let cap = Rational::from_f64(instance.capacity);
    let nu = Rational::from_f64(instance.nu);
    let pi = Rational::from_f64(instance.pi);
    let tol = Rational::from_f64(FEASIBILITY_TOL);
    let profile = instance.demand.exact();
    let zero = Rational::from_f64(0.0);
    let push = |out: &mut Vec<Violation>, c: Constraint, j: usize, excess: Rational| {
        if excess > tol {
            out.push(Violation {
                constraint: c,
                index: j,
                magnitude: excess.to_f64(),
            });
        }
    };

    let x: Vec<Rational> = (0..n)
        .map(|i| ex.y[i].clone() - if i > 0 { ex.y[i - 1].clone() } else { zero.clone() })
        .collect();
    for j in 1..=n {
        let i = j - 1;
        push(&mut out, Constraint::Capacity, j, x[i].clone() - cap.clone());
        push(&mut out, Constraint::LoadOrder, j, -x[i].clone());
        if i > 0 {
            push(&mut out, Constraint::DepartureOrder, j, ex.d[i - 1].clone() - ex.d[i].clone());
        }
        let ready = profile.bar_tau(&ex.y[i]) + nu.clone() * x[i].clone();
        push(&mut out, Constraint::Readiness, j, ready - ex.d[i].clone());
    }
    if !allow_return && n != instance.shuttles {
        out.push(Violation {
            constraint: Constraint::Completion,
            index: n,
            magnitude: (n as f64 - instance.shuttles as f64).abs(),
        });
    }
    match ex.y.last() {
        None => out.push(Violation {
            constraint: Constraint::Completion,
            index: 0,
            magnitude: instance.total_demand(),
        }),
        Some(last) => {
            let gap = (last.clone() - profile.total().clone()).abs();
            push(&mut out, Constraint::Completion, n, gap);
        }
    }
    if allow_return {
        let s = instance.shuttles;
        for j in 1..=n.saturating_sub(s) {
            let need = ex.d[j - 1].clone() + pi.clone() + nu.clone() * x[j + s - 1].clone();
            push(&mut out, Constraint::Return, j, need - ex.d[j + s - 1].clone());
        }
    }
    FeasibilityReport::from_violations(out)
}

fn prev<N: Scalar>(y: &[N], i: usize) -> N {
    if i == 0 {
        N::zero()
    } else {
        y[i - 1].clone()
    }
}

/// `max_{j : y_j > y_{j-1}} (d_j - tau(y_{j-1}))`, or 0 when no departure
/// carries anyone.
pub fn gmax_with<N: Scalar>(profile: &Profile<N>, d: &[N], y: &[N]) -> N {
    let mut best: Option<N> = None;
    for i in 0..y.len() {
        let yp = prev(y, i);
        if y[i] > yp {
            let w = d[i].clone() - profile.tau(&yp);
            best = Some(match best {
                Some(b) => max_of(b, w),
                None => w,
            });
        }
    }
    best.unwrap_or_else(N::zero)
}

/// `max_j (d_j - tau(y_{j-1}))` over every departure.
pub fn gmax_alt_with<N: Scalar>(profile: &Profile<N>, d: &[N], y: &[N]) -> N {
    (0..y.len())
        .map(|i| d[i].clone() - profile.tau(&prev(y, i)))
        .reduce(max_of)
        .unwrap_or_else(N::zero)
}

/// `(1 / D(T)) * sum_j int_{y_{j-1}}^{y_j} (d_j - bar_tau(u)) du`.
pub fn gave_with<N: Scalar>(profile: &Profile<N>, d: &[N], y: &[N]) -> N {
    let mut acc = N::zero();
    for i in 0..y.len() {
        let yp = prev(y, i);
        let x = y[i].clone() - yp.clone();
        acc = acc + d[i].clone() * x - profile.integrate_bar_tau(&yp, &y[i]);
    }
    acc / profile.total().clone()
}

/// Earliest no-return departures for the loads `y`:
/// `d_1 = bar_tau(y_1) + nu*y_1` and `d_j = max(d_{j-1}, bar_tau(y_j) + nu*x_j)`.
pub fn canonical_departures_with<N: Scalar>(profile: &Profile<N>, nu: &N, y: &[N]) -> Vec<N> {
    let mut d: Vec<N> = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let ready = profile.bar_tau(&y[i]) + nu.clone() * (y[i].clone() - prev(y, i));
        d.push(match d.last() {
            Some(p) => max_of(p.clone(), ready),
            None => ready,
        });
    }
    d
}

/// Earliest departures for the loads `y` when shuttles return: each
/// departure also waits for its shuttle, `d_j >= d_{j-S} + pi + nu*x_j`.
pub fn canonical_return_departures_with<N: Scalar>(profile: &Profile<N>, nu: &N, pi: &N, s: usize, y: &[N]) -> Vec<N> {
    let mut d: Vec<N> = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let x = y[i].clone() - prev(y, i);
        let mut t = profile.bar_tau(&y[i]) + nu.clone() * x.clone();
        if let Some(p) = d.last() {
            t = max_of(t, p.clone());
        }
        if i >= s {
            t = max_of(t, d[i - s].clone() + pi.clone() + nu.clone() * x);
        }
        d.push(t);
    }
    d
}

pub fn eval_gmax(instance: &Instance, schedule: &Schedule) -> f64 {
    let ex = schedule.to_exact();
    gmax_with(instance.demand.exact(), &ex.d, &ex.y).to_f64()
}

pub fn eval_gmax_alt(instance: &Instance, schedule: &Schedule) -> f64 {
    let ex = schedule.to_exact();
    gmax_alt_with(instance.demand.exact(), &ex.d, &ex.y).to_f64()
}

pub fn eval_gave(instance: &Instance, schedule: &Schedule) -> f64 {
    let ex = schedule.to_exact();
    gave_with(instance.demand.exact(), &ex.d, &ex.y).to_f64()
}

/// Objective selected by the instance variant.
pub fn eval_objective(instance: &Instance, schedule: &Schedule) -> f64 {
    match instance.variant.objective() {
        Objective::Max => eval_gmax(instance, schedule),
        Objective::Ave => eval_gave(instance, schedule),
    }
}

fn check_loads(instance: &Instance, y: &[f64]) -> Result<()> {
    let tol = FEASIBILITY_TOL;
    let mut p = 0.0;
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() {
            return domain(format!("load y_{} is not finite", i + 1));
        }
        if v < p - tol {
            return domain(format!("loads decrease at j = {}", i + 1));
        }
        if v - p > instance.capacity + tol {
            return domain(format!("load x_{} = {} exceeds capacity {}", i + 1, v - p, instance.capacity));
        }
        p = v;
    }
    match y.last() {
        Some(&last) if (last - instance.total_demand()).abs() <= tol => Ok(()),
        _ => domain("loads must end at D(T)"),
    }
}

/// Earliest feasible no-return departures for the load sequence `y`.
pub fn canonicalize_departures(instance: &Instance, y: &[f64]) -> Result<Schedule> {
    check_loads(instance, y)?;
    let ey: Vec<Rational> = y.iter().map(|&v| Rational::from_f64(v)).collect();
    let d = canonical_departures_with(instance.demand.exact(), &Rational::from_f64(instance.nu), &ey);
    Ok(Schedule {
        d: d.iter().map(Scalar::to_f64).collect(),
        y: y.to_vec(),
    })
}

/// Earliest feasible departures with returns for the load sequence `y`.
pub fn canonicalize_return_departures(instance: &Instance, y: &[f64]) -> Result<Schedule> {
    check_loads(instance, y)?;
    let ey: Vec<Rational> = y.iter().map(|&v| Rational::from_f64(v)).collect();
    let d = canonical_return_departures_with(
        instance.demand.exact(),
        &Rational::from_f64(instance.nu),
        &Rational::from_f64(instance.pi),
        instance.shuttles,
        &ey,
    );
    Ok(Schedule {
        d: d.iter().map(Scalar::to_f64).collect(),
        y: y.to_vec(),
    })
}
