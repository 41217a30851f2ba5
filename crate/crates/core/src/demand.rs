//! Cumulative demand curves and their pseudo-inverses.
//!
//! A curve `D` on `[0, T]` is stored as a monotone polyline in the
//! `(time, users)` plane running from `(0, 0)` to `(T, D(T))`. Vertical
//! pieces are jumps (batches of users arriving together), horizontal pieces
//! are idle periods. Upper semicontinuity means `D(t)` is the highest point of
//! the polyline above `t`. With this representation the two pseudo-inverses
//! are symmetric:
//!
//! * `bar_tau(y) = inf { t : D(t) >= y }` is the leftmost point at level `y`,
//! * `tau(y) = inf { t : D(t) > y }` is the rightmost point at level `y`
//!   (and `T` when `y = D(T)`).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{max_of, min_of, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Constant,
    Step,
    PiecewiseAffine,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Constant => "constant",
            CurveKind::Step => "step",
            CurveKind::PiecewiseAffine => "piecewise_affine",
        }
    }
}

/// Monotone polyline representation of a cumulative demand curve, generic
/// over the arithmetic backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<N> {
    points: Vec<(N, N)>,
}

impl<N: Scalar> Profile<N> {
    /// Builds a profile from polyline vertices. The caller guarantees that
    /// both coordinates are nondecreasing and that the first vertex is `(0, 0)`.
    fn from_points(raw: Vec<(N, N)>) -> Self {
        let mut points: Vec<(N, N)> = Vec::with_capacity(raw.len());
        for p in raw {
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        debug_assert!(points[0] == (N::zero(), N::zero()));
        Profile { points }
    }

    pub fn points(&self) -> &[(N, N)] {
        &self.points
    }

    pub fn horizon(&self) -> &N {
        &self.points[self.points.len() - 1].0
    }

    /// `D(T)`.
    pub fn total(&self) -> &N {
        &self.points[self.points.len() - 1].1
    }

    fn level_at(&self, i: usize, t: &N) -> N {
        let (t0, v0) = &self.points[i];
        let (t1, v1) = &self.points[i + 1];
        v0.clone() + (t.clone() - t0.clone()) * (v1.clone() - v0.clone()) / (t1.clone() - t0.clone())
    }

    fn time_at(&self, i: usize, y: &N) -> N {
        let (t0, v0) = &self.points[i];
        let (t1, v1) = &self.points[i + 1];
        t0.clone() + (y.clone() - v0.clone()) * (t1.clone() - t0.clone()) / (v1.clone() - v0.clone())
    }

    /// `D(t)`, with `D(t) = D(T)` for `t >= T` and `0` for negative `t`.
    pub fn eval(&self, t: &N) -> N {
        if t >= self.horizon() {
            return self.total().clone();
        }
        if *t < N::zero() {
            return N::zero();
        }
        let i = self.points.partition_point(|p| p.0 <= *t) - 1;
        if self.points[i].0 == *t {
            self.points[i].1.clone()
        } else {
            self.level_at(i, t)
        }
    }

    /// `bar_tau(y)`, extended by `0` below zero and by `T` above `D(T)`.
    pub fn bar_tau(&self, y: &N) -> N {
        if *y <= N::zero() {
            return N::zero();
        }
        if y > self.total() {
            return self.horizon().clone();
        }
        let i = self.points.partition_point(|p| p.1 < *y);
        if self.points[i].1 == *y {
            self.points[i].0.clone()
        } else {
            self.time_at(i - 1, y)
        }
    }

    /// `tau(y)`, equal to `T` for `y >= D(T)`.
    pub fn tau(&self, y: &N) -> N {
        if y >= self.total() {
            return self.horizon().clone();
        }
        let y = max_of(y.clone(), N::zero());
        let i = self.points.partition_point(|p| p.1 <= y) - 1;
        if self.points[i].1 == y {
            self.points[i].0.clone()
        } else {
            self.time_at(i, &y)
        }
    }

    /// `∫_{y1}^{y2} bar_tau(u) du` for `y1 <= y2`. Above `D(T)` the integrand
    /// is extended by `T`.
    pub fn integrate_bar_tau(&self, y1: &N, y2: &N) -> N {
        let zero = N::zero();
        let total = self.total();
        let mut area = N::zero();
        if y2 > total {
            let from = max_of(y1.clone(), total.clone());
            area = area + (y2.clone() - from) * self.horizon().clone();
        }
        let lo = max_of(y1.clone(), zero);
        let hi = min_of(y2.clone(), total.clone());
        if hi <= lo {
            return area;
        }
        let two = N::one() + N::one();
        let mut i = self.points.partition_point(|p| p.1 <= lo) - 1;
        while i + 1 < self.points.len() && self.points[i].1 < hi {
            let (v0, v1) = (&self.points[i].1, &self.points[i + 1].1);
            if v1 > v0 {
                let a = max_of(lo.clone(), v0.clone());
                let b = min_of(hi.clone(), v1.clone());
                if b > a {
                    let ta = self.time_at(i, &a);
                    let tb = self.time_at(i, &b);
                    area = area + (b - a) * (ta + tb) / two.clone();
                }
            }
            i += 1;
        }
        area
    }

    /// `sup { y in [0, D(T)] : bar_tau(y) + nu*y <= alpha }`, or `None` when
    /// `alpha < 0`. The supremum is attained.
    ///
    /// The map `(t, v) -> t + nu*v` is nondecreasing along the polyline, so the
    /// feasible points form a prefix of it and the answer is the level where
    /// that prefix ends.
    pub fn sup_load_below(&self, nu: &N, alpha: &N) -> Option<N> {
        if *alpha < N::zero() {
            return None;
        }
        let g = |p: &(N, N)| p.0.clone() + nu.clone() * p.1.clone();
        let i = self.points.partition_point(|p| g(p) <= *alpha) - 1;
        if i + 1 == self.points.len() {
            return Some(self.total().clone());
        }
        let (p0, p1) = (&self.points[i], &self.points[i + 1]);
        let (g0, g1) = (g(p0), g(p1));
        let s = (alpha.clone() - g0.clone()) / (g1 - g0);
        let v = p0.1.clone() + s * (p1.1.clone() - p0.1.clone());
        Some(min_of(max_of(v, p0.1.clone()), p1.1.clone()))
    }

    /// Largest load `y` such that `y <= y_prev + capacity`, `y <= D(T)` and
    /// `bar_tau(y) + nu*(y - y_prev) - tau(y_prev) <= h`.
    pub fn sup_feasible_load(&self, y_prev: &N, h: &N, nu: &N, capacity: &N) -> N {
        let alpha = h.clone() + self.tau(y_prev) + nu.clone() * y_prev.clone();
        let by_time = self.sup_load_below(nu, &alpha).unwrap_or_else(|| y_prev.clone());
        let capped = min_of(by_time, y_prev.clone() + capacity.clone());
        max_of(min_of(capped, self.total().clone()), y_prev.clone())
    }

    /// Infimum of the right derivative over `[0, T)`. Jumps do not count:
    /// the right derivative at a jump is the slope after it.
    pub fn min_slope(&self) -> N {
        let mut best: Option<N> = None;
        for w in self.points.windows(2) {
            let (t0, v0) = &w[0];
            let (t1, v1) = &w[1];
            if t1 > t0 {
                let s = (v1.clone() - v0.clone()) / (t1.clone() - t0.clone());
                best = Some(match best {
                    Some(b) => min_of(b, s),
                    None => s,
                });
            }
        }
        best.unwrap_or_else(N::zero)
    }
}

/// A cumulative demand curve on `[0, T]` with `D(T) > 0`.
///
/// Values are stored exactly (rationals built from the f64 inputs) together
/// with an f64 copy for fast inner loops. The public f64 queries go through
/// the exact representation, so they are correctly rounded.
#[derive(Debug, Clone)]
pub struct DemandCurve {
    kind: CurveKind,
    horizon: f64,
    anchors: Vec<(f64, f64)>,
    exact: Profile<Rational>,
    float: Profile<f64>,
}

impl PartialEq for DemandCurve {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.horizon == other.horizon && self.anchors == other.anchors
    }
}

fn check_finite(what: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        domain(format!("{what} must be finite, got {x}"))
    }
}

impl DemandCurve {
    /// All `total` users are present from time 0.
    pub fn constant(horizon: f64, total: f64) -> Result<Self> {
        Self::new(CurveKind::Constant, horizon, vec![(0.0, total)])
    }

    /// Step curve from cumulative anchors `(t_k, D(t_k))`; the curve jumps to
    /// `D(t_k)` at `t_k` and stays flat until the next anchor.
    pub fn step(horizon: f64, anchors: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(CurveKind::Step, horizon, anchors)
    }

    /// Step curve from `(time, batch size)` pairs.
    pub fn step_from_jumps(horizon: f64, jumps: &[(f64, f64)]) -> Result<Self> {
        let mut acc = 0.0;
        let anchors = jumps
            .iter()
            .map(|&(t, dy)| {
                acc += dy;
                (t, acc)
            })
            .collect();
        Self::step(horizon, anchors)
    }

    /// Linear interpolation between anchors; the first anchor must be at
    /// time 0 and the last one defines the horizon.
    pub fn piecewise_affine(anchors: Vec<(f64, f64)>) -> Result<Self> {
        let horizon = anchors.last().map(|a| a.0).unwrap_or(0.0);
        Self::new(CurveKind::PiecewiseAffine, horizon, anchors)
    }

    pub fn new(kind: CurveKind, horizon: f64, anchors: Vec<(f64, f64)>) -> Result<Self> {
        check_finite("horizon", horizon)?;
        if horizon <= 0.0 {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if anchors.is_empty() {
            return domain("a demand curve needs at least one anchor");
        }
        for &(t, v) in &anchors {
            check_finite("anchor time", t)?;
            check_finite("anchor value", v)?;
            if t < 0.0 || t > horizon {
                return domain(format!("anchor time {t} outside [0, {horizon}]"));
            }
            if v < 0.0 {
                return domain(format!("anchor value {v} is negative"));
            }
        }
        for w in anchors.windows(2) {
            if w[1].0 <= w[0].0 {
                return domain(format!("anchor times must be strictly increasing ({} then {})", w[0].0, w[1].0));
            }
            if w[1].1 < w[0].1 {
                return domain(format!("cumulative values must be nondecreasing ({} then {})", w[0].1, w[1].1));
            }
        }
        let raw: Vec<(Rational, Rational)> = match kind {
            CurveKind::Constant => {
                if anchors.len() != 1 {
                    return domain("a constant curve takes exactly one anchor (0, D(T))");
                }
                let (z, d, t) = (
                    Rational::from_f64(0.0),
                    Rational::from_f64(anchors[0].1),
                    Rational::from_f64(horizon),
                );
                vec![(z.clone(), z.clone()), (z, d.clone()), (t, d)]
            }
            CurveKind::Step => {
                let zero = Rational::from_f64(0.0);
                let mut raw = vec![(zero.clone(), zero.clone())];
                let mut level = zero;
                for &(t, v) in &anchors {
                    let (t, v) = (Rational::from_f64(t), Rational::from_f64(v));
                    raw.push((t.clone(), level.clone()));
                    raw.push((t, v.clone()));
                    level = v;
                }
                raw.push((Rational::from_f64(horizon), level));
                raw
            }
            CurveKind::PiecewiseAffine => {
                if anchors[0].0 != 0.0 {
                    return domain("a piecewise-affine curve must start at time 0");
                }
                if anchors.len() < 2 || anchors[anchors.len() - 1].0 != horizon {
                    return domain("a piecewise-affine curve must end at the horizon");
                }
                let zero = Rational::from_f64(0.0);
                let mut raw = vec![(zero.clone(), zero)];
                raw.extend(anchors.iter().map(|&(t, v)| (Rational::from_f64(t), Rational::from_f64(v))));
                raw
            }
        };
        let exact = Profile::from_points(raw);
        if *exact.total() <= Rational::from_f64(0.0) {
            return domain("D(T) must be positive");
        }
        let float = Profile::from_points(exact.points().iter().map(|(t, v)| (t.to_f64(), v.to_f64())).collect());
        Ok(DemandCurve {
            kind,
            horizon,
            anchors,
            exact,
            float,
        })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// The anchors as given at construction.
    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn total(&self) -> f64 {
        self.float.total().to_f64()
    }

    pub fn exact(&self) -> &Profile<Rational> {
        &self.exact
    }

    pub fn float(&self) -> &Profile<f64> {
        &self.float
    }

    /// `inf D'_+` over `[0, T)`.
    pub fn min_slope(&self) -> f64 {
        self.exact.min_slope().to_f64()
    }

    /// True when the curve has no flat piece, i.e. `D` is increasing.
    pub fn is_strictly_increasing(&self) -> bool {
        self.exact.min_slope() > Rational::from_f64(0.0)
    }

    /// Discontinuity times `t_1 < ... < t_K` of a step curve.
    pub fn jump_times(&self) -> Vec<f64> {
        match self.kind {
            CurveKind::Step => self.anchors.iter().filter(|a| a.1 > 0.0).map(|a| a.0).collect(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_finite("t", t)?;
        if t < 0.0 {
            return domain(format!("eval at negative time {t}"));
        }
        Ok(self.exact.eval(&Rational::from_f64(t)).to_f64())
    }

    fn check_level(&self, what: &str, y: f64, allow_above: bool) -> Result<Rational> {
        check_finite(what, y)?;
        if y < 0.0 {
            return domain(format!("{what} = {y} is negative"));
        }
        let y = Rational::from_f64(y);
        if !allow_above && y > *self.exact.total() {
            return domain(format!("{what} exceeds D(T) = {}", self.total()));
        }
        Ok(y)
    }

    pub fn tau(&self, y: f64) -> Result<f64> {
        let y = self.check_level("y", y, false)?;
        Ok(self.exact.tau(&y).to_f64())
    }

    /// Accepts `y > D(T)` and returns `T` there.
    pub fn bar_tau(&self, y: f64) -> Result<f64> {
        let y = self.check_level("y", y, true)?;
        Ok(self.exact.bar_tau(&y).to_f64())
    }

    pub fn integrate_bar_tau(&self, y1: f64, y2: f64) -> Result<f64> {
        let a = self.check_level("y1", y1, true)?;
        let b = self.check_level("y2", y2, true)?;
        if a > b {
            return domain(format!("integration bounds reversed ({y1} > {y2})"));
        }
        Ok(self.exact.integrate_bar_tau(&a, &b).to_f64())
    }

    pub fn sup_feasible_load(&self, y_prev: f64, h: f64, nu: f64, capacity: f64) -> Result<f64> {
        let yp = self.check_level("y_prev", y_prev, false)?;
        check_finite("h", h)?;
        if h < 0.0 || nu < 0.0 || capacity < 0.0 {
            return Err(Error::Domain("h, nu and capacity must be nonnegative".into()));
        }
        let r = self
            .exact
            .sup_feasible_load(&yp, &Rational::from_f64(h), &Rational::from_f64(nu), &Rational::from_f64(capacity));
        Ok(r.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn linear10() -> DemandCurve {
        DemandCurve::piecewise_affine(vec![(0.0, 0.0), (10.0, 10.0)]).unwrap()
    }

    fn two_jumps() -> DemandCurve {
        DemandCurve::step_from_jumps(3.0, &[(1.0, 2.0), (2.0, 3.0)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let c = DemandCurve::constant(1.0, 5.0).unwrap();
        assert_eq!(c.eval(0.3).unwrap(), 5.0);
        assert_eq!(c.eval(0.0).unwrap(), 5.0);
        assert_eq!(linear10().eval(4.0).unwrap(), 4.0);
        let s = two_jumps();
        assert_eq!(s.eval(1.0).unwrap(), 2.0);
        assert_eq!(s.eval(0.99).unwrap(), 0.0);
        assert_eq!(s.eval(2.5).unwrap(), 5.0);
        assert_eq!(s.eval(7.0).unwrap(), 5.0);
        assert!(matches!(s.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn tau_examples() {
        assert_eq!(linear10().tau(4.0).unwrap(), 4.0);
        let s = two_jumps();
        assert_eq!(s.tau(0.0).unwrap(), 1.0);
        assert_eq!(s.tau(2.0).unwrap(), 2.0);
        assert_eq!(s.tau(1.0).unwrap(), 1.0);
        assert_eq!(s.tau(5.0).unwrap(), 3.0);
        assert_eq!(linear10().tau(10.0).unwrap(), 10.0);
        assert!(s.tau(5.5).is_err());
        assert!(s.tau(-1.0).is_err());
        let c = DemandCurve::constant(2.0, 5.0).unwrap();
        assert_eq!(c.tau(0.0).unwrap(), 0.0);
        assert_eq!(c.tau(4.9).unwrap(), 0.0);
        assert_eq!(c.tau(5.0).unwrap(), 2.0);
    }

    #[test]
    fn bar_tau_examples() {
        let s = two_jumps();
        assert_eq!(s.bar_tau(2.0).unwrap(), 1.0);
        assert_eq!(s.bar_tau(0.0).unwrap(), 0.0);
        assert_eq!(s.bar_tau(2.5).unwrap(), 2.0);
        assert_eq!(s.bar_tau(9.0).unwrap(), 3.0);
        assert_eq!(linear10().bar_tau(4.0).unwrap(), 4.0);
        assert_eq!(DemandCurve::constant(2.0, 5.0).unwrap().bar_tau(5.0).unwrap(), 0.0);
        assert!(s.bar_tau(-0.5).is_err());
    }

    #[test]
    fn plateau_resolves_to_jump_time() {
        // flat at 4 on [2, 6), jump to 9 at 6
        let c = DemandCurve::piecewise_affine(vec![(0.0, 0.0), (2.0, 4.0), (6.0, 4.0), (8.0, 9.0)]).unwrap();
        assert_eq!(c.bar_tau(4.0).unwrap(), 2.0);
        assert_eq!(c.tau(4.0).unwrap(), 6.0);
        assert!(!c.is_strictly_increasing());
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(linear10().integrate_bar_tau(0.0, 5.0).unwrap(), 12.5);
        let c = DemandCurve::constant(3.0, 5.0).unwrap();
        assert_eq!(c.integrate_bar_tau(1.0, 4.0).unwrap(), 0.0);
        assert_eq!(two_jumps().integrate_bar_tau(0.0, 5.0).unwrap(), 8.0);
        assert_eq!(two_jumps().integrate_bar_tau(1.0, 3.0).unwrap(), 1.0 + 2.0);
        // extension above D(T) by T
        assert_eq!(two_jumps().integrate_bar_tau(5.0, 6.0).unwrap(), 3.0);
        assert!(two_jumps().integrate_bar_tau(3.0, 1.0).is_err());
    }

    #[test]
    fn sup_feasible_load_examples() {
        assert_eq!(linear10().sup_feasible_load(0.0, 5.0, 0.0, 10.0).unwrap(), 5.0);
        let c = DemandCurve::constant(1.0, 5.0).unwrap();
        assert_eq!(c.sup_feasible_load(0.0, 0.0, 0.0, 2.0).unwrap(), 2.0);
        // loading costs time: only y_prev fits when h = 0
        assert_eq!(linear10().sup_feasible_load(3.0, 0.0, 0.5, 10.0).unwrap(), 3.0);
        // nu > 0 on the linear curve: y + 0.5 (y - 0) <= 6  =>  y = 4
        assert_eq!(linear10().sup_feasible_load(0.0, 6.0, 0.5, 10.0).unwrap(), 4.0);
        // capped by D(T)
        assert_eq!(linear10().sup_feasible_load(8.0, 100.0, 0.0, 10.0).unwrap(), 10.0);
    }

    #[test]
    fn sup_load_below_on_step_curve() {
        let s = two_jumps();
        // bar_tau(y) <= 1  <=>  y <= 2
        assert_eq!(s.exact().sup_load_below(&rat_int(0), &rat_int(1)), Some(rat_int(2)));
        assert_eq!(s.exact().sup_load_below(&rat_int(0), &rat(1.5)), Some(rat_int(2)));
        assert_eq!(s.exact().sup_load_below(&rat_int(0), &rat_int(2)), Some(rat_int(5)));
        assert_eq!(s.exact().sup_load_below(&rat_int(0), &rat_int(-1)), None);
    }

    #[test]
    fn slopes_and_flags() {
        assert_eq!(linear10().min_slope(), 1.0);
        assert!(linear10().is_strictly_increasing());
        assert_eq!(two_jumps().min_slope(), 0.0);
        assert_eq!(DemandCurve::constant(1.0, 3.0).unwrap().min_slope(), 0.0);
        let jump_then_ramp = DemandCurve::piecewise_affine(vec![(0.0, 2.0), (4.0, 6.0)]).unwrap();
        assert_eq!(jump_then_ramp.min_slope(), 1.0);
        assert_eq!(two_jumps().jump_times(), vec![1.0, 2.0]);
    }

    #[test]
    fn construction_errors() {
        assert!(DemandCurve::constant(1.0, 0.0).is_err());
        assert!(DemandCurve::constant(0.0, 1.0).is_err());
        assert!(DemandCurve::step(2.0, vec![(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(DemandCurve::step(2.0, vec![(1.0, 2.0), (3.0, 3.0)]).is_err());
        assert!(DemandCurve::piecewise_affine(vec![(0.0, 2.0), (1.0, 1.0)]).is_err());
        assert!(DemandCurve::piecewise_affine(vec![(1.0, 0.0), (2.0, 1.0)]).is_err());
        assert!(DemandCurve::step(2.0, vec![(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn float_and_exact_paths_agree() {
        let c = DemandCurve::piecewise_affine(vec![(0.0, 0.0), (3.0, 1.0), (5.0, 7.5), (9.0, 8.0)]).unwrap();
        for i in 0..=80 {
            let y = i as f64 * 0.1;
            let e = c.exact().bar_tau(&rat(y)).to_f64();
            let f = c.float().bar_tau(&y);
            assert!((e - f).abs() < 1e-12, "{y}: {e} vs {f}");
            let e = c.exact().tau(&rat(y)).to_f64();
            let f = c.float().tau(&y);
            assert!((e - f).abs() < 1e-12);
        }
    }
}
