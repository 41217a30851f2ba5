use num_traits::Zero;
use proptest::prelude::*;
use shuttle_sched::oracle::{brute_noreturn, brute_return_max};
use shuttle_sched::scalar::rat;
use shuttle_sched::schedule::{canonical_departures_with, gave_with, gmax_alt_with, gmax_with};
use shuttle_sched::solver::{noreturn_ave, noreturn_max, return_max, step};
use shuttle_sched::{check_feasible, DemandCurve, Instance, Objective, Rational, Scalar, Schedule, Variant};

fn affine() -> impl Strategy<Value = DemandCurve> {
    prop::collection::vec((1u32..20, 0u32..30), 1..6).prop_map(|segs| {
        let mut anchors = vec![(0.0, 0.0)];
        let (mut t, mut v) = (0.0, 0.0);
        for (dt, dv) in segs {
            t += dt as f64 / 4.0;
            v += dv as f64 / 8.0;
            anchors.push((t, v));
        }
        if v == 0.0 {
            anchors.last_mut().unwrap().1 = 1.0;
        }
        DemandCurve::piecewise_affine(anchors).unwrap()
    })
}

fn increasing() -> impl Strategy<Value = DemandCurve> {
    prop::collection::vec((1u32..20, 1u32..30), 1..5).prop_map(|segs| {
        let mut anchors = vec![(0.0, 0.0)];
        let (mut t, mut v) = (0.0, 0.0);
        for (dt, dv) in segs {
            t += dt as f64 / 4.0;
            v += dv as f64 / 8.0;
            anchors.push((t, v));
        }
        DemandCurve::piecewise_affine(anchors).unwrap()
    })
}

fn stepped() -> impl Strategy<Value = DemandCurve> {
    prop::collection::btree_map(0u32..40, 1u32..20, 1..5).prop_map(|jumps| {
        let j: Vec<(f64, f64)> = jumps.into_iter().map(|(t, v)| (t as f64 / 4.0, v as f64 / 2.0)).collect();
        DemandCurve::step_from_jumps(10.0, &j).unwrap()
    })
}

fn any_curve() -> impl Strategy<Value = DemandCurve> {
    prop_oneof![affine(), stepped()]
}

/// Random feasible no-return load vector with `s` departures.
fn loads(total: f64, cap: f64, s: usize, cuts: &[u32]) -> Vec<f64> {
    let mut y = Vec::with_capacity(s);
    let mut prev = 0.0_f64;
    for j in 0..s {
        let left = (s - j - 1) as f64 * cap;
        let lo = (total - left).max(prev);
        let hi = (prev + cap).min(total);
        let frac = cuts[j % cuts.len()] as f64 / 16.0;
        let v = if j + 1 == s { total } else { lo + (hi - lo) * frac };
        y.push(v);
        prev = v;
    }
    y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pseudo_inverses(curve in any_curve(), fracs in prop::collection::vec(0u32..=64, 2..8)) {
        let p = curve.exact();
        let total = p.total().clone();
        let mut ys: Vec<Rational> = fracs.iter().map(|&f| total.clone() * rat(f as f64 / 64.0)).collect();
        ys.sort();
        for w in ys.windows(2) {
            prop_assert!(p.tau(&w[0]) <= p.tau(&w[1]));
            prop_assert!(p.bar_tau(&w[0]) <= p.bar_tau(&w[1]));
        }
        for y in &ys {
            let (t, tb) = (p.tau(y), p.bar_tau(y));
            prop_assert!(tb <= t);
            prop_assert!(p.eval(&t) >= p.eval(&tb));
            prop_assert!(p.eval(&tb) >= *y);
        }
    }

    #[test]
    fn increasing_curves_have_one_inverse(curve in increasing(), f in 0u32..=64) {
        let p = curve.exact();
        let y = p.total().clone() * rat(f as f64 / 64.0);
        prop_assert_eq!(p.tau(&y), p.bar_tau(&y));
        let alpha = p.min_slope();
        let z = p.total().clone();
        let slack = (z.clone() - y.clone()) / alpha;
        prop_assert!(p.bar_tau(&z) <= p.bar_tau(&y) + slack.clone());
        prop_assert!(p.tau(&z) <= p.tau(&y) + slack);
    }

    #[test]
    fn integral_matches_quadrature(curve in any_curve(), a in 0u32..=32, b in 0u32..=32) {
        let (a, b) = (a.min(b), a.max(b));
        let total = curve.total();
        let (y1, y2) = (total * a as f64 / 32.0, total * b as f64 / 32.0);
        let exact = curve.integrate_bar_tau(y1, y2).unwrap();
        let float = curve.float().integrate_bar_tau(&y1, &y2);
        prop_assert!((exact - float).abs() <= 1e-9 * (1.0 + exact.abs()));
        // midpoint rule; bar_tau is monotone so the error is at most the
        // range of bar_tau times the step
        let n = 4000;
        let h = (y2 - y1) / n as f64;
        let approx: f64 = (0..n).map(|i| curve.bar_tau(y1 + (i as f64 + 0.5) * h).unwrap() * h).sum();
        prop_assert!((approx - exact).abs() <= curve.horizon() * h + 1e-9);
    }

    #[test]
    fn sup_feasible_load_is_the_boundary(curve in any_curve(), f in 0u32..=16, h in 0u32..40, nu in 0u32..4, c in 1u32..12) {
        let p = curve.exact();
        let (h, nu, c) = (rat(h as f64 / 4.0), rat(nu as f64 / 4.0), rat(c as f64 / 2.0));
        let y_prev = p.total().clone() * rat(f as f64 / 16.0);
        let y = p.sup_feasible_load(&y_prev, &h, &nu, &c);
        prop_assert!(y >= y_prev && y <= y_prev.clone() + c.clone() && y <= *p.total());
        let wait = |v: &Rational| p.bar_tau(v) + nu.clone() * (v.clone() - y_prev.clone()) - p.tau(&y_prev);
        if y > y_prev {
            prop_assert!(wait(&y) <= h);
        }
        let eps = rat(1.0 / 1024.0);
        let next = y.clone() + eps;
        if next <= y_prev.clone() + c && next <= *p.total() {
            prop_assert!(wait(&next) > h);
        }
    }

    #[test]
    fn canonical_departures_dominate(curve in any_curve(), s in 1usize..5, cuts in prop::collection::vec(0u32..=16, 1..5), delays in prop::collection::vec(0u32..8, 5)) {
        let total = curve.total();
        let cap = (total / s as f64).max(0.5) * 1.5;
        let nu = 0.25;
        let inst = Instance::new(Variant::NoreturnMax, cap, nu, 0.0, s, curve.clone()).unwrap();
        let y = loads(total, cap, s, &cuts);
        let canon = shuttle_sched::schedule::canonicalize_departures(&inst, &y).unwrap();
        prop_assert!(check_feasible(&inst, &canon, false).feasible);
        let mut d = canon.d.clone();
        let mut extra = 0.0;
        for (j, v) in d.iter_mut().enumerate() {
            extra += delays[j % delays.len()] as f64 / 4.0;
            *v += extra;
        }
        let late = Schedule::new(d, y.clone()).unwrap();
        prop_assert!(check_feasible(&inst, &late, false).feasible);
        let p = curve.exact();
        let (ec, el) = (canon.to_exact(), late.to_exact());
        prop_assert!(gmax_with(p, &ec.d, &ec.y) <= gmax_with(p, &el.d, &el.y));
        prop_assert!(gave_with(p, &ec.d, &ec.y) <= gave_with(p, &el.d, &el.y));
        prop_assert!(gmax_with(p, &el.d, &el.y) <= gmax_alt_with(p, &el.d, &el.y));
        let _ = canonical_departures_with(p, &Rational::from_f64(nu), &ec.y);
    }

    #[test]
    fn achievability_is_monotone(curve in increasing(), s in 1usize..6, h in 0u32..80) {
        let cap = curve.total() / s as f64 + 1.0;
        let inst = Instance::new(Variant::NoreturnMax, cap, 0.3, 0.0, s, curve).unwrap();
        let h = h as f64 / 4.0;
        if noreturn_max::is_achievable(&inst, h) {
            prop_assert!(noreturn_max::is_achievable(&inst, h + 0.25));
            let g = noreturn_max::greedy_schedule(&inst, h).unwrap();
            prop_assert!(check_feasible(&inst, &g, false).feasible);
            prop_assert!(shuttle_sched::eval_gmax(&inst, &g) <= h + 1e-9);
        }
    }

    #[test]
    fn rounding_up_to_step_vertices_never_hurts(curve in stepped(), s in 1usize..4, cuts in prop::collection::vec(0u32..=16, 1..4)) {
        let total = curve.total();
        let cap = (total / s as f64).ceil() + 1.0;
        let inst = Instance::new(Variant::NoreturnMax, cap, 0.0, 0.0, s, curve.clone()).unwrap();
        let graph = step::StepGraph::build(&inst).unwrap();
        let y = loads(total, cap, s, &cuts);
        let up: Vec<f64> = y.iter().map(|v| {
            graph.vertices.iter().map(Scalar::to_f64).find(|w| *w >= *v - 1e-12).unwrap()
        }).collect();
        let a = shuttle_sched::schedule::canonicalize_departures(&inst, &y).unwrap();
        let b = shuttle_sched::schedule::canonicalize_departures(&inst, &up).unwrap();
        let p = curve.exact();
        let (ea, eb) = (a.to_exact(), b.to_exact());
        prop_assert!(gmax_alt_with(p, &eb.d, &eb.y) <= gmax_alt_with(p, &ea.d, &ea.y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn average_graph_brackets_the_oracle(curve in increasing(), s in 1usize..4) {
        let cap = (curve.total() / s as f64).ceil();
        let inst = Instance::new(Variant::NoreturnAve, cap, 0.25, 0.0, s, curve).unwrap();
        let oracle = brute_noreturn(&inst, 12, Objective::Ave).unwrap();
        prop_assert!(check_feasible(&inst, &oracle.schedule, false).feasible);
        let r = noreturn_ave::solve(&inst, 6).unwrap();
        prop_assert!(r.lower_bound <= oracle.upper_bound + 1e-12);
        prop_assert!(r.upper_bound - r.lower_bound <= noreturn_ave::gap_bound(&inst, 6));
        prop_assert!(check_feasible(&inst, &r.schedule, false).feasible);
    }

    #[test]
    fn bisection_brackets_the_oracle(curve in increasing(), s in 1usize..4) {
        let cap = (curve.total() / s as f64).ceil();
        let inst = Instance::new(Variant::NoreturnMax, cap, 0.25, 0.0, s, curve).unwrap();
        let oracle = brute_noreturn(&inst, 12, Objective::Max).unwrap();
        let r = noreturn_max::solve(&inst, 1e-6).unwrap();
        prop_assert!(r.lower_bound <= oracle.upper_bound + 1e-12);
    }

    #[test]
    fn return_graph_lower_bound_and_feasibility(curve in increasing(), pi in 1u32..8, nu in 0u32..3) {
        let cap = (curve.total() / 2.0).max(0.5);
        let inst = Instance::new(Variant::ReturnMax, cap, nu as f64 / 8.0, pi as f64 / 4.0, 1, curve).unwrap();
        let r = return_max::solve(&inst, 4, false).unwrap();
        prop_assert!(r.lower_bound <= r.upper_bound);
        prop_assert!(check_feasible(&inst, &r.schedule, true).feasible);
        prop_assert!(r.schedule.nonempty_departures() as f64 <= return_max::departure_bound(&inst));
        let oracle = brute_return_max(&inst, 8).unwrap();
        prop_assert!(check_feasible(&inst, &oracle.schedule, true).feasible);
        prop_assert!(r.lower_bound <= oracle.upper_bound + 1e-12);
    }
}

#[test]
fn near_constant_lower_bound_stays_below_closed_form() {
    // D(t) = D0 + eps t after an initial jump; the closed form of the constant
    // curve with D0 users is a reference, and T bounds the extra cost of the
    // trickle (waiting until T and sending one more trip is always possible).
    for eps in [1e-3, 1e-2] {
        let (d0, t) = (6.0, 1.0);
        let curve = DemandCurve::piecewise_affine(vec![(0.0, 0.0), (1e-9, d0), (t, d0 + eps * t)]).unwrap();
        let inst = Instance::new(Variant::ReturnMax, 2.0, 0.1, 0.5, 1, curve).unwrap();
        let r = return_max::solve(&inst, 4, false).unwrap();
        let closed = 0.1 * d0 + ((d0 / 2.0).ceil() - 1.0) * 0.5;
        assert!(r.lower_bound <= closed + t, "LB {} vs {}", r.lower_bound, closed + t);
        assert!(!r.lower_bound.is_nan() && r.lower_bound >= 0.0);
        assert!(Rational::zero() <= rat(r.upper_bound));
    }
}
