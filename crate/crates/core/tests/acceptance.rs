//! Acceptance checks. Each criterion prints one PASS/FAIL line with its
//! running time; the test fails if any criterion fails.

use std::io::Write;
use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shuttle_sched::oracle::{brute_noreturn, brute_return_ave_constant, brute_return_max};
use shuttle_sched::scalar::{ceil_nonneg, rat, rat_int};
use shuttle_sched::solver::{constant, noreturn_ave, noreturn_max, return_max, step};
use shuttle_sched::{
    check_feasible, eval_objective, synthetic, CurveKind, DemandCurve, Instance, Objective, Rational, Scalar, SolveReport, Variant,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_step(rng: &mut ChaCha8Rng) -> DemandCurve {
    let k = rng.gen_range(1..=6);
    let mut times: Vec<u32> = (0..k).map(|_| rng.gen_range(0..80)).collect();
    times.sort();
    times.dedup();
    let jumps: Vec<(f64, f64)> = times.iter().map(|&t| (t as f64 / 8.0, rng.gen_range(1..40) as f64 / 4.0)).collect();
    DemandCurve::step_from_jumps(10.0, &jumps).unwrap()
}

fn random_affine(rng: &mut ChaCha8Rng, strict: bool) -> DemandCurve {
    let k = rng.gen_range(1..=6);
    let mut anchors = vec![(0.0, 0.0)];
    let (mut t, mut v) = (0.0, 0.0);
    for _ in 0..k {
        t += rng.gen_range(1..20) as f64 / 4.0;
        let lo = if strict { 1 } else { 0 };
        v += rng.gen_range(lo..30) as f64 / 8.0;
        anchors.push((t, v));
    }
    if v == 0.0 {
        anchors.last_mut().unwrap().1 = 1.0;
    }
    DemandCurve::piecewise_affine(anchors).unwrap()
}

fn pseudo_inverse_checks(curve: &DemandCurve, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let p = curve.exact();
    let f = curve.float();
    let total = p.total().clone();
    let mut ys: Vec<Rational> = p.points().iter().map(|q| q.1.clone()).collect();
    for _ in 0..20 {
        ys.push(total.clone() * rat(rng.gen_range(0..=1024) as f64 / 1024.0));
    }
    ys.sort();
    ys.dedup();
    let alpha = p.min_slope();
    let tol = 1e-9;
    for (i, y) in ys.iter().enumerate() {
        let (t, tb) = (p.tau(y), p.bar_tau(y));
        ensure(p.eval(&t) >= p.eval(&tb) && p.eval(&tb) >= *y, || {
            format!("D(tau(y)) >= D(bar_tau(y)) >= y fails at y = {y}")
        })?;
        ensure(tb <= t, || format!("bar_tau > tau at y = {y}"))?;
        if i > 0 {
            let z = &ys[i - 1];
            ensure(p.tau(z) <= t && p.bar_tau(z) <= tb, || {
                format!("monotonicity fails between {z} and {y}")
            })?;
        }
        if curve.is_strictly_increasing() {
            ensure(t == tb, || format!("tau != bar_tau at y = {y} on an increasing curve"))?;
        }
        if alpha > Rational::zero() {
            for z in &ys[i..] {
                let delta = z.clone() - y.clone();
                let slack = delta / alpha.clone();
                ensure(p.bar_tau(z) <= tb.clone() + slack.clone() && p.tau(z) <= t.clone() + slack, || {
                    format!("Lipschitz bound fails between {y} and {z}")
                })?;
            }
        }
        let yf = y.to_f64();
        let (tf, tbf) = (f.tau(&yf), f.bar_tau(&yf));
        ensure((tf - t.to_f64()).abs() <= tol && (tbf - tb.to_f64()).abs() <= tol, || {
            format!("float path drifts at y = {yf}")
        })?;
        ensure(f.eval(&tf) >= f.eval(&tbf) - tol && f.eval(&tbf) >= yf - tol, || {
            format!("float D(tau(y)) >= D(bar_tau(y)) >= y fails at y = {yf}")
        })?;
    }
    Ok(())
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut n = 0;
    for i in 0..240 {
        let curve = match i % 3 {
            0 => random_step(&mut rng),
            1 => random_affine(&mut rng, true),
            _ => random_affine(&mut rng, false),
        };
        pseudo_inverse_checks(&curve, &mut rng).map_err(|e| format!("curve {i}: {e}"))?;
        n += 1;
    }
    Ok(format!("{n} curves"))
}

fn criterion_2() -> Check {
    let mut count = 0;
    for &d in &[1.0, 5.0, 64.0, 2016.0, 333.0] {
        for &(c, s) in &[(32.0, 100), (32.0, 1), (8.0, 3), (1.0, 7), (50.0, 2)] {
            for &(nu, pi) in &[(0.625, 34.0), (0.0, 1.0)] {
                let inst = Instance::new(Variant::ReturnMax, c, nu, pi, s, DemandCurve::constant(1440.0, d).unwrap()).unwrap();
                let rounds = ceil_nonneg(&(rat(d) / (rat(c) * rat_int(s as i64)))) as i64;
                let expected = rat(nu) * rat(d) / rat_int(s as i64) + rat_int(rounds - 1) * rat(pi);
                let r = constant::solve_return_max(&inst).map_err(|e| e.to_string())?;
                ensure(r.exact_value.as_ref() == Some(&expected), || {
                    format!("D={d} C={c} S={s}: {:?} != {expected}", r.exact_value)
                })?;
                ensure(check_feasible(&inst, &r.schedule, true).feasible, || {
                    format!("D={d} C={c} S={s}: infeasible")
                })?;
                count += 1;
            }
        }
    }
    let service = Instance::new(
        Variant::ReturnMax,
        32.0,
        0.625,
        34.0,
        100,
        DemandCurve::constant(1440.0, 2016.0).unwrap(),
    )
    .unwrap();
    let v = constant::solve_return_max(&service).map_err(|e| e.to_string())?.upper_bound;
    ensure(v == 12.6, || format!("service constants give {v}, not 12.6"))?;
    // the single-shuttle enumeration agrees with the closed form
    for &(d, c) in &[(3.0, 1.0), (4.0, 2.0), (2.0, 2.0)] {
        let inst = Instance::new(Variant::ReturnMax, c, 0.5, 1.0, 1, DemandCurve::constant(1.0, d).unwrap()).unwrap();
        let o = brute_return_max(&inst, d as usize * 2).map_err(|e| e.to_string())?;
        let r = constant::solve_return_max(&inst).map_err(|e| e.to_string())?;
        ensure(o.exact_value == r.exact_value, || {
            format!("oracle {:?} vs closed form {:?}", o.exact_value, r.exact_value)
        })?;
    }
    let mut ave = 0;
    for &d in &[0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
        for &c in &[1.0, 2.0] {
            for &nu in &[0.5, 1.0, 2.0] {
                for &pi in &[0.5, 1.0, 2.0] {
                    for s in [1, 2] {
                        let inst = Instance::new(Variant::ReturnAveConstant, c, nu, pi, s, DemandCurve::constant(1.0, d).unwrap()).unwrap();
                        let r = constant::solve_return_ave(&inst).map_err(|e| e.to_string())?;
                        let o = brute_return_ave_constant(&inst).map_err(|e| e.to_string())?;
                        ensure((r.upper_bound - o.upper_bound).abs() <= 1e-9, || {
                            format!(
                                "ave D={d} C={c} nu={nu} pi={pi} S={s}: {} vs oracle {}",
                                r.upper_bound, o.upper_bound
                            )
                        })?;
                        ave += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{count} closed-form instances, {ave} average instances"))
}

fn linear(t: f64) -> DemandCurve {
    DemandCurve::piecewise_affine(vec![(0.0, 0.0), (t, t)]).unwrap()
}

fn criterion_3() -> Check {
    let started = Instant::now();
    let inst = Instance::new(Variant::NoreturnMax, 10.0, 0.0, 0.0, 2, linear(10.0)).unwrap();
    let rho = 1e-6;
    let r = noreturn_max::solve(&inst, rho).map_err(|e| e.to_string())?;
    let (lo, hi) = (r.stats.h_minus.unwrap(), r.stats.h_plus.unwrap());
    ensure(lo <= 5.0 && 5.0 <= hi && hi - lo <= rho, || format!("interval [{lo}, {hi}]"))?;
    let bound = noreturn_max::iteration_bound(&inst, rho);
    ensure(r.stats.iterations.unwrap() <= bound, || {
        format!("{} iterations > {bound}", r.stats.iterations.unwrap())
    })?;
    ensure(check_feasible(&inst, &r.schedule, false).feasible, || {
        "linear schedule infeasible".into()
    })?;
    ensure(r.upper_bound <= hi + 1e-9, || format!("g^max {} above h+ {hi}", r.upper_bound))?;
    let linear_time = started.elapsed().as_secs_f64();
    ensure(linear_time < 0.1, || format!("linear case took {linear_time:.3} s"))?;
    let mut slowest = 0.0_f64;
    for id in ["1P", "2P"] {
        for s in [100, 150, 200, 250] {
            let inst = synthetic::instance(Variant::NoreturnMax, synthetic::by_id(id).unwrap(), s).unwrap();
            let r = noreturn_max::solve(&inst, 1e-4).map_err(|e| e.to_string())?;
            let gap = r.gap_percent().unwrap_or(f64::INFINITY);
            ensure(format!("{gap:.1}") == "0.0", || format!("{id} S={s}: gap {gap}%"))?;
            ensure(r.wall_time_s < 1.0, || format!("{id} S={s}: {:.2} s", r.wall_time_s))?;
            slowest = slowest.max(r.wall_time_s);
        }
    }
    Ok(format!("linear {linear_time:.4} s, slowest synthetic cell {slowest:.3} s"))
}

fn criterion_4() -> Check {
    let inst = Instance::new(Variant::NoreturnAve, 1.0, 0.0, 0.0, 2, linear(1.0)).unwrap();
    let oracle = brute_noreturn(&inst, 8, Objective::Ave).map_err(|e| e.to_string())?.upper_bound;
    ensure((oracle - 0.25).abs() < 1e-12, || format!("oracle gives {oracle}"))?;
    let mut gaps = Vec::new();
    for m in [4, 8, 16, 32] {
        let r = noreturn_ave::solve(&inst, m).map_err(|e| e.to_string())?;
        let b = noreturn_ave::gap_bound(&inst, m);
        ensure(r.lower_bound <= oracle && oracle <= r.upper_bound, || {
            format!("M={m}: [{}, {}]", r.lower_bound, r.upper_bound)
        })?;
        ensure(r.upper_bound - r.lower_bound <= b, || {
            format!("M={m}: gap {} > B {b}", r.upper_bound - r.lower_bound)
        })?;
        gaps.push(format!("M={m} gap {:.4} <= B {:.4}", r.upper_bound - r.lower_bound, b));
    }
    let ratio = noreturn_ave::gap_bound(&inst, 32) / noreturn_ave::gap_bound(&inst, 16);
    ensure((ratio - 0.5).abs() <= 0.05, || format!("B(32)/B(16) = {ratio}"))?;
    Ok(format!("{}; B(32)/B(16) = {ratio:.3}", gaps.join(", ")))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 100 {
        let k = rng.gen_range(1..=3);
        let mut times: Vec<u32> = (0..k).map(|_| rng.gen_range(0..6)).collect();
        times.sort();
        times.dedup();
        let jumps: Vec<(f64, f64)> = times.iter().map(|&t| (t as f64, rng.gen_range(1..=5) as f64)).collect();
        let c = rng.gen_range(1..=4) as f64;
        let s = rng.gen_range(1..=4);
        let demand = DemandCurve::step_from_jumps(6.0, &jumps).unwrap();
        if c * (s as f64) < demand.total() {
            continue;
        }
        let total = demand.total() as usize;
        let inst = Instance::new(Variant::NoreturnMax, c, 0.0, 0.0, s, demand).unwrap();
        let pairs: [(SolveReport, Objective); 2] = [
            (step::solve_max(&inst).map_err(|e| e.to_string())?, Objective::Max),
            (step::solve_ave(&inst).map_err(|e| e.to_string())?, Objective::Ave),
        ];
        for (r, obj) in pairs {
            let o = brute_noreturn(&inst, total, obj).map_err(|e| e.to_string())?;
            ensure(r.exact_value == o.exact_value, || {
                format!(
                    "jumps {jumps:?} C={c} S={s} {obj:?}: dp {:?} vs oracle {:?}",
                    r.exact_value, o.exact_value
                )
            })?;
            ensure(r.schedule.y.iter().all(|v| v.fract() == 0.0), || {
                format!("fractional loads {:?}", r.schedule.y)
            })?;
            ensure(check_feasible(&inst, &r.schedule, false).feasible, || {
                "infeasible step schedule".into()
            })?;
        }
        done += 1;
    }
    Ok(format!("{done} instances, both objectives"))
}

fn criterion_6() -> Check {
    let inst = Instance::new(Variant::ReturnMax, 1.0, 0.0, 0.5, 1, linear(1.0)).unwrap();
    let oracle = brute_return_max(&inst, 16).map_err(|e| e.to_string())?.upper_bound;
    let bound = return_max::departure_bound(&inst);
    let mut gaps = Vec::new();
    for m in [8, 16] {
        let r = return_max::solve(&inst, m, false).map_err(|e| e.to_string())?;
        ensure(r.lower_bound <= oracle && oracle <= r.upper_bound, || {
            format!("M={m}: oracle {oracle} outside [{}, {}]", r.lower_bound, r.upper_bound)
        })?;
        ensure(check_feasible(&inst, &r.schedule, true).feasible, || {
            format!("M={m}: reconstruction infeasible")
        })?;
        let n = r.schedule.nonempty_departures();
        ensure(n as f64 <= bound, || format!("M={m}: {n} nonempty departures > {bound}"))?;
        gaps.push(r.upper_bound - r.lower_bound);
    }
    ensure(gaps[1] < gaps[0], || format!("gap does not shrink: {gaps:?}"))?;
    Ok(format!("oracle {oracle:.4}, gap M=8 {:.4}, M=16 {:.4}", gaps[0], gaps[1]))
}

fn consistent(label: &str, inst: &Instance, r: &SolveReport) -> Result<(), String> {
    let v = eval_objective(inst, &r.schedule);
    ensure((v - r.upper_bound).abs() <= 1e-9, || {
        format!("{label}: re-evaluated {v} vs reported {}", r.upper_bound)
    })?;
    ensure(r.lower_bound <= r.upper_bound, || {
        format!("{label}: LB {} > UB {}", r.lower_bound, r.upper_bound)
    })?;
    ensure(check_feasible(inst, &r.schedule, inst.variant.allows_return()).feasible, || {
        format!("{label}: infeasible")
    })
}

fn criterion_7() -> Check {
    let mut n = 0;
    let mut run = |label: &str, inst: &Instance, r: Result<SolveReport, shuttle_sched::Error>| -> Result<(), String> {
        let r = r.map_err(|e| format!("{label}: {e}"))?;
        n += 1;
        consistent(label, inst, &r)
    };
    let cst = |v: Variant, s: usize| Instance::new(v, 3.0, 0.4, 1.5, s, DemandCurve::constant(5.0, 10.0).unwrap()).unwrap();
    for s in [4, 7] {
        let i = cst(Variant::NoreturnMax, s);
        run("constant noreturn max", &i, constant::solve_noreturn(&i))?;
        let i = cst(Variant::NoreturnAve, s);
        run("constant noreturn ave", &i, constant::solve_noreturn(&i))?;
        let i = cst(Variant::ReturnMax, s);
        run("constant return max", &i, constant::solve_return_max(&i))?;
        let i = cst(Variant::ReturnAveConstant, s);
        run("constant return ave", &i, constant::solve_return_ave(&i))?;
    }
    let curve = DemandCurve::piecewise_affine(vec![(0.0, 0.0), (2.0, 1.0), (3.0, 5.0), (6.0, 7.0)]).unwrap();
    for s in [3, 5] {
        let i = Instance::new(Variant::NoreturnMax, 3.0, 0.3, 0.0, s, curve.clone()).unwrap();
        run("bisection", &i, noreturn_max::solve(&i, 1e-5))?;
        let i = i.with_variant(Variant::NoreturnAve);
        run("average graph", &i, noreturn_ave::solve(&i, 8))?;
    }
    let st = DemandCurve::step_from_jumps(4.0, &[(0.5, 3.0), (1.5, 2.0), (3.0, 4.0)]).unwrap();
    let i = Instance::new(Variant::NoreturnMax, 3.0, 0.0, 0.0, 3, st).unwrap();
    run("step max", &i, step::solve_max(&i))?;
    let i = i.with_variant(Variant::NoreturnAve);
    run("step ave", &i, step::solve_ave(&i))?;
    let i = Instance::new(Variant::ReturnMax, 2.0, 0.1, 1.0, 1, curve.clone()).unwrap();
    run("return graph", &i, return_max::solve(&i, 4, false))?;
    for id in ["1P", "2P"] {
        let i = synthetic::instance(Variant::NoreturnMax, synthetic::by_id(id).unwrap(), 100).unwrap();
        run("bisection synthetic", &i, noreturn_max::solve(&i, 1e-4))?;
    }
    let i = Instance::new(Variant::NoreturnMax, 3.0, 0.2, 0.0, 3, curve).unwrap();
    run("oracle", &i, brute_noreturn(&i, 7, Objective::Max))?;
    assert_eq!(i.demand.kind(), CurveKind::PiecewiseAffine);
    Ok(format!("{n} solver runs"))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 7] = [
        ("pseudo-inverse invariants", criterion_1),
        ("constant-demand closed forms", criterion_2),
        ("binary search", criterion_3),
        ("average no-return graph", criterion_4),
        ("step DP exactness", criterion_5),
        ("return graph, one shuttle", criterion_6),
        ("cross-solver consistency", criterion_7),
    ];
    let limits = [5.0, 10.0, 8.0, 30.0, 60.0, 120.0, 60.0];
    let mut failed = Vec::new();
    writeln!(std::io::stdout().lock()).expect("stdout is writable");
    for (i, ((name, check), limit)) in criteria.iter().zip(limits).enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(msg) if secs <= limit => Ok(msg),
            Ok(msg) => Err(format!("{msg}; took {secs:.2} s, limit {limit} s")),
            Err(e) => Err(e),
        };
        let line = match outcome {
            Ok(msg) => format!("criterion {}: PASS  {name} ({secs:.2} s): {msg}", i + 1),
            Err(e) => {
                failed.push(i + 1);
                format!("criterion {}: FAIL  {name} ({secs:.2} s): {e}", i + 1)
            }
        };
        // straight to the stream so the lines show without --nocapture
        writeln!(std::io::stdout().lock(), "{line}").expect("stdout is writable");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
