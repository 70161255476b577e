//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion outside `KNOWN_RED` fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use smc_lab::control::{ihssmc_surfaces, sign, IhssmcParams};
use smc_lab::design::{
    crane_linearization, sliding_char_coeffs, sliding_linearization, solve_surface_params, LinearizationConstants,
};
use smc_lab::experiments::{builtin, run_counterexample, run_scenario, CoupledBase};
use smc_lab::linalg::{ackermann_gain, closed_loop, eigenvalues};
use smc_lab::ode::step_order_check;
use smc_lab::plant::reduced_sliding_dynamics;
use smc_lab::poly::{hurwitz_check, roots, C64};
use smc_lab::{CraneParams, Error, IntegratorConfig, StateVector, Status};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Criteria whose published numbers are inconsistent with the stated plant
/// parameters. They still print FAIL; they just do not fail the run.
const KNOWN_RED: &[usize] = &[3];

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sorted_re(ev: &[C64]) -> Vec<f64> {
    let mut v: Vec<f64> = ev.iter().map(|z| z.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sliding_eigenvalues() -> Outcome {
    let lc = LinearizationConstants::from(&CraneParams::default());
    let ev = eigenvalues(&sliding_linearization(&lc, 0.8, 35.0, 10.0).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let imag = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let got = sorted_re(&ev);
    let dev = max_dev(&got, &[-0.6527, 5.1438, 11.3918]);
    check(dev <= 1e-3 && imag <= 1e-3, format!("eigenvalues {got:.4?}, max deviation {dev:.1e}"))
}

fn corrected_design() -> Outcome {
    let lc = LinearizationConstants::from(&CraneParams::default());
    let d = solve_surface_params(&lc, 12.0, 47.0, 60.0).map_err(|e| e.to_string())?;
    let got = [d.c1, d.c2, d.alpha1];
    let dev = max_dev(&got, &[1.2766, -21.8964, 10.3638]);
    let l = sliding_char_coeffs(&lc, d.c1, d.c2, d.alpha1).map_err(|e| e.to_string())?;
    let rel = [(l.l1, 12.0), (l.l2, 47.0), (l.l3, 60.0)].iter().map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
    check(
        dev <= 1e-3 && rel <= 1e-9,
        format!("(c1, c2, alpha1) = {got:.4?}, deviation {dev:.1e}, round-trip relative residual {rel:.1e}"),
    )
}

fn pole_placement() -> Outcome {
    let plant = crane_linearization(&CraneParams::default());
    let poles: Vec<C64> = [-3.0, -2.8, -2.6, -2.4].iter().map(|&p| C64::new(p, 0.0)).collect();
    let k = ackermann_gain(&plant, &poles).map_err(|e| e.to_string())?;
    let k: Vec<f64> = k.iter().copied().collect();
    let placed = sorted_re(&eigenvalues(&closed_loop(&plant, &k.clone().into())).map_err(|e| e.to_string())?);
    let pole_dev = max_dev(&placed, &[-3.0, -2.8, -2.6, -2.4]);
    let k_dev = max_dev(&k, &[1.3051, 1.9468, 7.3103, -2.1602]);
    check(
        k_dev <= 1e-3 && pole_dev <= 1e-3,
        format!(
            "K = {k:.4?} (published gain off by up to {k_dev:.3}; it corresponds to a 0.244 m rope), \
             closed-loop eigenvalues within {pole_dev:.1e} of the poles"
        ),
    )
}

fn within(start: Instant, limit: Duration) -> Outcome {
    let el = start.elapsed();
    check(el <= limit, format!("{el:.2?} wall clock (limit {limit:?})"))
}

fn fig_b() -> Outcome {
    let start = Instant::now();
    let (traj, _) = run_scenario(&builtin("fig_b").unwrap()).map_err(|e| e.to_string())?;
    let runtime = within(start, Duration::from_secs(10))?;
    let e = traj.final_state().unwrap().to_error(2.0);
    let s1_late = traj
        .times
        .iter()
        .zip(&traj.surfaces)
        .filter(|(t, _)| **t >= 6.0)
        .map(|(_, s)| s.map_or(f64::INFINITY, |s| s.s1.abs()))
        .fold(0.0, f64::max);
    let late = traj.window_max_abs(8.0, 10.0, |s| s.x3).unwrap_or(0.0);
    let early = traj.window_max_abs(2.0, 4.0, |s| s.x3).unwrap_or(f64::INFINITY);
    check(
        traj.status == Status::Completed
            && e.x1.abs() <= 0.05
            && e.x2.abs() <= 0.05
            && s1_late <= 1e-2
            && late >= 0.5 * early,
        format!(
            "cart error ({:.1e}, {:.1e}), max |s1| after 6 s {s1_late:.1e}, swing {late:.3} vs {early:.3} rad, {runtime}",
            e.x1, e.x2
        ),
    )
}

fn fig_c() -> Outcome {
    let start = Instant::now();
    let (traj, _) = run_scenario(&builtin("fig_c").unwrap()).map_err(|e| e.to_string())?;
    let runtime = within(start, Duration::from_secs(5))?;
    let e = traj.final_state().unwrap().to_error(2.0).max_norm();
    check(traj.status == Status::Completed && e < 0.02, format!("final error {e:.1e}, {runtime}"))
}

fn fig_d() -> Outcome {
    let (traj, _) = run_scenario(&builtin("fig_d").unwrap()).map_err(|e| e.to_string())?;
    let Status::Diverged { t } = traj.status else {
        return Err(format!("status {} instead of divergence", traj.status.token()));
    };
    let first = traj.first_surface_crossing().ok_or("S never crosses zero")?;
    let worst = traj.surfaces[first..].iter().map(|s| s.map_or(f64::INFINITY, |s| s.s3.abs())).fold(0.0, f64::max);
    check(
        t < 10.0 && worst <= 1e-2,
        format!(
            "diverged at t = {t:.3} s; max |S| from first crossing (t = {:.3} s) to abort {worst:.1e}",
            traj.times[first]
        ),
    )
}

fn fig_e() -> Outcome {
    let (traj, _) = run_scenario(&builtin("fig_e").unwrap()).map_err(|e| e.to_string())?;
    let e = traj.final_state().unwrap().to_error(2.0).max_norm();
    check(traj.status == Status::Completed && e < 0.05, format!("final error {e:.1e}"))
}

fn counterexample() -> Outcome {
    let cfg = IntegratorConfig { t_end: 10.0, ..Default::default() };
    let r = run_counterexample(-1.0, StateVector::new(1.0, 0.0, 0.0, 0.0), "sin", CoupledBase::Degenerate, &cfg)
        .map_err(|e| e.to_string())?;
    check(
        r.trajectory.status == Status::Completed && r.offset_drift <= 1e-6 && r.min_joint_magnitude >= 0.5,
        format!("offset drift {:.1e}, min max(|x1|, |x3|) {:.3}", r.offset_drift, r.min_joint_magnitude),
    )
}

fn component() -> impl Strategy<Value = f64> {
    // Exact zeros are frequent enough to exercise sign(0) = 0.
    proptest::prop_oneof![1 => proptest::strategy::Just(0.0), 9 => -10.0..10.0f64]
}

fn surface_collapse() -> Outcome {
    let p = IhssmcParams::default();
    let mut runner = TestRunner::deterministic();
    let strat = proptest::array::uniform4(component());
    let mut zeros = 0;
    for _ in 0..10_000 {
        let [a, x2, x3, x4] = strat.new_tree(&mut runner).unwrap().current();
        // put x1 exactly on target when `a` is zero
        let x1 = if a == 0.0 { p.x_d } else { a };
        let s = ihssmc_surfaces(&StateVector::new(x1, x2, x3, x4), &p);
        let collapsed = sign(s.s1) * ((s.s1.abs() + p.c2 * x3.abs()) + p.c3 * x4.abs());
        if s.s3 != collapsed {
            return Err(format!("s3 = {} but collapse gives {collapsed} at ({x1}, {x2}, {x3}, {x4})", s.s3));
        }
        if (s.s3 == 0.0) != (s.s1 == 0.0) {
            return Err(format!("s3 = {}, s1 = {} at ({x1}, {x2}, {x3}, {x4})", s.s3, s.s1));
        }
        zeros += usize::from(s.s1 == 0.0);
    }
    Ok(format!("10000 states, identity exact, {zeros} with s1 = 0"))
}

fn property_suites() -> Outcome {
    let mut notes = Vec::new();

    let (_, m) = run_scenario(&builtin("pendulum").unwrap()).map_err(|e| e.to_string())?;
    let drift = m.energy_drift.ok_or("no energy drift")?;
    if drift > 1e-6 {
        return Err(format!("energy drift {drift:.1e}"));
    }
    notes.push(format!("energy drift {drift:.1e}"));

    let cp = CraneParams::default();
    let lc = LinearizationConstants::from(&cp);
    let mut worst_fd = 0.0_f64;
    for (c1, c2, a1) in [(0.8, 35.0, 10.0), (1.2766, -21.8964, 10.3638)] {
        let a2 = sliding_linearization(&lc, c1, c2, a1).map_err(|e| e.to_string())?;
        let h = 1e-6;
        for c in 0..3 {
            let mut hi = [0.0; 3];
            let mut lo = [0.0; 3];
            hi[c] = h;
            lo[c] = -h;
            let fh = reduced_sliding_dynamics(hi[0], hi[1], hi[2], &cp, c1, c2, a1).map_err(|e| e.to_string())?;
            let fl = reduced_sliding_dynamics(lo[0], lo[1], lo[2], &cp, c1, c2, a1).map_err(|e| e.to_string())?;
            for r in 0..3 {
                worst_fd = worst_fd.max(((fh[r] - fl[r]) / (2.0 * h) - a2[(r, c)]).abs());
            }
        }
    }
    if worst_fd > 1e-4 {
        return Err(format!("finite-difference Jacobian deviates by {worst_fd:.1e}"));
    }
    notes.push(format!("A2 vs finite differences {worst_fd:.1e}"));

    let mut runner = TestRunner::deterministic();
    let draw = (0.2..5.0f64, 0.2..5.0f64, 0.1..2.0f64, -5.0..5.0f64, -50.0..50.0f64, -20.0..20.0f64);
    let mut checked = 0;
    for _ in 0..1000 {
        let (m, mc, l, c1, c2, a1) = draw.new_tree(&mut runner).unwrap().current();
        let lc = LinearizationConstants::from(&CraneParams {
            cart_mass: mc,
            payload_mass: m,
            rope_length: l,
            ..Default::default()
        });
        match sliding_char_coeffs(&lc, c1, c2, a1) {
            Ok(k) => {
                if (k.l3 - c1 * k.l2).abs() > 1e-9 * k.l3.abs().max(1.0) {
                    return Err(format!("l3 = {} but c1 l2 = {}", k.l3, c1 * k.l2));
                }
                checked += 1;
            }
            Err(Error::SingularGain { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    notes.push(format!("l3 = c1 l2 on {checked} draws"));

    let mut agree = 0;
    let mut skipped = 0;
    for i in 0..1000 {
        let n = 3 + i % 2;
        let c = proptest::collection::vec(-10.0..10.0f64, n).new_tree(&mut runner).unwrap().current();
        let mut coeffs = vec![1.0];
        coeffs.extend(c);
        let r = roots(&coeffs).map_err(|e| e.to_string())?;
        let max_re = r.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re.abs() < 1e-9 {
            skipped += 1;
            continue;
        }
        match hurwitz_check(&coeffs) {
            Ok(v) if v == (max_re < 0.0) => agree += 1,
            Ok(v) => return Err(format!("Routh says {v} for {coeffs:?}, max real part {max_re}")),
            Err(Error::DegenerateRouth { .. }) if max_re >= 0.0 => agree += 1,
            Err(e) => return Err(format!("{e} for {coeffs:?}")),
        }
    }
    notes.push(format!("Routh agrees on {agree} polynomials ({skipped} marginal skipped)"));

    let order = step_order_check();
    if !(4.5..=5.5).contains(&order) {
        return Err(format!("observed order {order:.3}"));
    }
    notes.push(format!("observed order {order:.3}"));
    Ok(notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("sliding-dynamics eigenvalues", sliding_eigenvalues),
        ("corrected design parameters", corrected_design),
        ("pole-placement gain", pole_placement),
        ("incremental law: residual swing", fig_b),
        ("linear baseline regulation", fig_c),
        ("aggregated law: divergence on the surface", fig_d),
        ("corrected aggregated law: convergence", fig_e),
        ("counterexample conservation", counterexample),
        ("surface collapse identity", surface_collapse),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    let mut known = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        match f() {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {n:>2} {name}: {detail}");
                if KNOWN_RED.contains(&n) {
                    known += 1;
                } else {
                    failures += 1;
                }
            }
        }
    }
    println!(
        "{} of {} criteria pass; {known} known-red, {failures} unexpected failures",
        criteria.len() - failures - known,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
