use smc_lab::experiments::csv::to_csv_string;
use smc_lab::experiments::{
    builtin, builtins, emit_plot_data, export_csv, parse_csv, parse_scenario, run_counterexample, run_scenario,
    CoupledBase, MetricKind, PlotLayout, BUILTIN_NAMES,
};
use smc_lab::{IntegratorConfig, StateVector, Status};

fn run(name: &str) -> (smc_lab::Trajectory, smc_lab::experiments::MetricsReport) {
    run_scenario(&builtin(name).unwrap()).unwrap()
}

#[test]
fn every_builtin_reaches_a_terminal_status() {
    assert_eq!(builtins().len(), BUILTIN_NAMES.len());
    for s in builtins() {
        let start = std::time::Instant::now();
        let (traj, _) = run_scenario(&s).unwrap();
        assert!(!traj.is_empty(), "{}", s.name);
        assert!(start.elapsed().as_secs() < 60, "{} took {:?}", s.name, start.elapsed());
    }
    assert!(builtin("fig_z").is_none());
}

#[test]
fn incremental_law_leaves_residual_swing() {
    let (traj, m) = run("fig_b");
    assert_eq!(traj.status, Status::Completed);
    let f = traj.final_state().unwrap();
    assert!((f.x1 - 2.0).abs() <= 0.05 && f.x2.abs() <= 0.05);
    let late = traj.window_max_abs(8.0, 10.0, |s| s.x3).unwrap();
    let early = traj.window_max_abs(2.0, 4.0, |s| s.x3).unwrap();
    assert!(late >= 0.5 * early, "swing decays: {late} vs {early}");
    assert!(m.swing_amplitude_tail.unwrap() >= 0.05);
    let (_, mc) = run("fig_c");
    assert!(m.swing_amplitude_tail.unwrap() >= 10.0 * mc.swing_amplitude_tail.unwrap());
}

#[test]
fn linear_baseline_regulates_all_states() {
    let (traj, m) = run("fig_c");
    let e = traj.final_state().unwrap().to_error(2.0);
    assert!(e.max_norm() < 0.02, "{e:?}");
    assert!(m.final_error.unwrap() < 0.02);
    assert!(!traj.has_surfaces());
}

#[test]
fn original_aggregated_gains_diverge_on_the_surface() {
    let (traj, m) = run("fig_d");
    let t = match traj.status {
        Status::Diverged { t } => t,
        s => panic!("expected divergence, got {s:?}"),
    };
    assert!(t < 10.0);
    assert_eq!(m.divergence_time, Some(t));
    let first = traj.first_surface_crossing().expect("S crosses zero");
    let worst = traj.surfaces[first..].iter().map(|s| s.unwrap().s3.abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-2, "|S| = {worst} after reaching the surface");
}

#[test]
fn corrected_aggregated_gains_converge() {
    let (traj, _) = run("fig_e");
    assert_eq!(traj.status, Status::Completed);
    assert!(traj.final_state().unwrap().to_error(2.0).max_norm() < 0.05);
}

#[test]
fn metrics_are_deterministic() {
    for name in ["fig_b", "fig_d", "pendulum"] {
        let (ta, ma) = run(name);
        let (tb, mb) = run(name);
        assert_eq!(ma, mb);
        assert_eq!(ta.states, tb.states);
    }
}

#[test]
fn csv_has_one_row_per_sample() {
    let (traj, _) = run("fig_b");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig_b.csv");
    export_csv(&traj, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), traj.len() + 1);
    assert_eq!(traj.len(), traj.stats.accepted + 1);
    assert!(text.lines().last().unwrap().ends_with(",completed"));
    let back = parse_csv(&text).unwrap();
    assert_eq!(back.len(), traj.len());
    assert_eq!(back.status, Status::Completed);
}

#[test]
fn zero_horizon_gives_header_only_csv() {
    let s = builtin("fig_b").unwrap().with_integrator(IntegratorConfig { t_end: 0.0, ..Default::default() });
    let (traj, _) = run_scenario(&s).unwrap();
    assert_eq!(to_csv_string(&traj).lines().count(), 1);
}

#[test]
fn open_loop_csv_leaves_surfaces_blank() {
    let (traj, _) = run("counterexample");
    let text = to_csv_string(&traj);
    assert!(text.lines().nth(1).unwrap().contains(",,,ok"));
}

#[test]
fn plot_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let b = builtin("fig_b").unwrap();
    let (tb, _) = run_scenario(&b).unwrap();
    let files = emit_plot_data(&tb, PlotLayout::for_controller(&b.controller), dir.path(), "fig_b").unwrap();
    assert_eq!(files.iter().filter(|f| f.extension().unwrap() == "dat").count(), 4);

    let d = builtin("fig_d").unwrap();
    let (td, _) = run_scenario(&d).unwrap();
    let files = emit_plot_data(&td, PlotLayout::for_controller(&d.controller), dir.path(), "fig_d").unwrap();
    assert_eq!(files.iter().filter(|f| f.extension().unwrap() == "dat").count(), 6);
    assert!(dir.path().join("fig_d_S.dat").exists());
    let script = std::fs::read_to_string(dir.path().join("fig_d.gp")).unwrap();
    assert!(script.contains("fig_d_S.dat") && script.contains("layout 3,2"));
}

#[test]
fn pendulum_energy_is_conserved() {
    let (_, m) = run("pendulum");
    assert!(m.energy_drift.unwrap() <= 1e-6);
}

#[test]
fn counterexample_offset_is_conserved() {
    let r = run_counterexample(
        -1.0,
        StateVector::new(1.0, 0.0, 0.0, 0.0),
        "sin",
        CoupledBase::Degenerate,
        &IntegratorConfig::default(),
    )
    .unwrap();
    assert!(r.offset_drift <= 1e-6);
    assert!(r.min_joint_magnitude >= 0.5);
}

#[test]
fn counterexample_resists_feedback_too() {
    let r = run_counterexample(
        -1.0,
        StateVector::new(1.0, 0.0, 0.0, 0.0),
        "ihssmc",
        CoupledBase::Degenerate,
        &IntegratorConfig::default(),
    )
    .unwrap();
    assert!(r.offset_drift <= 1e-6, "drift {}", r.offset_drift);
    assert!(r.min_joint_magnitude >= 0.5);
}

#[test]
fn counterexample_over_crane_base() {
    let cfg = IntegratorConfig { t_end: 3.0, ..Default::default() };
    let base = CoupledBase::Crane(Default::default());
    let r = run_counterexample(2.0, StateVector::new(0.5, 0.0, 0.1, 0.0), "cos", base, &cfg).unwrap();
    assert!(r.offset_drift <= 1e-6);
}

#[test]
fn config_file_overrides_builtin() {
    let s = parse_scenario(
        "extends = fig_d\nname = fig_d_short\nt_end = 1\nrtol = 1e-6\natol = 1e-8\nmetrics = final_error\n",
    )
    .unwrap();
    assert_eq!(s.integrator.t_end, 1.0);
    assert_eq!(s.metrics, vec![MetricKind::FinalError]);
    let (traj, m) = run_scenario(&s).unwrap();
    assert_eq!(traj.status, Status::Completed);
    assert!(m.final_error.is_some() && m.divergence_time.is_none());
}
