mod common;

use detumble::bdot::DerivativeSource;
use detumble::exec::Execution;
use detumble::sim::{
    emit_series, run_case, run_suite, ControllerKind, RunConfig, RunStatus, TruthModel, SERIES_HEADER,
};
use detumble::DEG;

use common::{case_config, configs_dir, CASES};

fn short(controller: ControllerKind, w: [f64; 3], minutes: f64) -> RunConfig {
    RunConfig {
        max_duration: minutes * 60.0,
        ..RunConfig::new("short", controller, w)
    }
}

#[test]
fn shipped_configs_load() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.truth_model, TruthModel::Igrf);
        assert_eq!(cfg.max_duration, 9000.0);
        n += 1;
    }
    assert_eq!(n, 8);
}

#[test]
fn series_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_case(&short(ControllerKind::Nmpc, [1.0, -2.0, 0.5], 1.0)).unwrap();
    let paths = emit_series(&r, dir.path(), true).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_s,omega_x_dps,omega_y_dps,omega_z_dps,m_x_Am2,B_body_x_T,B_body_y_T,B_body_z_T,V_J,F_norm"
    );
    assert_eq!(SERIES_HEADER.join(","), text.lines().next().unwrap());
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() < 1e-12 && (first[2] + 2.0).abs() < 1e-12 && (first[3] - 0.5).abs() < 1e-12);
    assert_eq!(text.lines().count(), r.series.len() + 1);
    assert!(paths.iter().any(|p| p.to_string_lossy().ends_with("_telemetry.csv")));
    assert!(
        paths
            .iter()
            .filter(|p| p.extension().is_some_and(|e| e == "svg"))
            .count()
            == 2
    );
}

#[test]
fn bdot_series_leaves_f_norm_empty() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_case(&short(ControllerKind::Bdot, [1.0, -2.0, 0.5], 0.5)).unwrap();
    let paths = emit_series(&r, dir.path(), false).unwrap();
    assert_eq!(paths.len(), 1);
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn output_is_byte_identical_across_runs_and_execution_modes() {
    let cfgs = vec![
        short(ControllerKind::Bdot, [2.0, 1.0, -1.0], 5.0),
        short(ControllerKind::Nmpc, [2.0, 1.0, -1.0], 5.0),
    ];
    let render = |exec| {
        let dir = tempfile::tempdir().unwrap();
        let report = run_suite(&cfgs, exec).unwrap();
        report
            .results()
            .enumerate()
            .map(|(k, r)| {
                let mut r = r.clone();
                r.name = format!("run{k}");
                let p = emit_series(&r, dir.path(), false).unwrap();
                std::fs::read(&p[0]).unwrap()
            })
            .collect::<Vec<_>>()
    };
    let a = render(Execution::Sequential);
    assert_eq!(a, render(Execution::Sequential));
    assert_eq!(a, render(Execution::default()));
}

#[test]
fn bdot_cannot_remove_a_pure_x_spin() {
    let mut cfg = RunConfig::new("blind", ControllerKind::Bdot, [2.0, 0.01, 0.01]);
    cfg.max_duration = 9000.0;
    let r = run_case(&cfg).unwrap();
    assert!(!r.detumbled);
    assert!(r.final_omega_dps.x.abs() > 1.0);
    assert!(r.final_omega_dps.y.abs() < 0.1 && r.final_omega_dps.z.abs() < 0.1);
}

#[test]
fn idealized_bdot_never_adds_energy() {
    let mut cfg = case_config(1, "bdot");
    cfg.bdot.derivative = DerivativeSource::Idealized;
    cfg.max_duration = 5400.0;
    let r = run_case(&cfg).unwrap();
    assert!(r.series.windows(2).all(|w| w[1].energy - w[0].energy < 1e-9));
    assert!(r.series.last().unwrap().energy < 0.5 * r.series[0].energy);
}

#[test]
fn case1_bdot_leaves_x_rate() {
    let r = run_case(&case_config(1, "bdot")).unwrap();
    assert!(!r.detumbled);
    let w = r.final_omega_dps;
    assert!(w.x.abs() > 0.1, "{w:?}");
    assert!(w.y.abs() < 2.878490 && w.z.abs() < 1.0);
}

#[test]
fn termination_is_first_sample_below_threshold() {
    for n in CASES {
        let cfg = case_config(n, "nmpc");
        let r = run_case(&cfg).unwrap();
        assert_eq!(r.status, RunStatus::Completed);
        assert!(r.max_abs_command <= 1.0);
        let Some(td) = r.detumble_time else { continue };
        let thr = cfg.termination_dps * DEG;
        let last = r.series.last().unwrap();
        assert_eq!(last.t, td);
        assert!(last.omega.iter().all(|w| w.abs() < thr));
        let per = cfg.steps_per_control();
        assert!(r.series[..r.series.len() - 1]
            .iter()
            .step_by(per)
            .all(|s| s.omega.iter().any(|w| w.abs() >= thr)));
    }
}

#[test]
fn failed_case_does_not_abort_suite() {
    let good = short(ControllerKind::Bdot, [1.0, 1.0, 1.0], 0.2);
    let mut bad = good.clone();
    bad.name = "bad".into();
    bad.igrf_file = Some("/nonexistent/igrf.txt".into());
    let report = run_suite(&[good, bad], Execution::default()).unwrap();
    assert_eq!(report.entries.len(), 2);
    assert!(report.entries[0].result.is_ok());
    assert!(report.entries[1].result.is_err());
    assert_eq!(report.exit_code(), 2);
}
