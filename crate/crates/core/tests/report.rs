use std::fs;

use limbgo_core::report::{
    aggregate, export_report, read_per_trial_csv, reaggregate, render_summary_csv, rms, DofLabel,
    PER_TRIAL_CSV, PLOT_DATA_JSON, SUMMARY_CSV, SUMMARY_JSON,
};
use limbgo_core::sim::{run_study, Movement, StudyConfig};
use limbgo_core::solver::SolveMode;
use limbgo_core::{Error, StudyReport};
use proptest::prelude::*;

#[test]
fn rms_examples() {
    assert_eq!(rms(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
    assert_eq!(rms(&[-2.5; 7]).unwrap(), 2.5);
    assert!((rms(&[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
    assert!(matches!(rms(&[]), Err(Error::EmptySeries)));
}

#[test]
fn aggregate_examples() {
    let a = aggregate(&[2.0, 2.0, 2.0]).unwrap();
    assert_eq!((a.mean, a.sd), (2.0, Some(0.0)));
    let a = aggregate(&[1.0, 3.0]).unwrap();
    assert_eq!(a.mean, 2.0);
    assert!((a.sd.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    let a = aggregate(&[4.2]).unwrap();
    assert_eq!((a.n, a.mean, a.sd), (1, 4.2, None));
    assert!(aggregate(&[]).is_err());
}

fn small_study(noise: bool) -> StudyReport {
    let mut c = StudyConfig::for_movement(Movement::ShoulderRotation);
    c.n_trials = 4;
    c.measurement_noise.enabled = noise;
    c.artefacts.enabled = noise;
    run_study(&c).unwrap()
}

#[test]
fn export_round_trip_reproduces_the_summary() {
    let report = small_study(true);
    let dir = tempfile::tempdir().unwrap();
    let written = export_report(&report, dir.path(), true).unwrap();
    assert_eq!(written.len(), 4);
    for name in [SUMMARY_CSV, PER_TRIAL_CSV, SUMMARY_JSON, PLOT_DATA_JSON] {
        assert!(dir.path().join(name).is_file());
    }
    let records = read_per_trial_csv(&dir.path().join(PER_TRIAL_CSV)).unwrap();
    assert_eq!(records, report.records());
    let rebuilt = reaggregate(report.metadata.clone(), &records).unwrap();
    assert_eq!(rebuilt, report);
    assert_eq!(render_summary_csv(&rebuilt), fs::read_to_string(dir.path().join(SUMMARY_CSV)).unwrap());
    let json: StudyReport = serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_JSON)).unwrap()).unwrap();
    assert_eq!(json, report);
}

#[test]
fn re_export_is_byte_identical() {
    let report = small_study(true);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    export_report(&report, a.path(), true).unwrap();
    export_report(&report, b.path(), true).unwrap();
    for name in [SUMMARY_CSV, PER_TRIAL_CSV, SUMMARY_JSON, PLOT_DATA_JSON] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn tables_have_fixed_headers_and_units() {
    let report = small_study(false);
    let summary = render_summary_csv(&report);
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("dof,mode,unit,n_trials,mean,sd"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * DofLabel::all().len());
    assert!(rows.iter().any(|r| r.starts_with("elbow.abduction_adduction,go,deg,4,")));
    assert!(rows.iter().any(|r| r.starts_with("wrist.dislocation,segmental,mm,4,")));
    for d in &report.dofs {
        assert!(d.mean < 1e-4, "{} {}", d.dof, d.mode);
    }
    let dir = tempfile::tempdir().unwrap();
    export_report(&report, dir.path(), false).unwrap();
    let long = fs::read_to_string(dir.path().join(PER_TRIAL_CSV)).unwrap();
    assert!(long.starts_with("trial,dof,mode,unit,rms\n1,"));
    assert!(long.contains(",shoulder.internal_external_rotation,go,rad,"));
    assert!(!dir.path().join(PLOT_DATA_JSON).exists());
}

#[test]
fn summary_records_stats_conventions() {
    let report = small_study(true);
    let json = serde_json::to_value(&report).unwrap();
    let meta = &json["metadata"];
    assert_eq!(meta["sd_convention"], "sample (n-1)");
    assert!(meta["config_hash"].as_str().unwrap().len() == 64);
    assert!(meta["constraints"]["go_frames_checked"].as_u64().unwrap() == 404);
    for d in &report.dofs {
        let recomputed = aggregate(&d.values()).unwrap();
        assert_eq!(recomputed.mean, d.mean);
        assert_eq!(recomputed.sd, d.sd);
    }
    assert!(report.get(DofLabel::all()[0], SolveMode::Go).is_some());
}

#[test]
fn corrupt_long_table_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "trial,dof,mode,unit,rms\n1,elbow.flexion_extension,go,rad,0.1\n2,elbow.flexion_extension,go,rad\n").unwrap();
    match read_per_trial_csv(&path).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("{other}"),
    }
}

proptest! {
    #[test]
    fn rms_ignores_order_and_sign(mut v in prop::collection::vec(-1e3f64..1e3, 1..40), flips in prop::collection::vec(any::<bool>(), 40)) {
        let a = rms(&v).unwrap();
        v.reverse();
        for (x, f) in v.iter_mut().zip(&flips) {
            if *f { *x = -*x; }
        }
        let b = rms(&v).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }
}
