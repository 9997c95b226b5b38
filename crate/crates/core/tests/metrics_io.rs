use wsn_game::baselines::ScenarioId;
use wsn_game::config::{MaliciousSpec, SimConfig};
use wsn_game::error::Error;
use wsn_game::metrics::{self, export, import_jsonl, Format, MetricsBundle, CSV_HEADER};
use wsn_game::sim::run_simulation;

#[test]
fn empty_result_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut res = run_simulation(&SimConfig::default()).unwrap();
    res.rounds.clear();
    let path = dir.path().join("empty.csv");
    export(&res, Format::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
}

#[test]
fn default_run_has_one_row_per_member_round() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_simulation(&SimConfig::default()).unwrap();
    let path = dir.path().join(metrics::result_file_name(&res, Format::Csv));
    assert!(path.ends_with("repeated_ON_iso_0.csv"));
    export(&res, Format::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 1100);
    assert!(!dir.path().join("repeated_ON_iso_0.csv.part").exists());
}

#[test]
fn jsonl_round_trip_reproduces_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimConfig {
        hw_fault_fraction: 0.2,
        seed: 5,
        ..SimConfig::default()
    };
    let res = run_simulation(&cfg).unwrap();
    let path = dir.path().join("run.jsonl");
    export(&res, Format::Jsonl, &path).unwrap();
    let back = import_jsonl(&path).unwrap();
    assert_eq!(back, res.rounds);
    let a = MetricsBundle::from_result(&res, 0.0).unwrap();
    let b = MetricsBundle::from_records(ScenarioId::Repeated, &back, 0.0).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_eq!(a.hwl, res.hwl);

    let bpath = dir.path().join("m.json");
    metrics::write_bundle_json(&a, &bpath).unwrap();
    let c = metrics::read_bundle_json(&bpath).unwrap();
    assert_eq!(format!("{a:?}"), format!("{c:?}"));
}

#[test]
fn summed_utility_over_rounds_is_dt() {
    let cfg = SimConfig {
        malicious: MaliciousSpec::Count(3),
        ..SimConfig::default()
    };
    let res = run_simulation(&cfg).unwrap();
    let total: f64 = res.rounds.iter().flat_map(|r| &r.cms).map(|c| c.utility).sum();
    let dt = res.dt().unwrap();
    assert!((total / res.rounds.len() as f64 - dt).abs() <= 1e-9 * dt.abs());
}

#[test]
fn io_errors_name_the_path() {
    let res = run_simulation(&SimConfig::default()).unwrap();
    let path = std::path::Path::new("/nonexistent-dir/sub/out.csv");
    let err = export(&res, Format::Csv, path).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent-dir/sub/out.csv"), "{err}");
}

#[test]
fn lost_power_requires_paired_runs() {
    let a = run_simulation(&SimConfig::default()).unwrap();
    let b = run_simulation(&SimConfig {
        seed: 1,
        ..SimConfig::default()
    })
    .unwrap();
    assert!(metrics::lost_power(&a, &b).is_err());
    assert_eq!(metrics::lost_power(&a, &a).unwrap(), 0.0);
}
