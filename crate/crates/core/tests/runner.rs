use cocycle_lab::config::{ExperimentConfig, Overrides};
use cocycle_lab::error::Error;
use cocycle_lab::runner::{emit_report, exit_code, parse_summary, run_experiment, Status};

const IDENTITY: &str = r#"
seed = 1
estimator = "harmonic"

[ensemble]
dim = 2
kind = { type = "discrete", atoms = [[[1.0, 0.0], [0.0, 1.0]]], weights = [1.0] }

[walk]
n = 10
paths = 1000
t = 1.5
"#;

fn identity_in(dir: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml_str(IDENTITY).unwrap();
    cfg.apply(&Overrides {
        out: Some(dir.to_path_buf()),
        ..Default::default()
    });
    cfg
}

#[test]
fn identity_run_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let outcomes = run_experiment(&identity_in(dir.path())).unwrap();
    assert_eq!(outcomes.len(), 1);
    let s = &outcomes[0].summary;
    assert_eq!((s.value, s.stderr, s.status), (Some(1.5), Some(0.0), Status::Ok));
    assert_eq!(exit_code(&outcomes), 0);
    let text = std::fs::read_to_string(&outcomes[0].json_path).unwrap();
    assert_eq!(&parse_summary(&text).unwrap(), s);
    let report = emit_report(dir.path()).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.worst(), Status::Ok);
    assert!(report.render().lines().nth(1).unwrap().contains("harmonic"));
}

#[test]
fn statuses_order_by_severity() {
    use Status::*;
    let all = [Ok, Pass, Diagnostic, Warning, Fail, Error];
    assert!(all.windows(2).all(|w| w[0] < w[1]));
    let codes: Vec<i32> = all.iter().map(|s| s.exit_code()).collect();
    assert_eq!(codes, [0, 0, 0, 2, 1, 1]);
}

#[test]
fn empty_directory_is_a_missing_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_report(dir.path()), Err(Error::MissingRun(_))));
    assert!(matches!(
        emit_report(&dir.path().join("absent")),
        Err(Error::MissingRun(_))
    ));
}

#[test]
fn schema_major_version_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let outcomes = run_experiment(&identity_in(dir.path())).unwrap();
    let text = std::fs::read_to_string(&outcomes[0].json_path).unwrap();
    let minor = text.replace("\"schema_version\": \"1.0\"", "\"schema_version\": \"1.7\"");
    assert!(parse_summary(&minor).is_ok());
    let major = text.replace("\"schema_version\": \"1.0\"", "\"schema_version\": \"2.0\"");
    assert!(matches!(parse_summary(&major), Err(Error::SchemaVersion(_))));
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("schema_version");
    assert!(matches!(parse_summary(&v.to_string()), Err(Error::SchemaVersion(_))));
}

#[test]
fn unknown_estimator_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = identity_in(dir.path());
    cfg.estimator = Some("nonsense".into());
    assert!(run_experiment(&cfg).is_err());
}
