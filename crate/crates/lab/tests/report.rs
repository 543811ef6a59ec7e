use ricci_lab::config::ScenarioConfig;
use ricci_lab::report::{emit_report, Artifact, Check, Outcome, NO_CHECKS};

#[test]
fn empty_report_list_is_marked() {
    let tmp = tempfile::tempdir().unwrap();
    let outcome = Outcome::new("energy");
    let written = emit_report(tmp.path(), &outcome, &ScenarioConfig::default()).unwrap();
    assert_eq!(written.len(), 1);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&written[0]).unwrap()).unwrap();
    assert_eq!(summary["status"], NO_CHECKS);
    assert_eq!(summary["checks"].as_array().unwrap().len(), 0);
    assert!(!outcome.passed());
}

#[test]
fn artifacts_are_written_before_the_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outcome = Outcome::new("flow");
    outcome.checks.push(Check::at_most("radius-law", 1e-9, 1e-6, ""));
    outcome.artifacts.push(Artifact::dat("radius.dat", ["t", "r^2"], &[(0.0, 1.0)]));
    let written = emit_report(tmp.path(), &outcome, &ScenarioConfig::default()).unwrap();
    let names: Vec<String> = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["radius.dat", "summary.json"]);
    let again = tmp.path().join("again");
    emit_report(&again, &outcome, &ScenarioConfig::default()).unwrap();
    assert_eq!(
        std::fs::read(tmp.path().join("summary.json")).unwrap(),
        std::fs::read(again.join("summary.json")).unwrap()
    );
}
