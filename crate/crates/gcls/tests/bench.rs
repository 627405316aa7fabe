//! Benchmark harness behavior on small synthetic experiments.

use gcls::bench::{run_experiment, ExperimentConfig, ExperimentReport};
use gcls_core::SelectorKind;

fn config(noise: Option<f64>) -> ExperimentConfig {
    let noise = noise.map_or(String::new(), |v| format!(r#","noise":{{"variance":{v}}}"#));
    ExperimentConfig::from_json(&format!(
        r#"{{"dataset":{{"source":"synthetic","kind":"swiss_roll","n":500}},"k":30,
            "methods":["random"],"landmark_counts":[100],"trials":20,"master_seed":3,
            "measure_runtime":false{noise}}}"#
    ))
    .unwrap()
}

fn random_mean(noise: Option<f64>) -> f64 {
    let report = run_experiment(&config(noise)).unwrap();
    report
        .row(SelectorKind::Random, 100)
        .unwrap()
        .mean_error
        .unwrap()
}

#[test]
fn noise_raises_random_error_on_average() {
    let clean = random_mean(None);
    let noisy = random_mean(Some(0.01));
    assert_ne!(clean, noisy);
    assert!(clean <= noisy, "clean {clean} vs noisy {noisy}");
    // Small variances barely move the graph; a large one clearly hurts.
    let loud = random_mean(Some(1.0));
    assert!(
        loud > noisy && noisy >= clean,
        "clean {clean}, 0.01 {noisy}, 1.0 {loud}"
    );
}

#[test]
fn report_json_round_trips_through_a_file() {
    let mut cfg = config(None);
    cfg.trials = 2;
    cfg.methods = vec![
        SelectorKind::Gcls,
        SelectorKind::MaxMinGeo,
        SelectorKind::Random,
    ];
    cfg.landmark_counts = vec![40];
    let report = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    std::fs::write(&path, report.to_json().unwrap()).unwrap();
    let back = ExperimentReport::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, report);
    let row = back.row(SelectorKind::Gcls, 40).unwrap();
    assert_eq!(row.bounds.len(), 2);
    assert!(row.bounds.iter().all(|b| b.is_some_and(|v| v > 0.0)));
}
