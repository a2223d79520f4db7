use meanfield::output::Cell;
use meanfield::{execute, ExperimentConfig, Overrides, Runner};
use serde_json::{json, Value};

fn resolve(doc: Value) -> ExperimentConfig {
    ExperimentConfig::resolve(&doc, &Overrides::default()).expect("valid config")
}

fn float(cell: &Cell) -> f64 {
    match cell {
        Cell::Float(x) => *x,
        other => panic!("not a float: {other:?}"),
    }
}

#[test]
fn every_experiment_runs_at_small_scale() {
    let runner = Runner::new(1).unwrap();
    let docs = [
        json!({"experiment": "simulate", "parameters": {"N": 5, "t_final": 0.1}}),
        json!({"experiment": "wasserstein", "parameters": {"N": 6, "reps": 3}}),
        json!({"experiment": "dobrushin", "parameters": {"N": 8, "pairs": 2}}),
        json!({"experiment": "rate", "parameters": {"sizes": [4, 8, 16], "reps": 3, "dim": 1, "dt": 0.1}}),
        json!({"experiment": "hk", "parameters": {"sizes": [4, 8, 16], "reps": 3}}),
        json!({"experiment": "chaos", "parameters": {"N": 6, "runs": 50}}),
        json!({"experiment": "vortex", "parameters": {"N": 4, "t_final": 0.1, "dt": 0.01, "record_every": 1}}),
        json!({"experiment": "hierarchy", "parameters": {"levels": 4}}),
        json!({"experiment": "quantum", "parameters": {"M": 8, "particles": [2, 3], "t_final": 0.2, "dt": 0.1, "record_every": 1}}),
    ];
    for doc in docs {
        let config = resolve(doc);
        let outcome = runner.run(&config).unwrap_or_else(|e| panic!("{}: {e}", config.experiment));
        assert!(!outcome.tables.is_empty());
        for table in &outcome.tables {
            assert!(!table.rows.is_empty(), "{} is empty", table.file_name);
            assert!(table.rows.iter().all(|r| r.len() == table.header.len()));
        }
    }
}

#[test]
fn wasserstein_between_single_points_is_the_shift() {
    // one atom each: W_r is the distance between the atoms whatever r is
    let config = resolve(json!({
        "experiment": "wasserstein",
        "parameters": {"N": 1, "dim": 1, "density": "uniform", "lo": 0.0, "hi": 1e-9, "shift": 0.75, "reps": 2, "r": 2}
    }));
    let outcome = Runner::new(1).unwrap().run(&config).unwrap();
    for row in &outcome.tables[0].rows {
        assert!((float(&row[4]) - 0.75).abs() <= 1e-9);
    }
}

#[test]
fn hierarchy_matches_closed_form() {
    let config = resolve(json!({"experiment": "hierarchy", "parameters": {"x_in": 0.5, "levels": 10, "t_final": 1.0}}));
    let outcome = Runner::new(1).unwrap().run(&config).unwrap();
    let y1 = outcome.results["y1_final"].as_f64().unwrap();
    assert!((y1 - 1.0).abs() < 1e-6, "{y1}");
    let last_rows: Vec<_> = outcome.tables[0].rows.iter().rev().take(10).collect();
    for row in last_rows {
        assert!((float(&row[0]) - 1.0).abs() < 1e-12);
        assert!((float(&row[2]) - 1.0).abs() < 1e-5);
    }
}

#[test]
fn simulate_rotation_is_exact_circle() {
    // linear_rotation moves a two-point configuration rigidly about its mean
    let config = resolve(json!({
        "experiment": "simulate",
        "parameters": {"kernel": "linear_rotation", "points": [1.0, 0.0, -1.0, 0.0], "t_final": 1.0, "dt": 0.01, "record_every": 10}
    }));
    let outcome = Runner::new(1).unwrap().run(&config).unwrap();
    let table = &outcome.tables[0];
    assert_eq!(table.header, ["t", "particle", "x0", "x1"]);
    for row in &table.rows {
        let r = float(&row[2]).hypot(float(&row[3]));
        assert!((r - 1.0).abs() < 1e-8, "{r}");
    }
}

#[test]
fn vortex_blob_invariants_are_flat() {
    let config = resolve(json!({"experiment": "vortex", "parameters": {"N": 6, "t_final": 1.0}}));
    let outcome = Runner::new(1).unwrap().run(&config).unwrap();
    assert!(outcome.results["hamiltonian_relative_drift"].as_f64().unwrap() < 1e-8);
    assert!(outcome.results["center_drift"].as_f64().unwrap() < 1e-10);
    assert!(outcome.results["moment_relative_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn execute_persists_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let mut config =
        resolve(json!({"experiment": "hk", "master_seed": 3, "parameters": {"sizes": [4, 8, 16], "reps": 4}}));
    config.output_dir = dir.path().join("hk");
    let record = execute(&config, 2).unwrap();
    assert_eq!(record.emitted.len(), 1);
    assert!(meanfield::verify_manifest(&record.output_dir).unwrap().is_empty());
    std::fs::write(record.output_dir.join("hk.csv"), "tampered\n").unwrap();
    assert_eq!(meanfield::verify_manifest(&record.output_dir).unwrap(), ["hk.csv"]);
    assert_eq!(record.manifest["config"]["parameters"]["control_n"], 256);
}
