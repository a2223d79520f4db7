//! Experiment harness for the `meanfield-core` library: JSON configuration,
//! deterministic seeding, CSV output and a manifest per run.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use serde_json::{json, Value};

pub use config::{Experiment, ExperimentConfig, Overrides, SeedSource};
pub use error::{LabError, LabResult};
pub use experiments::{Outcome, Runner};
pub use output::{verify_manifest, Emitted, Table, MANIFEST_NAME};

/// Version string recorded in manifests.
pub fn tool_version() -> String {
    format!("meanfield v{}", env!("CARGO_PKG_VERSION"))
}

/// What a completed run left on disk.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub output_dir: PathBuf,
    pub emitted: Vec<Emitted>,
    pub outcome: Outcome,
    pub manifest: Value,
}

/// Runs an experiment and persists its tables and manifest. Nothing is written
/// if the experiment fails.
pub fn execute(config: &ExperimentConfig, threads: usize) -> LabResult<RunRecord> {
    let runner = Runner::new(threads)?;
    let started = Utc::now();
    let clock = Instant::now();
    let outcome = runner.run(config)?;
    let emitted = output::write_tables(&config.output_dir, &outcome.tables)?;
    let finished = Utc::now();
    let manifest = json!({
        "tool_version": tool_version(),
        "experiment": config.experiment.name(),
        "config": config.to_json(),
        "master_seed": config.master_seed,
        "seed_source": config.seed_source.name(),
        "threads": threads,
        "started": started.to_rfc3339_opts(SecondsFormat::Millis, true),
        "finished": finished.to_rfc3339_opts(SecondsFormat::Millis, true),
        "wall_time_seconds": clock.elapsed().as_secs_f64(),
        "derived_seeds": Value::Object(outcome.derived_seeds.clone()),
        "outputs": emitted
            .iter()
            .map(|e| json!({"file": e.file_name, "sha256": e.sha256, "rows": e.rows}))
            .collect::<Vec<_>>(),
        "results": Value::Object(outcome.results.clone()),
    });
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    output::write_atomic(&config.output_dir.join(MANIFEST_NAME), text.as_bytes())?;
    Ok(RunRecord { output_dir: config.output_dir.clone(), emitted, outcome, manifest })
}
