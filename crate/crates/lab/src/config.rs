//! Experiment configuration: a JSON document with a fixed per-experiment
//! parameter schema. Resolution fills every default so the resolved document
//! alone replays a run.

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{LabError, LabResult};

/// Environment variable that overrides the configured master seed.
pub const SEED_ENV: &str = "MEANFIELD_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Wasserstein,
    Dobrushin,
    Rate,
    Hk,
    Chaos,
    Vortex,
    Hierarchy,
    Quantum,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Simulate,
        Experiment::Wasserstein,
        Experiment::Dobrushin,
        Experiment::Rate,
        Experiment::Hk,
        Experiment::Chaos,
        Experiment::Vortex,
        Experiment::Hierarchy,
        Experiment::Quantum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Wasserstein => "wasserstein",
            Experiment::Dobrushin => "dobrushin",
            Experiment::Rate => "rate",
            Experiment::Hk => "hk",
            Experiment::Chaos => "chaos",
            Experiment::Vortex => "vortex",
            Experiment::Hierarchy => "hierarchy",
            Experiment::Quantum => "quantum",
        }
    }

    pub fn parse(name: &str) -> LabResult<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|e| e.name()).collect();
            LabError::config(format!("unknown experiment `{name}` (expected one of {})", known.join(", ")))
        })
    }

    pub fn schema(self) -> Vec<Param> {
        use Kind::*;
        let kernel = [
            Param::new("kernel", Choice(KERNELS), Some("\"gaussian_odd\"")),
            Param::new("dim", Int, Some("2")),
            Param::new("eps", Float, Some("0.1")),
            Param::new("coupling", Float, Some("1.0")),
            Param::new("lipschitz", Float, Some("null")),
        ];
        let density = [
            Param::new("density", Choice(DENSITIES), Some("\"gaussian\"")),
            Param::new("mean", Float, Some("0.0")),
            Param::new("variance", Float, Some("1.0")),
            Param::new("lo", Float, Some("-1.0")),
            Param::new("hi", Float, Some("1.0")),
            Param::new("separation", Float, Some("3.0")),
        ];
        let mut params: Vec<Param> = Vec::new();
        match self {
            Experiment::Simulate => {
                params.extend(kernel);
                params.extend(density);
                params.extend([
                    Param::new("N", Int, Some("null")),
                    Param::new("points", FloatList, Some("null")),
                    Param::new("intensities", FloatList, Some("null")),
                    Param::new("t_final", Float, None),
                    Param::new("dt", Float, Some("0.01")),
                    Param::new("record_every", Int, Some("1")),
                    Param::new("substep_tolerance", Float, Some("null")),
                ]);
            }
            Experiment::Wasserstein => {
                params.extend(density);
                params.extend([
                    Param::new("dim", Int, Some("1")),
                    Param::new("N", Int, None),
                    Param::new("M", Int, Some("null")),
                    Param::new("r", Int, Some("1")),
                    Param::new("shift", Float, Some("0.5")),
                    Param::new("reps", Int, Some("1")),
                ]);
            }
            Experiment::Dobrushin => {
                params.extend(kernel);
                params.extend(density);
                params.extend([
                    Param::new("N", Int, None),
                    Param::new("t_final", Float, Some("1.0")),
                    Param::new("dt", Float, Some("0.01")),
                    Param::new("pairs", Int, Some("100")),
                    Param::new("shift", Float, Some("0.0")),
                    Param::new("absolute_slack", Float, Some("1e-6")),
                ]);
            }
            Experiment::Rate => {
                params.extend(kernel);
                params.extend(density);
                params.extend([
                    Param::new("sizes", IntList, None),
                    Param::new("reference_n", Int, Some("null")),
                    Param::new("t_final", Float, Some("1.0")),
                    Param::new("dt", Float, Some("0.05")),
                    Param::new("reps", Int, Some("50")),
                ]);
            }
            Experiment::Hk => {
                params.extend(density);
                params.extend([
                    Param::new("dim", Int, Some("1")),
                    Param::new("sizes", IntList, None),
                    Param::new("control_n", Int, Some("null")),
                    Param::new("reps", Int, Some("200")),
                ]);
            }
            Experiment::Chaos => {
                params.extend(density);
                params.extend([
                    Param::new("dim", Int, Some("1")),
                    Param::new("N", Int, None),
                    Param::new("runs", Int, Some("1000")),
                    Param::new("threshold", Float, Some("0.3")),
                    Param::new("frequency", Float, Some("1.0")),
                    Param::new("tensor_order", Int, Some("2")),
                ]);
            }
            Experiment::Vortex => {
                params.extend([
                    Param::new("kernel", Choice(&["vortex_point", "vortex_blob"]), Some("\"vortex_blob\"")),
                    Param::new("eps", Float, Some("0.1")),
                    Param::new("N", Int, Some("20")),
                    Param::new("points", FloatList, Some("null")),
                    Param::new("intensities", FloatList, Some("null")),
                    Param::new("lo", Float, Some("-1.0")),
                    Param::new("hi", Float, Some("1.0")),
                    Param::new("t_final", Float, Some("10.0")),
                    Param::new("dt", Float, Some("1e-3")),
                    Param::new("record_every", Int, Some("100")),
                ]);
            }
            Experiment::Hierarchy => {
                params.extend([
                    Param::new("x_in", Float, Some("0.5")),
                    Param::new("levels", Int, Some("10")),
                    Param::new("closure", Choice(&["zero", "factorized"]), Some("\"factorized\"")),
                    Param::new("t_final", Float, Some("1.0")),
                    Param::new("dt", Float, Some("1e-3")),
                    Param::new("record_every", Int, Some("10")),
                ]);
            }
            Experiment::Quantum => {
                params.extend([
                    Param::new("M", Int, Some("32")),
                    Param::new("length", Float, Some("6.283185307179586")),
                    Param::new("potential", Choice(POTENTIALS), Some("\"cosine\"")),
                    Param::new("amplitude", Float, Some("0.5")),
                    Param::new("depth", Float, Some("1.0")),
                    Param::new("width", Float, Some("0.5")),
                    Param::new("strength", Float, Some("1.0")),
                    Param::new("eps", Float, Some("0.5")),
                    Param::new("particles", IntList, Some("[2, 3, 4]")),
                    Param::new("t_final", Float, Some("1.0")),
                    Param::new("dt", Float, Some("0.01")),
                    Param::new("record_every", Int, Some("10")),
                    Param::new("holder_r", Float, Some("8.0")),
                ]);
            }
        }
        params
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const KERNELS: &[&str] = &["gaussian_odd", "linear_rotation", "vortex_point", "vortex_blob", "vlasov_mollified"];
pub const DENSITIES: &[&str] = &["gaussian", "uniform", "mixture"];
pub const POTENTIALS: &[&str] = &["cosine", "gaussian_well", "soft_coulomb"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Int,
    Float,
    Choice(&'static [&'static str]),
    IntList,
    FloatList,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Int => "an integer".into(),
            Kind::Float => "a number".into(),
            Kind::Choice(options) => format!("one of {}", options.join(", ")),
            Kind::IntList => "a list of integers".into(),
            Kind::FloatList => "a list of numbers".into(),
        }
    }

    fn accepts(&self, value: &Value) -> bool {
        match self {
            Kind::Int => value.is_i64() || value.is_u64(),
            Kind::Float => value.is_number(),
            Kind::Choice(options) => value.as_str().is_some_and(|s| options.contains(&s)),
            Kind::IntList => value.as_array().is_some_and(|a| a.iter().all(|v| v.is_i64() || v.is_u64())),
            Kind::FloatList => value.as_array().is_some_and(|a| a.iter().all(Value::is_number)),
        }
    }
}

/// One schema entry; `default = None` marks a required parameter and the
/// JSON text `null` an optional one that stays unset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
}

impl Param {
    const fn new(name: &'static str, kind: Kind, default: Option<&'static str>) -> Self {
        Param { name, kind, default }
    }
}

/// Where the master seed came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Config,
    Environment,
    Flag,
}

impl SeedSource {
    pub fn name(self) -> &'static str {
        match self {
            SeedSource::Config => "config",
            SeedSource::Environment => SEED_ENV,
            SeedSource::Flag => "--seed",
        }
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub master_seed: u64,
    pub seed_source: SeedSource,
    pub output_dir: PathBuf,
    pub parameters: Map<String, Value>,
}

/// Command-line adjustments applied on top of the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub env_seed: Option<String>,
    pub output_dir: Option<PathBuf>,
    /// `key=value` pairs; values are parsed as JSON, falling back to strings.
    pub params: Vec<String>,
}

const TOP_LEVEL: [&str; 4] = ["experiment", "master_seed", "output_dir", "parameters"];

pub fn read_document(path: &Path) -> LabResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| LabError::config(format!("{} is not valid JSON: {e}", path.display())))
}

impl ExperimentConfig {
    /// Validates a document, applies overrides and materialises defaults.
    pub fn resolve(document: &Value, overrides: &Overrides) -> LabResult<Self> {
        let top = document.as_object().ok_or_else(|| LabError::config("config must be a JSON object"))?;
        if let Some(key) = top.keys().find(|k| !TOP_LEVEL.contains(&k.as_str())) {
            return Err(LabError::config(format!("unknown top-level key `{key}`")));
        }
        let name = match (&overrides.experiment, top.get("experiment")) {
            (Some(name), _) => name.clone(),
            (None, Some(Value::String(name))) => name.clone(),
            (None, Some(_)) => return Err(LabError::config("`experiment` must be a string")),
            (None, None) => return Err(LabError::config("missing required key `experiment`")),
        };
        if let (Some(flag), Some(Value::String(doc))) = (&overrides.experiment, top.get("experiment")) {
            if flag != doc {
                return Err(LabError::config(format!(
                    "config describes experiment `{doc}` but `{flag}` was requested"
                )));
            }
        }
        let experiment = Experiment::parse(&name)?;

        let config_seed = match top.get("master_seed") {
            None => 0,
            Some(v) => v.as_u64().ok_or_else(|| LabError::config("`master_seed` must be a 64-bit unsigned integer"))?,
        };
        let env_seed = overrides
            .env_seed
            .as_deref()
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| LabError::config(format!("{SEED_ENV}={s} is not a 64-bit unsigned integer")))
            })
            .transpose()?;
        let (master_seed, seed_source) = match (overrides.seed, env_seed) {
            (Some(s), _) => (s, SeedSource::Flag),
            (None, Some(s)) => (s, SeedSource::Environment),
            (None, None) => (config_seed, SeedSource::Config),
        };

        let output_dir = match (&overrides.output_dir, top.get("output_dir")) {
            (Some(p), _) => p.clone(),
            (None, Some(Value::String(p))) => PathBuf::from(p),
            (None, Some(_)) => return Err(LabError::config("`output_dir` must be a string")),
            (None, None) => PathBuf::from("output"),
        };

        let mut given = match top.get("parameters") {
            None => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return Err(LabError::config("`parameters` must be an object")),
        };
        for pair in &overrides.params {
            let (key, raw) = pair
                .split_once('=')
                .ok_or_else(|| LabError::config(format!("parameter override `{pair}` is not key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            given.insert(key.trim().to_string(), value);
        }

        let schema = experiment.schema();
        if let Some(key) = given.keys().find(|k| !schema.iter().any(|p| p.name == k.as_str())) {
            return Err(LabError::config(format!("unknown parameter `{key}` for experiment `{experiment}`")));
        }
        let mut parameters = Map::new();
        for param in &schema {
            let value = match given.get(param.name) {
                Some(v) => v.clone(),
                None => match param.default {
                    None => {
                        return Err(LabError::config(format!(
                            "missing required parameter `{}` for experiment `{experiment}`",
                            param.name
                        )))
                    }
                    Some(text) => serde_json::from_str(text).expect("schema defaults are valid JSON"),
                },
            };
            if !value.is_null() && !param.kind.accepts(&value) {
                return Err(LabError::config(format!(
                    "parameter `{}` must be {}, got {value}",
                    param.name,
                    param.kind.describe()
                )));
            }
            parameters.insert(param.name.to_string(), value);
        }
        let mut config = ExperimentConfig { experiment, master_seed, seed_source, output_dir, parameters };
        config.derive_defaults()?;
        Ok(config)
    }

    /// Fills defaults that depend on other parameters.
    fn derive_defaults(&mut self) -> LabResult<()> {
        match self.experiment {
            Experiment::Simulate | Experiment::Vortex => {
                let has_points = !self.parameters["points"].is_null();
                if !has_points && self.parameters.get("N").is_none_or(Value::is_null) {
                    return Err(LabError::config(format!(
                        "missing required parameter `N` for experiment `{}` (or give `points`)",
                        self.experiment
                    )));
                }
            }
            Experiment::Wasserstein => {
                if self.parameters["M"].is_null() {
                    self.parameters.insert("M".into(), self.parameters["N"].clone());
                }
            }
            Experiment::Rate => {
                if self.parameters["reference_n"].is_null() {
                    let max = self.int_list("sizes")?.into_iter().max().unwrap_or(0);
                    self.parameters.insert("reference_n".into(), Value::from(8 * max));
                }
            }
            Experiment::Hk => {
                if self.parameters["control_n"].is_null() {
                    let max = self.int_list("sizes")?.into_iter().max().unwrap_or(0);
                    self.parameters.insert("control_n".into(), Value::from(16 * max));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> LabResult<&Value> {
        self.parameters.get(key).ok_or_else(|| LabError::config(format!("parameter `{key}` is not defined")))
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.parameters.get(key).is_some_and(|v| !v.is_null())
    }

    pub fn usize(&self, key: &str) -> LabResult<usize> {
        self.raw(key)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| LabError::config(format!("parameter `{key}` must be a nonnegative integer")))
    }

    pub fn f64(&self, key: &str) -> LabResult<f64> {
        self.raw(key)?.as_f64().ok_or_else(|| LabError::config(format!("parameter `{key}` must be a number")))
    }

    pub fn opt_f64(&self, key: &str) -> LabResult<Option<f64>> {
        if self.is_set(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn str(&self, key: &str) -> LabResult<&str> {
        self.raw(key)?.as_str().ok_or_else(|| LabError::config(format!("parameter `{key}` must be a string")))
    }

    pub fn int_list(&self, key: &str) -> LabResult<Vec<usize>> {
        let list = self.raw(key)?.as_array().ok_or_else(|| LabError::config(format!("`{key}` must be a list")))?;
        list.iter()
            .map(|v| {
                v.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| LabError::config(format!("`{key}` must hold nonnegative integers")))
            })
            .collect()
    }

    pub fn float_list(&self, key: &str) -> LabResult<Option<Vec<f64>>> {
        if !self.is_set(key) {
            return Ok(None);
        }
        let list = self.raw(key)?.as_array().ok_or_else(|| LabError::config(format!("`{key}` must be a list")))?;
        list.iter()
            .map(|v| v.as_f64().ok_or_else(|| LabError::config(format!("`{key}` must hold numbers"))))
            .collect::<LabResult<Vec<_>>>()
            .map(Some)
    }

    /// The resolved document, as written to the manifest.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "experiment": self.experiment.name(),
            "master_seed": self.master_seed,
            "output_dir": self.output_dir.display().to_string(),
            "parameters": Value::Object(self.parameters.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn resolve(doc: Value) -> LabResult<ExperimentConfig> {
        ExperimentConfig::resolve(&doc, &Overrides::default())
    }

    #[test]
    fn defaults_are_materialised() {
        let c = resolve(json!({"experiment": "rate", "parameters": {"sizes": [8, 16, 32]}})).unwrap();
        assert_eq!(c.usize("reference_n").unwrap(), 256);
        assert_eq!(c.usize("reps").unwrap(), 50);
        assert_eq!(c.str("kernel").unwrap(), "gaussian_odd");
        assert_eq!(c.seed_source, SeedSource::Config);
    }

    #[test]
    fn missing_and_mistyped_parameters() {
        let e = resolve(json!({"experiment": "dobrushin", "parameters": {}})).unwrap_err();
        assert!(e.to_string().contains("`N`"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = resolve(json!({"experiment": "dobrushin", "parameters": {"N": "many"}})).unwrap_err();
        assert!(e.to_string().contains("must be an integer"), "{e}");
        let e = resolve(json!({"experiment": "dobrushin", "parameters": {"N": 4, "bogus": 1}})).unwrap_err();
        assert!(e.to_string().contains("bogus"));
        assert!(resolve(json!({"experiment": "nothing"})).is_err());
        assert!(resolve(json!({"experiment": "hk", "extra": 1})).is_err());
    }

    #[test]
    fn seed_precedence() {
        let doc = json!({"experiment": "hierarchy", "master_seed": 5});
        let mut o = Overrides { env_seed: Some("7".into()), ..Default::default() };
        let c = ExperimentConfig::resolve(&doc, &o).unwrap();
        assert_eq!((c.master_seed, c.seed_source), (7, SeedSource::Environment));
        o.seed = Some(9);
        let c = ExperimentConfig::resolve(&doc, &o).unwrap();
        assert_eq!((c.master_seed, c.seed_source), (9, SeedSource::Flag));
        o.seed = None;
        o.env_seed = Some("x".into());
        assert!(ExperimentConfig::resolve(&doc, &o).is_err());
    }

    #[test]
    fn parameter_overrides() {
        let doc = json!({"experiment": "hierarchy"});
        let o = Overrides { params: vec!["levels=20".into(), "closure=zero".into()], ..Default::default() };
        let c = ExperimentConfig::resolve(&doc, &o).unwrap();
        assert_eq!(c.usize("levels").unwrap(), 20);
        assert_eq!(c.str("closure").unwrap(), "zero");
        let bad = Overrides { params: vec!["closure=sideways".into()], ..Default::default() };
        assert!(ExperimentConfig::resolve(&doc, &bad).is_err());
    }
}
