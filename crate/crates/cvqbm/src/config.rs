//! Experiment configuration: a JSON-shaped document parsed with
//! path-qualified errors, unknown-key rejection with suggestions, and
//! defaults filled in.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::distributions::{HistogramSmoothing, QuantumTarget, TargetKind, TargetSpec};
use crate::engine::{InitMode, QbmConfig};
use crate::error::{Error, Result};
use crate::quadrature::QuadGrid;
use crate::trainer::{InitScheme, TrainConfig};

/// Optional assertion thresholds checked by `run_case` under `--assert`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AssertSpec {
    pub min_fidelity: Option<f64>,
    pub max_kl: Option<f64>,
    pub min_success: Option<f64>,
}

/// One experiment: target, machine, training plan, grid, outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub target: TargetSpec,
    pub qbm: QbmConfig,
    pub train: TrainConfig,
    pub grid: QuadGrid,
    pub samples: usize,
    pub outputs: PathBuf,
    pub assert: AssertSpec,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(Error::Config {
                path: "name".into(),
                message: format!("`{}` is not a nonempty filesystem-safe name", self.name),
            });
        }
        self.target.validate().map_err(|e| Error::Config {
            path: "target".into(),
            message: e.to_string(),
        })?;
        self.qbm.validate().map_err(|e| Error::Config {
            path: "qbm".into(),
            message: e.to_string(),
        })?;
        self.train.validate().map_err(|e| Error::Config {
            path: "train".into(),
            message: e.to_string(),
        })?;
        if self.samples == 0 {
            return Err(Error::Config {
                path: "samples".into(),
                message: "samples must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Parse and validate a config document. Syntax errors report line/column;
/// constraint violations and unknown keys report the field path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        message: e.to_string(),
        offset: None,
        line: Some(e.line()),
        column: Some(e.column()),
    })?;
    let cfg = walk_root(&value)?;
    cfg.validate()?;
    Ok(cfg)
}

fn cfg_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

fn unknown_key(path: &str, key: &str, known: &[&str]) -> Error {
    let mut best: Option<(&str, usize)> = None;
    for k in known {
        let d = edit_distance(key, k);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    let suggestion = match best {
        Some((k, d)) if d <= 3 => format!("; did you mean `{k}`?"),
        _ => format!("; expected one of {known:?}"),
    };
    let full = if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    Error::Config { path: full, message: format!("unknown key{suggestion}") }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

struct Obj<'a> {
    path: String,
    map: &'a serde_json::Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(path: &str, v: &'a Value) -> Result<Self> {
        let map = v
            .as_object()
            .ok_or_else(|| cfg_err(path, "expected an object"))?;
        Ok(Obj { path: path.to_string(), map })
    }

    fn check_keys(&self, known: &[&str]) -> Result<()> {
        for key in self.map.keys() {
            if !known.contains(&key.as_str()) {
                return Err(unknown_key(&self.path, key, known));
            }
        }
        Ok(())
    }

    fn sub(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn field_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?
            .ok_or_else(|| cfg_err(&self.field_path(key), "missing required number"))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| cfg_err(&self.field_path(key), "expected a number")),
        }
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|u| Some(u as usize))
                .ok_or_else(|| cfg_err(&self.field_path(key), "expected a non-negative integer")),
        }
    }

    fn str_opt(&self, key: &str) -> Result<Option<&'a str>> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_str()
                .map(Some)
                .ok_or_else(|| cfg_err(&self.field_path(key), "expected a string")),
        }
    }

    fn str_req(&self, key: &str) -> Result<&'a str> {
        self.str_opt(key)?
            .ok_or_else(|| cfg_err(&self.field_path(key), "missing required string"))
    }

    fn pair_opt(&self, key: &str) -> Result<Option<(f64, f64)>> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(a)) if a.len() == 2 => {
                let lo = a[0].as_f64().ok_or_else(|| {
                    cfg_err(&self.field_path(key), "expected two numbers")
                })?;
                let hi = a[1].as_f64().ok_or_else(|| {
                    cfg_err(&self.field_path(key), "expected two numbers")
                })?;
                Ok(Some((lo, hi)))
            }
            Some(_) => Err(cfg_err(&self.field_path(key), "expected an array of two numbers")),
        }
    }
}

fn walk_root(v: &Value) -> Result<ExperimentConfig> {
    let root = Obj::new("", v)?;
    root.check_keys(&["name", "target", "qbm", "train", "grid", "samples", "outputs", "assert"])?;

    let name = root.str_opt("name")?.unwrap_or("experiment").to_string();
    let target = walk_target(
        root.sub("target")
            .ok_or_else(|| cfg_err("target", "missing required section"))?,
    )?;
    let qbm = walk_qbm(
        root.sub("qbm").ok_or_else(|| cfg_err("qbm", "missing required section"))?,
    )?;
    let train = match root.sub("train") {
        Some(v) => walk_train(v)?,
        None => TrainConfig::default(),
    };
    let grid = match root.sub("grid") {
        Some(v) => walk_grid(v)?,
        None => default_grid_for(&target)?,
    };
    let samples = root.usize_opt("samples")?.unwrap_or(1000);
    let outputs = root
        .str_opt("outputs")?
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out").join(&name));
    let assert = match root.sub("assert") {
        Some(v) => walk_assert(v)?,
        None => AssertSpec::default(),
    };
    Ok(ExperimentConfig { name, target, qbm, train, grid, samples, outputs, assert })
}

fn default_grid_for(target: &TargetSpec) -> Result<QuadGrid> {
    match target.support {
        Some((lo, hi)) => {
            let points = (((hi - lo) * 200.0).round() as usize).max(101) + 1;
            QuadGrid::new(lo, hi, points)
        }
        None => Ok(QuadGrid::default_grid()),
    }
}

fn walk_target(v: &Value) -> Result<TargetSpec> {
    let obj = Obj::new("target", v)?;
    let kind_name = obj.str_req("kind")?;
    let support = obj.pair_opt("support")?;
    let kind = match kind_name {
        "gaussian" => {
            obj.check_keys(&["kind", "mean", "std", "support"])?;
            TargetKind::Gaussian { mean: obj.f64_req("mean")?, std: obj.f64_req("std")? }
        }
        "rayleigh" => {
            obj.check_keys(&["kind", "sigma", "support"])?;
            TargetKind::Rayleigh { sigma: obj.f64_req("sigma")? }
        }
        "gamma" => {
            obj.check_keys(&["kind", "shape", "scale", "support"])?;
            TargetKind::Gamma { shape: obj.f64_req("shape")?, scale: obj.f64_req("scale")? }
        }
        "weibull" => {
            obj.check_keys(&["kind", "lambda", "shape", "support"])?;
            TargetKind::Weibull { lambda: obj.f64_req("lambda")?, shape: obj.f64_req("shape")? }
        }
        "etib" => {
            obj.check_keys(&["kind", "alpha", "beta", "lambda", "phi", "support"])?;
            TargetKind::Etib {
                alpha: obj.f64_req("alpha")?,
                beta: obj.f64_req("beta")?,
                lambda: obj.f64_req("lambda")?,
                phi: obj.f64_req("phi")?,
            }
        }
        "histogram" => {
            obj.check_keys(&["kind", "source", "rescale", "smoothing", "support"])?;
            let smoothing = match obj.str_opt("smoothing")?.unwrap_or("gaussian-fit") {
                "gaussian-fit" => HistogramSmoothing::GaussianFit,
                "kde" => HistogramSmoothing::Kde,
                other => {
                    return Err(cfg_err(
                        "target.smoothing",
                        format!("unknown smoothing `{other}`; expected gaussian-fit or kde"),
                    ))
                }
            };
            TargetKind::Histogram {
                source: obj.str_req("source")?.to_string(),
                rescale: obj
                    .pair_opt("rescale")?
                    .ok_or_else(|| cfg_err("target.rescale", "missing required [min, max]"))?,
                smoothing,
            }
        }
        "quantum-state" => {
            let state = obj.str_req("state")?;
            let q = match state {
                "squeezed-displaced" => {
                    obj.check_keys(&["kind", "state", "r_db", "alpha", "support"])?;
                    QuantumTarget::SqueezedDisplaced {
                        r_db: obj.f64_req("r_db")?,
                        alpha: obj.f64_req("alpha")?,
                    }
                }
                "squeezed-cat" => {
                    obj.check_keys(&["kind", "state", "r_db", "displacement", "support"])?;
                    QuantumTarget::SqueezedCat {
                        r_db: obj.f64_req("r_db")?,
                        displacement: obj.f64_req("displacement")?,
                    }
                }
                other => {
                    return Err(cfg_err(
                        "target.state",
                        format!(
                            "unknown quantum state `{other}`; expected squeezed-displaced or squeezed-cat"
                        ),
                    ))
                }
            };
            TargetKind::QuantumState(q)
        }
        other => {
            return Err(cfg_err(
                "target.kind",
                format!(
                    "unknown target kind `{other}`; expected one of gaussian, rayleigh, gamma, \
                     weibull, etib, histogram, quantum-state"
                ),
            ))
        }
    };
    Ok(TargetSpec { kind, support })
}

fn walk_qbm(v: &Value) -> Result<QbmConfig> {
    let obj = Obj::new("qbm", v)?;
    obj.check_keys(&["delta", "steps", "cutoff", "post_select", "init"])?;
    let delta = obj.f64_req("delta")?;
    let steps = obj
        .usize_opt("steps")?
        .ok_or_else(|| cfg_err("qbm.steps", "missing required integer"))?;
    let cutoff = obj
        .usize_opt("cutoff")?
        .ok_or_else(|| cfg_err("qbm.cutoff", "missing required integer"))?;
    let post_select_outcome = obj.usize_opt("post_select")?.unwrap_or(1);
    let init_mode = match obj.str_opt("init")?.unwrap_or("exact") {
        "exact" => InitMode::Exact,
        "circuit" => InitMode::Circuit,
        other => {
            return Err(cfg_err(
                "qbm.init",
                format!("unknown init mode `{other}`; expected exact or circuit"),
            ))
        }
    };
    let cfg = QbmConfig { delta, steps, cutoff, post_select_outcome, init_mode };
    cfg.validate().map_err(|e| match e {
        Error::InvalidArgument(msg) => {
            let field = if msg.contains("delta") {
                "qbm.delta"
            } else if msg.contains("steps") {
                "qbm.steps"
            } else if msg.contains("cutoff") {
                "qbm.cutoff"
            } else {
                "qbm"
            };
            cfg_err(field, msg)
        }
        other => other,
    })?;
    Ok(cfg)
}

fn walk_train(v: &Value) -> Result<TrainConfig> {
    let obj = Obj::new("train", v)?;
    obj.check_keys(&[
        "epochs",
        "lr0",
        "decay_steps",
        "decay_rate",
        "fd_step",
        "seed",
        "init_scheme",
        "success_floor",
    ])?;
    let d = TrainConfig::default();
    let init_scheme = match obj.sub("init_scheme") {
        None | Some(Value::Null) => InitScheme::SmallUniform,
        Some(Value::String(s)) if s == "small-uniform" => InitScheme::SmallUniform,
        Some(Value::Object(m)) => {
            if let Some(Value::Array(arr)) = m.get("custom") {
                let mut vec = Vec::with_capacity(arr.len());
                for x in arr {
                    vec.push(x.as_f64().ok_or_else(|| {
                        cfg_err("train.init_scheme.custom", "expected numbers")
                    })?);
                }
                InitScheme::Custom(vec)
            } else {
                return Err(cfg_err(
                    "train.init_scheme",
                    "expected \"small-uniform\" or {\"custom\": [..]}",
                ));
            }
        }
        Some(_) => {
            return Err(cfg_err(
                "train.init_scheme",
                "expected \"small-uniform\" or {\"custom\": [..]}",
            ))
        }
    };
    Ok(TrainConfig {
        epochs: obj.usize_opt("epochs")?.unwrap_or(d.epochs),
        lr0: obj.f64_opt("lr0")?.unwrap_or(d.lr0),
        decay_steps: obj.usize_opt("decay_steps")?.unwrap_or(d.decay_steps),
        decay_rate: obj.f64_opt("decay_rate")?.unwrap_or(d.decay_rate),
        fd_step: obj.f64_opt("fd_step")?.unwrap_or(d.fd_step),
        seed: obj.usize_opt("seed")?.map(|s| s as u64).unwrap_or(d.seed),
        init_scheme,
        success_floor: obj.f64_opt("success_floor")?,
    })
}

fn walk_grid(v: &Value) -> Result<QuadGrid> {
    let obj = Obj::new("grid", v)?;
    obj.check_keys(&["q_min", "q_max", "points"])?;
    QuadGrid::new(
        obj.f64_req("q_min")?,
        obj.f64_req("q_max")?,
        obj.usize_opt("points")?
            .ok_or_else(|| cfg_err("grid.points", "missing required integer"))?,
    )
    .map_err(|e| cfg_err("grid", e.to_string()))
}

fn walk_assert(v: &Value) -> Result<AssertSpec> {
    let obj = Obj::new("assert", v)?;
    obj.check_keys(&["min_fidelity", "max_kl", "min_success"])?;
    Ok(AssertSpec {
        min_fidelity: obj.f64_opt("min_fidelity")?,
        max_kl: obj.f64_opt("max_kl")?,
        min_success: obj.f64_opt("min_success")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let text = r#"{
            "target": {"kind": "gaussian", "mean": 0.083, "std": 0.147},
            "qbm": {"delta": 1.5, "steps": 1, "cutoff": 10}
        }"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.name, "experiment");
        assert_eq!(cfg.qbm.post_select_outcome, 1);
        assert_eq!(cfg.train.epochs, 100);
        assert!((cfg.train.lr0 - 0.05).abs() < 1e-12);
        assert_eq!(cfg.samples, 1000);
        assert_eq!(cfg.grid, QuadGrid::default_grid());
    }

    #[test]
    fn negative_delta_rejected_with_path() {
        let text = r#"{
            "target": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "qbm": {"delta": -1.0, "steps": 1, "cutoff": 10}
        }"#;
        match parse_config(text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "qbm.delta"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_suggestion() {
        let text = r#"{
            "target": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "qbm": {"delta": 1.5, "steps": 1, "cutoff": 10, "fooo": 3}
        }"#;
        match parse_config(text) {
            Err(Error::Config { path, message }) => {
                assert_eq!(path, "qbm.fooo");
                assert!(message.contains("unknown key"), "{message}");
            }
            other => panic!("expected config error, got {other:?}"),
        }

        let text = r#"{
            "target": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "qbm": {"delta": 1.5, "steps": 1, "cutoff": 10, "cutof": 12}
        }"#;
        match parse_config(text) {
            Err(Error::Config { path, message }) => {
                assert_eq!(path, "qbm.cutof");
                assert!(message.contains("did you mean `cutoff`"), "{message}");
            }
            other => panic!("expected suggestion, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let text = "{\n  \"target\": [,]\n}";
        match parse_config(text) {
            Err(Error::Parse { line: Some(l), column: Some(_), .. }) => assert_eq!(l, 2),
            other => panic!("expected parse error with position, got {other:?}"),
        }
    }

    #[test]
    fn all_target_kinds_parse() {
        let cases = [
            r#"{"kind": "rayleigh", "sigma": 1.0, "support": [0, 6]}"#,
            r#"{"kind": "gamma", "shape": 2.5, "scale": 0.5}"#,
            r#"{"kind": "weibull", "lambda": 1.612, "shape": 5.4}"#,
            r#"{"kind": "etib", "alpha": 4.0, "beta": 5.0, "lambda": 0.1, "phi": 2.0}"#,
            r#"{"kind": "histogram", "source": "bundled:forest", "rescale": [0, 4]}"#,
            r#"{"kind": "quantum-state", "state": "squeezed-displaced", "r_db": 1.73, "alpha": 0.2}"#,
            r#"{"kind": "quantum-state", "state": "squeezed-cat", "r_db": 2.60, "displacement": 1.2}"#,
        ];
        for target in cases {
            let text = format!(
                r#"{{"target": {target}, "qbm": {{"delta": 1.5, "steps": 1, "cutoff": 10}}}}"#
            );
            parse_config(&text).unwrap_or_else(|e| panic!("{target}: {e}"));
        }
    }

    #[test]
    fn custom_init_scheme_parses() {
        let text = r#"{
            "target": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "qbm": {"delta": 1.5, "steps": 1, "cutoff": 10},
            "train": {"init_scheme": {"custom": [0.0, 0.0, 0.0, 0.0, 0.5]}}
        }"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.train.init_scheme, InitScheme::Custom(vec![0.0, 0.0, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn default_grid_follows_support_hint() {
        let text = r#"{
            "target": {"kind": "rayleigh", "sigma": 1.0, "support": [0, 6]},
            "qbm": {"delta": 2.5, "steps": 2, "cutoff": 15}
        }"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.grid.q_min, 0.0);
        assert_eq!(cfg.grid.q_max, 6.0);
        assert_eq!(cfg.grid.points, 1201);
    }

    #[test]
    fn bad_name_rejected() {
        let text = r#"{
            "name": "has space",
            "target": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "qbm": {"delta": 1.5, "steps": 1, "cutoff": 10}
        }"#;
        assert!(matches!(parse_config(text), Err(Error::Config { .. })));
    }
}
