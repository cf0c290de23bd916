//! Run configuration: a plain `key=value` file merged with command-line
//! flags (flags win). Every flag has a config-file key of the same name.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use shapefit_core::estimators::Model;
use shapefit_core::regularize::ShapeKind;
use shapefit_core::stepfn::Interval;

use crate::{Error, Result};

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub shape: Option<ShapeKind>,
    pub interval: Option<Interval>,
    pub mode: Option<f64>,
    pub seed: u64,
    pub reps: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub suite: Option<String>,
    pub constant: f64,
    pub size: Option<f64>,
    pub sigma: f64,
    pub estimator: Option<String>,
    pub censor: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            shape: None,
            interval: None,
            mode: None,
            seed: 0,
            reps: 200,
            input: None,
            output: None,
            suite: None,
            constant: 49.0,
            size: None,
            sigma: 1.0,
            estimator: None,
            censor: None,
        }
    }
}

pub fn parse_model(name: &str) -> Result<Model> {
    match name {
        "density" => Ok(Model::Density),
        "regression" => Ok(Model::Regression),
        "hazard" => Ok(Model::Hazard),
        "nhpp" => Ok(Model::Nhpp),
        other => Err(Error::usage(format!(
            "unknown model `{other}` (density|regression|hazard|nhpp)"
        ))),
    }
}

pub fn parse_shape(name: &str) -> Result<ShapeKind> {
    match name {
        "u_shaped" | "u-shaped" | "ushaped" => Ok(ShapeKind::UShaped),
        "unimodal" => Ok(ShapeKind::Unimodal),
        "nonincreasing" | "non-increasing" => Ok(ShapeKind::Nonincreasing),
        "nondecreasing" | "non-decreasing" => Ok(ShapeKind::Nondecreasing),
        other => Err(Error::usage(format!(
            "unknown shape `{other}` (u_shaped|unimodal|nonincreasing|nondecreasing)"
        ))),
    }
}

pub fn shape_name(shape: ShapeKind) -> &'static str {
    match shape {
        ShapeKind::UShaped => "u_shaped",
        ShapeKind::Unimodal => "unimodal",
        ShapeKind::Nonincreasing => "nonincreasing",
        ShapeKind::Nondecreasing => "nondecreasing",
    }
}

pub fn parse_interval(text: &str) -> Result<Interval> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::usage(format!(
            "interval must be `a,b`, got `{text}`"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::usage(format!("non-numeric interval endpoint `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::usage(format!("non-numeric interval endpoint `{}`", parts[1])))?;
    Interval::new(a, b).map_err(|e| Error::usage(e.to_string()))
}

/// Parses a `key=value` file; `#` starts a comment, blank lines are skipped.
pub fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) => {
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
            None => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    row: lineno + 1,
                    message: format!("expected key=value, got `{line}`"),
                })
            }
        }
    }
    Ok(map)
}

fn numeric<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::usage(format!("invalid `{key}` value `{raw}` in config file"))),
    }
}

/// Applies config-file values onto `cfg`. The CLI resolves a run as
/// defaults, then the config file, then flags, so flags win.
pub fn apply_config_file(cfg: &mut RunConfig, path: &Path) -> Result<()> {
    let map = read_config_file(path)?;
    if let Some(name) = map.get("model") {
        cfg.model = Some(parse_model(name)?);
    }
    if let Some(name) = map.get("shape") {
        cfg.shape = Some(parse_shape(name)?);
    }
    if let Some(text) = map.get("interval") {
        cfg.interval = Some(parse_interval(text)?);
    }
    if let Some(mode) = numeric::<f64>(&map, "mode")? {
        cfg.mode = Some(mode);
    }
    if let Some(seed) = numeric::<u64>(&map, "seed")? {
        cfg.seed = seed;
    }
    if let Some(reps) = numeric::<usize>(&map, "reps")? {
        cfg.reps = reps;
    }
    if let Some(input) = map.get("in") {
        cfg.input = Some(PathBuf::from(input));
    }
    if let Some(output) = map.get("out") {
        cfg.output = Some(PathBuf::from(output));
    }
    if let Some(suite) = map.get("suite") {
        cfg.suite = Some(suite.clone());
    }
    if let Some(c) = numeric::<f64>(&map, "constant")? {
        cfg.constant = c;
    }
    if let Some(size) = numeric::<f64>(&map, "size")? {
        cfg.size = Some(size);
    }
    if let Some(s) = numeric::<f64>(&map, "sigma")? {
        cfg.sigma = s;
    }
    if let Some(estimator) = map.get("estimator") {
        cfg.estimator = Some(estimator.clone());
    }
    if let Some(censor) = map.get("censor") {
        cfg.censor = Some(PathBuf::from(censor));
    }
    Ok(())
}
