//! Run configuration: a single JSON document, optionally patched by dotted
//! `--set` overrides before deserialization.

use std::path::Path;

use lichnerowicz::error::{Error, Result};
use lichnerowicz::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: usize,
    pub n: Vec<usize>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
}

/// A coefficient field given either as a closed-form expression over the
/// coordinates or as a `{"file": "<path-without-extension>"}` reference to a
/// field file pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Const(f64),
    Expr(String),
    File { file: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CoefficientsSection {
    Direct {
        #[serde(rename = "N")]
        n: u32,
        a: FieldSpec,
        b: FieldSpec,
        csq: FieldSpec,
        dsq: FieldSpec,
        cd: FieldSpec,
        h: FieldSpec,
    },
    Geometric {
        #[serde(rename = "N")]
        n: u32,
        tau: FieldSpec,
        pi: FieldSpec,
        #[serde(default)]
        nu: f64,
        w: Vec<FieldSpec>,
        sigma: Vec<FieldSpec>,
        #[serde(default)]
        r: Option<FieldSpec>,
    },
    Manufactured {
        #[serde(rename = "N")]
        n: u32,
        u_star: FieldSpec,
        a: FieldSpec,
        b: FieldSpec,
        csq: FieldSpec,
        dsq: FieldSpec,
        cd: FieldSpec,
    },
}

fn default_directory() -> String {
    "out".into()
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_true")]
    pub emit_fields: bool,
    #[serde(default = "default_true")]
    pub emit_trace: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            emit_fields: true,
            emit_trace: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub coefficients: CoefficientsSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputSection,
}

/// Applies a `key.path=value` override to the raw JSON document. The value
/// is parsed as JSON when possible, falling back to a plain string.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{spec}' is not of the form key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
    let mut cursor = doc;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override path '{path}' has an empty segment")));
    }
    for part in &parts[..parts.len() - 1] {
        cursor = cursor
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override path '{path}' crosses a non-object")))?
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    cursor
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("override path '{path}' crosses a non-object")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Loads the config file and applies the overrides in order.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    for spec in overrides {
        apply_override(&mut doc, spec)?;
    }
    serde_json::from_value(doc)
        .map_err(|e| Error::Config(format!("invalid configuration: {e}")))
}
