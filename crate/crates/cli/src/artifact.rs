//! Reading and writing the JSON artifacts that tie pipeline stages
//! together: model specs, boundary series, policy tables, policy specs.
//!
//! Every artifact file is exactly the documented schema; the resolved run
//! configuration goes to a `<file>.meta.json` sidecar so artifacts can be
//! re-ingested untouched.

use std::fs;
use std::path::Path;

use seqlab_core::{BoundarySeries, ModelSpec, PolicySpec, PolicyTable};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &str) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

pub fn write_json<T: Serialize>(path: &str, value: &T) -> CliResult<()> {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes the resolved configuration sidecar next to an artifact.
pub fn write_meta(artifact_path: &str, meta: &serde_json::Value) -> CliResult<()> {
    write_json(&format!("{artifact_path}.meta.json"), meta)
}

/// Loads a model from either an inline JSON object or a file path.
pub fn load_model(arg: &str) -> CliResult<ModelSpec> {
    let model: ModelSpec = if arg.trim_start().starts_with('{') {
        serde_json::from_str(arg).map_err(|e| CliError::Config(format!("inline model: {e}")))?
    } else {
        read_json(arg)?
    };
    model.validate()?;
    Ok(model)
}

pub fn load_policy_table(path: &str) -> CliResult<PolicyTable> {
    read_json(path)
}

pub fn load_policy_spec(path: &str) -> CliResult<PolicySpec> {
    read_json(path)
}

pub fn save_boundaries(path: &str, series: &BoundarySeries) -> CliResult<()> {
    write_json(path, series)
}

/// Policy argument as typed on the command line; parameters not carried in
/// the token come from command flags when the spec is resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyToken {
    /// `optimal` (solve in process) or `optimal:table.json`.
    Optimal { table_path: Option<String> },
    /// `heuristic`.
    Heuristic,
    /// `fixed-n` or `fixed-n:N`.
    FixedN { n: Option<u32> },
    /// `fixed-n-early` or `fixed-n-early:N`.
    FixedNEarly { n: Option<u32> },
    /// `bayes-seq` or `bayes-seq:CAP`.
    BayesSeq { cap: Option<u32> },
    /// Path to a serialized policy spec.
    SpecFile(String),
}

pub fn parse_policy_token(token: &str) -> CliResult<PolicyToken> {
    let (name, param) = match token.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (token, None),
    };
    let parse_count = |p: &str| -> CliResult<u32> {
        p.parse()
            .map_err(|_| CliError::Config(format!("policy '{token}': '{p}' is not a count")))
    };
    Ok(match name {
        "optimal" => PolicyToken::Optimal {
            table_path: param.map(str::to_string),
        },
        "heuristic" => {
            if param.is_some() {
                return Err(CliError::Config(
                    "policy 'heuristic' takes no inline parameter; use --t-h/--beta-h/--k".into(),
                ));
            }
            PolicyToken::Heuristic
        }
        "fixed-n" => PolicyToken::FixedN {
            n: param.map(parse_count).transpose()?,
        },
        "fixed-n-early" => PolicyToken::FixedNEarly {
            n: param.map(parse_count).transpose()?,
        },
        "bayes-seq" => PolicyToken::BayesSeq {
            cap: param.map(parse_count).transpose()?,
        },
        path if Path::new(path).extension().is_some_and(|e| e == "json") => {
            PolicyToken::SpecFile(token.to_string())
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown policy '{other}'; expected optimal[:table.json], heuristic, \
                 fixed-n[:N], fixed-n-early[:N], bayes-seq[:CAP], or a policy spec .json"
            )))
        }
    })
}
