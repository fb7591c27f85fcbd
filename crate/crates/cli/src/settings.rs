//! Tolerance resolution. Later sources win: defaults, the model file's
//! `"tol"` object, `LINDBLAD_TOL_<FIELD>` environment variables, `--tol K=V`.

use std::collections::BTreeMap;

use qmsdf_core::Tolerance;

use crate::error::{CliError, Result};

pub const ENV_PREFIX: &str = "LINDBLAD_TOL_";

/// Parses one `--tol` argument of the form `field=value`.
pub fn parse_override(arg: &str) -> Result<(String, f64)> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--tol expects FIELD=VALUE, got {arg:?}")))?;
    let value = v
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("--tol {k}: {v:?} is not a number")))?;
    Ok((k.trim().to_string(), value))
}

/// `LINDBLAD_TOL_*` variables among `vars`, as `(field, value)`.
pub fn env_overrides(vars: impl IntoIterator<Item = (String, String)>) -> Result<Vec<(String, f64)>> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for (key, value) in vars {
        let Some(field) = key.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let parsed = value
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("{key}: {value:?} is not a number")))?;
        out.push((field.to_ascii_lowercase(), parsed));
    }
    // Environment iteration order is unspecified.
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

pub fn resolve(file: &BTreeMap<String, f64>, env: &[(String, f64)], cli: &[(String, f64)]) -> Result<Tolerance> {
    let mut tol = Tolerance::default();
    let layers = file.iter().map(|(k, v)| (k.as_str(), *v)).chain(
        env.iter()
            .chain(cli)
            .map(|(k, v)| (k.as_str(), *v)),
    );
    for (field, value) in layers {
        tol = tol.with(field, value)?;
    }
    Ok(tol)
}

/// The resolved policy as a name → value map.
pub fn tolerance_map(tol: &Tolerance) -> BTreeMap<&'static str, f64> {
    Tolerance::FIELDS
        .iter()
        .map(|&f| (f, tol.get(f).expect("known field")))
        .collect()
}
