//! JSON model files: `{"dim", "H", "L", "label"?, "tol"?}` with complex
//! entries written as `[re, im]` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use qmsdf_core::matrix::c;
use qmsdf_core::model::QmsModel;
use qmsdf_core::{CMatrix, Tolerance};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

/// A parsed model file. `tol` holds the overrides exactly as written.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub dim: usize,
    pub h: CMatrix,
    pub l: Vec<CMatrix>,
    pub label: Option<String>,
    pub tol: BTreeMap<String, f64>,
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::parse("$", e.to_string()))
}

fn complex(v: &Value, field: &str) -> Result<(f64, f64)> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) if re.is_finite() && im.is_finite() => Ok((re, im)),
            _ => Err(CliError::parse(field, "expected two finite numbers")),
        },
        _ => Err(CliError::parse(field, "expected a [re, im] pair")),
    }
}

/// A rectangular matrix of `[re, im]` pairs. Shape checks against `dim` are left to the caller.
pub fn parse_matrix(v: &Value, field: &str) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::parse(field, "expected an array of rows"))?;
    let ncols = rows.first().and_then(Value::as_array).map_or(0, Vec::len);
    let mut entries = Vec::with_capacity(rows.len() * ncols);
    for (i, row) in rows.iter().enumerate() {
        let row_field = format!("{field}[{i}]");
        let row = row
            .as_array()
            .ok_or_else(|| CliError::parse(&row_field, "expected an array of [re, im] pairs"))?;
        if row.len() != ncols {
            return Err(CliError::parse(&row_field, format!("ragged row: {} entries, expected {ncols}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            entries.push(complex(z, &format!("{row_field}[{j}]"))?);
        }
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| {
        let (re, im) = entries[i * ncols + j];
        c(re, im)
    }))
}

fn require<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| CliError::parse(key, "missing field"))
}

fn check_shape(m: &CMatrix, dim: usize, field: &str) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(qmsdf_core::Error::ModelInvalid {
            field: field.to_string(),
            reason: format!("expected {dim}x{dim}, got {}x{}", m.nrows(), m.ncols()),
        }
        .into());
    }
    Ok(())
}

impl ModelFile {
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| CliError::parse("$", "expected a JSON object"))?;
        for key in obj.keys() {
            if !["dim", "H", "L", "label", "tol"].contains(&key.as_str()) {
                return Err(CliError::parse(key, "unknown field"));
            }
        }
        let dim = require(obj, "dim")?
            .as_u64()
            .filter(|&d| d >= 1)
            .ok_or_else(|| CliError::parse("dim", "expected a positive integer"))? as usize;
        let h = parse_matrix(require(obj, "H")?, "H")?;
        check_shape(&h, dim, "H")?;
        let l = require(obj, "L")?
            .as_array()
            .ok_or_else(|| CliError::parse("L", "expected a list of matrices"))?
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let field = format!("L[{k}]");
                let m = parse_matrix(m, &field)?;
                check_shape(&m, dim, &field)?;
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        let label = match obj.get("label") {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(CliError::parse("label", "expected a string")),
        };
        let mut tol = BTreeMap::new();
        if let Some(t) = obj.get("tol") {
            let t = t.as_object().ok_or_else(|| CliError::parse("tol", "expected an object"))?;
            for (k, v) in t {
                let x = v
                    .as_f64()
                    .ok_or_else(|| CliError::parse(format!("tol.{k}"), "expected a number"))?;
                tol.insert(k.clone(), x);
            }
        }
        Ok(Self { dim, h, l, label, tol })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_value(&read_json(path)?)
    }

    /// Validates the operators under `tol` (which decides the Hermiticity threshold).
    pub fn model(&self, tol: &Tolerance) -> Result<QmsModel> {
        let label = self.label.clone().unwrap_or_else(|| "unlabeled".into());
        Ok(QmsModel::new(self.h.clone(), self.l.clone(), label, tol)?)
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// The model-file document for `model`.
pub fn model_to_json(model: &QmsModel) -> Value {
    serde_json::json!({
        "dim": model.dim(),
        "H": matrix_to_json(model.hamiltonian()),
        "L": model.lindblads().iter().map(matrix_to_json).collect::<Vec<_>>(),
        "label": model.label,
    })
}
