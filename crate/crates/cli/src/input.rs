//! Resolving model arguments and input-state descriptions.

use std::path::Path;

use lindblad_core::models::{self, coherent_state};
use lindblad_core::{load_model, DensityMatrix, FactorKind, Model, Operator, C64};

use crate::CliError;

pub struct Loaded {
    pub model: Model,
    /// Path or catalog name as given on the command line.
    pub source: String,
    /// Conservation-check margin suggested by the catalog entry, if any.
    pub catalog_margin: Option<usize>,
}

/// A path to a model file, or a catalog name when no such file exists.
pub fn load(arg: &str) -> Result<Loaded, CliError> {
    if Path::new(arg).exists() {
        let model = load_model(arg).map_err(|e| CliError::from_core(e).context(arg))?;
        return Ok(Loaded {
            model,
            source: arg.to_string(),
            catalog_margin: None,
        });
    }
    match models::by_name(arg) {
        Some(entry) => Ok(Loaded {
            model: entry.model,
            source: arg.to_string(),
            catalog_margin: Some(entry.interior_margin),
        }),
        None => Err(CliError::input(format!(
            "{arg}: no such file, and not a catalog model ({})",
            models::CATALOG_NAMES.join(", ")
        ))),
    }
}

/// Default margin: twice the largest number of quanta any jump removes on a
/// Fock factor, zero for qubit-only models.
pub fn default_margin(loaded: &Loaded) -> usize {
    if let Some(m) = loaded.catalog_margin {
        return m;
    }
    let model = &loaded.model;
    if !model.space().factors().iter().any(|f| f.kind == FactorKind::Fock) {
        return 0;
    }
    let n = model.dim();
    let mut reach = 0;
    for f in model.jumps() {
        for i in 0..n {
            for j in i + 1..n {
                if f.get(i, j).norm() > 0.0 {
                    reach = reach.max(j - i);
                }
            }
        }
    }
    2 * reach
}

fn inner<'a>(spec: &'a str, head: &str) -> Option<&'a str> {
    spec.strip_prefix(head)?.strip_prefix('(')?.strip_suffix(')')
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::input(format!("{what}: '{s}' is not a number")))
}

/// `ket(b1 b2 ...)`, `coherent(re,im)` or the path of a JSON matrix file.
pub fn parse_state(spec: &str, model: &Model) -> Result<DensityMatrix, CliError> {
    let spec = spec.trim();
    if let Some(body) = inner(spec, "ket") {
        return ket(body, model);
    }
    if let Some(body) = inner(spec, "coherent") {
        let factors = model.space().factors();
        if factors.len() != 1 || factors[0].kind != FactorKind::Fock {
            return Err(CliError::input("coherent(...) needs a model with a single Fock factor"));
        }
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::input("coherent(re,im) takes two numbers"));
        }
        let alpha = C64::new(parse_f64(parts[0], "coherent")?, parse_f64(parts[1], "coherent")?);
        return coherent_state(model.dim(), alpha).map_err(CliError::from_core);
    }
    if Path::new(spec).exists() {
        return matrix_file(spec, model.dim());
    }
    Err(CliError::input(format!(
        "state '{spec}': expected ket(...), coherent(re,im) or a matrix file"
    )))
}

fn ket(body: &str, model: &Model) -> Result<DensityMatrix, CliError> {
    let labels: Vec<usize> = if body.contains(',') {
        body.split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::input(format!("ket: bad label '{s}'"))))
            .collect::<Result<_, _>>()?
    } else {
        body.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| CliError::input(format!("ket: bad label '{c}'"))))
            .collect::<Result<_, _>>()?
    };
    let dims = model.space().dims();
    if labels.len() != dims.len() {
        return Err(CliError::input(format!(
            "ket has {} labels but the model has {} factors",
            labels.len(),
            dims.len()
        )));
    }
    let mut index = 0;
    for (k, (&b, &d)) in labels.iter().zip(&dims).enumerate() {
        if b >= d {
            return Err(CliError::input(format!("ket label {b} out of range for factor {} of dimension {d}", k + 1)));
        }
        index = index * d + b;
    }
    Ok(DensityMatrix::basis_state(model.dim(), index))
}

/// JSON array of rows; each entry is a number or a `[re, im]` pair.
fn matrix_file(path: &str, n: usize) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{path}: {e}")))?;
    let rows: Vec<Vec<serde_json::Value>> =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{path}: {e}")))?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::input(format!("{path}: expected a {n}x{n} matrix")));
    }
    let entry = |v: &serde_json::Value| -> Option<C64> {
        match v {
            serde_json::Value::Number(x) => Some(C64::new(x.as_f64()?, 0.0)),
            serde_json::Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
            _ => None,
        }
    };
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let mut r = Vec::with_capacity(n);
        for (j, v) in row.iter().enumerate() {
            r.push(entry(v).ok_or_else(|| CliError::input(format!("{path}: entry ({i},{j}) is not a number or [re, im]")))?);
        }
        out.push(r);
    }
    DensityMatrix::new(Operator::from_rows(&out)).map_err(|e| CliError::from_core(e).context(path))
}
