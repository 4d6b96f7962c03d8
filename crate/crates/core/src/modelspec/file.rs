use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{evaluate_str, valid_parameter_name};
use super::SpecError;
use crate::error::Result;
use crate::liouvillian::Model;
use crate::operator::{Factor, HilbertSpace, Operator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Qubit,
    Fock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDecl {
    pub kind: SpaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

/// On-disk model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub spaces: Vec<SpaceDecl>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    pub jump_operators: Vec<String>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl ModelFile {
    pub fn from_json(src: &str) -> std::result::Result<Self, SpecError> {
        let de = &mut serde_json::Deserializer::from_str(src);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." || path == "?" { "<document>".to_string() } else { path };
            schema(path, e.inner().to_string())
        })
    }

    pub fn space(&self) -> std::result::Result<HilbertSpace, SpecError> {
        if self.spaces.is_empty() {
            return Err(schema("spaces", "at least one factor is required"));
        }
        let mut factors = Vec::with_capacity(self.spaces.len());
        for (k, s) in self.spaces.iter().enumerate() {
            let f = match (s.kind, s.dim) {
                (SpaceKind::Qubit, None | Some(2)) => Factor::qubit(),
                (SpaceKind::Qubit, Some(d)) => {
                    return Err(schema(format!("spaces[{k}].dim"), format!("a qubit has dimension 2, got {d}")))
                }
                (SpaceKind::Fock, Some(d)) if d >= 1 => Factor::fock(d),
                (SpaceKind::Fock, Some(_)) => {
                    return Err(schema(format!("spaces[{k}].dim"), "Fock dimension must be positive"))
                }
                (SpaceKind::Fock, None) => {
                    return Err(schema(format!("spaces[{k}].dim"), "required for a fock factor"))
                }
            };
            factors.push(f);
        }
        HilbertSpace::new(factors).map_err(|e| schema("spaces", e.to_string()))
    }

    /// Evaluates every expression and assembles the model.
    pub fn to_model(&self) -> Result<Model> {
        for name in self.parameters.keys() {
            if !valid_parameter_name(name) {
                return Err(schema(
                    format!("parameters.{name}"),
                    "not an identifier, or collides with an operator symbol",
                )
                .into());
            }
        }
        let space = self.space()?;
        let in_field = |field: String| move |e: SpecError| SpecError::InField {
            field,
            source: Box::new(e),
        };
        let h = match &self.hamiltonian {
            Some(src) => evaluate_str(src, &space, &self.parameters).map_err(in_field("hamiltonian".into()))?,
            None => Operator::zeros(space.dim()),
        };
        let mut jumps = Vec::with_capacity(self.jump_operators.len());
        for (k, src) in self.jump_operators.iter().enumerate() {
            jumps.push(
                evaluate_str(src, &space, &self.parameters)
                    .map_err(in_field(format!("jump_operators[{k}]")))?,
            );
        }
        Ok(Model::new(space, h, jumps)?.with_name(self.name.clone()))
    }
}

/// Parses a model description held in memory.
pub fn parse_model(src: &str) -> Result<Model> {
    ModelFile::from_json(src)?.to_model()
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_model(&src)
}
