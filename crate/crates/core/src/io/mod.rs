//! Text and JSON interchange formats.
//!
//! * `.nnf`: c2d-style `L`/`A`/`O` records, plus `E i j` for `x_i = value j`.
//! * sidecar JSON: feature domains, the entity and exact marginals.
//! * graph text: `p nodes N` and one `u v` edge per line, 1-based.
//! * tree and FBDD JSON: `{"feature": …, "children": {value: subtree}}`.
//! * `.dnf` term lists: DIMACS-style literals, one term per line ending in `0`.

mod dnf;
mod graph;
mod nnf;
mod sidecar;
mod tree;

pub use dnf::{parse_dnf, write_dnf};
pub use graph::{parse_graph, write_graph};
pub use nnf::{parse_nnf, parse_nnf_with_space, write_nnf, NnfOptions};
pub use sidecar::{parse_sidecar, write_sidecar, Sidecar};
pub use tree::{parse_fbdd, parse_tree};

use serde_json::Value;
use thiserror::Error;

use crate::circuit::{binary_domain, CircuitError, DistributionError, EntityError, FeatureSpace, GateId, SpaceError};
use crate::encoders::EncodeError;
use crate::formulas::FormulaError;
use crate::num::BadFraction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: node {node} is referenced before it is defined")]
    ForwardReference { line: usize, node: usize },
    #[error("document has no nodes")]
    EmptyDocument,
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("feature {0:?} is missing")]
    MissingFeature(String),
    #[error("marginals of feature {feature:?} sum to {sum}, not 1")]
    SumNotOne { feature: String, sum: String },
    #[error(transparent)]
    BadFraction(#[from] BadFraction),
    #[error("gate {0} negates a non-literal; not expressible as NNF")]
    NotNnfExpressible(GateId),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Entity(#[from] EntityError),
    #[error(transparent)]
    Distribution(DistributionError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

impl From<DistributionError> for IoError {
    fn from(e: DistributionError) -> Self {
        match e {
            DistributionError::SumNotOne { feature, sum } => IoError::SumNotOne { feature, sum },
            other => IoError::Distribution(other),
        }
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json(e.to_string())
    }
}

impl IoError {
    /// Whether the input could not be read at all, as opposed to being read and
    /// found invalid.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            IoError::Parse { .. }
                | IoError::ForwardReference { .. }
                | IoError::EmptyDocument
                | IoError::Json(_)
                | IoError::BadFraction(_)
        )
    }
}

fn json_error(message: impl Into<String>) -> IoError {
    IoError::Json(message.into())
}

/// `["a", {"name": "b", "domain": ["x", "y", "z"]}]`; bare names are binary.
fn parse_feature_decls(value: &Value) -> Result<FeatureSpace, IoError> {
    let items = value.as_array().ok_or_else(|| json_error("\"features\" must be an array"))?;
    let mut decls = Vec::with_capacity(items.len());
    for item in items {
        match item {
            Value::String(name) => decls.push((name.clone(), binary_domain())),
            Value::Object(obj) => {
                let name = obj
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| json_error("feature declaration needs a \"name\""))?;
                let domain = match obj.get("domain") {
                    None => binary_domain(),
                    Some(d) => d
                        .as_array()
                        .ok_or_else(|| json_error(format!("domain of {name:?} must be an array")))?
                        .iter()
                        .map(value_label)
                        .collect::<Result<_, _>>()?,
                };
                decls.push((name.to_string(), domain));
            }
            _ => return Err(json_error("feature declarations are names or objects")),
        }
    }
    Ok(FeatureSpace::new(decls)?)
}

fn write_feature_decls(space: &FeatureSpace) -> Value {
    Value::Array(
        space
            .features()
            .map(|f| {
                if space.is_binary_feature(f) {
                    Value::String(space.name(f).to_string())
                } else {
                    serde_json::json!({"name": space.name(f), "domain": space.domain(f)})
                }
            })
            .collect(),
    )
}

/// Domain values may be written as strings, integers or booleans.
fn value_label(v: &Value) -> Result<String, IoError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(if *b { "1" } else { "0" }.to_string()),
        _ => Err(json_error(format!("{v} is not a domain value"))),
    }
}
