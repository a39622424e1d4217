//! Exact SHAP scores for Boolean classifiers given as deterministic and
//! decomposable circuits, under product distributions.
//!
//! All arithmetic is exact ([`num::Rational`]). The main entry points are
//! [`engine::shap_score`] and [`engine::shap_all`]; [`oracle`] provides
//! exhaustive ground truth and [`formulas`] the DNF/graph constructions used as
//! closed-form cross-checks.

pub mod circuit;
pub mod encoders;
pub mod engine;
pub mod formulas;
pub mod io;
pub mod num;
pub mod oracle;
pub mod testgen;
pub mod transforms;

pub use circuit::{
    running_example, Circuit, CircuitBuilder, CircuitError, Determinism, Entity, FeatureId, FeatureSet, FeatureSpace,
    Gate, GateId, ProductDistribution,
};
pub use engine::{shap_all, shap_score, EngineError, ShapReport};
pub use num::Rational;
