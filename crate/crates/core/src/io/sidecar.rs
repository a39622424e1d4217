use serde_json::{json, Map, Value};

use crate::circuit::{Entity, FeatureSpace, ProductDistribution};
use crate::num::{format_fraction, parse_fraction, Rational};

use super::{json_error, parse_feature_decls, value_label, write_feature_decls, IoError};

/// Everything besides the circuit that a score needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sidecar {
    pub space: FeatureSpace,
    /// Absent when the document has no `"entity"`.
    pub entity: Option<Entity>,
    pub distribution: ProductDistribution,
}

/// Parses
/// `{"features": [...], "entity": {name: value}, "distribution": {name: marginal}}`
/// where a binary marginal may be the single fraction `p(x = 1)`, and any
/// marginal may be a list of fractions in domain order. `"uniform": true`
/// replaces `"distribution"`.
pub fn parse_sidecar(text: &str) -> Result<Sidecar, IoError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| json_error("sidecar must be a JSON object"))?;
    let space = parse_feature_decls(obj.get("features").ok_or_else(|| IoError::MissingFeature("features".into()))?)?;
    let entity = obj.get("entity").map(|e| parse_entity(&space, e)).transpose()?;
    let uniform = obj.get("uniform").and_then(Value::as_bool).unwrap_or(false);
    let distribution = match (obj.get("distribution"), uniform) {
        (Some(_), true) => return Err(json_error("give either \"distribution\" or \"uniform\": true, not both")),
        (None, true) => ProductDistribution::uniform(&space),
        (Some(d), false) => parse_distribution(&space, d)?,
        (None, false) => return Err(json_error("sidecar needs \"distribution\" or \"uniform\": true")),
    };
    Ok(Sidecar { space, entity, distribution })
}

fn check_names(space: &FeatureSpace, obj: &Map<String, Value>, what: &str) -> Result<(), IoError> {
    match obj.keys().find(|k| space.feature(k).is_none()) {
        Some(k) => Err(json_error(format!("{what} mentions undeclared feature {k:?}"))),
        None => Ok(()),
    }
}

fn parse_entity(space: &FeatureSpace, value: &Value) -> Result<Entity, IoError> {
    let obj = value.as_object().ok_or_else(|| json_error("\"entity\" must be an object"))?;
    check_names(space, obj, "entity")?;
    let mut values = Vec::with_capacity(space.len());
    for f in space.features() {
        let name = space.name(f);
        let label = value_label(obj.get(name).ok_or_else(|| IoError::MissingFeature(name.to_string()))?)?;
        let index = space
            .value_index(f, &label)
            .ok_or_else(|| json_error(format!("{label:?} is not in the domain of {name:?}")))?;
        values.push(index);
    }
    Ok(Entity::new(space, values)?)
}

fn fraction(v: &Value) -> Result<Rational, IoError> {
    match v {
        Value::String(s) => Ok(parse_fraction(s)?),
        Value::Number(n) if n.is_i64() => Ok(parse_fraction(&n.to_string())?),
        other => Err(IoError::BadFraction(crate::num::BadFraction(other.to_string()))),
    }
}

fn parse_distribution(space: &FeatureSpace, value: &Value) -> Result<ProductDistribution, IoError> {
    let obj = value.as_object().ok_or_else(|| json_error("\"distribution\" must be an object"))?;
    check_names(space, obj, "distribution")?;
    let mut marginals = Vec::with_capacity(space.len());
    for f in space.features() {
        let name = space.name(f);
        let entry = obj.get(name).ok_or_else(|| IoError::MissingFeature(name.to_string()))?;
        let marginal = match entry {
            Value::Array(items) => items.iter().map(fraction).collect::<Result<Vec<_>, _>>()?,
            Value::Object(by_value) => space
                .domain(f)
                .iter()
                .map(|label| {
                    by_value
                        .get(label)
                        .ok_or_else(|| IoError::MissingFeature(format!("{name}={label}")))
                        .and_then(fraction)
                })
                .collect::<Result<Vec<_>, _>>()?,
            single if space.is_binary_feature(f) => {
                let one = fraction(single)?;
                vec![Rational::from_integer(1.into()) - &one, one]
            }
            _ => return Err(json_error(format!("marginal of non-binary {name:?} needs one fraction per value"))),
        };
        marginals.push(marginal);
    }
    Ok(ProductDistribution::new(space, marginals)?)
}

/// The canonical form read by [`parse_sidecar`].
pub fn write_sidecar(space: &FeatureSpace, entity: Option<&Entity>, p: &ProductDistribution) -> String {
    let mut doc = Map::new();
    doc.insert("features".into(), write_feature_decls(space));
    if let Some(e) = entity {
        let values: Map<String, Value> = space
            .features()
            .map(|f| (space.name(f).to_string(), Value::String(space.domain(f)[e.value(f)].clone())))
            .collect();
        doc.insert("entity".into(), Value::Object(values));
    }
    let marginals: Map<String, Value> = space
        .features()
        .map(|f| {
            let v = if space.is_binary_feature(f) {
                json!(format_fraction(p.prob(f, 1)))
            } else {
                json!(p.marginal(f).iter().map(format_fraction).collect::<Vec<_>>())
            };
            (space.name(f).to_string(), v)
        })
        .collect();
    doc.insert("distribution".into(), Value::Object(marginals));
    serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::FeatureId;
    use crate::num::rat;

    #[test]
    fn binary_shorthand() {
        let s = parse_sidecar(r#"{"features": ["x"], "entity": {"x": 1}, "distribution": {"x": "1/2"}}"#).unwrap();
        assert_eq!(s.distribution.p_one(FeatureId(0)), &rat(1, 2));
        assert_eq!(s.entity.unwrap().value(FeatureId(0)), 1);
    }

    #[test]
    fn ternary_marginals() {
        let text = r#"{"features": [{"name": "c", "domain": ["r", "g", "b"]}],
                       "entity": {"c": "g"},
                       "distribution": {"c": ["1/3", "1/3", "1/3"]}}"#;
        let s = parse_sidecar(text).unwrap();
        assert_eq!(s.entity.unwrap().value(FeatureId(0)), 1);
        assert_eq!(s.distribution.marginal(FeatureId(0)), &[rat(1, 3), rat(1, 3), rat(1, 3)]);
        let by_value = r#"{"features": [{"name": "c", "domain": ["r", "g", "b"]}],
                           "distribution": {"c": {"r": "1/2", "g": "1/4", "b": "1/4"}}}"#;
        assert_eq!(parse_sidecar(by_value).unwrap().distribution.prob(FeatureId(0), 0), &rat(1, 2));
    }

    #[test]
    fn errors() {
        let short =
            r#"{"features": [{"name": "c", "domain": ["r", "g", "b"]}], "distribution": {"c": ["1/2", "1/6", "1/6"]}}"#;
        assert!(matches!(parse_sidecar(short), Err(IoError::SumNotOne { sum, .. }) if sum == "5/6"));
        let missing = r#"{"features": ["x", "y"], "distribution": {"x": "1/2"}}"#;
        assert_eq!(parse_sidecar(missing), Err(IoError::MissingFeature("y".into())));
        let bad = r#"{"features": ["x"], "distribution": {"x": "one half"}}"#;
        assert!(matches!(parse_sidecar(bad), Err(IoError::BadFraction(_))));
        let unknown = r#"{"features": ["x"], "uniform": true, "entity": {"x": 1, "z": 0}}"#;
        assert!(matches!(parse_sidecar(unknown), Err(IoError::Json(_))));
        assert!(matches!(parse_sidecar("{"), Err(IoError::Json(_))));
    }

    #[test]
    fn round_trip() {
        let space = FeatureSpace::new([
            ("a", crate::circuit::binary_domain()),
            ("c", vec!["r".into(), "g".into(), "b".into()]),
        ])
        .unwrap();
        let p =
            ProductDistribution::new(&space, vec![vec![rat(3, 10), rat(7, 10)], vec![rat(1, 2), rat(1, 3), rat(1, 6)]])
                .unwrap();
        let e = Entity::new(&space, vec![1, 2]).unwrap();
        let text = write_sidecar(&space, Some(&e), &p);
        let back = parse_sidecar(&text).unwrap();
        assert_eq!(back, Sidecar { space, entity: Some(e), distribution: p });
    }
}
