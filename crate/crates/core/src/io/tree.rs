use std::collections::HashMap;

use serde_json::{Map, Value};

use crate::circuit::{binary_domain, FeatureId, FeatureSpace};
use crate::encoders::{Fbdd, FbddNode, MultiDecisionTree, TreeNode};

use super::{json_error, parse_feature_decls, value_label, IoError};

fn leaf(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => match n.as_u64() {
            Some(0) => Some(false),
            Some(1) => Some(true),
            _ => None,
        },
        _ => None,
    }
}

fn split(v: &Value) -> Result<(&str, &Map<String, Value>), IoError> {
    let obj = v.as_object().ok_or_else(|| json_error(format!("{v} is neither a leaf (0/1) nor a split")))?;
    let feature =
        obj.get("feature").and_then(Value::as_str).ok_or_else(|| json_error("split needs a \"feature\" name"))?;
    let children = obj
        .get("children")
        .and_then(Value::as_object)
        .ok_or_else(|| json_error(format!("split on {feature:?} needs a \"children\" object")))?;
    Ok((feature, children))
}

/// Domains seen in the document: binary when the labels are exactly `0`, `1`.
fn infer_space(order: Vec<String>, labels: HashMap<String, Vec<String>>) -> Result<FeatureSpace, IoError> {
    let decls = order.into_iter().map(|name| {
        let mut domain = labels[&name].clone();
        domain.sort();
        if domain == binary_domain() {
            (name, binary_domain())
        } else {
            (name, domain)
        }
    });
    Ok(FeatureSpace::new(decls.collect::<Vec<_>>())?)
}

fn note(
    order: &mut Vec<String>,
    labels: &mut HashMap<String, Vec<String>>,
    feature: &str,
    children: &Map<String, Value>,
) {
    let seen = labels.entry(feature.to_string()).or_insert_with(|| {
        order.push(feature.to_string());
        Vec::new()
    });
    for k in children.keys() {
        if !seen.contains(k) {
            seen.push(k.clone());
        }
    }
}

/// `{"features": [...], "tree": node}` or a bare node, where a node is a leaf
/// `0`/`1` or `{"feature": name, "children": {value: node}}`. Without
/// `"features"`, domains are the child labels seen per feature, sorted.
pub fn parse_tree(text: &str) -> Result<MultiDecisionTree, IoError> {
    let doc: Value = serde_json::from_str(text)?;
    let (declared, root) = match doc.as_object() {
        Some(obj) if obj.contains_key("tree") => (obj.get("features"), &obj["tree"]),
        _ => (None, &doc),
    };
    let space = match declared {
        Some(decls) => parse_feature_decls(decls)?,
        None => {
            let (mut order, mut labels) = (Vec::new(), HashMap::new());
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                if leaf(v).is_none() {
                    let (feature, children) = split(v)?;
                    note(&mut order, &mut labels, feature, children);
                    stack.extend(children.values().rev());
                }
            }
            infer_space(order, labels)?
        }
    };
    let node = build_tree(&space, root)?;
    Ok(MultiDecisionTree::new(space, node)?)
}

fn build_tree(space: &FeatureSpace, v: &Value) -> Result<TreeNode, IoError> {
    if let Some(b) = leaf(v) {
        return Ok(TreeNode::Leaf(b));
    }
    let (name, children) = split(v)?;
    let f = space.feature(name).ok_or_else(|| json_error(format!("undeclared feature {name:?}")))?;
    check_labels(space, f, children)?;
    let kids = space
        .domain(f)
        .iter()
        .filter_map(|label| children.get(label))
        .map(|child| build_tree(space, child))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TreeNode::Split { feature: f, children: kids })
}

fn check_labels(space: &FeatureSpace, f: FeatureId, children: &Map<String, Value>) -> Result<(), IoError> {
    match children.keys().find(|k| space.value_index(f, k).is_none()) {
        Some(k) => Err(json_error(format!("{k:?} is not in the domain of {:?}", space.name(f)))),
        None => Ok(()),
    }
}

/// `{"features": [...]?, "root": id, "nodes": {id: {"feature": name, "children": {"0": ref, "1": ref}}}}`
/// where a `ref` is a node id or a leaf `0`/`1`. Without `"features"`,
/// features are binary, in order of first appearance from the root.
pub fn parse_fbdd(text: &str) -> Result<Fbdd, IoError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| json_error("FBDD must be a JSON object"))?;
    let root = obj.get("root").ok_or_else(|| json_error("FBDD needs a \"root\""))?;
    let empty = Map::new();
    let named = match obj.get("nodes") {
        Some(v) => v.as_object().ok_or_else(|| json_error("\"nodes\" must be an object"))?,
        None => &empty,
    };
    // Nodes 0 and 1 are the leaves; named nodes follow in document order.
    let ids: HashMap<&str, usize> = named.keys().enumerate().map(|(i, k)| (k.as_str(), i + 2)).collect();
    let resolve = |v: &Value| -> Result<usize, IoError> {
        if let Some(b) = leaf(v) {
            return Ok(b as usize);
        }
        let id = value_label(v)?;
        ids.get(id.as_str()).copied().ok_or_else(|| json_error(format!("unknown node {id:?}")))
    };
    let space = match obj.get("features") {
        Some(decls) => parse_feature_decls(decls)?,
        None => {
            let mut order: Vec<String> = Vec::new();
            let mut seen = vec![false; named.len() + 2];
            let mut stack = vec![resolve(root)?];
            let values: Vec<&Value> = named.values().collect();
            while let Some(u) = stack.pop() {
                if u < 2 || std::mem::replace(&mut seen[u], true) {
                    continue;
                }
                let (feature, children) = split(values[u - 2])?;
                if !order.iter().any(|f| f == feature) {
                    order.push(feature.to_string());
                }
                for label in ["1", "0"] {
                    if let Some(c) = children.get(label) {
                        stack.push(resolve(c)?);
                    }
                }
            }
            FeatureSpace::binary(order)?
        }
    };
    let mut nodes = vec![FbddNode::Leaf(false), FbddNode::Leaf(true)];
    for v in named.values() {
        let (name, children) = split(v)?;
        let feature = space.feature(name).ok_or_else(|| json_error(format!("undeclared feature {name:?}")))?;
        let child = |label: &str| -> Result<usize, IoError> {
            resolve(children.get(label).ok_or_else(|| json_error(format!("node on {name:?} lacks child {label:?}")))?)
        };
        if children.len() != 2 {
            return Err(json_error(format!("node on {name:?} needs exactly children \"0\" and \"1\"")));
        }
        nodes.push(FbddNode::Decision { feature, low: child("0")?, high: child("1")? });
    }
    Ok(Fbdd::new(space, nodes, resolve(root)?)?)
}
