//! Semantics-preserving rewrites: fan-in normalization, smoothing, negation
//! and polarity inversion.

use std::collections::HashMap;

use thiserror::Error;

use crate::circuit::{Circuit, Determinism, FeatureId, FeatureSet, Gate, GateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("gate {0} does not have fan-in exactly 2")]
    NotFanin2(GateId),
    #[error("circuit reads a non-binary feature {0:?}")]
    NonBinaryCircuit(String),
}

/// Appends gates in topological order; inputs always precede consumers.
struct Emitter {
    gates: Vec<Gate>,
    constants: [Option<GateId>; 2],
}

impl Emitter {
    fn new(capacity: usize) -> Self {
        Emitter { gates: Vec::with_capacity(capacity), constants: [None, None] }
    }

    fn push(&mut self, gate: Gate) -> GateId {
        self.gates.push(gate);
        GateId(self.gates.len() - 1)
    }

    fn constant(&mut self, value: bool) -> GateId {
        match self.constants[value as usize] {
            Some(id) => id,
            None => {
                let id = self.push(Gate::Constant(value));
                self.constants[value as usize] = Some(id);
                id
            }
        }
    }
}

pub fn is_fanin2(c: &Circuit) -> bool {
    first_non_fanin2(c).is_none()
}

fn first_non_fanin2(c: &Circuit) -> Option<GateId> {
    c.gates().iter().position(|g| matches!(g, Gate::And(v) | Gate::Or(v) if v.len() != 2)).map(GateId)
}

/// Rewrites every and/or gate to fan-in exactly 2. Wider gates become
/// left-nested chains; a single input is paired with the neutral constant.
pub fn normalize_fanin2(c: &Circuit) -> Circuit {
    if is_fanin2(c) {
        return c.clone();
    }
    let mut out = Emitter::new(c.num_gates() * 2);
    let mut map = vec![GateId(usize::MAX); c.num_gates()];
    for &id in c.topological_order() {
        let new_id = match c.gate(id) {
            Gate::And(inputs) | Gate::Or(inputs) => {
                let is_and = matches!(c.gate(id), Gate::And(_));
                let make = |a, b| {
                    if is_and {
                        Gate::And(vec![a, b])
                    } else {
                        Gate::Or(vec![a, b])
                    }
                };
                let mut acc = map[inputs[0].0];
                if inputs.len() == 1 {
                    let neutral = out.constant(is_and);
                    acc = out.push(make(acc, neutral));
                }
                for input in &inputs[1..] {
                    acc = out.push(make(acc, map[input.0]));
                }
                acc
            }
            Gate::Not(input) => out.push(Gate::Not(map[input.0])),
            leaf => out.push(leaf.clone()),
        };
        map[id.0] = new_id;
    }
    Circuit::from_ordered_parts(c.shared_space(), out.gates, map[c.output().0], c.determinism())
}

pub fn is_smooth(c: &Circuit) -> bool {
    c.gates().iter().all(|g| match g {
        Gate::Or(inputs) => inputs.windows(2).all(|w| c.var_set(w[0]) == c.var_set(w[1])),
        _ => true,
    })
}

/// Makes every or-gate smooth by conjoining each input with a tautology over
/// the features it misses. Tautologies are shared across the whole run: one
/// per feature, and one conjunction chain per suffix of a sorted feature list.
pub fn smooth(c: &Circuit) -> Result<Circuit, TransformError> {
    if let Some(g) = first_non_fanin2(c) {
        return Err(TransformError::NotFanin2(g));
    }
    if is_smooth(c) {
        return Ok(c.clone());
    }
    let space = c.shared_space();
    let mut out = Emitter::new(c.num_gates() * 2);
    let mut map = vec![GateId(usize::MAX); c.num_gates()];
    let mut tautologies: HashMap<usize, GateId> = HashMap::new();
    let mut chains: HashMap<Vec<usize>, GateId> = HashMap::new();

    let mut tautology = |out: &mut Emitter, f: usize| -> GateId {
        if let Some(&g) = tautologies.get(&f) {
            return g;
        }
        let feature = FeatureId(f);
        let g = if space.is_binary_feature(feature) {
            let pos = out.push(Gate::Variable(feature));
            let neg = out.push(Gate::Not(pos));
            out.push(Gate::Or(vec![pos, neg]))
        } else {
            let mut acc = out.push(Gate::Equality(feature, 0));
            for v in 1..space.domain_size(feature) {
                let eq = out.push(Gate::Equality(feature, v));
                acc = out.push(Gate::Or(vec![acc, eq]));
            }
            acc
        };
        tautologies.insert(f, g);
        g
    };

    let mut pad = |out: &mut Emitter, g: GateId, missing: &FeatureSet| -> GateId {
        let features: Vec<usize> = missing.ones().collect();
        if features.is_empty() {
            return g;
        }
        // d_S as And(t(f1), And(t(f2), ... t(fk))), built from the shortest suffix up.
        let mut chain = None;
        for start in (0..features.len()).rev() {
            let key = features[start..].to_vec();
            if let Some(&hit) = chains.get(&key) {
                chain = Some(hit);
                continue;
            }
            let head = tautology(out, features[start]);
            let node = match chain {
                None => head,
                Some(rest) => out.push(Gate::And(vec![head, rest])),
            };
            chains.insert(key, node);
            chain = Some(node);
        }
        out.push(Gate::And(vec![g, chain.expect("non-empty")]))
    };

    for &id in c.topological_order() {
        let new_id = match c.gate(id) {
            Gate::Or(inputs) => {
                let (a, b) = (inputs[0], inputs[1]);
                let (va, vb) = (c.var_set(a), c.var_set(b));
                let mut miss_a = vb.clone();
                miss_a.difference_with(va);
                let mut miss_b = va.clone();
                miss_b.difference_with(vb);
                let left = pad(&mut out, map[a.0], &miss_a);
                let right = pad(&mut out, map[b.0], &miss_b);
                out.push(Gate::Or(vec![left, right]))
            }
            Gate::And(inputs) => out.push(Gate::And(inputs.iter().map(|g| map[g.0]).collect())),
            Gate::Not(input) => out.push(Gate::Not(map[input.0])),
            leaf => out.push(leaf.clone()),
        };
        map[id.0] = new_id;
    }
    Ok(Circuit::from_ordered_parts(space, out.gates, map[c.output().0], c.determinism()))
}

/// `¬C`: the output wrapped in a not-gate.
pub fn negate(c: &Circuit) -> Circuit {
    let mut gates = c.gates().to_vec();
    let mut order = c.topological_order().to_vec();
    gates.push(Gate::Not(c.output()));
    order.push(GateId(gates.len() - 1));
    rebuild_in_order(c, gates, &order, GateId(c.num_gates()), c.determinism())
}

/// `M̄` with `M̄(e) = M(ē)`: every variable gate is read through a not-gate and
/// `x = v` becomes `x = 1 − v`. Defined on binary features only.
/// Flags are not claimed to survive; determinism is reset to unknown.
pub fn invert_polarity(c: &Circuit) -> Result<Circuit, TransformError> {
    let space = c.space();
    let non_binary = c.gates().iter().find_map(|g| match g {
        Gate::Equality(f, _) if !space.is_binary_feature(*f) => Some(*f),
        _ => None,
    });
    if let Some(f) = non_binary {
        return Err(TransformError::NonBinaryCircuit(space.name(f).to_string()));
    }
    let mut out = Emitter::new(c.num_gates() * 2);
    let mut map = vec![GateId(usize::MAX); c.num_gates()];
    for &id in c.topological_order() {
        let new_id = match c.gate(id) {
            Gate::Variable(f) => {
                let v = out.push(Gate::Variable(*f));
                out.push(Gate::Not(v))
            }
            Gate::And(inputs) => out.push(Gate::And(inputs.iter().map(|g| map[g.0]).collect())),
            Gate::Or(inputs) => out.push(Gate::Or(inputs.iter().map(|g| map[g.0]).collect())),
            Gate::Not(input) => out.push(Gate::Not(map[input.0])),
            Gate::Equality(f, v) => out.push(Gate::Equality(*f, 1 - v)),
            leaf => out.push(leaf.clone()),
        };
        map[id.0] = new_id;
    }
    Ok(Circuit::from_ordered_parts(c.shared_space(), out.gates, map[c.output().0], Determinism::Unknown))
}

/// Renumbers `gates` so that `order` becomes the identity.
fn rebuild_in_order(
    c: &Circuit,
    gates: Vec<Gate>,
    order: &[GateId],
    output: GateId,
    determinism: Determinism,
) -> Circuit {
    let mut map = vec![GateId(usize::MAX); gates.len()];
    for (pos, id) in order.iter().enumerate() {
        map[id.0] = GateId(pos);
    }
    let renumbered = order
        .iter()
        .map(|id| match &gates[id.0] {
            Gate::And(inputs) => Gate::And(inputs.iter().map(|g| map[g.0]).collect()),
            Gate::Or(inputs) => Gate::Or(inputs.iter().map(|g| map[g.0]).collect()),
            Gate::Not(input) => Gate::Not(map[input.0]),
            leaf => leaf.clone(),
        })
        .collect();
    Circuit::from_ordered_parts(c.shared_space(), renumbered, map[output.0], determinism)
}
