//! Decision diagrams and decision trees compiled into deterministic and
//! decomposable circuits.
//!
//! An FBDD node testing `x` becomes `(¬x ∧ α(low)) ∨ (x ∧ α(high))`; a
//! multi-valued tree node becomes `∨_v (x = v ∧ α(child_v))`. The or-inputs are
//! disjoint by the test on `x`, and freeness keeps `x` out of the children, so
//! both encodings are d-D by construction. Shared FBDD nodes map to shared gates.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::circuit::{
    Circuit, CircuitBuilder, CircuitError, Determinism, DeterminismReport, Entity, FeatureId, FeatureSpace, GateId,
};
use crate::oracle::{all_entities, Classifier, ENUMERATION_LIMIT};

/// Encoded circuits with at most this many features get an exhaustive
/// determinism check; larger ones are trusted by construction.
pub const VERIFY_BOUND: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("feature {feature:?} repeats along the path through nodes {path:?}")]
    NotFree { feature: String, path: Vec<usize> },
    #[error("node testing {feature:?} has {found} children, domain has {expected} values")]
    DomainCoverage { feature: String, expected: usize, found: usize },
    #[error("FBDD node tests non-binary feature {0:?}")]
    NonBinaryFeature(String),
    #[error("unknown feature #{0}")]
    UnknownFeature(usize),
    #[error("node {node} points to missing node {target}")]
    DanglingNode { node: usize, target: usize },
    #[error("FBDD contains a cycle through node {0}")]
    Cycle(usize),
    #[error("encoded circuit failed the decomposability check at gates {0:?}")]
    NotDecomposable(Vec<GateId>),
    #[error("encoded circuit failed the determinism check: {0:?}")]
    NotDeterministic(Box<DeterminismReport>),
    #[error("{features} features exceed the truth-table limit of {limit}")]
    TooManyFeatures { features: usize, limit: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FbddNode {
    Leaf(bool),
    /// Follows `low` when the feature is 0 and `high` when it is 1.
    Decision {
        feature: FeatureId,
        low: usize,
        high: usize,
    },
}

/// A rooted binary decision DAG. Construction checks references, acyclicity and
/// binary labels; freeness is checked separately by [`check_free`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fbdd {
    space: FeatureSpace,
    nodes: Vec<FbddNode>,
    root: usize,
}

impl Fbdd {
    pub fn new(space: FeatureSpace, nodes: Vec<FbddNode>, root: usize) -> Result<Self, EncodeError> {
        if root >= nodes.len() {
            return Err(EncodeError::DanglingNode { node: root, target: root });
        }
        for (i, node) in nodes.iter().enumerate() {
            if let FbddNode::Decision { feature, low, high } = *node {
                if feature.0 >= space.len() {
                    return Err(EncodeError::UnknownFeature(feature.0));
                }
                if !space.is_binary_feature(feature) {
                    return Err(EncodeError::NonBinaryFeature(space.name(feature).to_string()));
                }
                for target in [low, high] {
                    if target >= nodes.len() {
                        return Err(EncodeError::DanglingNode { node: i, target });
                    }
                }
            }
        }
        let fbdd = Fbdd { space, nodes, root };
        fbdd.postorder()?;
        Ok(fbdd)
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn nodes(&self) -> &[FbddNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn eval(&self, e: &Entity) -> bool {
        let mut u = self.root;
        loop {
            match self.nodes[u] {
                FbddNode::Leaf(b) => return b,
                FbddNode::Decision { feature, low, high } => u = if e.bit(feature) { high } else { low },
            }
        }
    }

    /// Nodes reachable from the root, children before parents.
    fn postorder(&self) -> Result<Vec<usize>, EncodeError> {
        // 0 = unvisited, 1 = on stack, 2 = done.
        let mut state = vec![0u8; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                state[u] = 2;
                order.push(u);
                continue;
            }
            match state[u] {
                2 => continue,
                1 => return Err(EncodeError::Cycle(u)),
                _ => {}
            }
            state[u] = 1;
            stack.push((u, true));
            if let FbddNode::Decision { low, high, .. } = self.nodes[u] {
                for v in [high, low] {
                    if state[v] == 1 {
                        return Err(EncodeError::Cycle(v));
                    }
                    if state[v] == 0 {
                        stack.push((v, false));
                    }
                }
            }
        }
        Ok(order)
    }

    /// Number of reachable nodes.
    pub fn size(&self) -> usize {
        self.postorder().map(|o| o.len()).unwrap_or(0)
    }
}

impl Classifier for Fbdd {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn classify(&self, e: &Entity) -> bool {
        self.eval(e)
    }
}

/// Outcome of [`check_free`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreenessReport {
    Free,
    /// `path` runs from the root to a second node testing `feature`.
    Violation {
        feature: FeatureId,
        path: Vec<usize>,
    },
}

impl FreenessReport {
    pub fn is_free(&self) -> bool {
        matches!(self, FreenessReport::Free)
    }
}

/// Whether some root-to-leaf path tests a feature twice.
///
/// A repeated label exists iff some reachable node labelled `x` has a descendant
/// labelled `x`, so label sets below each node suffice; no path enumeration.
pub fn check_free(d: &Fbdd) -> FreenessReport {
    let order = d.postorder().expect("validated at construction");
    let n = d.space.len();
    let mut below: HashMap<usize, fixedbitset::FixedBitSet> = HashMap::new();
    for &u in &order {
        let mut labels = fixedbitset::FixedBitSet::with_capacity(n);
        if let FbddNode::Decision { feature, low, high } = d.nodes[u] {
            labels.union_with(&below[&low]);
            labels.union_with(&below[&high]);
            if labels.contains(feature.0) {
                return FreenessReport::Violation { feature, path: witness_path(d, u, feature) };
            }
            labels.insert(feature.0);
        }
        below.insert(u, labels);
    }
    FreenessReport::Free
}

/// Root to `u`, then `u` down to a descendant testing `feature`.
fn witness_path(d: &Fbdd, u: usize, feature: FeatureId) -> Vec<usize> {
    let children = |v: usize| match d.nodes[v] {
        FbddNode::Decision { low, high, .. } => vec![low, high],
        FbddNode::Leaf(_) => vec![],
    };
    let bfs = |from: usize, hit: &dyn Fn(usize) -> bool| -> Vec<usize> {
        let mut parent: HashMap<usize, usize> = HashMap::new();
        let mut queue = std::collections::VecDeque::from([from]);
        let mut seen = std::collections::HashSet::from([from]);
        while let Some(v) = queue.pop_front() {
            if v != from && hit(v) {
                let mut path = vec![v];
                let mut w = v;
                while let Some(&p) = parent.get(&w) {
                    path.push(p);
                    w = p;
                }
                path.reverse();
                return path;
            }
            for c in children(v) {
                if seen.insert(c) {
                    parent.insert(c, v);
                    queue.push_back(c);
                }
            }
        }
        vec![from]
    };
    let mut path = if u == d.root { vec![u] } else { bfs(d.root, &|v| v == u) };
    let tested = |v: usize| matches!(d.nodes[v], FbddNode::Decision { feature: f, .. } if f == feature);
    path.extend(bfs(u, &tested).into_iter().skip(1));
    path
}

/// Compiles a free FBDD. The result has at most `6·|D| + |X|` edges.
pub fn encode_fbdd(d: &Fbdd) -> Result<Circuit, EncodeError> {
    if let FreenessReport::Violation { feature, path } = check_free(d) {
        return Err(EncodeError::NotFree { feature: d.space.name(feature).to_string(), path });
    }
    let mut b = CircuitBuilder::new(Arc::new(d.space.clone()));
    let mut literals: HashMap<FeatureId, (GateId, GateId)> = HashMap::new();
    let mut alpha: HashMap<usize, GateId> = HashMap::new();
    let mut constants: [Option<GateId>; 2] = [None, None];
    for u in d.postorder()? {
        let gate = match d.nodes[u] {
            FbddNode::Leaf(value) => *constants[value as usize].get_or_insert_with(|| b.constant(value)),
            FbddNode::Decision { feature, low, high } => {
                let (pos, neg) = *literals.entry(feature).or_insert_with(|| {
                    let pos = b.var(feature);
                    (pos, b.not(pos))
                });
                let left = b.and([neg, alpha[&low]]);
                let right = b.and([pos, alpha[&high]]);
                b.or([left, right])
            }
        };
        alpha.insert(u, gate);
    }
    certify(b.finish(alpha[&d.root])?)
}

/// Re-checks the by-construction guarantees: decomposability always, determinism
/// exhaustively up to [`VERIFY_BOUND`] features.
fn certify(c: Circuit) -> Result<Circuit, EncodeError> {
    let report = c.check_decomposability();
    if !report.is_ok() {
        return Err(EncodeError::NotDecomposable(report.violations));
    }
    match c.check_determinism_bruteforce(VERIFY_BOUND) {
        DeterminismReport::Ok => Ok(c.with_determinism(Determinism::Verified)),
        DeterminismReport::Skipped { .. } => Ok(c.with_determinism(Determinism::Trusted)),
        bad => Err(EncodeError::NotDeterministic(Box::new(bad))),
    }
}

/// The reduced OBDD of a binary classifier under the feature order, built from
/// its truth table. Nodes 0 and 1 are the leaves; no node has `low == high`.
pub fn compile_obdd<M: Classifier>(m: &M) -> Result<Fbdd, EncodeError> {
    let space = m.space();
    if let Some(f) = space.features().find(|&f| !space.is_binary_feature(f)) {
        return Err(EncodeError::NonBinaryFeature(space.name(f).to_string()));
    }
    if space.len() > ENUMERATION_LIMIT {
        return Err(EncodeError::TooManyFeatures { features: space.len(), limit: ENUMERATION_LIMIT });
    }
    // Counter order: the first feature selects the half of the table.
    let table: Vec<bool> = all_entities(space).map(|e| m.classify(&e)).collect();
    let mut nodes = vec![FbddNode::Leaf(false), FbddNode::Leaf(true)];
    let mut unique: HashMap<FbddNode, usize> = HashMap::new();
    let root = obdd_node(&table, 0, &mut nodes, &mut unique);
    Fbdd::new(space.clone(), nodes, root)
}

fn obdd_node(slice: &[bool], level: usize, nodes: &mut Vec<FbddNode>, unique: &mut HashMap<FbddNode, usize>) -> usize {
    if slice.len() == 1 {
        return slice[0] as usize;
    }
    let (lo, hi) = slice.split_at(slice.len() / 2);
    let low = obdd_node(lo, level + 1, nodes, unique);
    let high = obdd_node(hi, level + 1, nodes, unique);
    if low == high {
        return low;
    }
    let node = FbddNode::Decision { feature: FeatureId(level), low, high };
    *unique.entry(node).or_insert_with(|| {
        nodes.push(node);
        nodes.len() - 1
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(bool),
    /// `children[v]` is followed when the feature takes value `v`.
    Split {
        feature: FeatureId,
        children: Vec<TreeNode>,
    },
}

impl TreeNode {
    pub fn size(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Split { children, .. } => 1 + children.iter().map(TreeNode::size).sum::<usize>(),
        }
    }
}

/// A decision tree over arbitrary finite domains; every split covers its domain
/// and no path tests a feature twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiDecisionTree {
    space: FeatureSpace,
    root: TreeNode,
}

impl MultiDecisionTree {
    pub fn new(space: FeatureSpace, root: TreeNode) -> Result<Self, EncodeError> {
        fn walk(space: &FeatureSpace, node: &TreeNode, path: &mut Vec<FeatureId>) -> Result<(), EncodeError> {
            if let TreeNode::Split { feature, children } = node {
                if feature.0 >= space.len() {
                    return Err(EncodeError::UnknownFeature(feature.0));
                }
                let expected = space.domain_size(*feature);
                if children.len() != expected {
                    return Err(EncodeError::DomainCoverage {
                        feature: space.name(*feature).to_string(),
                        expected,
                        found: children.len(),
                    });
                }
                if path.contains(feature) {
                    return Err(EncodeError::NotFree {
                        feature: space.name(*feature).to_string(),
                        path: path.iter().map(|f| f.0).collect(),
                    });
                }
                path.push(*feature);
                for child in children {
                    walk(space, child, path)?;
                }
                path.pop();
            }
            Ok(())
        }
        walk(&space, &root, &mut Vec::new())?;
        Ok(MultiDecisionTree { space, root })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn eval(&self, e: &Entity) -> bool {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(b) => return *b,
                TreeNode::Split { feature, children } => node = &children[e.value(*feature)],
            }
        }
    }

    /// Whether every split tests a binary feature.
    pub fn is_binary(&self) -> bool {
        fn walk(space: &FeatureSpace, node: &TreeNode) -> bool {
            match node {
                TreeNode::Leaf(_) => true,
                TreeNode::Split { feature, children } => {
                    space.is_binary_feature(*feature) && children.iter().all(|c| walk(space, c))
                }
            }
        }
        walk(&self.space, &self.root)
    }

    /// The same tree as an FBDD, one node per tree node. Needs binary splits.
    pub fn to_fbdd(&self) -> Result<Fbdd, EncodeError> {
        fn walk(space: &FeatureSpace, node: &TreeNode, nodes: &mut Vec<FbddNode>) -> Result<usize, EncodeError> {
            let slot = nodes.len();
            nodes.push(FbddNode::Leaf(false));
            nodes[slot] = match node {
                TreeNode::Leaf(b) => FbddNode::Leaf(*b),
                TreeNode::Split { feature, children } => {
                    if !space.is_binary_feature(*feature) {
                        return Err(EncodeError::NonBinaryFeature(space.name(*feature).to_string()));
                    }
                    let low = walk(space, &children[0], nodes)?;
                    let high = walk(space, &children[1], nodes)?;
                    FbddNode::Decision { feature: *feature, low, high }
                }
            };
            Ok(slot)
        }
        let mut nodes = Vec::new();
        walk(&self.space, &self.root, &mut nodes)?;
        Fbdd::new(self.space.clone(), nodes, 0)
    }
}

impl Classifier for MultiDecisionTree {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn classify(&self, e: &Entity) -> bool {
        self.eval(e)
    }
}

/// Compiles a tree with equality gates: `∨_v (x = v ∧ α(child_v))` per split.
pub fn encode_decision_tree(t: &MultiDecisionTree) -> Result<Circuit, EncodeError> {
    fn walk(b: &mut CircuitBuilder, node: &TreeNode) -> GateId {
        match node {
            TreeNode::Leaf(value) => b.constant(*value),
            TreeNode::Split { feature, children } => {
                let cases: Vec<GateId> = children
                    .iter()
                    .enumerate()
                    .map(|(v, child)| {
                        let test = b.eq(*feature, v);
                        let sub = walk(b, child);
                        b.and([test, sub])
                    })
                    .collect();
                b.or(cases)
            }
        }
    }
    let mut b = CircuitBuilder::new(Arc::new(t.space.clone()));
    let root = walk(&mut b, &t.root);
    certify(b.finish(root)?)
}

/// Binary trees go through the FBDD gadget, others through equality gates.
pub fn encode_tree(t: &MultiDecisionTree) -> Result<Circuit, EncodeError> {
    if t.is_binary() {
        encode_fbdd(&t.to_fbdd()?)
    } else {
        encode_decision_tree(t)
    }
}
