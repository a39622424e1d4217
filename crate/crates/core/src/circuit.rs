//! Boolean circuits over finite-domain features: representation, validation,
//! evaluation and conditioning.
//!
//! A [`Circuit`] is an immutable DAG. Binary features are read through
//! [`Gate::Variable`] gates; any feature, binary or not, may be tested through
//! [`Gate::Equality`] gates. The binary case is simply a circuit whose features
//! all have the domain `{0, 1}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::num::Rational;
use num_traits::{One, Zero};

/// Index of a feature inside its [`FeatureSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId(pub usize);

impl FeatureId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Index of a gate inside its [`Circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateId(pub usize);

impl GateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Set of features, one bit per feature of the space.
pub type FeatureSet = FixedBitSet;

pub const BINARY_DOMAIN: [&str; 2] = ["0", "1"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("feature {0:?} declared twice")]
    DuplicateFeature(String),
    #[error("feature {0:?} needs at least two domain values")]
    DomainTooSmall(String),
    #[error("feature {feature:?} lists value {value:?} twice")]
    DuplicateValue { feature: String, value: String },
}

/// Ordered features with their finite domains. The declaration order is the
/// tie-break order used everywhere results are ranked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpace {
    names: Vec<String>,
    domains: Vec<Vec<String>>,
    lookup: HashMap<String, FeatureId>,
}

impl FeatureSpace {
    pub fn new<I, S>(features: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = (S, Vec<String>)>,
        S: Into<String>,
    {
        let mut space = FeatureSpace { names: Vec::new(), domains: Vec::new(), lookup: HashMap::new() };
        for (name, domain) in features {
            space.push(name.into(), domain)?;
        }
        Ok(space)
    }

    /// A space of binary features with domain `{0, 1}`.
    pub fn binary<I, S>(names: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(names.into_iter().map(|n| (n, binary_domain())))
    }

    fn push(&mut self, name: String, domain: Vec<String>) -> Result<(), SpaceError> {
        if self.lookup.contains_key(&name) {
            return Err(SpaceError::DuplicateFeature(name));
        }
        if domain.len() < 2 {
            return Err(SpaceError::DomainTooSmall(name));
        }
        for (i, v) in domain.iter().enumerate() {
            if domain[..i].contains(v) {
                return Err(SpaceError::DuplicateValue { feature: name, value: v.clone() });
            }
        }
        self.lookup.insert(name.clone(), FeatureId(self.names.len()));
        self.names.push(name);
        self.domains.push(domain);
        Ok(())
    }

    /// This space followed by `extra` features.
    pub fn extended<I, S>(&self, extra: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = (S, Vec<String>)>,
        S: Into<String>,
    {
        let mut space = self.clone();
        for (name, domain) in extra {
            space.push(name.into(), domain)?;
        }
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn features(&self) -> impl ExactSizeIterator<Item = FeatureId> + '_ {
        (0..self.names.len()).map(FeatureId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, f: FeatureId) -> &str {
        &self.names[f.0]
    }

    pub fn feature(&self, name: &str) -> Option<FeatureId> {
        self.lookup.get(name).copied()
    }

    pub fn domain(&self, f: FeatureId) -> &[String] {
        &self.domains[f.0]
    }

    pub fn domain_size(&self, f: FeatureId) -> usize {
        self.domains[f.0].len()
    }

    pub fn value_index(&self, f: FeatureId, label: &str) -> Option<usize> {
        self.domains[f.0].iter().position(|v| v == label)
    }

    pub fn is_binary_feature(&self, f: FeatureId) -> bool {
        self.domains[f.0].len() == 2
            && self.domains[f.0][0] == BINARY_DOMAIN[0]
            && self.domains[f.0][1] == BINARY_DOMAIN[1]
    }

    pub fn is_binary(&self) -> bool {
        self.features().all(|f| self.is_binary_feature(f))
    }

    pub fn empty_set(&self) -> FeatureSet {
        FeatureSet::with_capacity(self.len())
    }

    /// Number of entities, `None` on overflow.
    pub fn entity_count(&self) -> Option<u128> {
        self.domains.iter().try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128))
    }
}

pub fn binary_domain() -> Vec<String> {
    BINARY_DOMAIN.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntityError {
    #[error("entity has {got} values but the space has {expected} features")]
    WrongLength { expected: usize, got: usize },
    #[error("value index {value} is outside the domain of feature {feature:?}")]
    ValueOutOfDomain { feature: String, value: usize },
}

/// Total assignment of domain values (by index) to the features of a space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entity {
    values: Vec<usize>,
}

impl Entity {
    pub fn new(space: &FeatureSpace, values: Vec<usize>) -> Result<Self, EntityError> {
        if values.len() != space.len() {
            return Err(EntityError::WrongLength { expected: space.len(), got: values.len() });
        }
        for f in space.features() {
            if values[f.0] >= space.domain_size(f) {
                return Err(EntityError::ValueOutOfDomain { feature: space.name(f).to_string(), value: values[f.0] });
            }
        }
        Ok(Entity { values })
    }

    /// Binary entity from 0/1 bits, one per feature.
    pub fn from_bits(space: &FeatureSpace, bits: &[u8]) -> Result<Self, EntityError> {
        Self::new(space, bits.iter().map(|&b| b as usize).collect())
    }

    /// Wraps raw value indices without checking them against a space.
    pub(crate) fn from_raw(values: Vec<usize>) -> Self {
        Entity { values }
    }

    pub fn value(&self, f: FeatureId) -> usize {
        self.values[f.0]
    }

    pub fn bit(&self, f: FeatureId) -> bool {
        self.values[f.0] == 1
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with(&self, f: FeatureId, value: usize) -> Entity {
        let mut values = self.values.clone();
        values[f.0] = value;
        Entity { values }
    }

    /// Flips every binary value (`1 - e(x)`), used by the polarity identity.
    pub fn inverted(&self) -> Entity {
        Entity { values: self.values.iter().map(|&v| 1 - v.min(1)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributionError {
    #[error("distribution covers {got} features but the space has {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("feature {feature:?} has {got} probabilities for a domain of {expected} values")]
    WrongDomainLength { feature: String, expected: usize, got: usize },
    #[error("probability for feature {feature:?} is outside [0,1]")]
    OutOfRange { feature: String },
    #[error("probabilities for feature {feature:?} sum to {sum} instead of 1")]
    SumNotOne { feature: String, sum: String },
}

/// Independent per-feature marginals over domain values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductDistribution {
    marginals: Vec<Vec<Rational>>,
}

impl ProductDistribution {
    pub fn new(space: &FeatureSpace, marginals: Vec<Vec<Rational>>) -> Result<Self, DistributionError> {
        if marginals.len() != space.len() {
            return Err(DistributionError::WrongLength { expected: space.len(), got: marginals.len() });
        }
        for f in space.features() {
            let probs = &marginals[f.0];
            let name = || space.name(f).to_string();
            if probs.len() != space.domain_size(f) {
                return Err(DistributionError::WrongDomainLength {
                    feature: name(),
                    expected: space.domain_size(f),
                    got: probs.len(),
                });
            }
            if probs.iter().any(|q| *q < Rational::zero() || *q > Rational::one()) {
                return Err(DistributionError::OutOfRange { feature: name() });
            }
            let sum: Rational = probs.iter().sum();
            if !sum.is_one() {
                return Err(DistributionError::SumNotOne { feature: name(), sum: crate::num::format_fraction(&sum) });
            }
        }
        Ok(ProductDistribution { marginals })
    }

    /// Every feature uniform over its domain.
    pub fn uniform(space: &FeatureSpace) -> Self {
        let marginals = space
            .features()
            .map(|f| {
                let n = space.domain_size(f) as i64;
                vec![crate::num::rat(1, n); n as usize]
            })
            .collect();
        ProductDistribution { marginals }
    }

    /// Binary shorthand: `p[i]` is the probability that feature `i` takes value 1.
    pub fn binary(space: &FeatureSpace, p: Vec<Rational>) -> Result<Self, DistributionError> {
        let marginals = p.into_iter().map(|q| vec![Rational::one() - &q, q]).collect();
        Self::new(space, marginals)
    }

    pub fn prob(&self, f: FeatureId, value: usize) -> &Rational {
        &self.marginals[f.0][value]
    }

    /// `p(x)`: the probability of value 1 for a binary feature.
    pub fn p_one(&self, f: FeatureId) -> &Rational {
        &self.marginals[f.0][1]
    }

    pub fn marginal(&self, f: FeatureId) -> &[Rational] {
        &self.marginals[f.0]
    }

    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marginals.is_empty()
    }

    /// Probability of one full entity.
    pub fn weight(&self, e: &Entity) -> Rational {
        e.values().iter().enumerate().map(|(i, &v)| &self.marginals[i][v]).fold(Rational::one(), |acc, q| acc * q)
    }
}

/// One gate of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    /// Reads a binary feature.
    Variable(FeatureId),
    /// True when the feature takes the given value (domain index).
    Equality(FeatureId, usize),
    Constant(bool),
    And(Vec<GateId>),
    Or(Vec<GateId>),
    Not(GateId),
}

impl Gate {
    pub fn inputs(&self) -> &[GateId] {
        match self {
            Gate::And(inputs) | Gate::Or(inputs) => inputs,
            Gate::Not(input) => std::slice::from_ref(input),
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("gate {gate} lies on a cycle")]
    CycleDetected { gate: GateId },
    #[error("circuit must have exactly one sink, the output; found sinks {sinks:?}")]
    MultipleOutputs { sinks: Vec<GateId> },
    #[error("gate {gate} references missing gate {input}")]
    DanglingReference { gate: GateId, input: GateId },
    #[error("gate {gate} lists input {input} more than once")]
    DuplicateEdge { gate: GateId, input: GateId },
    #[error("gate {gate}: {reason}")]
    DomainMismatch { gate: GateId, reason: String },
    #[error("gate {gate} has no inputs")]
    EmptyFanIn { gate: GateId },
    #[error("output gate {0} does not exist")]
    MissingOutput(GateId),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("value {value} is not in the domain of feature {feature:?}")]
    ValueOutOfDomain { feature: String, value: usize },
    #[error("feature {0:?} is not binary")]
    NonBinaryFeature(String),
}

/// How much is known about determinism, which is semantic and costly to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Determinism {
    Unknown,
    /// Asserted by the producer (e.g. a knowledge compiler).
    Trusted,
    /// Established by exhaustive checking.
    Verified,
}

impl Determinism {
    pub fn is_established(self) -> bool {
        !matches!(self, Determinism::Unknown)
    }
}

/// Outcome of the syntactic decomposability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposabilityReport {
    /// And-gates with two inputs that share a feature.
    pub violations: Vec<GateId>,
}

impl DecomposabilityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeterminismReport {
    Ok,
    /// `entity` satisfies both `inputs` of the or-gate `gate`.
    Counterexample {
        gate: GateId,
        inputs: (GateId, GateId),
        entity: Entity,
    },
    /// Too many features to enumerate.
    Skipped {
        vars: usize,
        max_vars: usize,
    },
}

impl DeterminismReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, DeterminismReport::Ok)
    }
}

/// Default feature bound for exhaustive determinism checks.
pub const DEFAULT_DETERMINISM_BOUND: usize = 16;

/// An immutable, validated Boolean circuit.
#[derive(Debug, Clone)]
pub struct Circuit {
    space: Arc<FeatureSpace>,
    gates: Vec<Gate>,
    order: Vec<GateId>,
    output: GateId,
    var_sets: Vec<FeatureSet>,
    decomposable: bool,
    determinism: Determinism,
}

impl Circuit {
    /// Validates `gates` (inputs may reference any gate of the list) and
    /// computes the topological order and per-gate feature sets.
    pub fn build(
        space: impl Into<Arc<FeatureSpace>>,
        gates: Vec<Gate>,
        output: GateId,
    ) -> Result<Circuit, CircuitError> {
        let space = space.into();
        if output.0 >= gates.len() {
            return Err(CircuitError::MissingOutput(output));
        }
        for (i, gate) in gates.iter().enumerate() {
            let id = GateId(i);
            match gate {
                Gate::Variable(f) => {
                    if f.0 >= space.len() {
                        return Err(CircuitError::DomainMismatch {
                            gate: id,
                            reason: format!("feature index {} out of range", f.0),
                        });
                    }
                    if !space.is_binary_feature(*f) {
                        return Err(CircuitError::DomainMismatch {
                            gate: id,
                            reason: format!("variable gate on non-binary feature {:?}", space.name(*f)),
                        });
                    }
                }
                Gate::Equality(f, v) => {
                    if f.0 >= space.len() {
                        return Err(CircuitError::DomainMismatch {
                            gate: id,
                            reason: format!("feature index {} out of range", f.0),
                        });
                    }
                    if *v >= space.domain_size(*f) {
                        return Err(CircuitError::DomainMismatch {
                            gate: id,
                            reason: format!("value {v} outside the domain of {:?}", space.name(*f)),
                        });
                    }
                }
                Gate::And(inputs) | Gate::Or(inputs) if inputs.is_empty() => {
                    return Err(CircuitError::EmptyFanIn { gate: id });
                }
                _ => {}
            }
            let inputs = gate.inputs();
            for (k, input) in inputs.iter().enumerate() {
                if input.0 >= gates.len() {
                    return Err(CircuitError::DanglingReference { gate: id, input: *input });
                }
                if inputs[..k].contains(input) {
                    return Err(CircuitError::DuplicateEdge { gate: id, input: *input });
                }
            }
        }
        let order = topological_order(&gates)?;
        let mut has_consumer = vec![false; gates.len()];
        for gate in &gates {
            for input in gate.inputs() {
                has_consumer[input.0] = true;
            }
        }
        let sinks: Vec<GateId> = (0..gates.len()).filter(|&i| !has_consumer[i]).map(GateId).collect();
        if sinks != [output] {
            return Err(CircuitError::MultipleOutputs { sinks });
        }
        Ok(Self::assemble(space, gates, order, output, Determinism::Unknown))
    }

    /// Builds from gates already known to be valid and in topological order.
    pub(crate) fn from_ordered_parts(
        space: Arc<FeatureSpace>,
        gates: Vec<Gate>,
        output: GateId,
        determinism: Determinism,
    ) -> Circuit {
        debug_assert!(gates.iter().enumerate().all(|(i, g)| g.inputs().iter().all(|c| c.0 < i)));
        let order = (0..gates.len()).map(GateId).collect();
        Self::assemble(space, gates, order, output, determinism)
    }

    fn assemble(
        space: Arc<FeatureSpace>,
        gates: Vec<Gate>,
        order: Vec<GateId>,
        output: GateId,
        determinism: Determinism,
    ) -> Circuit {
        let var_sets = var_sets_in_order(&space, &gates, &order);
        let mut circuit = Circuit { space, gates, order, output, var_sets, decomposable: false, determinism };
        circuit.decomposable = circuit.check_decomposability().is_ok();
        circuit
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn shared_space(&self) -> Arc<FeatureSpace> {
        Arc::clone(&self.space)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.0]
    }

    /// Gate ids, inputs before consumers.
    pub fn topological_order(&self) -> &[GateId] {
        &self.order
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    /// Size of the circuit: its number of edges.
    pub fn size(&self) -> usize {
        self.gates.iter().map(|g| g.inputs().len()).sum()
    }

    pub fn var_set(&self, id: GateId) -> &FeatureSet {
        &self.var_sets[id.0]
    }

    pub fn var_sets(&self) -> &[FeatureSet] {
        &self.var_sets
    }

    /// Features the output gate depends on syntactically.
    pub fn vars(&self) -> &FeatureSet {
        &self.var_sets[self.output.0]
    }

    pub fn is_decomposable(&self) -> bool {
        self.decomposable
    }

    pub fn determinism(&self) -> Determinism {
        self.determinism
    }

    /// True when the circuit has no equality gates.
    pub fn is_binary(&self) -> bool {
        !self.gates.iter().any(|g| matches!(g, Gate::Equality(..)))
    }

    pub fn with_determinism(mut self, determinism: Determinism) -> Circuit {
        self.determinism = determinism;
        self
    }

    /// Marks the circuit deterministic without checking.
    pub fn trust_determinism(self) -> Circuit {
        self.with_determinism(Determinism::Trusted)
    }

    /// Runs the exhaustive determinism check and records a success.
    pub fn verify_determinism(self, max_vars: usize) -> Result<Circuit, DeterminismReport> {
        match self.check_determinism_bruteforce(max_vars) {
            DeterminismReport::Ok => Ok(self.with_determinism(Determinism::Verified)),
            report => Err(report),
        }
    }

    pub fn evaluate(&self, e: &Entity) -> bool {
        let mut values = vec![false; self.gates.len()];
        self.evaluate_into(e, &mut values);
        values[self.output.0]
    }

    /// Evaluates every gate, writing gate values into `values`.
    pub fn evaluate_into(&self, e: &Entity, values: &mut Vec<bool>) {
        values.clear();
        values.resize(self.gates.len(), false);
        for &id in &self.order {
            let v = match &self.gates[id.0] {
                Gate::Variable(f) => e.value(*f) == 1,
                Gate::Equality(f, v) => e.value(*f) == *v,
                Gate::Constant(b) => *b,
                Gate::And(inputs) => inputs.iter().all(|g| values[g.0]),
                Gate::Or(inputs) => inputs.iter().any(|g| values[g.0]),
                Gate::Not(g) => !values[g.0],
            };
            values[id.0] = v;
        }
    }

    /// Recomputes `var(g)` for every gate from scratch.
    pub fn compute_var_sets(&self) -> Vec<FeatureSet> {
        var_sets_in_order(&self.space, &self.gates, &self.order)
    }

    pub fn check_decomposability(&self) -> DecomposabilityReport {
        let mut violations = Vec::new();
        let mut seen = self.space.empty_set();
        for (i, gate) in self.gates.iter().enumerate() {
            if let Gate::And(inputs) = gate {
                seen.clear();
                let mut ok = true;
                for input in inputs {
                    let vars = &self.var_sets[input.0];
                    if !seen.is_disjoint(vars) {
                        ok = false;
                        break;
                    }
                    seen.union_with(vars);
                }
                if !ok {
                    violations.push(GateId(i));
                }
            }
        }
        DecomposabilityReport { violations }
    }

    /// Enumerates all entities over the features used by the circuit and checks
    /// that no or-gate has two satisfied inputs.
    pub fn check_determinism_bruteforce(&self, max_vars: usize) -> DeterminismReport {
        let mut used = self.space.empty_set();
        for vars in &self.var_sets {
            used.union_with(vars);
        }
        let used: Vec<FeatureId> = used.ones().map(FeatureId).collect();
        if used.len() > max_vars {
            return DeterminismReport::Skipped { vars: used.len(), max_vars };
        }
        let radices: Vec<usize> = used.iter().map(|&f| self.space.domain_size(f)).collect();
        let mut counter = vec![0usize; used.len()];
        let mut entity = vec![0usize; self.space.len()];
        let mut values = Vec::new();
        loop {
            for (k, &f) in used.iter().enumerate() {
                entity[f.0] = counter[k];
            }
            let e = Entity::from_raw(entity.clone());
            self.evaluate_into(&e, &mut values);
            for (i, gate) in self.gates.iter().enumerate() {
                if let Gate::Or(inputs) = gate {
                    let mut hot = inputs.iter().filter(|g| values[g.0]);
                    if let (Some(a), Some(b)) = (hot.next(), hot.next()) {
                        return DeterminismReport::Counterexample { gate: GateId(i), inputs: (*a, *b), entity: e };
                    }
                }
            }
            if !advance_counter(&mut counter, &radices) {
                return DeterminismReport::Ok;
            }
        }
    }

    fn require_feature(&self, x: FeatureId) -> Result<(), CircuitError> {
        if x.0 >= self.space.len() {
            return Err(CircuitError::UnknownFeature(format!("#{}", x.0)));
        }
        Ok(())
    }

    /// `C_{+x}` (`value = true`) or `C_{-x}`: every gate reading `x` becomes a constant.
    pub fn condition(&self, x: FeatureId, value: bool) -> Result<Circuit, CircuitError> {
        self.require_feature(x)?;
        if !self.space.is_binary_feature(x) {
            return Err(CircuitError::NonBinaryFeature(self.space.name(x).to_string()));
        }
        Ok(self.condition_on(x, value as usize))
    }

    /// `C_{x=v}`: gates `x = v` become 1, gates `x = v'` with `v' != v` become 0.
    pub fn condition_equality(&self, x: FeatureId, value: usize) -> Result<Circuit, CircuitError> {
        self.require_feature(x)?;
        if value >= self.space.domain_size(x) {
            return Err(CircuitError::ValueOutOfDomain { feature: self.space.name(x).to_string(), value });
        }
        Ok(self.condition_on(x, value))
    }

    fn condition_on(&self, x: FeatureId, value: usize) -> Circuit {
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Variable(f) if *f == x => Gate::Constant(value == 1),
                Gate::Equality(f, v) if *f == x => Gate::Constant(*v == value),
                other => other.clone(),
            })
            .collect();
        Self::assemble(Arc::clone(&self.space), gates, self.order.clone(), self.output, self.determinism)
    }
}

fn var_sets_in_order(space: &FeatureSpace, gates: &[Gate], order: &[GateId]) -> Vec<FeatureSet> {
    let mut sets = vec![space.empty_set(); gates.len()];
    for &id in order {
        let mut set = space.empty_set();
        match &gates[id.0] {
            Gate::Variable(f) | Gate::Equality(f, _) => set.insert(f.0),
            Gate::Constant(_) => {}
            gate => {
                for input in gate.inputs() {
                    set.union_with(&sets[input.0]);
                }
            }
        }
        sets[id.0] = set;
    }
    sets
}

fn topological_order(gates: &[Gate]) -> Result<Vec<GateId>, CircuitError> {
    if gates.iter().enumerate().all(|(i, g)| g.inputs().iter().all(|c| c.0 < i)) {
        return Ok((0..gates.len()).map(GateId).collect());
    }
    // Kahn's algorithm, smallest ready id first so the order is deterministic.
    let mut pending: Vec<usize> = gates.iter().map(|g| g.inputs().len()).collect();
    let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for (i, g) in gates.iter().enumerate() {
        for input in g.inputs() {
            consumers[input.0].push(i);
        }
    }
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        pending.iter().enumerate().filter(|(_, &n)| n == 0).map(|(i, _)| std::cmp::Reverse(i)).collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(std::cmp::Reverse(i)) = ready.pop() {
        order.push(GateId(i));
        for &c in &consumers[i] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.push(std::cmp::Reverse(c));
            }
        }
    }
    if order.len() < gates.len() {
        let stuck = pending.iter().position(|&n| n > 0).unwrap_or(0);
        return Err(CircuitError::CycleDetected { gate: GateId(stuck) });
    }
    Ok(order)
}

/// Mixed-radix increment, least significant digit last so that enumeration
/// follows the feature order like a binary counter. Returns false on wrap-around.
pub(crate) fn advance_counter(counter: &mut [usize], radices: &[usize]) -> bool {
    for k in (0..counter.len()).rev() {
        counter[k] += 1;
        if counter[k] < radices[k] {
            return true;
        }
        counter[k] = 0;
    }
    false
}

/// Incremental construction in declaration order.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    space: Arc<FeatureSpace>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(space: impl Into<Arc<FeatureSpace>>) -> Self {
        CircuitBuilder { space: space.into(), gates: Vec::new() }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn add(&mut self, gate: Gate) -> GateId {
        self.gates.push(gate);
        GateId(self.gates.len() - 1)
    }

    pub fn var(&mut self, f: FeatureId) -> GateId {
        self.add(Gate::Variable(f))
    }

    /// Variable gate by feature name; panics on unknown names.
    pub fn var_named(&mut self, name: &str) -> GateId {
        let f = self.space.feature(name).unwrap_or_else(|| panic!("unknown feature {name:?}"));
        self.var(f)
    }

    pub fn eq(&mut self, f: FeatureId, value: usize) -> GateId {
        self.add(Gate::Equality(f, value))
    }

    pub fn constant(&mut self, value: bool) -> GateId {
        self.add(Gate::Constant(value))
    }

    pub fn not(&mut self, g: GateId) -> GateId {
        self.add(Gate::Not(g))
    }

    pub fn and(&mut self, inputs: impl IntoIterator<Item = GateId>) -> GateId {
        self.add(Gate::And(inputs.into_iter().collect()))
    }

    pub fn or(&mut self, inputs: impl IntoIterator<Item = GateId>) -> GateId {
        self.add(Gate::Or(inputs.into_iter().collect()))
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn finish(self, output: GateId) -> Result<Circuit, CircuitError> {
        Circuit::build(self.space, self.gates, output)
    }
}

/// The running example: submissions accepted iff they follow the guidelines and
/// either carry a deep theoretical result, or lack one but have a new
/// framework and nice applications.
///
/// `fg ∧ (dtr ∨ (nf ∧ na ∧ ¬dtr))` over features `fg, dtr, nf, na`.
pub fn running_example() -> Circuit {
    let space = FeatureSpace::binary(["fg", "dtr", "nf", "na"]).expect("distinct names");
    let mut b = CircuitBuilder::new(space);
    let dtr = b.var_named("dtr");
    let nf = b.var_named("nf");
    let na = b.var_named("na");
    let not_dtr = b.not(dtr);
    let inner = b.and([nf, na, not_dtr]);
    let either = b.or([inner, dtr]);
    let fg = b.var_named("fg");
    let out = b.and([fg, either]);
    b.finish(out).expect("well-formed")
}
