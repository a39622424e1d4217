//! DNF/CNF classifiers, graphs, and the clique gadgets whose SHAP scores have
//! closed forms. Every closed form here is an independent oracle: it is computed
//! from counts (`ssat`, clique counts), never from a circuit.
//!
//! Clique counts always include the empty clique.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::circuit::{
    binary_domain, Circuit, CircuitBuilder, Entity, FeatureId, FeatureSet, FeatureSpace, GateId, ProductDistribution,
    SpaceError,
};
use crate::num::{factorial, pow2, rat, rat_from_uint, shapley_weights, Binomials, Rational};
use crate::oracle::{ssat_all, Classifier, Negated, OracleError, PhiTable};

/// Largest graph accepted by the exhaustive clique routines.
pub const CLIQUE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("term {term} mentions feature #{feature} twice")]
    RepeatedFeature { term: usize, feature: usize },
    #[error("term {term} has a literal of the wrong polarity for the declared class")]
    WrongPolarity { term: usize },
    #[error("term {term} has {len} literals, class allows {width}")]
    TooWide { term: usize, len: usize, width: usize },
    #[error("unknown feature #{0}")]
    UnknownFeature(usize),
    #[error("formula features must be binary")]
    NonBinary,
    #[error("duplicate node {0}")]
    DuplicateNode(String),
    #[error("unknown node #{0}")]
    UnknownNode(usize),
    #[error("self-loop on node {0}")]
    Loop(String),
    #[error("graph has {isolated} isolated nodes, at least 2 are required")]
    ConditionAViolated { isolated: usize },
    #[error("{nodes} nodes exceed the clique limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("parameters n={n}, t={t} violate 2 <= t <= n")]
    ParamsOutOfRange { n: usize, t: usize },
    #[error("amplification factor must be at least 1")]
    ZeroAmplification,
    #[error("the two features must differ")]
    SameFeature,
    #[error("wrong formula class: {0}")]
    WrongFormulaClass(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub feature: FeatureId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(feature: FeatureId) -> Self {
        Literal { feature, positive: true }
    }

    pub fn neg(feature: FeatureId) -> Self {
        Literal { feature, positive: false }
    }

    pub fn negated(self) -> Self {
        Literal { feature: self.feature, positive: !self.positive }
    }

    pub fn holds(self, e: &Entity) -> bool {
        e.bit(self.feature) == self.positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Syntactic class: optional polarity restriction and optional term width bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FormulaClass {
    pub polarity: Option<Polarity>,
    pub width: Option<usize>,
}

impl FormulaClass {
    pub const ANY: FormulaClass = FormulaClass { polarity: None, width: None };

    pub fn positive(width: usize) -> Self {
        FormulaClass { polarity: Some(Polarity::Positive), width: Some(width) }
    }

    pub fn negative(width: usize) -> Self {
        FormulaClass { polarity: Some(Polarity::Negative), width: Some(width) }
    }

    /// Whether every formula of `self` also belongs to `other`.
    pub fn within(self, other: FormulaClass) -> bool {
        let polarity_ok = other.polarity.is_none() || other.polarity == self.polarity;
        let width_ok = match (self.width, other.width) {
            (_, None) => true,
            (Some(a), Some(b)) => a <= b,
            (None, Some(_)) => false,
        };
        polarity_ok && width_ok
    }
}

fn validate_terms(space: &FeatureSpace, terms: &[Vec<Literal>], class: FormulaClass) -> Result<(), FormulaError> {
    if !space.is_binary() {
        return Err(FormulaError::NonBinary);
    }
    for (i, term) in terms.iter().enumerate() {
        let mut seen = FixedBitSet::with_capacity(space.len());
        for lit in term {
            let f = lit.feature.0;
            if f >= space.len() {
                return Err(FormulaError::UnknownFeature(f));
            }
            if seen.put(f) {
                return Err(FormulaError::RepeatedFeature { term: i, feature: f });
            }
            match class.polarity {
                Some(Polarity::Positive) if !lit.positive => return Err(FormulaError::WrongPolarity { term: i }),
                Some(Polarity::Negative) if lit.positive => return Err(FormulaError::WrongPolarity { term: i }),
                _ => {}
            }
        }
        if let Some(width) = class.width {
            if term.len() > width {
                return Err(FormulaError::TooWide { term: i, len: term.len(), width });
            }
        }
    }
    Ok(())
}

/// A disjunction of conjunctions of literals. The class tag has been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    space: FeatureSpace,
    terms: Vec<Vec<Literal>>,
    class: FormulaClass,
}

impl DnfFormula {
    pub fn new(space: FeatureSpace, terms: Vec<Vec<Literal>>, class: FormulaClass) -> Result<Self, FormulaError> {
        validate_terms(&space, &terms, class)?;
        Ok(DnfFormula { space, terms, class })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn terms(&self) -> &[Vec<Literal>] {
        &self.terms
    }

    pub fn class(&self) -> FormulaClass {
        self.class
    }

    pub fn eval(&self, e: &Entity) -> bool {
        self.terms.iter().any(|t| t.iter().all(|l| l.holds(e)))
    }

    /// The CNF of the complement: each term becomes a clause of negated literals.
    pub fn complement(&self) -> CnfFormula {
        let clauses = self.terms.iter().map(|t| t.iter().map(|l| l.negated()).collect()).collect();
        let class = FormulaClass { polarity: flip(self.class.polarity), width: self.class.width };
        CnfFormula { space: self.space.clone(), clauses, class }
    }

    /// The formula as an or of ands over literal gates, literals shared. Terms
    /// may overlap, so determinism is left unknown.
    pub fn to_circuit(&self) -> Circuit {
        let mut b = CircuitBuilder::new(self.space.clone());
        let mut literals: HashMap<Literal, GateId> = HashMap::new();
        let mut terms = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let gates: Vec<GateId> = term
                .iter()
                .map(|&l| {
                    *literals.entry(l).or_insert_with(|| {
                        let v = b.var(l.feature);
                        if l.positive {
                            v
                        } else {
                            b.not(v)
                        }
                    })
                })
                .collect();
            terms.push(match gates.as_slice() {
                [] => b.constant(true),
                [single] => *single,
                _ => b.and(gates),
            });
        }
        let root = match terms.as_slice() {
            [] => b.constant(false),
            [single] => *single,
            _ => b.or(terms),
        };
        b.finish(root).expect("terms use distinct features and every gate feeds the root")
    }
}

/// A conjunction of disjunctions of literals. The class tag has been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    space: FeatureSpace,
    clauses: Vec<Vec<Literal>>,
    class: FormulaClass,
}

impl CnfFormula {
    pub fn new(space: FeatureSpace, clauses: Vec<Vec<Literal>>, class: FormulaClass) -> Result<Self, FormulaError> {
        validate_terms(&space, &clauses, class)?;
        Ok(CnfFormula { space, clauses, class })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn class(&self) -> FormulaClass {
        self.class
    }

    pub fn eval(&self, e: &Entity) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.holds(e)))
    }

    /// The DNF of the complement.
    pub fn complement(&self) -> DnfFormula {
        let terms = self.clauses.iter().map(|c| c.iter().map(|l| l.negated()).collect()).collect();
        let class = FormulaClass { polarity: flip(self.class.polarity), width: self.class.width };
        DnfFormula { space: self.space.clone(), terms, class }
    }
}

fn flip(p: Option<Polarity>) -> Option<Polarity> {
    p.map(|p| match p {
        Polarity::Positive => Polarity::Negative,
        Polarity::Negative => Polarity::Positive,
    })
}

impl Classifier for DnfFormula {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn classify(&self, e: &Entity) -> bool {
        self.eval(e)
    }
}

impl Classifier for CnfFormula {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn classify(&self, e: &Entity) -> bool {
        self.eval(e)
    }
}

/// How a fresh feature `x` is attached to a classifier `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attach {
    /// `M ∨ x`
    Or,
    /// `M ∧ ¬x`
    AndNot,
}

/// `M ∨ x` or `M ∧ ¬x` over `M`'s space followed by the fresh feature `x`.
pub struct WithFresh<M> {
    inner: M,
    space: FeatureSpace,
    attach: Attach,
}

impl<M: Classifier> WithFresh<M> {
    pub fn new(inner: M, name: &str, attach: Attach) -> Result<Self, FormulaError> {
        let space = inner.space().extended([(name, binary_domain())])?;
        Ok(WithFresh { inner, space, attach })
    }

    /// The fresh feature, always last.
    pub fn fresh(&self) -> FeatureId {
        FeatureId(self.space.len() - 1)
    }
}

impl<M: Classifier> Classifier for WithFresh<M> {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn classify(&self, e: &Entity) -> bool {
        let n = self.space.len() - 1;
        let x = e.values()[n] == 1;
        let m = self.inner.classify(&Entity::from_raw(e.values()[..n].to_vec()));
        match self.attach {
            Attach::Or => m || x,
            Attach::AndNot => m && !x,
        }
    }
}

/// The entity assigning 1 to every feature except those in `zeros`.
pub fn ones_except(space: &FeatureSpace, zeros: &[FeatureId]) -> Entity {
    let values = space.features().map(|f| if zeros.contains(&f) { 0 } else { 1 }).collect();
    Entity::from_raw(values)
}

/// A loop-free undirected graph with named nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    adj: Vec<FixedBitSet>,
}

impl Graph {
    /// Edgeless graph on `names`.
    pub fn new<I, S>(names: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(FormulaError::DuplicateNode(name.clone()));
            }
        }
        let n = names.len();
        Ok(Graph { names, adj: vec![FixedBitSet::with_capacity(n); n] })
    }

    pub fn with_edges<I, S>(names: I, edges: &[(usize, usize)]) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Graph::new(names)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds `{u, v}`; repeated edges are idempotent.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), FormulaError> {
        let n = self.len();
        for w in [u, v] {
            if w >= n {
                return Err(FormulaError::UnknownNode(w));
            }
        }
        if u == v {
            return Err(FormulaError::Loop(self.names[u].clone()));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, u: usize) -> &FixedBitSet {
        &self.adj[u]
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |u| self.adj[u].ones().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones(..)).sum::<usize>() / 2
    }

    pub fn isolated_count(&self) -> usize {
        self.adj.iter().filter(|a| a.count_ones(..) == 0).count()
    }

    pub fn is_clique(&self, nodes: &FixedBitSet) -> bool {
        nodes.ones().all(|u| nodes.ones().all(|v| u == v || self.has_edge(u, v)))
    }

    fn masks(&self) -> Result<Vec<u32>, FormulaError> {
        if self.len() > CLIQUE_LIMIT {
            return Err(FormulaError::TooLarge { nodes: self.len(), limit: CLIQUE_LIMIT });
        }
        Ok(self.adj.iter().map(|a| a.ones().fold(0u32, |m, v| m | (1 << v))).collect())
    }
}

/// Calls `visit` on every clique (as a bitmask), the empty one included.
fn for_each_clique(adj: &[u32], mut visit: impl FnMut(u32)) {
    let all = (1u32 << adj.len()) - 1;
    for_each_clique_within(adj, all, &mut visit);
}

/// Calls `visit` on every clique inside `candidates`, the empty one included.
fn for_each_clique_within(adj: &[u32], candidates: u32, visit: &mut impl FnMut(u32)) {
    fn extend(adj: &[u32], clique: u32, candidates: u32, visit: &mut impl FnMut(u32)) {
        visit(clique);
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            // Only later candidates: each clique is reached once.
            extend(adj, clique | (1 << v), rest & adj[v], visit);
        }
    }
    extend(adj, 0, candidates, visit);
}

/// `#CLIQUE(G, S)`: cliques of `G` containing `S`, the empty clique included.
pub fn clique_count(g: &Graph, s: &FixedBitSet) -> Result<u64, FormulaError> {
    let adj = g.masks()?;
    if let Some(bad) = s.ones().find(|&v| v >= g.len()) {
        return Err(FormulaError::UnknownNode(bad));
    }
    if !g.is_clique(s) {
        return Ok(0);
    }
    // Cliques containing S are S plus a clique among the common neighbours of S.
    let all = (1u32 << g.len()) - 1;
    let common = s.ones().fold(all, |m, v| m & adj[v]);
    let restricted: Vec<u32> = adj.iter().map(|&a| a & common).collect();
    let mut count = 0u64;
    for_each_clique_within(&restricted, common, &mut |_| count += 1);
    Ok(count)
}

/// Number of cliques of each size `0..=|N|`.
pub fn clique_size_histogram(g: &Graph) -> Result<Vec<u64>, FormulaError> {
    let adj = g.masks()?;
    let mut hist = vec![0u64; g.len() + 1];
    for_each_clique(&adj, |c| hist[c.count_ones() as usize] += 1);
    Ok(hist)
}

/// `θ(G)`: one positive term `a ∧ b` per non-adjacent pair, over the nodes as
/// features. Requires two isolated nodes so that every node occurs in a term.
pub fn build_theta(g: &Graph) -> Result<DnfFormula, FormulaError> {
    let isolated = g.isolated_count();
    if isolated < 2 {
        return Err(FormulaError::ConditionAViolated { isolated });
    }
    build_theta_unchecked(g)
}

/// `θ(G)` without the isolated-node requirement; nodes adjacent to every other
/// node are features that occur in no term.
pub fn build_theta_unchecked(g: &Graph) -> Result<DnfFormula, FormulaError> {
    let space = FeatureSpace::binary(g.names().iter().cloned())?;
    let mut terms = Vec::new();
    for u in 0..g.len() {
        for v in u + 1..g.len() {
            if !g.has_edge(u, v) {
                terms.push(vec![Literal::pos(FeatureId(u)), Literal::pos(FeatureId(v))]);
            }
        }
    }
    DnfFormula::new(space, terms, FormulaClass::positive(2))
}

/// `G^r`: node `a` becomes the clique `a_1..a_r`, and `a_i b_j` is an edge
/// whenever `ab` is. `G^1` is `G` itself, names included.
pub fn amplify(g: &Graph, r: usize) -> Result<Graph, FormulaError> {
    match r {
        0 => Err(FormulaError::ZeroAmplification),
        1 => Ok(g.clone()),
        _ => {
            let names = g.names().iter().flat_map(|a| (1..=r).map(move |i| format!("{a}_{i}")));
            let mut out = Graph::new(names)?;
            for a in 0..g.len() {
                for i in 0..r {
                    for j in i + 1..r {
                        out.add_edge(a * r + i, a * r + j)?;
                    }
                }
            }
            for (a, b) in g.edges() {
                for i in 0..r {
                    for j in 0..r {
                        out.add_edge(a * r + i, b * r + j)?;
                    }
                }
            }
            Ok(out)
        }
    }
}

/// `|Wit(G^r, S)|`: cliques `T` of `G^r` whose set of touched copy classes is `S`.
pub fn witness_count(g: &Graph, r: usize, s: &FixedBitSet) -> Result<u64, FormulaError> {
    let big = amplify(g, r)?;
    let adj = big.masks()?;
    let target = s.ones().fold(0u32, |m, v| m | (1 << v));
    let mut count = 0u64;
    for_each_clique(&adj, |t| {
        let mut classes = 0u32;
        let mut rest = t;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            classes |= 1 << (v / r);
        }
        if classes == target {
            count += 1;
        }
    });
    Ok(count)
}

/// Parameters of `G_{n,t}`: `t` isolated nodes beside a clique on `n − t` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GntParams {
    n: usize,
    t: usize,
}

impl GntParams {
    pub fn new(n: usize, t: usize) -> Result<Self, FormulaError> {
        if t < 2 || t > n {
            return Err(FormulaError::ParamsOutOfRange { n, t });
        }
        Ok(GntParams { n, t })
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn t(self) -> usize {
        self.t
    }
}

/// `G_{n,t}` with isolated nodes `a_1..a_t` and clique nodes `b_1..b_{n−t}`.
pub fn build_gnt(params: GntParams) -> Graph {
    let GntParams { n, t } = params;
    let names = (1..=t).map(|i| format!("a_{i}")).chain((1..=n - t).map(|i| format!("b_{i}")));
    let mut g = Graph::new(names).expect("generated names are distinct");
    for u in t..n {
        for v in u + 1..n {
            g.add_edge(u, v).expect("generated edges are valid");
        }
    }
    g
}

/// `t/(n(n+1)2^n) + 1/((t+1)2^{t+1})`, strictly decreasing in `t`.
///
/// This expression counts only `2^{n−t}` cliques for `S = ∅`, omitting the `t`
/// isolated singletons, so it falls short of the score of `x` in
/// `¬θ(G_{n,t}) ∧ ¬x` by exactly `t/(2(n+1)2^n)`. [`gnt_shap_exact`] is the score.
pub fn gnt_shap_closed_form(params: GntParams) -> Rational {
    let GntParams { n, t } = params;
    let (n, t) = (n as i64, t as i64);
    rat(t, n * (n + 1)) * pow2(-n) + rat(1, t + 1) * pow2(-(t + 1))
}

/// The score of a fresh `x` in `¬θ(G_{n,t}) ∧ ¬x` at the entity with `x = 0`
/// and every node 1: `t(n+2)/(2n(n+1)2^n) + 1/((t+1)2^{t+1})`.
/// Non-increasing in `t`, with `t = n−1` and `t = n` giving the same edgeless graph.
pub fn gnt_shap_exact(params: GntParams) -> Rational {
    let GntParams { n, t } = params;
    gnt_shap_closed_form(params) + rat(t as i64, 2 * (n as i64 + 1)) * pow2(-(n as i64))
}

/// `Σ_k w_k(n)·2^{k−n}·Σ_{|S|=k} counts[S]` with `n = |space| + 1`.
fn ssat_weighted(counts: &[u64], m_features: usize) -> Rational {
    let n = m_features + 1;
    let weights = shapley_weights(n);
    let mut by_size = vec![0u64; n];
    for (mask, &c) in counts.iter().enumerate() {
        by_size[mask.count_ones() as usize] += c;
    }
    by_size
        .iter()
        .enumerate()
        .map(|(k, &c)| &weights[k] * pow2(k as i64 - n as i64) * Rational::from_integer(BigInt::from(c)))
        .sum()
}

/// `SHAP(M ∨ x, 1, x)` for a fresh feature `x`, from the `ssat` counts of `¬M`.
pub fn shap_disjunction_form<M: Classifier>(m: &M) -> Result<Rational, FormulaError> {
    let counts = ssat_all(&Negated(m))?;
    Ok(ssat_weighted(&counts, m.space().len()))
}

/// `SHAP(M ∧ ¬x, e, x)` for a fresh `x`, `e(x) = 0` and every other feature 1,
/// from the `ssat` counts of `M`.
pub fn shap_conjunction_form<M: Classifier>(m: &M) -> Result<Rational, FormulaError> {
    let counts = ssat_all(m)?;
    Ok(ssat_weighted(&counts, m.space().len()))
}

/// `1/(2(n+1)) Σ_k k!(n−k)!/n!·2^{k−n}·Σ_{|S|=k} #CLIQUE(G,S)`, which equals both
/// `SHAP(θ(G) ∨ x, 1, x)` and `SHAP(¬θ(G) ∧ ¬x, e, x)`.
pub fn shap_clique_form(g: &Graph) -> Result<Rational, FormulaError> {
    let n = g.len();
    let hist = clique_size_histogram(g)?;
    let binom = Binomials::new(n);
    let n_fact = Rational::from_integer(factorial(n).into());
    let mut total = Rational::zero();
    for k in 0..=n {
        // Σ_{|S|=k} #CLIQUE(G,S) = Σ_Y C(|Y|, k) over cliques Y.
        let sum: BigInt = hist.iter().enumerate().map(|(size, &c)| binom.get(size, k) * BigInt::from(c)).sum();
        let coeff = Rational::from_integer((factorial(k) * factorial(n - k)).into()) / &n_fact;
        total += coeff * pow2(k as i64 - n as i64) * Rational::from_integer(sum);
    }
    Ok(total / Rational::from_integer(BigInt::from(2 * (n + 1))))
}

/// `SHAP(M,e,x) − SHAP(M,e,y)` as
/// `Σ_{S ⊆ X∖{x,y}} |S|!(|X|−|S|−2)!/(|X|−1)!·(φ(S∪{x}) − φ(S∪{y}))`.
pub fn shap_difference_form<M: Classifier>(
    m: &M,
    p: &ProductDistribution,
    e: &Entity,
    x: FeatureId,
    y: FeatureId,
) -> Result<Rational, FormulaError> {
    if x == y {
        return Err(FormulaError::SameFeature);
    }
    let n = m.space().len();
    for f in [x, y] {
        if f.0 >= n {
            return Err(FormulaError::UnknownFeature(f.0));
        }
    }
    let table = PhiTable::new(m, p, e)?;
    let denom = Rational::from_integer(factorial(n - 1).into());
    let weights: Vec<Rational> =
        (0..=n - 2).map(|k| Rational::from_integer((factorial(k) * factorial(n - k - 2)).into()) / &denom).collect();
    let (bx, by) = (1usize << x.0, 1usize << y.0);
    let mut total = Rational::zero();
    for mask in 0..1usize << n {
        if mask & (bx | by) == 0 {
            let k = mask.count_ones() as usize;
            total += &weights[k] * (table.get(mask | bx) - table.get(mask | by));
        }
    }
    Ok(total)
}

/// The gadget `(¬M′ ∧ x) ∨ (¬M ∧ y)` for 2-NEG-CNFs `M`, `M′`, with the entity
/// setting `x = y = 0` and every other feature 1.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub gadget: DnfFormula,
    pub entity: Entity,
    pub x: FeatureId,
    pub y: FeatureId,
}

/// Builds the comparison gadget. Then
/// `SHAP(M∧¬x, e, x) − SHAP(M′∧¬y, e, y) = SHAP(gadget, e, y) − SHAP(gadget, e, x)`,
/// each side under the uniform distribution.
pub fn comparison_reduction(
    m: &CnfFormula,
    m_prime: &CnfFormula,
    x_name: &str,
    y_name: &str,
) -> Result<Reduction, FormulaError> {
    let two_neg = FormulaClass::negative(2);
    for (label, f) in [("M", m), ("M'", m_prime)] {
        if !f.class().within(two_neg) {
            return Err(FormulaError::WrongFormulaClass(format!("{label} is not tagged 2-NEG-CNF")));
        }
    }
    if m.space() != m_prime.space() {
        return Err(FormulaError::WrongFormulaClass("M and M' have different features".into()));
    }
    let space = m.space().extended([(x_name, binary_domain()), (y_name, binary_domain())])?;
    let x = FeatureId(space.len() - 2);
    let y = FeatureId(space.len() - 1);
    let mut terms = Vec::new();
    for (f, fresh) in [(m_prime, x), (m, y)] {
        for term in f.complement().terms() {
            let mut term = term.clone();
            term.push(Literal::pos(fresh));
            terms.push(term);
        }
    }
    let gadget = DnfFormula::new(space, terms, FormulaClass::positive(3))?;
    let entity = ones_except(gadget.space(), &[x, y]);
    Ok(Reduction { gadget, entity, x, y })
}

/// `2^{mr} / ((nr+1)·2^{nr+1})`: lower bound on `SHAP(θ(G^r) ∨ x, 1, x)` when
/// the `n`-node graph `G` has an `m`-clique.
pub fn amplified_disjunction_lower_bound(n: usize, r: usize, m: usize) -> Rational {
    let (n, r, m) = (n as i64, r as i64, m as i64);
    pow2(m * r) / (Rational::from_integer(BigInt::from(n * r + 1)) * pow2(n * r + 1))
}

/// Both sides of `Σ_{k=0}^s s!(s+t−k)!/((s+t)!(s−k)!) = (s+t+1)/(t+1)`.
pub fn binomial_sum_identity(s: usize, t: usize) -> (Rational, Rational) {
    let denom = factorial(s + t);
    let left = (0..=s)
        .map(|k| rat_from_uint(&(factorial(s) * factorial(s + t - k))) / rat_from_uint(&(&denom * factorial(s - k))))
        .sum();
    let right = rat((s + t + 1) as i64, (t + 1) as i64);
    (left, right)
}

/// The node set `nodes` as a bitset over `g`.
pub fn node_set(g: &Graph, nodes: &[usize]) -> FeatureSet {
    let mut s = FixedBitSet::with_capacity(g.len());
    for &v in nodes {
        s.insert(v);
    }
    s
}
