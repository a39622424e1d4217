//! Seeded generators for circuits, distributions, graphs, formulas and
//! decision diagrams. Every circuit produced here is deterministic and
//! decomposable by construction; callers may re-verify.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{
    binary_domain, Circuit, CircuitBuilder, Entity, FeatureId, FeatureSpace, GateId, ProductDistribution,
};
use crate::encoders::{Fbdd, FbddNode, MultiDecisionTree, TreeNode};
use crate::formulas::{CnfFormula, DnfFormula, FormulaClass, Graph, Literal};
use crate::num::{rat, Rational};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Features `f0, f1, …`; domain sizes uniform in `2..=max_domain`. Size-2
/// domains are the binary `{0, 1}`.
pub fn random_space<R: Rng>(rng: &mut R, n: usize, max_domain: usize) -> FeatureSpace {
    let features = (0..n).map(|i| {
        let d = rng.gen_range(2..=max_domain.max(2));
        let domain = if d == 2 { binary_domain() } else { (0..d).map(|v| format!("v{v}")).collect() };
        (format!("f{i}"), domain)
    });
    FeatureSpace::new(features.collect::<Vec<_>>()).expect("generated names are distinct")
}

pub fn binary_space(n: usize) -> FeatureSpace {
    FeatureSpace::binary((0..n).map(|i| format!("f{i}"))).expect("generated names are distinct")
}

pub fn random_entity<R: Rng>(rng: &mut R, space: &FeatureSpace) -> Entity {
    let values = space.features().map(|f| rng.gen_range(0..space.domain_size(f))).collect();
    Entity::new(space, values).expect("values drawn from the domain")
}

/// Strictly positive marginals whose common denominator per feature is at most 10.
pub fn random_distribution<R: Rng>(rng: &mut R, space: &FeatureSpace) -> ProductDistribution {
    let marginals = space
        .features()
        .map(|f| {
            let d = space.domain_size(f);
            let q = rng.gen_range(d.max(2)..=10);
            // A random composition of q into d positive parts.
            let mut cuts: Vec<usize> = (1..q).collect();
            cuts.shuffle(rng);
            let mut cuts: Vec<usize> = cuts.into_iter().take(d - 1).collect();
            cuts.sort_unstable();
            let mut parts = Vec::with_capacity(d);
            let mut last = 0;
            for c in cuts.into_iter().chain([q]) {
                parts.push(rat((c - last) as i64, q as i64));
                last = c;
            }
            parts
        })
        .collect();
    ProductDistribution::new(space, marginals).expect("parts sum to one")
}

/// Shape parameters of [`random_dd_circuit`].
#[derive(Debug, Clone, Copy)]
pub struct DdConfig {
    /// Chance that a Shannon branch forgets a remaining feature (yields non-smooth or-gates).
    pub drop_prob: f64,
    /// Chance of wrapping a generated subcircuit in a negation.
    pub not_prob: f64,
    /// Chance of reusing an earlier subcircuit over the same features.
    pub share_prob: f64,
    /// Base chance of a decomposition step; grows with depth to bound size.
    pub decompose_prob: f64,
}

impl Default for DdConfig {
    fn default() -> Self {
        DdConfig { drop_prob: 0.25, not_prob: 0.1, share_prob: 0.3, decompose_prob: 0.3 }
    }
}

struct DdGen<'a, R> {
    rng: &'a mut R,
    cfg: DdConfig,
    b: CircuitBuilder,
    space: Arc<FeatureSpace>,
    literals: HashMap<(FeatureId, usize, bool), GateId>,
    memo: HashMap<Vec<FeatureId>, Vec<GateId>>,
}

impl<R: Rng> DdGen<'_, R> {
    /// `x = v` as an equality gate, or the variable/negation for binary features.
    fn test(&mut self, x: FeatureId, v: usize) -> GateId {
        let binary = self.space.is_binary_feature(x);
        let use_eq = !binary || self.rng.gen_bool(0.1);
        if let Some(&g) = self.literals.get(&(x, v, use_eq)) {
            return g;
        }
        let g = match (use_eq, v) {
            (true, _) => self.b.eq(x, v),
            (false, 1) => self.b.var(x),
            (false, _) => {
                let pos = self.test_var(x);
                self.b.not(pos)
            }
        };
        self.literals.insert((x, v, use_eq), g);
        g
    }

    fn test_var(&mut self, x: FeatureId) -> GateId {
        if let Some(&g) = self.literals.get(&(x, 1, false)) {
            return g;
        }
        let g = self.b.var(x);
        self.literals.insert((x, 1, false), g);
        g
    }

    /// A selector true exactly on the values in `values` (disjoint selectors stay disjoint).
    fn selector(&mut self, x: FeatureId, values: &[usize]) -> GateId {
        if values.len() == 1 {
            return self.test(x, values[0]);
        }
        let tests: Vec<GateId> = values.iter().map(|&v| self.b.eq(x, v)).collect();
        self.b.or(tests)
    }

    fn gen(&mut self, vars: Vec<FeatureId>, depth: usize) -> GateId {
        if vars.is_empty() {
            let value = self.rng.gen_bool(0.5);
            return self.b.constant(value);
        }
        if let Some(pool) = self.memo.get(&vars) {
            if self.rng.gen_bool(self.cfg.share_prob) {
                return *pool.choose(self.rng).expect("pools are non-empty");
            }
        }
        let mut g = if vars.len() == 1 {
            self.leaf(vars[0])
        } else if self.rng.gen_bool((self.cfg.decompose_prob + 0.12 * depth as f64).min(1.0)) {
            self.decompose(&vars, depth)
        } else {
            self.shannon(&vars, depth)
        };
        if self.rng.gen_bool(self.cfg.not_prob) {
            g = self.b.not(g);
        }
        self.memo.entry(vars).or_default().push(g);
        g
    }

    fn leaf(&mut self, x: FeatureId) -> GateId {
        let d = self.space.domain_size(x);
        let mut values: Vec<usize> = (0..d).collect();
        values.shuffle(self.rng);
        let k = self.rng.gen_range(1..d);
        values.truncate(k);
        values.sort_unstable();
        self.selector(x, &values)
    }

    fn decompose(&mut self, vars: &[FeatureId], depth: usize) -> GateId {
        let parts = self.rng.gen_range(2..=vars.len().min(3));
        let mut groups: Vec<Vec<FeatureId>> = vec![Vec::new(); parts];
        let mut shuffled = vars.to_vec();
        shuffled.shuffle(self.rng);
        for (i, &f) in shuffled.iter().enumerate() {
            let slot = if i < parts { i } else { self.rng.gen_range(0..parts) };
            groups[slot].push(f);
        }
        let inputs: Vec<GateId> = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                self.gen(g, depth + 1)
            })
            .collect();
        self.b.and(inputs)
    }

    fn shannon(&mut self, vars: &[FeatureId], depth: usize) -> GateId {
        let x = *vars.choose(self.rng).expect("at least two features");
        let rest: Vec<FeatureId> = vars.iter().copied().filter(|&f| f != x).collect();
        let d = self.space.domain_size(x);
        let mut values: Vec<usize> = (0..d).collect();
        values.shuffle(self.rng);
        let groups = self.rng.gen_range(2..=d);
        let mut cases: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for (i, &v) in values.iter().enumerate() {
            let slot = if i < groups { i } else { self.rng.gen_range(0..groups) };
            cases[slot].push(v);
        }
        let mut branches = Vec::new();
        for mut case in cases {
            // A missing case makes the circuit false on those values.
            if !branches.is_empty() && self.rng.gen_bool(0.1) {
                continue;
            }
            case.sort_unstable();
            let sel = self.selector(x, &case);
            let kept: Vec<FeatureId> =
                rest.iter().copied().filter(|_| !self.rng.gen_bool(self.cfg.drop_prob)).collect();
            let sub = self.gen(kept, depth + 1);
            branches.push(self.b.and([sel, sub]));
        }
        if branches.len() == 1 {
            branches[0]
        } else {
            self.b.or(branches)
        }
    }
}

/// A random d-D circuit over all of `space` (some features may end up unused).
pub fn random_dd_circuit<R: Rng>(rng: &mut R, space: &FeatureSpace, cfg: DdConfig) -> Circuit {
    let space = Arc::new(space.clone());
    let mut g = DdGen {
        rng,
        cfg,
        b: CircuitBuilder::new(space.clone()),
        space: space.clone(),
        literals: HashMap::new(),
        memo: HashMap::new(),
    };
    let root = g.gen(space.features().collect(), 0);
    g.b.finish(root).expect("generated circuits are well formed").trust_determinism()
}

/// `|X| = 3m` chain family: `P_0`, `Q_0` are conjunctions over halves `H1`,
/// `H2` of size `m`; `P_j = ¬P_{j−1}`, `Q_j = ¬Q_{j−1}`; a decision list over
/// selectors `z_1..z_m` picks `R_j = P_j ∧ Q_j`. Every `R_j` is a product of
/// two `(m+1)`-entry tables, so multiplications grow as `m³ ∼ |C|·|X|²`.
/// Returns the circuit and the first feature of `H1`.
pub fn chain_circuit(m: usize) -> (Circuit, FeatureId) {
    let names = (1..=m)
        .map(|i| format!("h{i}"))
        .chain((1..=m).map(|i| format!("k{i}")))
        .chain((1..=m).map(|i| format!("z{i}")));
    let space = Arc::new(FeatureSpace::binary(names).expect("distinct names"));
    let mut b = CircuitBuilder::new(space.clone());
    let h: Vec<GateId> = (0..m).map(|i| b.var(FeatureId(i))).collect();
    let k: Vec<GateId> = (0..m).map(|i| b.var(FeatureId(m + i))).collect();
    let mut p = b.and(h);
    let mut q = b.and(k);
    let mut r = Vec::with_capacity(m + 1);
    for j in 0..=m {
        if j > 0 {
            p = b.not(p);
            q = b.not(q);
        }
        r.push(b.and([p, q]));
    }
    let mut list = r[m];
    for j in (0..m).rev() {
        let z = b.var(FeatureId(2 * m + j));
        let nz = b.not(z);
        let take = b.and([z, r[j]]);
        let skip = b.and([nz, list]);
        list = b.or([take, skip]);
    }
    (b.finish(list).expect("well formed").trust_determinism(), FeatureId(0))
}

/// A conjunction of `blocks` full Shannon trees over `width` features each,
/// leaves random constants. About `6·2^width` edges per block.
pub fn block_circuit<R: Rng>(rng: &mut R, blocks: usize, width: usize) -> Circuit {
    let space = Arc::new(binary_space(blocks * width));
    let mut b = CircuitBuilder::new(space.clone());
    let mut roots = Vec::with_capacity(blocks);
    for block in 0..blocks {
        let mut order: Vec<FeatureId> = (0..width).map(|i| FeatureId(block * width + i)).collect();
        order.shuffle(rng);
        let literals: Vec<(GateId, GateId)> = order
            .iter()
            .map(|&f| {
                let v = b.var(f);
                (v, b.not(v))
            })
            .collect();
        // Bottom-up, one level of the tree at a time.
        let mut level: Vec<GateId> = (0..1usize << width)
            .map(|_| {
                let value = rng.gen_bool(0.5);
                b.constant(value)
            })
            .collect();
        for depth in (0..width).rev() {
            let (pos, neg) = literals[depth];
            level = level
                .chunks(2)
                .map(|pair| {
                    let low = b.and([neg, pair[0]]);
                    let high = b.and([pos, pair[1]]);
                    b.or([low, high])
                })
                .collect();
        }
        roots.push(level[0]);
    }
    let root = b.and(roots);
    b.finish(root).expect("well formed").trust_determinism()
}

/// `isolated` edgeless nodes `a_i` beside `n − isolated` nodes `b_j` joined with
/// probability `p`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, isolated: usize) -> Graph {
    let names = (1..=isolated).map(|i| format!("a_{i}")).chain((1..=n - isolated).map(|i| format!("b_{i}")));
    let mut g = Graph::new(names).expect("distinct names");
    for u in isolated..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).expect("valid edge");
            }
        }
    }
    g
}

fn random_terms<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    width: usize,
    polarity: Option<bool>,
) -> Vec<Vec<Literal>> {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=width.min(n));
            let mut features: Vec<usize> = (0..n).collect();
            features.shuffle(rng);
            features
                .into_iter()
                .take(len)
                .map(|f| Literal { feature: FeatureId(f), positive: polarity.unwrap_or_else(|| rng.gen_bool(0.5)) })
                .collect()
        })
        .collect()
}

/// A DNF with `terms` terms of 1 to `width` literals, mixed polarity.
pub fn random_dnf<R: Rng>(rng: &mut R, space: &FeatureSpace, terms: usize, width: usize) -> DnfFormula {
    let t = random_terms(rng, space.len(), terms, width, None);
    DnfFormula::new(space.clone(), t, FormulaClass::ANY).expect("valid terms")
}

/// A 2-NEG-CNF with `clauses` clauses.
pub fn random_neg2_cnf<R: Rng>(rng: &mut R, space: &FeatureSpace, clauses: usize) -> CnfFormula {
    let c = random_terms(rng, space.len(), clauses, 2, Some(false));
    CnfFormula::new(space.clone(), c, FormulaClass::negative(2)).expect("valid clauses")
}

/// A free BDD over a binary space. With `ordered`, tests follow feature order
/// (an OBDD). Earlier nodes are reused whenever their labels avoid the path.
pub fn random_fbdd<R: Rng>(rng: &mut R, space: &FeatureSpace, ordered: bool) -> Fbdd {
    struct State<'a, R> {
        rng: &'a mut R,
        nodes: Vec<FbddNode>,
        labels: Vec<Vec<bool>>,
        n: usize,
        ordered: bool,
    }
    fn gen<R: Rng>(s: &mut State<R>, path: &mut Vec<bool>, last: Option<usize>) -> usize {
        let free: Vec<usize> = (0..s.n).filter(|&f| !path[f] && (!s.ordered || last.is_none_or(|l| f > l))).collect();
        let depth = path.iter().filter(|&&b| b).count();
        if free.is_empty() || s.rng.gen_bool(0.12 + 0.08 * depth as f64) {
            let leaf = s.rng.gen_range(0..2);
            return leaf;
        }
        // Reuse: labels disjoint from the path, and in order for OBDDs.
        if s.rng.gen_bool(0.3) {
            let candidates: Vec<usize> = (2..s.nodes.len())
                .filter(|&u| {
                    (0..s.n).all(|f| !(s.labels[u][f] && path[f]))
                        && (!s.ordered || (0..s.n).all(|f| !s.labels[u][f] || last.is_none_or(|l| f > l)))
                })
                .collect();
            if let Some(&u) = candidates.choose(s.rng) {
                return u;
            }
        }
        let x = *free.choose(s.rng).expect("non-empty");
        path[x] = true;
        let low = gen(s, path, Some(x));
        let high = gen(s, path, Some(x));
        path[x] = false;
        let mut labels: Vec<bool> = s.labels[low].iter().zip(&s.labels[high]).map(|(a, b)| *a || *b).collect();
        labels[x] = true;
        s.nodes.push(FbddNode::Decision { feature: FeatureId(x), low, high });
        s.labels.push(labels);
        s.nodes.len() - 1
    }
    let n = space.len();
    let mut s = State {
        rng,
        nodes: vec![FbddNode::Leaf(false), FbddNode::Leaf(true)],
        labels: vec![vec![false; n]; 2],
        n,
        ordered,
    };
    let root = gen(&mut s, &mut vec![false; n], None);
    Fbdd::new(space.clone(), s.nodes, root).expect("generated FBDDs are well formed")
}

/// A decision tree splitting on features not yet tested on the path.
pub fn random_tree<R: Rng>(rng: &mut R, space: &FeatureSpace, max_depth: usize) -> MultiDecisionTree {
    fn gen<R: Rng>(
        rng: &mut R,
        space: &FeatureSpace,
        path: &mut Vec<bool>,
        depth: usize,
        max_depth: usize,
    ) -> TreeNode {
        let free: Vec<usize> = (0..space.len()).filter(|&f| !path[f]).collect();
        if free.is_empty() || depth >= max_depth || (depth > 0 && rng.gen_bool(0.2)) {
            return TreeNode::Leaf(rng.gen_bool(0.5));
        }
        let x = *free.choose(rng).expect("non-empty");
        path[x] = true;
        let children =
            (0..space.domain_size(FeatureId(x))).map(|_| gen(rng, space, path, depth + 1, max_depth)).collect();
        path[x] = false;
        TreeNode::Split { feature: FeatureId(x), children }
    }
    let root = gen(rng, space, &mut vec![false; space.len()], 0, max_depth);
    MultiDecisionTree::new(space.clone(), root).expect("generated trees are valid")
}

/// `p(x = 1)` values with denominators up to 10, for binary spaces.
pub fn random_binary_marginals<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let q = rng.gen_range(2..=10);
            rat(rng.gen_range(1..q), q)
        })
        .collect()
}
