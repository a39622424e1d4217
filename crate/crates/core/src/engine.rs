//! Exact SHAP scores for deterministic and decomposable circuits.
//!
//! For a feature `x`, the score is assembled from the quantities
//! `H(C_{x=v}, e, k) = Σ_{|S|=k, S ⊆ X∖{x}} E[C_{x=v}(e') | e' agrees with e on S]`,
//! one per value `v` of `x` ("lanes"; for binary `x` the lanes `v = 1` and
//! `v = 0` are the usual γ and δ tables). They are computed bottom-up: every
//! gate `g` carries, per lane, the array `α_g^ℓ` for `ℓ = 0..=|var(g)∖{x}|`.
//!
//! Two implementations share this recurrence:
//!
//! * the main one works on fan-in-2 circuits without smoothing; an or-gate
//!   pads each input with the binomial row of the features it misses. Tables
//!   are exact integers over the implicit denominator `Π_{y ∈ var(g)∖{x}} q_y`
//!   (`q_y` the common denominator of `y`'s marginal), so no gcd is ever taken.
//!   Tables of gates that do not mention `x` are independent of `x` and are
//!   computed once per (circuit, distribution, entity).
//! * the reference one smooths the circuit first and uses plain rationals.

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, Entity, FeatureId, FeatureSpace, Gate, GateId, ProductDistribution};
use crate::num::{as_natural, format_fraction, shapley_weights, Binomials, Rational};
use crate::transforms::{normalize_fanin2, smooth};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("circuit is not decomposable (and-gate {0} shares features between inputs)")]
    NotDecomposable(GateId),
    #[error("circuit determinism is neither trusted nor verified")]
    DeterminismUnverified,
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("value {value} is outside the domain of feature {feature:?}")]
    ValueOutOfDomain { feature: String, value: usize },
    #[error("index {k} exceeds the number of features {n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("model count {0} is not a natural number")]
    NonIntegralResult(String),
    #[error("{0} does not match the circuit's feature space")]
    SpaceMismatch(&'static str),
    #[error("scores sum to the wrong total (residual {0})")]
    EfficiencyViolation(String),
}

/// Work counters for one computation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    /// Big-integer multiplications performed by the dynamic program.
    pub multiplications: u64,
}

/// Scores for every feature of a circuit at one entity.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapReport {
    /// Indexed by feature.
    pub scores: Vec<Rational>,
    /// Features by descending score, ties in declaration order.
    pub ranking: Vec<FeatureId>,
    pub classifier_output: bool,
    pub expected_value: Rational,
    /// `Σ scores − (C(e) − E[C])`; zero on success.
    pub efficiency_residual: Rational,
}

impl ShapReport {
    pub fn score(&self, f: FeatureId) -> &Rational {
        &self.scores[f.0]
    }
}

/// `α^ℓ = num[ℓ] / den`.
#[derive(Debug, Clone)]
struct Scaled {
    den: BigInt,
    num: Vec<BigInt>,
}

impl Scaled {
    fn constant(value: bool) -> Scaled {
        Scaled { den: BigInt::one(), num: vec![BigInt::from(value as u8)] }
    }

    fn value(&self, k: usize) -> Rational {
        Rational::new(self.num[k].clone(), self.den.clone())
    }
}

fn validate(c: &Circuit, p: &ProductDistribution, e: &Entity) -> Result<(), EngineError> {
    let space = c.space();
    if p.len() != space.len() {
        return Err(EngineError::SpaceMismatch("distribution"));
    }
    if e.len() != space.len() {
        return Err(EngineError::SpaceMismatch("entity"));
    }
    for f in space.features() {
        if p.marginal(f).len() != space.domain_size(f) {
            return Err(EngineError::SpaceMismatch("distribution"));
        }
        if e.value(f) >= space.domain_size(f) {
            return Err(EngineError::ValueOutOfDomain { feature: space.name(f).to_string(), value: e.value(f) });
        }
    }
    if !c.is_decomposable() {
        let report = c.check_decomposability();
        return Err(EngineError::NotDecomposable(report.violations[0]));
    }
    if !c.determinism().is_established() {
        return Err(EngineError::DeterminismUnverified);
    }
    Ok(())
}

fn check_feature(space: &FeatureSpace, x: FeatureId) -> Result<(), EngineError> {
    if x.0 >= space.len() {
        return Err(EngineError::UnknownFeature(format!("#{}", x.0)));
    }
    Ok(())
}

/// One circuit, distribution and entity, prepared for any number of features.
struct Prepared<'a> {
    circuit: Circuit,
    entity: &'a Entity,
    /// `q_y`: common denominator of the marginal of `y`.
    scale: Vec<BigInt>,
    /// `p_y(v) · q_y`.
    weight: Vec<Vec<BigInt>>,
    sizes: Vec<usize>,
    binom: Binomials,
    base: Vec<Scaled>,
    base_stats: EngineStats,
}

impl<'a> Prepared<'a> {
    fn new(c: &Circuit, p: &ProductDistribution, e: &'a Entity) -> Prepared<'a> {
        let circuit = normalize_fanin2(c);
        let space = circuit.space();
        let mut scale = Vec::with_capacity(space.len());
        let mut weight = Vec::with_capacity(space.len());
        for f in space.features() {
            let q = p.marginal(f).iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            weight.push(p.marginal(f).iter().map(|r| r.numer() * (&q / r.denom())).collect());
            scale.push(q);
        }
        let sizes = circuit.var_sets().iter().map(|s| s.count_ones(..)).collect();
        let mut prepared = Prepared {
            binom: Binomials::new(space.len()),
            circuit,
            entity: e,
            scale,
            weight,
            sizes,
            base: Vec::new(),
            base_stats: EngineStats::default(),
        };
        let mut stats = EngineStats::default();
        let mut base = vec![Scaled::constant(false); prepared.circuit.num_gates()];
        for &id in prepared.circuit.topological_order() {
            let table = {
                let done = &base;
                prepared.gate_table(id, None, &|g: GateId| &done[g.0], &mut stats)
            };
            base[id.0] = table;
        }
        prepared.base = base;
        prepared.base_stats = stats;
        prepared
    }

    fn space(&self) -> &FeatureSpace {
        self.circuit.space()
    }

    fn size(&self, g: GateId, x: Option<FeatureId>) -> usize {
        match x {
            Some(x) if self.circuit.var_set(g).contains(x.0) => self.sizes[g.0] - 1,
            _ => self.sizes[g.0],
        }
    }

    fn product(&self, set: &FixedBitSet, stats: &mut EngineStats) -> BigInt {
        let mut acc = BigInt::one();
        for y in set.ones() {
            acc *= &self.scale[y];
            stats.multiplications += 1;
        }
        acc
    }

    /// The table of `t` extended to the features `missing`: convolution with
    /// the binomial row of `|missing|`, rescaled by their common denominator.
    fn pad(&self, t: &Scaled, missing: &FixedBitSet, stats: &mut EngineStats) -> Scaled {
        let m = missing.count_ones(..);
        if m == 0 {
            return t.clone();
        }
        let q = self.product(missing, stats);
        let row: Vec<BigInt> = self.binom.row(m).iter().map(|b| b * &q).collect();
        stats.multiplications += row.len() as u64;
        Scaled { den: &t.den * &q, num: convolve(&t.num, &row, stats) }
    }

    /// Table of gate `id` in lane `lane = (x, v)`, or the `x`-free base table.
    fn gate_table<'t>(
        &self,
        id: GateId,
        lane: Option<(FeatureId, usize)>,
        child: &dyn Fn(GateId) -> &'t Scaled,
        stats: &mut EngineStats,
    ) -> Scaled {
        let x = lane.map(|(x, _)| x);
        match self.circuit.gate(id) {
            Gate::Constant(b) => Scaled::constant(*b),
            Gate::Variable(f) => match lane {
                Some((x, v)) if x == *f => Scaled::constant(v == 1),
                _ => self.leaf(*f, 1),
            },
            Gate::Equality(f, w) => match lane {
                Some((x, v)) if x == *f => Scaled::constant(v == *w),
                _ => self.leaf(*f, *w),
            },
            Gate::Not(input) => {
                let t = child(*input);
                let row = self.binom.row(self.size(*input, x));
                stats.multiplications += row.len() as u64;
                Scaled { den: t.den.clone(), num: row.iter().zip(&t.num).map(|(b, a)| b * &t.den - a).collect() }
            }
            Gate::And(inputs) => {
                let (a, b) = (child(inputs[0]), child(inputs[1]));
                stats.multiplications += 1;
                Scaled { den: &a.den * &b.den, num: convolve(&a.num, &b.num, stats) }
            }
            Gate::Or(inputs) => {
                let (ga, gb) = (inputs[0], inputs[1]);
                let (va, vb) = (self.circuit.var_set(ga), self.circuit.var_set(gb));
                let mut miss_a = vb.clone();
                miss_a.difference_with(va);
                let mut miss_b = va.clone();
                miss_b.difference_with(vb);
                if let Some(x) = x {
                    miss_a.set(x.0, false);
                    miss_b.set(x.0, false);
                }
                let a = self.pad(child(ga), &miss_a, stats);
                let b = self.pad(child(gb), &miss_b, stats);
                debug_assert_eq!(a.den, b.den);
                debug_assert_eq!(a.num.len(), b.num.len());
                Scaled { den: a.den, num: a.num.into_iter().zip(b.num).map(|(s, t)| s + t).collect() }
            }
        }
    }

    /// `[p_y(v), [e(y) = v]]` scaled by `q_y`.
    fn leaf(&self, y: FeatureId, v: usize) -> Scaled {
        let q = &self.scale[y.0];
        let hit = if self.entity.value(y) == v { q.clone() } else { BigInt::zero() };
        Scaled { den: q.clone(), num: vec![self.weight[y.0][v].clone(), hit] }
    }

    /// Output tables for every value of `x`, padded to all of `X∖{x}`.
    fn lanes(&self, x: FeatureId, stats: &mut EngineStats) -> Vec<Scaled> {
        let c = &self.circuit;
        let values = self.space().domain_size(x);
        let mut lanes: Vec<Option<Vec<Scaled>>> = vec![None; c.num_gates()];
        for &id in c.topological_order() {
            if !c.var_set(id).contains(x.0) {
                continue;
            }
            let tables = (0..values)
                .map(|v| {
                    let done = &lanes;
                    let child = |g: GateId| match &done[g.0] {
                        Some(t) => &t[v],
                        None => &self.base[g.0],
                    };
                    self.gate_table(id, Some((x, v)), &child, stats)
                })
                .collect();
            lanes[id.0] = Some(tables);
        }
        let out = c.output();
        let mut missing = FixedBitSet::with_capacity(self.space().len());
        missing.insert_range(..);
        missing.difference_with(c.var_set(out));
        missing.set(x.0, false);
        (0..values)
            .map(|v| {
                let t = match &lanes[out.0] {
                    Some(t) => &t[v],
                    None => &self.base[out.0],
                };
                self.pad(t, &missing, stats)
            })
            .collect()
    }

    fn score(&self, x: FeatureId, p: &ProductDistribution, general: bool) -> (Rational, EngineStats) {
        let mut stats = self.base_stats;
        let lanes = self.lanes(x, &mut stats);
        let n = self.space().len();
        let weights = shapley_weights(n);
        let den = &lanes[0].den;
        let ex = self.entity.value(x);
        let mut total = Rational::zero();
        if !general && self.space().is_binary_feature(x) {
            for (k, w) in weights.iter().enumerate() {
                let diff = &lanes[1].num[k] - &lanes[0].num[k];
                total += w * Rational::from_integer(diff);
            }
            let e_minus_p = Rational::from_integer(BigInt::from(ex as u8)) - p.p_one(x);
            total = total * e_minus_p / Rational::from_integer(den.clone());
        } else {
            // Σ_v p_x(v)·H_v scaled by q_x, against H_{e(x)} scaled likewise.
            let qx = &self.scale[x.0];
            for (k, w) in weights.iter().enumerate() {
                let mut acc = &lanes[ex].num[k] * qx;
                for (v, lane) in lanes.iter().enumerate() {
                    acc -= &self.weight[x.0][v] * &lane.num[k];
                }
                total += w * Rational::from_integer(acc);
            }
            total /= Rational::from_integer(den * qx);
        }
        (total, stats)
    }

    fn expected_value(&self) -> Rational {
        self.base[self.circuit.output().0].value(0)
    }
}

fn convolve(a: &[BigInt], b: &[BigInt], stats: &mut EngineStats) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, s) in a.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        for (j, t) in b.iter().enumerate() {
            if !t.is_zero() {
                out[i + j] += s * t;
                stats.multiplications += 1;
            }
        }
    }
    out
}

/// Exact SHAP score of `x` (no smoothing). Binary features use the
/// `(e(x) − p(x))·(γ − δ)` form, others the per-value form.
pub fn shap_score(c: &Circuit, p: &ProductDistribution, e: &Entity, x: FeatureId) -> Result<Rational, EngineError> {
    shap_score_with_stats(c, p, e, x).map(|(s, _)| s)
}

/// [`shap_score`] together with its multiplication count.
pub fn shap_score_with_stats(
    c: &Circuit,
    p: &ProductDistribution,
    e: &Entity,
    x: FeatureId,
) -> Result<(Rational, EngineStats), EngineError> {
    validate(c, p, e)?;
    check_feature(c.space(), x)?;
    Ok(Prepared::new(c, p, e).score(x, p, false))
}

/// Exact SHAP score of `x` through the per-value form, valid for any domain.
pub fn shap_score_nonbinary(
    c: &Circuit,
    p: &ProductDistribution,
    e: &Entity,
    x: FeatureId,
) -> Result<Rational, EngineError> {
    validate(c, p, e)?;
    check_feature(c.space(), x)?;
    Ok(Prepared::new(c, p, e).score(x, p, true).0)
}

/// Scores for every feature, one pass per feature on a shared preparation.
pub fn shap_all(c: &Circuit, p: &ProductDistribution, e: &Entity) -> Result<ShapReport, EngineError> {
    validate(c, p, e)?;
    let prepared = Prepared::new(c, p, e);
    let features: Vec<FeatureId> = c.space().features().collect();
    let scores: Vec<Rational> = features.par_iter().map(|&x| prepared.score(x, p, false).0).collect();
    let mut ranking = features;
    ranking.sort_by(|a, b| scores[b.0].cmp(&scores[a.0]).then(a.cmp(b)));
    let classifier_output = c.evaluate(e);
    let expected_value = prepared.expected_value();
    let total: Rational = scores.iter().sum();
    let gap = Rational::from_integer(BigInt::from(classifier_output as u8)) - &expected_value;
    let efficiency_residual = total - gap;
    if !efficiency_residual.is_zero() {
        return Err(EngineError::EfficiencyViolation(format_fraction(&efficiency_residual)));
    }
    Ok(ShapReport { scores, ranking, classifier_output, expected_value, efficiency_residual })
}

/// `#sat(C) = N · (C(e) − Σ_x SHAP(C, e, x))` under the uniform distribution,
/// where `N = Π_x |dom(x)|` (so `2^|X|` on binary spaces).
pub fn model_count_via_shap(c: &Circuit, e: &Entity) -> Result<BigUint, EngineError> {
    let uniform = ProductDistribution::uniform(c.space());
    let report = shap_all(c, &uniform, e)?;
    let total: Rational = report.scores.iter().sum();
    let output = Rational::from_integer(BigInt::from(report.classifier_output as u8));
    let entities: BigInt = c.space().features().map(|f| BigInt::from(c.space().domain_size(f))).product();
    let count = Rational::from_integer(entities) * (output - total);
    as_natural(&count).ok_or_else(|| EngineError::NonIntegralResult(format_fraction(&count)))
}

/// Per-gate tables of the smoothed circuit for a binary feature.
#[derive(Debug, Clone, PartialEq)]
pub struct GateTable {
    pub gamma: Vec<Rational>,
    pub delta: Vec<Rational>,
}

/// The smoothed fan-in-2 circuit and its tables, indexed by its gate ids.
#[derive(Debug, Clone)]
pub struct SmoothTrace {
    pub circuit: Circuit,
    pub tables: Vec<GateTable>,
}

/// Rational tables of a smooth fan-in-2 circuit, one lane per value of `x`
/// (or a single `x`-free lane).
fn smooth_tables(c: &Circuit, p: &ProductDistribution, e: &Entity, x: Option<FeatureId>) -> Vec<Vec<Vec<Rational>>> {
    let space = c.space();
    let binom = Binomials::new(space.len());
    let values = x.map_or(1, |x| space.domain_size(x));
    let size = |g: GateId| {
        let s = c.var_set(g);
        s.count_ones(..) - x.map_or(0, |x| s.contains(x.0) as usize)
    };
    let one = || Rational::one();
    let zero = || Rational::zero();
    let indicator = |b: bool| if b { one() } else { zero() };
    let mut tables: Vec<Vec<Vec<Rational>>> = vec![Vec::new(); c.num_gates()];
    for &id in c.topological_order() {
        let lanes = (0..values)
            .map(|lane| match c.gate(id) {
                Gate::Constant(b) => vec![indicator(*b)],
                Gate::Variable(f) if Some(*f) == x => vec![indicator(lane == 1)],
                Gate::Equality(f, w) if Some(*f) == x => vec![indicator(lane == *w)],
                Gate::Variable(f) => vec![p.p_one(*f).clone(), indicator(e.value(*f) == 1)],
                Gate::Equality(f, w) => {
                    vec![p.prob(*f, *w).clone(), indicator(e.value(*f) == *w)]
                }
                Gate::Not(input) => {
                    let m = size(*input);
                    tables[input.0][lane]
                        .iter()
                        .enumerate()
                        .map(|(l, a)| Rational::from_integer(binom.get(m, l)) - a)
                        .collect()
                }
                Gate::Or(inputs) => {
                    let (a, b) = (&tables[inputs[0].0][lane], &tables[inputs[1].0][lane]);
                    a.iter().zip(b).map(|(s, t)| s + t).collect()
                }
                Gate::And(inputs) => {
                    let (a, b) = (&tables[inputs[0].0][lane], &tables[inputs[1].0][lane]);
                    let mut out = vec![zero(); a.len() + b.len() - 1];
                    for (i, s) in a.iter().enumerate() {
                        for (j, t) in b.iter().enumerate() {
                            out[i + j] += s * t;
                        }
                    }
                    out
                }
            })
            .collect();
        tables[id.0] = lanes;
    }
    tables
}

fn pad_rational(t: &[Rational], m: usize, binom: &Binomials) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); t.len() + m];
    for (i, a) in t.iter().enumerate() {
        for j in 0..=m {
            out[i + j] += a * Rational::from_integer(binom.get(m, j));
        }
    }
    out
}

fn smoothed(c: &Circuit) -> Circuit {
    smooth(&normalize_fanin2(c)).expect("normalized circuits have fan-in 2")
}

fn root_missing(c: &Circuit, x: Option<FeatureId>) -> usize {
    let n = c.space().len();
    let inside = c.vars();
    (0..n).filter(|&y| !inside.contains(y) && Some(FeatureId(y)) != x).count()
}

/// Reference score: explicit smoothing, then sums at or-gates.
pub fn shap_score_smooth(
    c: &Circuit,
    p: &ProductDistribution,
    e: &Entity,
    x: FeatureId,
) -> Result<Rational, EngineError> {
    validate(c, p, e)?;
    check_feature(c.space(), x)?;
    let s = smoothed(c);
    let space = s.space();
    let tables = smooth_tables(&s, p, e, Some(x));
    let binom = Binomials::new(space.len());
    let m = root_missing(&s, Some(x));
    let lanes: Vec<Vec<Rational>> = tables[s.output().0].iter().map(|t| pad_rational(t, m, &binom)).collect();
    let weights = shapley_weights(space.len());
    let ex = e.value(x);
    let mut total = Rational::zero();
    for (k, w) in weights.iter().enumerate() {
        let mut term = lanes[ex][k].clone();
        for (v, lane) in lanes.iter().enumerate() {
            term -= p.prob(x, v) * &lane[k];
        }
        total += w * term;
    }
    Ok(total)
}

/// `H(C, e, k) = Σ_{|S| = k} E[C(e') | e' agrees with e on S]`.
pub fn compute_h(c: &Circuit, p: &ProductDistribution, e: &Entity, k: usize) -> Result<Rational, EngineError> {
    validate(c, p, e)?;
    let n = c.space().len();
    if k > n {
        return Err(EngineError::IndexOutOfRange { k, n });
    }
    let s = smoothed(c);
    let tables = smooth_tables(&s, p, e, None);
    let binom = Binomials::new(n);
    let padded = pad_rational(&tables[s.output().0][0], root_missing(&s, None), &binom);
    Ok(padded[k].clone())
}

/// Tables of the smoothed circuit for a binary feature `x`.
pub fn smooth_trace(
    c: &Circuit,
    p: &ProductDistribution,
    e: &Entity,
    x: FeatureId,
) -> Result<SmoothTrace, EngineError> {
    validate(c, p, e)?;
    check_feature(c.space(), x)?;
    if !c.space().is_binary_feature(x) {
        return Err(EngineError::ValueOutOfDomain { feature: c.space().name(x).to_string(), value: 2 });
    }
    let s = smoothed(c);
    let tables = smooth_tables(&s, p, e, Some(x))
        .into_iter()
        .map(|mut lanes| {
            let gamma = lanes.pop().expect("two lanes");
            let delta = lanes.pop().expect("two lanes");
            GateTable { gamma, delta }
        })
        .collect();
    Ok(SmoothTrace { circuit: s, tables })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{running_example, CircuitBuilder};
    use crate::num::rat;

    fn example_inputs() -> (Circuit, ProductDistribution, Entity) {
        let c = running_example().trust_determinism();
        let p = ProductDistribution::uniform(c.space());
        let e = Entity::from_bits(c.space(), &[1, 0, 1, 1]).unwrap();
        (c, p, e)
    }

    #[test]
    fn running_example_scores() {
        let (c, p, e) = example_inputs();
        let expected = [rat(23, 64), rat(-9, 64), rat(15, 64), rat(15, 64)];
        for (i, want) in expected.iter().enumerate() {
            let x = FeatureId(i);
            assert_eq!(&shap_score(&c, &p, &e, x).unwrap(), want);
            assert_eq!(&shap_score_smooth(&c, &p, &e, x).unwrap(), want);
            assert_eq!(&shap_score_nonbinary(&c, &p, &e, x).unwrap(), want);
        }
    }

    #[test]
    fn report_ranking_and_efficiency() {
        let (c, p, e) = example_inputs();
        let report = shap_all(&c, &p, &e).unwrap();
        let names: Vec<&str> = report.ranking.iter().map(|&f| c.space().name(f)).collect();
        assert_eq!(names, ["fg", "nf", "na", "dtr"]);
        assert_eq!(report.expected_value, rat(5, 16));
        assert!(report.classifier_output);
        assert!(report.efficiency_residual.is_zero());
        assert_eq!(model_count_via_shap(&c, &e).unwrap(), BigUint::from(5u8));
    }

    #[test]
    fn output_gate_table() {
        let (c, p, e) = example_inputs();
        let nf = c.space().feature("nf").unwrap();
        let trace = smooth_trace(&c, &p, &e, nf).unwrap();
        let out = &trace.tables[trace.circuit.output().0];
        assert_eq!(out.gamma, vec![rat(3, 8), rat(3, 2), rat(2, 1), rat(1, 1)]);
        assert_eq!(out.delta, vec![rat(1, 4), rat(3, 4), rat(1, 2), rat(0, 1)]);
    }

    #[test]
    fn constants_score_zero() {
        let space = crate::circuit::FeatureSpace::binary(["a", "b"]).unwrap();
        let mut b = CircuitBuilder::new(space);
        let one = b.constant(true);
        let c = b.finish(one).unwrap().trust_determinism();
        let p = ProductDistribution::binary(c.space(), vec![rat(1, 3), rat(2, 7)]).unwrap();
        let e = Entity::from_bits(c.space(), &[1, 0]).unwrap();
        for x in c.space().features() {
            assert!(shap_score(&c, &p, &e, x).unwrap().is_zero());
        }
        for k in 0..=2 {
            let h = compute_h(&c, &p, &e, k).unwrap();
            assert_eq!(h, Rational::from_integer(Binomials::new(2).get(2, k)));
        }
        assert!(matches!(compute_h(&c, &p, &e, 3), Err(EngineError::IndexOutOfRange { .. })));
    }

    #[test]
    fn single_variable() {
        let space = crate::circuit::FeatureSpace::binary(["x"]).unwrap();
        let mut b = CircuitBuilder::new(space);
        let x = b.var(FeatureId(0));
        let c = b.finish(x).unwrap().trust_determinism();
        let p = ProductDistribution::uniform(c.space());
        let e = Entity::from_bits(c.space(), &[1]).unwrap();
        assert_eq!(shap_score(&c, &p, &e, FeatureId(0)).unwrap(), rat(1, 2));
        assert_eq!(shap_score_smooth(&c, &p, &e, FeatureId(0)).unwrap(), rat(1, 2));
    }

    #[test]
    fn ternary_equality() {
        let domain = vec!["a".to_string(), "b".into(), "c".into()];
        let space = crate::circuit::FeatureSpace::new([("x", domain)]).unwrap();
        let mut b = CircuitBuilder::new(space);
        let g = b.eq(FeatureId(0), 0);
        let c = b.finish(g).unwrap().trust_determinism();
        let p = ProductDistribution::uniform(c.space());
        let at_a = Entity::new(c.space(), vec![0]).unwrap();
        let at_b = Entity::new(c.space(), vec![1]).unwrap();
        assert_eq!(shap_score_nonbinary(&c, &p, &at_a, FeatureId(0)).unwrap(), rat(2, 3));
        assert_eq!(shap_score_nonbinary(&c, &p, &at_b, FeatureId(0)).unwrap(), rat(-1, 3));
        assert_eq!(shap_score(&c, &p, &at_b, FeatureId(0)).unwrap(), rat(-1, 3));
        assert_eq!(shap_score_smooth(&c, &p, &at_b, FeatureId(0)).unwrap(), rat(-1, 3));
    }

    #[test]
    fn rejects_unestablished_inputs() {
        let c = running_example();
        let p = ProductDistribution::uniform(c.space());
        let e = Entity::from_bits(c.space(), &[1, 0, 1, 1]).unwrap();
        assert_eq!(shap_score(&c, &p, &e, FeatureId(0)), Err(EngineError::DeterminismUnverified));
        let c = c.trust_determinism();
        assert!(matches!(shap_score(&c, &p, &e, FeatureId(7)), Err(EngineError::UnknownFeature(_))));
        let space = crate::circuit::FeatureSpace::binary(["x"]).unwrap();
        let mut b = CircuitBuilder::new(space);
        let x1 = b.var(FeatureId(0));
        let x2 = b.var(FeatureId(0));
        let and = b.and([x1, x2]);
        let bad = b.finish(and).unwrap().trust_determinism();
        let p = ProductDistribution::uniform(bad.space());
        let e = Entity::from_bits(bad.space(), &[1]).unwrap();
        assert_eq!(shap_score(&bad, &p, &e, FeatureId(0)), Err(EngineError::NotDecomposable(and)));
    }

    #[test]
    fn features_outside_the_circuit() {
        let space = crate::circuit::FeatureSpace::binary(["x", "y", "z"]).unwrap();
        let mut b = CircuitBuilder::new(space);
        let x = b.var(FeatureId(0));
        let c = b.finish(x).unwrap().trust_determinism();
        let p = ProductDistribution::binary(c.space(), vec![rat(1, 3), rat(1, 5), rat(3, 4)]).unwrap();
        let e = Entity::from_bits(c.space(), &[1, 1, 0]).unwrap();
        assert_eq!(shap_score(&c, &p, &e, FeatureId(0)).unwrap(), rat(2, 3));
        assert!(shap_score(&c, &p, &e, FeatureId(2)).unwrap().is_zero());
        assert!(shap_score_smooth(&c, &p, &e, FeatureId(1)).unwrap().is_zero());
        // Conditioning on all three features fixes x = 1.
        assert_eq!(compute_h(&c, &p, &e, 3).unwrap(), rat(1, 1));
        assert_eq!(compute_h(&c, &p, &e, 0).unwrap(), rat(1, 3));
    }
}
