//! Exhaustive ground truth: conditional expectations, SHAP by both textbook
//! definitions, restricted model counts and expectations, for any classifier.
//!
//! Entities are always enumerated in mixed-radix counter order over the
//! feature order (last feature fastest), so reports are reproducible.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::circuit::{advance_counter, Circuit, Entity, FeatureId, FeatureSet, FeatureSpace, ProductDistribution};
use crate::num::{factorial, shapley_weights, Rational};

/// Largest space for subset-based SHAP.
pub const SUBSET_LIMIT: usize = 20;
/// Largest number of enumerated features for expectations and counts.
pub const ENUMERATION_LIMIT: usize = 24;
/// Largest space for the permutation definition.
pub const PERMUTATION_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{features} features exceed the exhaustive limit of {limit}")]
    TooLarge { features: usize, limit: usize },
    #[error("unknown feature #{0}")]
    UnknownFeature(usize),
    #[error("ssat needs binary features")]
    NonBinary,
}

/// A total Boolean function on the entities of a feature space.
pub trait Classifier {
    fn space(&self) -> &FeatureSpace;
    fn classify(&self, e: &Entity) -> bool;
}

impl Classifier for Circuit {
    fn space(&self) -> &FeatureSpace {
        Circuit::space(self)
    }

    fn classify(&self, e: &Entity) -> bool {
        self.evaluate(e)
    }
}

impl<T: Classifier + ?Sized> Classifier for &T {
    fn space(&self) -> &FeatureSpace {
        (**self).space()
    }

    fn classify(&self, e: &Entity) -> bool {
        (**self).classify(e)
    }
}

/// A classifier backed by a closure.
pub struct FnClassifier<F> {
    space: FeatureSpace,
    f: F,
}

impl<F: Fn(&Entity) -> bool> FnClassifier<F> {
    pub fn new(space: FeatureSpace, f: F) -> Self {
        FnClassifier { space, f }
    }
}

impl<F: Fn(&Entity) -> bool> Classifier for FnClassifier<F> {
    fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn classify(&self, e: &Entity) -> bool {
        (self.f)(e)
    }
}

/// The complement of a classifier.
pub struct Negated<M>(pub M);

impl<M: Classifier> Classifier for Negated<M> {
    fn space(&self) -> &FeatureSpace {
        self.0.space()
    }

    fn classify(&self, e: &Entity) -> bool {
        !self.0.classify(e)
    }
}

/// Every entity of `space` in counter order.
pub fn all_entities(space: &FeatureSpace) -> impl Iterator<Item = Entity> + '_ {
    let radices: Vec<usize> = space.features().map(|f| space.domain_size(f)).collect();
    let mut counter = vec![0; radices.len()];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let e = Entity::from_raw(counter.clone());
        done = !advance_counter(&mut counter, &radices);
        Some(e)
    })
}

fn guard(features: usize, limit: usize) -> Result<(), OracleError> {
    if features > limit {
        Err(OracleError::TooLarge { features, limit })
    } else {
        Ok(())
    }
}

fn check_feature(space: &FeatureSpace, x: FeatureId) -> Result<(), OracleError> {
    if x.0 >= space.len() {
        Err(OracleError::UnknownFeature(x.0))
    } else {
        Ok(())
    }
}

/// `φ(M, e, S) = E[M(e') | e' agrees with e on S]`, by enumerating the
/// completions of `e` outside `S`.
pub fn phi_expected<M: Classifier>(
    m: &M,
    p: &ProductDistribution,
    e: &Entity,
    s: &FeatureSet,
) -> Result<Rational, OracleError> {
    let space = m.space();
    let free: Vec<FeatureId> = space.features().filter(|f| !s.contains(f.0)).collect();
    guard(free.len(), ENUMERATION_LIMIT)?;
    let radices: Vec<usize> = free.iter().map(|&f| space.domain_size(f)).collect();
    let mut counter = vec![0; free.len()];
    let mut values = e.values().to_vec();
    let mut total = Rational::zero();
    loop {
        for (k, &f) in free.iter().enumerate() {
            values[f.0] = counter[k];
        }
        if m.classify(&Entity::from_raw(values.clone())) {
            total += free.iter().zip(&counter).fold(Rational::one(), |acc, (&f, &v)| acc * p.prob(f, v));
        }
        if !advance_counter(&mut counter, &radices) {
            return Ok(total);
        }
    }
}

/// `E[M]` under `p`.
pub fn expected_value<M: Classifier>(m: &M, p: &ProductDistribution) -> Result<Rational, OracleError> {
    guard(m.space().len(), ENUMERATION_LIMIT)?;
    Ok(all_entities(m.space()).filter(|e| m.classify(e)).map(|e| p.weight(&e)).sum())
}

/// `#sat(M)`.
pub fn model_count<M: Classifier>(m: &M) -> Result<BigUint, OracleError> {
    guard(m.space().len(), ENUMERATION_LIMIT)?;
    Ok(BigUint::from(all_entities(m.space()).filter(|e| m.classify(e)).count()))
}

/// `#sat(M, S)`: models that set every feature of `S` to 1.
pub fn ssat<M: Classifier>(m: &M, s: &FeatureSet) -> Result<BigUint, OracleError> {
    let space = m.space();
    guard(space.len(), ENUMERATION_LIMIT)?;
    if !space.is_binary() {
        return Err(OracleError::NonBinary);
    }
    let count = all_entities(space).filter(|e| s.ones().all(|y| e.values()[y] == 1) && m.classify(e)).count();
    Ok(BigUint::from(count))
}

/// `#sat(M, S)` for every `S`, indexed by the bitmask with bit `i` for feature `i`.
pub fn ssat_all<M: Classifier>(m: &M) -> Result<Vec<u64>, OracleError> {
    let space = m.space();
    let n = space.len();
    guard(n, SUBSET_LIMIT)?;
    if !space.is_binary() {
        return Err(OracleError::NonBinary);
    }
    let mut counts = vec![0u64; 1 << n];
    for e in all_entities(space) {
        if m.classify(&e) {
            counts[ones_mask(&e)] += 1;
        }
    }
    // Superset sums: counts[S] becomes Σ_{T ⊇ S} #models with ones exactly T.
    for i in 0..n {
        for mask in 0..1usize << n {
            if mask & (1 << i) == 0 {
                counts[mask] += counts[mask | (1 << i)];
            }
        }
    }
    Ok(counts)
}

fn ones_mask(e: &Entity) -> usize {
    e.values().iter().enumerate().filter(|(_, &v)| v == 1).fold(0, |acc, (i, _)| acc | (1 << i))
}

/// `φ(M, e, S)` for all `S ⊆ X`, indexed by bitmask (bit `i` = feature `i`).
#[derive(Debug, Clone)]
pub struct PhiTable {
    n: usize,
    values: Vec<Rational>,
}

impl PhiTable {
    /// Marginalizes the truth table one feature at a time, keeping for each
    /// feature both the `e`-value branch (in `S`) and the averaged branch.
    pub fn new<M: Classifier>(m: &M, p: &ProductDistribution, e: &Entity) -> Result<Self, OracleError> {
        let space = m.space();
        let n = space.len();
        guard(n, SUBSET_LIMIT)?;
        let mut table: Vec<Rational> =
            all_entities(space).map(|x| if m.classify(&x) { Rational::one() } else { Rational::zero() }).collect();
        // Layout: [values of features 0..j] x [bits of features j+1..n], bits most
        // significant first.
        for (processed, f) in (0..n).rev().enumerate() {
            let feature = FeatureId(f);
            let d = space.domain_size(feature);
            let inner = 1usize << processed;
            let outer = table.len() / (d * inner);
            let mut next = vec![Rational::zero(); outer * 2 * inner];
            for r in 0..outer {
                for t in 0..inner {
                    let mut avg = Rational::zero();
                    for v in 0..d {
                        avg += p.prob(feature, v) * &table[(r * d + v) * inner + t];
                    }
                    next[(r * 2) * inner + t] = avg;
                    next[(r * 2 + 1) * inner + t] = table[(r * d + e.value(feature)) * inner + t].clone();
                }
            }
            table = next;
        }
        // Index bits run feature 0 (most significant) to feature n-1; flip to masks.
        let mut values = vec![Rational::zero(); 1 << n];
        for (index, v) in table.into_iter().enumerate() {
            let mut mask = 0;
            for i in 0..n {
                if index & (1 << (n - 1 - i)) != 0 {
                    mask |= 1 << i;
                }
            }
            values[mask] = v;
        }
        Ok(PhiTable { n, values })
    }

    pub fn get(&self, mask: usize) -> &Rational {
        &self.values[mask]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Eq. of the subset definition: `Σ_S |S|!(n−|S|−1)!/n! (φ(S∪x) − φ(S))`.
    pub fn shap(&self, x: FeatureId) -> Rational {
        let weights = shapley_weights(self.n);
        let bit = 1usize << x.0;
        let mut total = Rational::zero();
        for mask in 0..1usize << self.n {
            if mask & bit == 0 {
                let k = mask.count_ones() as usize;
                total += &weights[k] * (&self.values[mask | bit] - &self.values[mask]);
            }
        }
        total
    }
}

pub fn mask_of(s: &FeatureSet) -> usize {
    s.ones().fold(0, |acc, i| acc | (1 << i))
}

/// SHAP score by the subset definition.
pub fn shap_bruteforce_subsets<M: Classifier>(
    m: &M,
    p: &ProductDistribution,
    e: &Entity,
    x: FeatureId,
) -> Result<Rational, OracleError> {
    check_feature(m.space(), x)?;
    Ok(PhiTable::new(m, p, e)?.shap(x))
}

/// Subset-definition scores for all features.
pub fn shap_bruteforce_all<M: Classifier>(
    m: &M,
    p: &ProductDistribution,
    e: &Entity,
) -> Result<Vec<Rational>, OracleError> {
    let table = PhiTable::new(m, p, e)?;
    Ok(m.space().features().map(|x| table.shap(x)).collect())
}

/// SHAP score by averaging marginal contributions over all feature orders.
pub fn shap_bruteforce_permutations<M: Classifier>(
    m: &M,
    p: &ProductDistribution,
    e: &Entity,
    x: FeatureId,
) -> Result<Rational, OracleError> {
    let n = m.space().len();
    guard(n, PERMUTATION_LIMIT)?;
    check_feature(m.space(), x)?;
    let table = PhiTable::new(m, p, e)?;
    let mut order: Vec<usize> = (0..n).collect();
    let mut total = Rational::zero();
    loop {
        let before = order.iter().take_while(|&&f| f != x.0).fold(0usize, |acc, &f| acc | (1 << f));
        total += table.get(before | (1 << x.0)) - table.get(before);
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(total / Rational::from_integer(factorial(n).into()))
}

/// Lexicographic successor; false once `v` is the last permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).expect("exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}
