//! Exact rational helpers shared by the engine, the oracles and the formula lab.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision exact rational. Every probability and score is one of these.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn rat_from_uint(value: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(value.clone()))
}

/// `2^exp` as a rational, negative exponents allowed.
pub fn pow2(exp: i64) -> Rational {
    let magnitude = BigInt::one() << exp.unsigned_abs();
    if exp >= 0 {
        Rational::from_integer(magnitude)
    } else {
        Rational::new(BigInt::one(), magnitude)
    }
}

/// Formats `q` as `p/q` in lowest terms with a positive denominator, `0/1` included.
pub struct Fraction<'a>(pub &'a Rational);

impl fmt::Display for Fraction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // BigRational keeps itself reduced with a positive denominator.
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

pub fn format_fraction(q: &Rational) -> String {
    Fraction(q).to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed fraction {0:?}")]
pub struct BadFraction(pub String);

/// Parses `p/q` or a bare integer `p`. Zero denominators are rejected.
pub fn parse_fraction(text: &str) -> Result<Rational, BadFraction> {
    let bad = || BadFraction(text.to_string());
    let trimmed = text.trim();
    let (numer, denom) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let numer = BigInt::from_str(numer).map_err(|_| bad())?;
    let denom = BigInt::from_str(denom).map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Returns the integer value of `q` when it is a non-negative integer.
pub fn as_natural(q: &Rational) -> Option<BigUint> {
    if !q.is_integer() || q.is_negative() {
        return None;
    }
    q.to_integer().to_biguint()
}

/// Pascal's triangle up to row `n`, exact.
#[derive(Debug, Clone)]
pub struct Binomials {
    rows: Vec<Vec<BigInt>>,
}

impl Binomials {
    pub fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut row = vec![BigInt::one(); i + 1];
            for j in 1..i {
                row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
            }
            rows.push(row);
        }
        Binomials { rows }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// Row `n`: `binom(n, 0..=n)`.
    pub fn row(&self, n: usize) -> &[BigInt] {
        &self.rows[n]
    }

    /// `binom(n, k)`, zero when `k > n`.
    pub fn get(&self, n: usize, k: usize) -> BigInt {
        if k > n {
            BigInt::zero()
        } else {
            self.rows[n][k].clone()
        }
    }
}

/// Shapley coefficients `k!(n-k-1)!/n!` for `k = 0..n`, built by running products.
pub fn shapley_weights(n: usize) -> Vec<Rational> {
    if n == 0 {
        return Vec::new();
    }
    let mut weights = Vec::with_capacity(n);
    let mut w = rat(1, n as i64);
    for k in 0..n {
        weights.push(w.clone());
        if k + 1 < n {
            w *= rat((k + 1) as i64, (n - k - 1) as i64);
        }
    }
    weights
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}
