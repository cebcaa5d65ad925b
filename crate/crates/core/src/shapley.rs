//! Exact Shapley values of the game `ν(S) = E[f(y) | y_S = x_S] − E[f]`.
//!
//! `S` is δ-relevant exactly when `|ν(S) + E[f] − f(x)| ≤ 1 − δ`, which
//! [`relevance_from_characteristic`] evaluates.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{Counter, DyadicProb};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula, SubsetMask};
use crate::limits::Limits;
use crate::rational::{format_rational, Rational};
use crate::relevance::check_delta;

fn as_fraction<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn as_fractions<S: serde::Serializer>(rs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(format_rational))
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacteristicEval {
    pub s: SubsetMask,
    /// `ν(S)`, possibly negative.
    #[serde(serialize_with = "as_fraction")]
    pub value: Rational,
    /// `E[f]`.
    pub expectation: DyadicProb,
    pub fx: bool,
}

impl CharacteristicEval {
    /// `|ν(S) + E[f] − f(x)|`, the probability of disagreeing with `f(x)`.
    pub fn distance(&self) -> Rational {
        let fx = Rational::from_integer(BigInt::from(u8::from(self.fx)));
        let v = &self.value + self.expectation.to_rational() - fx;
        if v < Rational::zero() {
            -v
        } else {
            v
        }
    }
}

pub fn characteristic_value(f: &Formula, x: &Assignment, s: &SubsetMask) -> Result<CharacteristicEval> {
    characteristic_value_with(f, x, s, &Limits::default())
}

pub fn characteristic_value_with(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
    limits: &Limits,
) -> Result<CharacteristicEval> {
    let d = f.arity();
    if d > limits.characteristic_cap {
        return Err(Error::cap("arity for a characteristic value", d, limits.characteristic_cap));
    }
    let mut counter = Counter::new(limits);
    let expectation = counter.satisfaction(f)?;
    let conditional = counter.restricted_satisfaction(f, x, s)?;
    Ok(CharacteristicEval {
        s: s.clone(),
        value: conditional.to_rational() - expectation.to_rational(),
        expectation,
        fx: f.evaluate(x)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ShapleyVector {
    #[serde(serialize_with = "as_fractions")]
    pub phi: Vec<Rational>,
    /// `ν([d]) = f(x) − E[f]`.
    #[serde(serialize_with = "as_fraction")]
    pub nu_full: Rational,
    /// `Σ φ_i = ν([d])`.
    pub efficiency_check: bool,
}

pub fn shapley_values(f: &Formula, x: &Assignment) -> Result<ShapleyVector> {
    shapley_values_with(f, x, &Limits::default())
}

/// `φ_i = Σ_{S ∌ i} |S|!(d−|S|−1)!/d! · (ν(S ∪ {i}) − ν(S))`.
///
/// With `g(S)` the number of models agreeing with `x` on `S`,
/// `2^d·ν(S) = 2^|S|·g(S) − 2^d·E[f]`, so every term is an integer over
/// `d!·2^d` and the sum is carried out in integers.
pub fn shapley_values_with(f: &Formula, x: &Assignment, limits: &Limits) -> Result<ShapleyVector> {
    let d = f.arity();
    if d > limits.shapley_cap {
        return Err(Error::cap("arity for Shapley values", d, limits.shapley_cap));
    }
    x.expect_len(d)?;
    let table = f.truth_table(limits.enum_cap)?;
    let full = (1usize << d) - 1;
    let xi = (0..d).fold(0usize, |acc, p| acc | (usize::from(x.get(p)) << p));
    // h[z] = f(x ⊕ z); g(S) sums h over z disjoint from S
    let mut zeta: Vec<u64> = (0..=full).map(|z| u64::from(table.get(xi ^ z))).collect();
    for p in 0..d {
        for z in 0..=full {
            if z >> p & 1 == 1 {
                zeta[z] += zeta[z ^ (1 << p)];
            }
        }
    }
    let g = |s: usize| i128::from(zeta[full & !s]);
    let fact: Vec<i128> = (0..=d).scan(1i128, |acc, n| {
        if n > 0 {
            *acc *= n as i128;
        }
        Some(*acc)
    })
    .collect();
    let numerators: Vec<i128> = (0..d)
        .into_par_iter()
        .map(|i| {
            let bit = 1usize << i;
            (0..=full)
                .filter(|s| s & bit == 0)
                .map(|s| {
                    let size = s.count_ones() as usize;
                    let weight = fact[size] * fact[d - size - 1];
                    weight * ((g(s | bit) << (size + 1)) - (g(s) << size))
                })
                .sum()
        })
        .collect();
    let denom = BigInt::from(fact[d]) << d;
    let phi: Vec<Rational> = numerators
        .into_iter()
        .map(|n| Rational::new(BigInt::from(n), denom.clone()))
        .collect();
    let expectation = Rational::new(BigInt::from(table.count_ones()), BigInt::from(1u64) << d);
    let fx = Rational::from_integer(BigInt::from(u8::from(f.evaluate(x)?)));
    let nu_full = fx - expectation;
    let total: Rational = phi.iter().cloned().sum();
    Ok(ShapleyVector {
        efficiency_check: total == nu_full,
        phi,
        nu_full,
    })
}

/// δ-relevance of `S` decided through `ν`.
pub fn relevance_from_characteristic(f: &Formula, x: &Assignment, s: &SubsetMask, delta: &Rational) -> Result<bool> {
    relevance_from_characteristic_with(f, x, s, delta, &Limits::default())
}

pub fn relevance_from_characteristic_with(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
    delta: &Rational,
    limits: &Limits,
) -> Result<bool> {
    check_delta(delta)?;
    let c = characteristic_value_with(f, x, s, limits)?;
    Ok(c.distance() <= Rational::from_integer(1.into()) - delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn running_example() -> (Formula, Assignment) {
        (
            Formula::parse("(x1 & x2) | !x3").unwrap(),
            Assignment::parse("110").unwrap(),
        )
    }

    #[test]
    fn characteristic_examples() {
        let (f, x) = running_example();
        let c = characteristic_value(&f, &x, &SubsetMask::parse(3, "3").unwrap()).unwrap();
        assert_eq!(c.value, ratio(3, 8));
        assert_eq!(c.expectation, DyadicProb::new(5u32, 3));
        let c = characteristic_value(&f, &x, &SubsetMask::empty(3)).unwrap();
        assert_eq!(c.value, ratio(0, 1));
        let c = characteristic_value(&f, &x, &SubsetMask::full(3)).unwrap();
        assert_eq!(c.value, ratio(3, 8));
    }

    #[test]
    fn shapley_examples() {
        let v = shapley_values(&Formula::parse("x1").unwrap(), &Assignment::parse("1").unwrap()).unwrap();
        assert_eq!(v.phi, vec![ratio(1, 2)]);
        let v = shapley_values(&Formula::parse("x1 & x2").unwrap(), &Assignment::parse("11").unwrap()).unwrap();
        assert_eq!(v.phi[0], v.phi[1]);
        let (f, x) = running_example();
        let v = shapley_values(&f, &x).unwrap();
        assert!(v.efficiency_check);
        assert_eq!(v.phi.iter().cloned().sum::<Rational>(), ratio(3, 8));
        let dummy = Formula::with_arity(f.root().clone(), 4).unwrap();
        let v = shapley_values(&dummy, &Assignment::parse("1101").unwrap()).unwrap();
        assert_eq!(v.phi[3], ratio(0, 1));
    }

    #[test]
    fn identity_examples() {
        let (f, x) = running_example();
        assert!(relevance_from_characteristic(&f, &x, &SubsetMask::parse(3, "3").unwrap(), &ratio(1, 1)).unwrap());
        assert!(!relevance_from_characteristic(&f, &x, &SubsetMask::parse(3, "1").unwrap(), &ratio(4, 5)).unwrap());
        assert!(relevance_from_characteristic(&f, &x, &SubsetMask::full(3), &ratio(1, 1)).unwrap());
    }
}
