//! Parameter arithmetic of the `d^(1−α)` inapproximability argument.
//!
//! With `α = a/b`, the quantities `k'^(1−α)`, `p^(1−α)` and `(2k')^(1/α)`
//! are enclosed between rational bounds from integer roots at increasing
//! precision until the ceiling of the maximum is pinned down. The final
//! inequality `k'·d'^(1−α) < m'` is decided exactly as
//! `k'^b · d'^(b−a) < m'^b`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::transform::sat_ip3_sizes;
use crate::error::{Error, Result};
use crate::rational::{ceil, ceil_root, format_rational, Rational};

/// Largest denominator of `α` accepted.
const MAX_ALPHA_DENOMINATOR: u64 = 1000;
/// Precisions (fractional bits) tried for the root enclosures.
const PRECISIONS: [u32; 4] = [64, 256, 1024, 4096];

#[derive(Clone, Debug, Serialize)]
pub struct InapproxParameters {
    pub d: usize,
    #[serde(serialize_with = "as_fraction")]
    pub delta: Rational,
    #[serde(serialize_with = "as_fraction")]
    pub gamma: Rational,
    #[serde(serialize_with = "as_fraction")]
    pub alpha: Rational,
    pub q: usize,
    pub p: usize,
    /// `k' = dq`.
    pub k: usize,
    /// `m' = ⌈max(2k'(k'^(1−α) + p^(1−α)), (2k')^(1/α) + 1)⌉`.
    #[serde(serialize_with = "as_integer")]
    pub m: BigUint,
    /// False when the enclosure could not separate two integers and `m'`
    /// was rounded up from the upper bound.
    pub m_exact: bool,
    /// `d' = k' + m' + p`.
    #[serde(serialize_with = "as_integer")]
    pub d_prime: BigUint,
    /// `k'·d'^(1−α) < m'`, decided exactly.
    pub check: bool,
    /// `k'·d'^(1−α)` in floating point, for display.
    pub lhs_approx: f64,
}

fn as_fraction<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// A JSON number when it fits in 64 bits, a decimal string otherwise.
fn as_integer<S: serde::Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match n.to_u64() {
        Some(v) => s.serialize_u64(v),
        None => s.serialize_str(&n.to_string()),
    }
}

/// Lower and upper rational bounds of `x^(e/b)` with `bits` fractional bits.
fn power_bounds(x: &BigUint, e: u32, b: u32, bits: u32) -> (Rational, Rational) {
    let scaled = num_traits::pow(x.clone(), e as usize) << (bits as usize * b as usize);
    let lo = scaled.nth_root(b);
    let hi = ceil_root(&scaled, b);
    let den = BigInt::one() << bits as usize;
    (
        Rational::new(BigInt::from(lo), den.clone()),
        Rational::new(BigInt::from(hi), den),
    )
}

pub fn inapprox_parameters(d: usize, delta: &Rational, gamma: &Rational, alpha: &Rational) -> Result<InapproxParameters> {
    if alpha <= &Rational::zero() || alpha >= &Rational::one() {
        return Err(Error::invalid("alpha", format!("{} is outside (0, 1)", format_rational(alpha))));
    }
    let (a, b) = (alpha.numer(), alpha.denom());
    let b = b
        .to_u64()
        .filter(|&b| b <= MAX_ALPHA_DENOMINATOR)
        .ok_or_else(|| Error::cap("denominator of alpha", b.to_u64().unwrap_or(u64::MAX), MAX_ALPHA_DENOMINATOR))?
        as u32;
    let a = a.to_u32().expect("numerator below denominator");
    let sizes = sat_ip3_sizes(d, delta, gamma, None)?;
    let k = BigUint::from(sizes.k);
    let p = BigUint::from(sizes.p);
    let two_k = &k * 2u32;
    let two_k_r = Rational::from_integer(BigInt::from(two_k.clone()));

    let mut m = None;
    let mut fallback = BigInt::zero();
    for bits in PRECISIONS {
        let (k_lo, k_hi) = power_bounds(&k, b - a, b, bits);
        let (p_lo, p_hi) = power_bounds(&p, b - a, b, bits);
        let (r_lo, r_hi) = power_bounds(&two_k, b, a, bits);
        let one = Rational::one();
        let lo = (&two_k_r * (k_lo + p_lo)).max(r_lo + &one);
        let hi = (&two_k_r * (k_hi + p_hi)).max(r_hi + &one);
        let (c_lo, c_hi) = (ceil(&lo), ceil(&hi));
        if c_lo == c_hi {
            m = Some(c_lo);
            break;
        }
        fallback = c_hi;
    }
    let m_exact = m.is_some();
    let m = m.unwrap_or(fallback).to_biguint().expect("positive");
    let d_prime = &k + &m + &p;
    let lhs = num_traits::pow(k.clone(), b as usize) * num_traits::pow(d_prime.clone(), (b - a) as usize);
    let check = lhs < num_traits::pow(m.clone(), b as usize);
    let one_minus_alpha = 1.0 - f64::from(a) / f64::from(b);
    let lhs_approx = sizes.k as f64 * d_prime.to_f64().unwrap_or(f64::INFINITY).powf(one_minus_alpha);
    Ok(InapproxParameters {
        d,
        delta: delta.clone(),
        gamma: gamma.clone(),
        alpha: alpha.clone(),
        q: sizes.q,
        p: sizes.p,
        k: sizes.k,
        m,
        m_exact,
        d_prime,
        check,
        lhs_approx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn worked_values() {
        let r = inapprox_parameters(3, &ratio(1, 2), &ratio(1, 4), &ratio(1, 2)).unwrap();
        assert_eq!((r.q, r.p, r.k), (3, 3, 9));
        assert_eq!(r.m, BigUint::from(325u32));
        assert_eq!(r.d_prime, BigUint::from(337u32));
        assert!(r.m_exact && r.check);
        assert!((r.lhs_approx - 9.0 * 337f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn alpha_must_be_a_proper_fraction() {
        assert!(inapprox_parameters(3, &ratio(1, 2), &ratio(1, 4), &ratio(1, 1)).is_err());
        assert!(inapprox_parameters(3, &ratio(1, 2), &ratio(1, 4), &ratio(0, 1)).is_err());
    }
}
