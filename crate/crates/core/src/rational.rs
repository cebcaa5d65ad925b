//! Exact rational parameters (δ, γ, η, α) and integer logarithms.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.95"` into an
/// exact rational. Decimals are converted without rounding.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = |msg: &str| Error::invalid("rational", format!("{msg}: {text:?}"));
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let den: BigInt = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("not a number"));
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad("not a number"))?
    };
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = Rational::new(num, den);
    Ok(if negative { -value } else { value })
}

/// Renders `p/q` (or `p` for integers) in lowest terms.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: impl Into<BigInt>) -> Rational {
    Rational::from_integer(value.into())
}

/// `2^e` for any integer `e`.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Largest integer `e` with `2^e <= r`. Requires `r > 0`.
pub fn floor_log2(r: &Rational) -> i64 {
    assert!(r.is_positive(), "floor_log2 of a non-positive value");
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let mut e = num.bits() as i64 - den.bits() as i64;
    // 2^e <= num/den  <=>  den * 2^e <= num
    let le = |e: i64| -> bool {
        if e >= 0 {
            (den << e as u64) <= *num
        } else {
            *den <= (num << (-e) as u64)
        }
    };
    while !le(e) {
        e -= 1;
    }
    while le(e + 1) {
        e += 1;
    }
    e
}

/// Smallest integer `e` with `r <= 2^e`. Requires `r > 0`.
pub fn ceil_log2(r: &Rational) -> i64 {
    let e = floor_log2(r);
    if pow2(e) == *r {
        e
    } else {
        e + 1
    }
}

pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil(r: &Rational) -> BigInt {
    r.numer().div_ceil(r.denom())
}

/// Smallest integer `n >= 0` with `n^root >= value`.
pub fn ceil_root(value: &BigUint, root: u32) -> BigUint {
    let r = num_integer::Roots::nth_root(value, root);
    if &num_traits::pow(r.clone(), root as usize) == value {
        r
    } else {
        r + 1u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("0.95").unwrap(), ratio(19, 20));
        assert_eq!(parse_rational("1").unwrap(), ratio(1, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), ratio(3, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1e-3").is_err());
    }

    #[test]
    fn integer_logarithms() {
        assert_eq!(floor_log2(&ratio(4, 1)), 2);
        assert_eq!(floor_log2(&ratio(5, 1)), 2);
        assert_eq!(floor_log2(&ratio(1, 3)), -2);
        assert_eq!(floor_log2(&ratio(1, 4)), -2);
        assert_eq!(floor_log2(&ratio(10, 1)), 3);
        assert_eq!(ceil_log2(&ratio(6, 1)), 3);
        assert_eq!(ceil_log2(&ratio(8, 1)), 3);
        assert_eq!(ceil_log2(&ratio(1, 3)), -1);
        assert_eq!(floor_log2(&ratio(141, 1)), 7);
    }

    #[test]
    fn roots() {
        assert_eq!(ceil_root(&BigUint::from(324u32), 2), BigUint::from(18u32));
        assert_eq!(ceil_root(&BigUint::from(325u32), 2), BigUint::from(19u32));
        assert_eq!(ceil_root(&BigUint::from(0u32), 3), BigUint::from(0u32));
    }
}
