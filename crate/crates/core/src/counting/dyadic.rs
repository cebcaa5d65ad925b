use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::rational::Rational;

/// An exact probability `numerator / 2^exponent`, kept in lowest terms.
///
/// Every probability of a Boolean event under the uniform distribution has
/// this form. Comparisons against arbitrary rationals are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicProb {
    num: BigUint,
    exp: u32,
}

impl DyadicProb {
    pub fn zero() -> Self {
        DyadicProb {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        DyadicProb {
            num: BigUint::one(),
            exp: 0,
        }
    }

    pub fn half() -> Self {
        DyadicProb::new(BigUint::one(), 1)
    }

    /// `2^-exp`.
    pub fn pow2_neg(exp: u32) -> Self {
        DyadicProb::new(BigUint::one(), exp)
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            DyadicProb::one()
        } else {
            DyadicProb::zero()
        }
    }

    /// `num / 2^exp`. Panics if the value exceeds 1.
    pub fn new(num: impl Into<BigUint>, exp: u32) -> Self {
        let num = num.into();
        assert!(num <= BigUint::one() << exp, "probability above 1");
        let mut p = DyadicProb { num, exp };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(u64::from(self.exp));
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz as u32;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0 && self.num.is_one()
    }

    /// Numerator scaled to denominator `2^exp` (requires `exp >= self.exp`).
    fn scaled(&self, exp: u32) -> BigUint {
        &self.num << (exp - self.exp)
    }

    pub fn complement(&self) -> Self {
        DyadicProb::new((BigUint::one() << self.exp) - &self.num, self.exp)
    }

    pub fn mul(&self, other: &Self) -> Self {
        DyadicProb::new(&self.num * &other.num, self.exp + other.exp)
    }

    /// Sum of two probabilities of disjoint events.
    pub fn add(&self, other: &Self) -> Self {
        let e = self.exp.max(other.exp);
        DyadicProb::new(self.scaled(e) + other.scaled(e), e)
    }

    /// Arithmetic mean, e.g. of the two cofactors of a case split.
    pub fn average(&self, other: &Self) -> Self {
        let e = self.exp.max(other.exp);
        DyadicProb::new(self.scaled(e) + other.scaled(e), e + 1)
    }

    /// `P(A ∧ B)` for independent events.
    pub fn and_independent(&self, other: &Self) -> Self {
        self.mul(other)
    }

    /// `P(A ∨ B) = P(A) + P(B) − P(A)P(B)` for independent events.
    pub fn or_independent(&self, other: &Self) -> Self {
        self.complement().mul(&other.complement()).complement()
    }

    /// `P(A ⊕ B) = P(A) + P(B) − 2P(A)P(B)` for independent events.
    pub fn xor_independent(&self, other: &Self) -> Self {
        self.mul(&other.complement()).add(&other.mul(&self.complement()))
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.num.clone()), BigInt::one() << self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// Exact comparison with a rational by cross-multiplication.
    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        let lhs = BigInt::from(self.num.clone()) * r.denom();
        let rhs = r.numer() * (BigInt::one() << self.exp);
        let ord = lhs.cmp(&rhs);
        if r.denom() < &BigInt::zero() {
            ord.reverse()
        } else {
            ord
        }
    }

    pub fn ge_rational(&self, r: &Rational) -> bool {
        self.cmp_rational(r) != Ordering::Less
    }

    pub fn gt_rational(&self, r: &Rational) -> bool {
        self.cmp_rational(r) == Ordering::Greater
    }

    /// `"numerator/2^exponent"`.
    pub fn exact_string(&self) -> String {
        format!("{}/2^{}", self.num, self.exp)
    }
}

impl PartialOrd for DyadicProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicProb {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        self.scaled(e).cmp(&other.scaled(e))
    }
}

impl fmt::Display for DyadicProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.exact_string())
    }
}

impl fmt::Debug for DyadicProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (~{})", self.exact_string(), self.to_f64())
    }
}

impl Serialize for DyadicProb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DyadicProb", 2)?;
        st.serialize_field("exact", &self.exact_string())?;
        st.serialize_field("approx", &self.to_f64())?;
        st.end()
    }
}
