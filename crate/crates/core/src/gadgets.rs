//! Monotone DNF gadgets with exactly known satisfaction probability.
//!
//! [`build_pi`] approximates a target probability `η` to within `2^-ℓ` by a
//! disjunction of conjunctions over disjoint variable blocks. The threshold
//! gadgets use it to move a probability threshold: attaching the raising
//! gadget by OR turns `P(Φ) > δ1` into `P(Φ ∨ Π) ≥ δ2`, and attaching the
//! lowering gadget by AND turns `P(Φ) ≥ δ2` into `P(Φ ∧ Π) > δ1`, for every
//! `Φ` of a given arity.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::counting::DyadicProb;
use crate::error::{Error, Result};
use crate::formula::{Expr, Formula};
use crate::rational::{ceil, ceil_log2, floor, floor_log2, format_rational, pow2, Rational};

/// One iteration of the approximation: the probability `p` before the step
/// and the width `delta_n` of the conjunction added by it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub delta_n: u32,
    pub p: DyadicProb,
}

/// A monotone DNF `pi` on `n` fresh variables `x1..xn`.
#[derive(Clone, Debug, Serialize)]
pub struct Gadget {
    #[serde(serialize_with = "render")]
    pub pi: Formula,
    pub n: usize,
    pub prob: DyadicProb,
    pub trace: Vec<TraceStep>,
    /// The gadget is the constant 1, so `pi(0_n) = 1`.
    pub trivially_true: bool,
}

fn render<S: serde::Serializer>(f: &Formula, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f.render())
}

impl Gadget {
    fn from_blocks(widths: &[u32], prob: DyadicProb, trace: Vec<TraceStep>) -> Result<Self> {
        let mut next = 1u32;
        let mut terms = Vec::with_capacity(widths.len());
        for &w in widths {
            terms.push(Expr::and((next..next + w).map(Expr::Var).collect()));
            next += w;
        }
        let n = (next - 1) as usize;
        Ok(Gadget {
            pi: Formula::with_arity(Expr::or(terms), n)?,
            n,
            prob,
            trace,
            trivially_true: false,
        })
    }

    fn constant_true() -> Self {
        Gadget {
            pi: Formula::with_arity(Expr::Const(true), 0).expect("constant formula"),
            n: 0,
            prob: DyadicProb::one(),
            trace: Vec::new(),
            trivially_true: true,
        }
    }

    /// The gadget's expression over variables `x_{offset+1}..x_{offset+n}`.
    pub fn shifted(&self, offset: u32) -> Expr {
        self.pi.root().shifted(offset)
    }
}

/// Builds `Π_{η,ℓ}` with `|P(Π) − η| ≤ 2^-ℓ` on at most `ℓ(ℓ+3)/2` variables.
///
/// For `η ≤ 2^-ℓ` this is the conjunction of `ℓ` variables. Otherwise,
/// starting from the constant 0, each step ORs in a conjunction of `Δn` new
/// variables, the smallest `Δn ≥ 1` keeping the probability at most `η`,
/// until the gap is at most `2^-ℓ`. The halving of the gap and the bound on
/// `Δn` are asserted at every step.
pub fn build_pi(eta: &Rational, ell: u32) -> Result<Gadget> {
    if eta <= &Rational::zero() || eta > &Rational::one() {
        return Err(Error::invalid("eta", format!("{} is outside (0, 1]", format_rational(eta))));
    }
    if ell == 0 {
        return Err(Error::invalid("ell", "must be a positive integer"));
    }
    let tolerance = pow2(-i64::from(ell));
    if eta <= &tolerance {
        return Gadget::from_blocks(&[ell], DyadicProb::pow2_neg(ell), Vec::new());
    }
    let mut p = DyadicProb::zero();
    let mut widths = Vec::new();
    let mut trace = Vec::new();
    loop {
        let gap = eta - p.to_rational();
        if gap <= tolerance {
            break;
        }
        let rest = p.complement();
        let mut delta_n = 1u32;
        let next = loop {
            let candidate = p.add(&rest.mul(&DyadicProb::pow2_neg(delta_n)));
            if !candidate.gt_rational(eta) {
                break candidate;
            }
            delta_n += 1;
        };
        // 2^(Δn−1)·(η − p) < 1
        if pow2(i64::from(delta_n) - 1) * &gap >= Rational::one() {
            return Err(Error::Construction(format!(
                "step width {delta_n} exceeds the bound for gap {}",
                format_rational(&gap)
            )));
        }
        let new_gap = eta - next.to_rational();
        if new_gap.clone() * BigInt::from(2) > gap {
            return Err(Error::Construction(format!(
                "gap {} did not halve from {}",
                format_rational(&new_gap),
                format_rational(&gap)
            )));
        }
        trace.push(TraceStep { delta_n, p: p.clone() });
        widths.push(delta_n);
        p = next;
    }
    let n: u64 = widths.iter().map(|&w| u64::from(w)).sum();
    let bound = u64::from(ell) * (u64::from(ell) + 3) / 2;
    if n > bound {
        return Err(Error::Construction(format!("{n} variables exceed the bound {bound}")));
    }
    Gadget::from_blocks(&widths, p, trace)
}

/// How a threshold gadget joins the host formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    Or,
    And,
}

/// Which construction produced a threshold gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// A single conjunction; the target interval is wide enough.
    Conjunction,
    /// `Π_{η,ℓ}` aimed at the middle of the target interval.
    Approximation,
    /// The constant 1 already satisfies the equivalence.
    ConstantTrue,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdGadget {
    pub gadget: Gadget,
    pub combiner: Combiner,
    pub construction: Construction,
    /// Host arity the gadget was built for.
    pub d: usize,
    #[serde(serialize_with = "ser_rational_opt")]
    pub a: Option<Rational>,
    #[serde(serialize_with = "ser_rational_opt")]
    pub b: Option<Rational>,
    #[serde(serialize_with = "ser_rational_opt")]
    pub eta: Option<Rational>,
    pub ell: Option<u32>,
}

fn ser_rational_opt<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

impl ThresholdGadget {
    /// `host ∘ Π` with the gadget on variables after the host's.
    pub fn attach(&self, host: &Formula) -> Result<Formula> {
        let d = host.arity();
        let g = self.gadget.shifted(d as u32);
        let root = match self.combiner {
            Combiner::Or => Expr::or(vec![host.root().clone(), g]),
            Combiner::And => Expr::and(vec![host.root().clone(), g]),
        };
        Formula::with_arity(root, d + self.gadget.n)
    }
}

fn check_pair(delta1: &Rational, delta2: &Rational) -> Result<()> {
    if !(&Rational::zero() < delta1 && delta1 < delta2 && delta2 < &Rational::one()) {
        return Err(Error::invalid(
            "thresholds",
            format!(
                "need 0 < delta1 < delta2 < 1, got {} and {}",
                format_rational(delta1),
                format_rational(delta2)
            ),
        ));
    }
    Ok(())
}

fn check_arity(d: usize) -> Result<i64> {
    if d > 4096 {
        return Err(Error::cap("gadget host arity", d, 4096));
    }
    Ok(d as i64)
}

/// `ℓ = ⌊−log2((b − a)/2)⌋ + 1`.
fn accuracy(a: &Rational, b: &Rational) -> Result<u32> {
    let half_width: Rational = (b - a) / BigInt::from(2);
    let ell = 1 - ceil_log2(&half_width);
    u32::try_from(ell).map_err(|_| Error::Construction(format!("accuracy {ell} is not positive")))
}

/// Gadget `Π` with `P(Φ) > δ1 ⟺ P(Φ ∨ Π) ≥ δ2` for every `Φ` of arity `d`.
pub fn raise_probability_gadget(d: usize, delta1: &Rational, delta2: &Rational) -> Result<ThresholdGadget> {
    check_pair(delta1, delta2)?;
    let scale = pow2(check_arity(d)?);
    let lower = Rational::from_integer(floor(&(delta1 * &scale)));
    if delta2 <= &((&lower + Rational::one()) / &scale) {
        let width = floor_log2(&(Rational::one() / (delta2 - delta1))) + 1;
        let width = u32::try_from(width).map_err(|_| Error::Construction("negative block width".into()))?;
        let gadget = Gadget::from_blocks(&[width], DyadicProb::pow2_neg(width), Vec::new())?;
        return Ok(ThresholdGadget {
            gadget,
            combiner: Combiner::Or,
            construction: Construction::Conjunction,
            d,
            a: None,
            b: None,
            eta: None,
            ell: None,
        });
    }
    let top = delta2 * &scale;
    let a = (&top - &lower - Rational::one()) / (&scale - &lower - Rational::one());
    let b = (&top - &lower) / (&scale - &lower);
    let eta = (&a + &b) / BigInt::from(2);
    let ell = accuracy(&a, &b)?;
    let gadget = build_pi(&eta, ell)?;
    if !(gadget.prob.ge_rational(&a) && !gadget.prob.ge_rational(&b)) {
        return Err(Error::Construction(format!(
            "P(Π) = {} is outside [{}, {})",
            gadget.prob,
            format_rational(&a),
            format_rational(&b)
        )));
    }
    Ok(ThresholdGadget {
        gadget,
        combiner: Combiner::Or,
        construction: Construction::Approximation,
        d,
        a: Some(a),
        b: Some(b),
        eta: Some(eta),
        ell: Some(ell),
    })
}

/// Gadget `Π` with `P(Φ) ≥ δ2 ⟺ P(Φ ∧ Π) > δ1` for every `Φ` of arity `d`.
pub fn lower_probability_gadget(d: usize, delta1: &Rational, delta2: &Rational) -> Result<ThresholdGadget> {
    check_pair(delta1, delta2)?;
    let scale = pow2(check_arity(d)?);
    let upper = Rational::from_integer(ceil(&(delta2 * &scale)));
    if (&upper - Rational::one()) / &scale <= *delta1 {
        return Ok(ThresholdGadget {
            gadget: Gadget::constant_true(),
            combiner: Combiner::And,
            construction: Construction::ConstantTrue,
            d,
            a: None,
            b: None,
            eta: None,
            ell: None,
        });
    }
    let mass = delta1 * &scale;
    let a = &mass / &upper;
    let b = &mass / (&upper - Rational::one());
    let eta = (&a + &b) / BigInt::from(2);
    let ell = accuracy(&a, &b)?;
    let gadget = build_pi(&eta, ell)?;
    if !(gadget.prob.gt_rational(&a) && !gadget.prob.gt_rational(&b)) {
        return Err(Error::Construction(format!(
            "P(Π) = {} is outside ({}, {}]",
            gadget.prob,
            format_rational(&a),
            format_rational(&b)
        )));
    }
    Ok(ThresholdGadget {
        gadget,
        combiner: Combiner::And,
        construction: Construction::Approximation,
        d,
        a: Some(a),
        b: Some(b),
        eta: Some(eta),
        ell: Some(ell),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::satisfaction_probability;
    use crate::rational::ratio;

    #[test]
    fn pi_examples() {
        let g = build_pi(&ratio(1, 2), 5).unwrap();
        assert_eq!(g.pi.render(), "x1");
        assert_eq!(g.prob, DyadicProb::half());

        let g = build_pi(&ratio(3, 4), 3).unwrap();
        assert_eq!(g.pi.render(), "(x1 | x2)");
        // at ℓ = 2 the first step is already within 1/4
        assert_eq!(build_pi(&ratio(3, 4), 2).unwrap().pi.render(), "x1");

        let g = build_pi(&ratio(7, 10), 4).unwrap();
        assert_eq!(g.pi.render(), "(x1 | (x2 & x3) | (x4 & x5 & x6))");
        assert_eq!(g.prob, DyadicProb::new(43u32, 6));
        assert_eq!(g.trace.iter().map(|t| t.delta_n).collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(satisfaction_probability(&g.pi).unwrap(), g.prob);

        let g = build_pi(&ratio(1, 100), 4).unwrap();
        assert_eq!(g.n, 4);
        assert_eq!(g.prob, DyadicProb::new(1u32, 4));

        assert!(build_pi(&ratio(0, 1), 3).is_err());
        assert!(build_pi(&ratio(3, 2), 3).is_err());
    }

    #[test]
    fn raise_examples() {
        let t = raise_probability_gadget(1, &ratio(1, 2), &ratio(3, 4)).unwrap();
        assert_eq!(t.construction, Construction::Conjunction);
        assert_eq!(t.gadget.pi.render(), "(x1 & x2 & x3)");
        assert_eq!(t.gadget.prob, DyadicProb::new(1u32, 3));

        let t = raise_probability_gadget(2, &ratio(1, 2), &ratio(9, 10)).unwrap();
        assert_eq!(t.construction, Construction::Approximation);
        assert_eq!(t.a, Some(ratio(3, 5)));
        assert_eq!(t.b, Some(ratio(4, 5)));
        assert_eq!(t.eta, Some(ratio(7, 10)));
        assert_eq!(t.ell, Some(4));
        assert_eq!(t.gadget.prob, DyadicProb::new(43u32, 6));
    }

    #[test]
    fn lower_examples() {
        let t = lower_probability_gadget(2, &ratio(1, 2), &ratio(3, 4)).unwrap();
        assert_eq!(t.construction, Construction::ConstantTrue);
        assert!(t.gadget.trivially_true);

        let t = lower_probability_gadget(3, &ratio(1, 4), &ratio(3, 4)).unwrap();
        assert_eq!(t.a, Some(ratio(1, 3)));
        assert_eq!(t.b, Some(ratio(2, 5)));
        assert_eq!(t.eta, Some(ratio(11, 30)));
        assert_eq!(t.ell, Some(5));
        let p = t.gadget.prob.to_rational();
        assert!(ratio(1, 3) < p && p <= ratio(2, 5));

        // P(Φ) = 6/8 passes, 5/8 does not
        let quarter = ratio(1, 4);
        let six = Formula::with_arity(Formula::parse("x1 | x2").unwrap().into_root(), 3).unwrap();
        let five = Formula::parse("x1 | (x2 & x3)").unwrap();
        assert_eq!(satisfaction_probability(&five).unwrap(), DyadicProb::new(5u32, 3));
        assert!(satisfaction_probability(&t.attach(&six).unwrap()).unwrap().gt_rational(&quarter));
        assert!(!satisfaction_probability(&t.attach(&five).unwrap()).unwrap().gt_rational(&quarter));
    }

    #[test]
    fn threshold_parameters_are_validated() {
        assert!(raise_probability_gadget(2, &ratio(1, 2), &ratio(1, 2)).is_err());
        assert!(lower_probability_gadget(2, &ratio(0, 1), &ratio(1, 2)).is_err());
    }
}
