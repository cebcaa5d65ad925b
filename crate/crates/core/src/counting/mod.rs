//! Exact probabilities under the uniform distribution on `{0,1}^d`.
//!
//! Small components are counted by bit-parallel enumeration. Larger ones are
//! split into variable-disjoint parts whose probabilities combine by the
//! independence laws, and a component that stays connected is split further
//! by case analysis on its most shared variable, within a budget.

mod dyadic;
pub(crate) mod engine;

use serde::Serialize;

pub use dyadic::DyadicProb;

use crate::error::Result;
use crate::formula::{Assignment, Expr, Formula, SubsetMask};
use crate::limits::Limits;
use engine::{Engine, Id, Op};

/// Reusable probability calculator. Subformulas shared between queries are
/// computed once, which matters when many subsets of one formula are tested.
pub struct Counter {
    engine: Engine,
}

impl Counter {
    pub fn new(limits: &Limits) -> Self {
        Counter {
            engine: Engine::new(limits),
        }
    }

    pub(crate) fn engine(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn satisfaction(&mut self, f: &Formula) -> Result<DyadicProb> {
        self.engine.begin_query();
        let id = self.engine.import_plain(f.root());
        self.engine.prob(id)
    }

    /// Probability that `f` is true once the variables in `s` are fixed to
    /// their values in `x`.
    pub fn restricted_satisfaction(
        &mut self,
        f: &Formula,
        x: &Assignment,
        s: &SubsetMask,
    ) -> Result<DyadicProb> {
        x.expect_len(f.arity())?;
        s.expect_universe(f.arity())?;
        self.engine.begin_query();
        let id = self.restricted_root(f, x, s);
        self.engine.prob(id)
    }

    pub(crate) fn restricted_root(&mut self, f: &Formula, x: &Assignment, s: &SubsetMask) -> Id {
        self.engine
            .import_restricted(f.root(), &|i| s.contains_var(i).then(|| x.var(i)))
    }

    /// `P(f(y) = f(x) | y_S = x_S)`.
    pub fn agreement(&mut self, f: &Formula, x: &Assignment, s: &SubsetMask) -> Result<DyadicProb> {
        let p = self.restricted_satisfaction(f, x, s)?;
        Ok(if f.evaluate(x)? { p } else { p.complement() })
    }
}

/// Exact `P(f)` with default limits.
pub fn satisfaction_probability(f: &Formula) -> Result<DyadicProb> {
    Counter::new(&Limits::default()).satisfaction(f)
}

pub fn satisfaction_probability_with(f: &Formula, limits: &Limits) -> Result<DyadicProb> {
    Counter::new(limits).satisfaction(f)
}

/// Exact `P(f(y) = f(x) | y_S = x_S)` with default limits.
pub fn conditional_agreement_probability(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
) -> Result<DyadicProb> {
    Counter::new(&Limits::default()).agreement(f, x, s)
}

pub fn conditional_agreement_probability_with(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
    limits: &Limits,
) -> Result<DyadicProb> {
    Counter::new(limits).agreement(f, x, s)
}

/// How the component probabilities of a [`Decomposition`] combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CombiningLaw {
    /// A single component; its probability is the result.
    Single,
    /// `P(A ∧ B) = P(A)P(B)`.
    And,
    /// `P(A ∨ B) = P(A) + P(B) − P(A)P(B)`.
    Or,
    /// `P(A ⊕ B) = P(A) + P(B) − 2P(A)P(B)`.
    Xor,
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    /// The component as a formula over the original variable indices.
    #[serde(serialize_with = "serialize_rendered")]
    pub formula: Formula,
    pub vars: Vec<u32>,
    pub probability: DyadicProb,
}

fn serialize_rendered<S: serde::Serializer>(f: &Formula, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f.render())
}

/// Top-level split of a formula into variable-disjoint components.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub law: CombiningLaw,
    /// The combined value is complemented, for a negated top-level operator.
    pub negated: bool,
    pub components: Vec<Component>,
    pub probability: DyadicProb,
}

/// Splits the top-level AND/OR/XOR of `f` into operand groups with pairwise
/// disjoint variables. Each component's probability is computed exactly,
/// itself by recursive decomposition where needed. A formula without such a
/// split comes back as a single component.
pub fn decompose_independent(f: &Formula) -> Result<Decomposition> {
    decompose_independent_with(f, &Limits::default())
}

pub fn decompose_independent_with(f: &Formula, limits: &Limits) -> Result<Decomposition> {
    let mut engine = Engine::new(limits);
    let root = engine.import_plain(f.root());
    let (top, negated) = match engine.negated(root) {
        Some(inner) if engine.operands(inner).is_some() => (inner, true),
        _ => (root, false),
    };
    let split = engine.operands(top).map(|(op, cs)| (op, cs.to_vec()));
    let (law, parts) = match split {
        Some((op, children)) => {
            let groups = engine.independent_groups(&children);
            if groups.len() > 1 {
                let parts: Vec<Id> = groups.into_iter().map(|g| engine.op(op, g)).collect();
                let law = match op {
                    Op::And => CombiningLaw::And,
                    Op::Or => CombiningLaw::Or,
                    Op::Xor => CombiningLaw::Xor,
                };
                (law, parts)
            } else {
                (CombiningLaw::Single, vec![root])
            }
        }
        None => (CombiningLaw::Single, vec![root]),
    };
    let negated = negated && law != CombiningLaw::Single;
    let mut components = Vec::with_capacity(parts.len());
    for id in parts {
        let probability = engine.prob(id)?;
        let expr: Expr = engine.to_expr(id);
        components.push(Component {
            formula: Formula::with_arity(expr, f.arity())?,
            vars: engine.support(id).to_vec(),
            probability,
        });
    }
    let mut probability = components[0].probability.clone();
    for c in &components[1..] {
        probability = match law {
            CombiningLaw::Single => unreachable!("single components have no partners"),
            CombiningLaw::And => probability.and_independent(&c.probability),
            CombiningLaw::Or => probability.or_independent(&c.probability),
            CombiningLaw::Xor => probability.xor_independent(&c.probability),
        };
    }
    if negated {
        probability = probability.complement();
    }
    Ok(Decomposition {
        law,
        negated,
        components,
        probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(text: &str) -> Formula {
        Formula::parse(text).unwrap()
    }

    fn x(bits: &str) -> Assignment {
        Assignment::parse(bits).unwrap()
    }

    fn s(d: usize, vars: &[u32]) -> SubsetMask {
        SubsetMask::from_vars(d, vars).unwrap()
    }

    #[test]
    fn satisfaction_examples() {
        assert_eq!(satisfaction_probability(&f("(x1 & x2) | !x3")).unwrap(), DyadicProb::new(5u32, 3));
        let one = Formula::with_arity(Expr::Const(true), 4).unwrap();
        assert!(satisfaction_probability(&one).unwrap().is_one());
        assert_eq!(satisfaction_probability(&f("x1 & x2 & x3")).unwrap(), DyadicProb::new(1u32, 3));
    }

    #[test]
    fn agreement_examples() {
        let phi = f("(x1 & x2) | !x3");
        let p = |bits, vars: &[u32]| conditional_agreement_probability(&phi, &x(bits), &s(3, vars)).unwrap();
        assert!(p("110", &[3]).is_one());
        assert_eq!(p("110", &[1]), DyadicProb::new(3u32, 2));
        assert!(p("011", &[1, 2, 3]).is_one());
        // Φ(0,1,1) = 0, so agreement with ∅ is 1 − 5/8
        assert_eq!(p("011", &[]), DyadicProb::new(3u32, 3));
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_independent(&f("(x1 & x2) | (x3 & x4 & x5)")).unwrap();
        assert_eq!(d.law, CombiningLaw::Or);
        let probs: Vec<_> = d.components.iter().map(|c| c.probability.clone()).collect();
        assert_eq!(probs, vec![DyadicProb::new(1u32, 2), DyadicProb::new(1u32, 3)]);
        assert_eq!(d.probability, DyadicProb::new(11u32, 5));

        let d = decompose_independent(&f("x1 ^ x2")).unwrap();
        assert_eq!(d.law, CombiningLaw::Xor);
        assert_eq!(d.probability, DyadicProb::half());

        // the two operands of the top-level OR share no variable
        let d = decompose_independent(&f("(x1 & x2) | !x3")).unwrap();
        assert_eq!(d.components.len(), 2);
        assert_eq!(d.probability, DyadicProb::new(5u32, 3));

        let d = decompose_independent(&f("(x1 & x3) | (x2 & !x3)")).unwrap();
        assert_eq!(d.law, CombiningLaw::Single);
        assert_eq!(d.probability, DyadicProb::half());

        let d = decompose_independent(&f("!(x1 | x2)")).unwrap();
        assert!(d.negated);
        assert_eq!(d.probability, DyadicProb::new(1u32, 2));
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let phi = f("x1 & x2");
        assert!(conditional_agreement_probability(&phi, &x("1"), &s(2, &[])).is_err());
    }
}
