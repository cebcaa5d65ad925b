#![allow(dead_code)]

use proptest::prelude::*;
use relevance_core::{Assignment, Expr, Formula, SubsetMask};

/// Formula whose truth table is `table` (bit `j` is the value at the
/// assignment with index `j`, `x1` least significant), as a DNF of minterms.
pub fn from_table(d: usize, table: u64) -> Formula {
    let terms = (0..1u64 << d)
        .filter(|j| table >> j & 1 == 1)
        .map(|j| {
            Expr::and(
                (0..d)
                    .map(|p| {
                        let v = Expr::Var(p as u32 + 1);
                        if j >> p & 1 == 1 {
                            v
                        } else {
                            Expr::not(v)
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Formula::with_arity(Expr::or(terms), d).unwrap()
}

fn expr(d: u32, depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        8 => (1..=d).prop_map(Expr::Var),
        1 => any::<bool>().prop_map(Expr::Const),
    ];
    leaf.prop_recursive(depth, 48, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Or),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::xor(a, b)),
        ]
    })
    .boxed()
}

/// Random formula of arity exactly `d`.
pub fn formula(d: usize) -> BoxedStrategy<Formula> {
    expr(d as u32, 5)
        .prop_map(move |e| Formula::with_arity(e, d).unwrap())
        .boxed()
}

pub fn assignment(d: usize) -> BoxedStrategy<Assignment> {
    prop::collection::vec(any::<bool>(), d)
        .prop_map(|b| Assignment::from_bools(&b))
        .boxed()
}

/// Naive `P(f(y) = f(x) | y_S = x_S)` as a pair (agreeing, total).
pub fn naive_agreement(f: &Formula, x: &Assignment, s: &SubsetMask) -> (u64, u64) {
    let d = f.arity();
    let fx = f.root().eval(&x.to_bools());
    let (mut agree, mut total) = (0, 0);
    for j in 0..1u64 << d {
        let y: Vec<bool> = (0..d).map(|p| j >> p & 1 == 1).collect();
        if (0..d).any(|p| s.contains_pos(p) && y[p] != x.get(p)) {
            continue;
        }
        total += 1;
        if f.root().eval(&y) == fx {
            agree += 1;
        }
    }
    (agree, total)
}

/// Naive `P(f)` as (models, 2^d).
pub fn naive_probability(f: &Formula) -> (u64, u64) {
    let d = f.arity();
    let models = (0..1u64 << d)
        .filter(|j| {
            let y: Vec<bool> = (0..d).map(|p| j >> p & 1 == 1).collect();
            f.root().eval(&y)
        })
        .count() as u64;
    (models, 1 << d)
}
