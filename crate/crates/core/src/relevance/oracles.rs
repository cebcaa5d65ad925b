//! Brute-force deciders for the problems of the reduction chain.

use serde::Serialize;

use super::search::SubsetSearch;
use super::{check_delta, check_gamma, check_k, exact_search, Verdict};
use crate::counting::{Counter, DyadicProb};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula, SubsetMask};
use crate::limits::Limits;
use crate::rational::Rational;

/// Answer of the majority-satisfiability problem.
#[derive(Clone, Debug, Serialize)]
pub struct MajorityAnswer {
    pub yes: bool,
    /// First assignment to `x1..xk` (in binary counting order, `x1` least
    /// significant) under which a strict majority of completions satisfies `f`.
    pub prefix: Option<Assignment>,
    pub probability: Option<DyadicProb>,
}

/// Does some assignment to the first `k` variables make `f` true for a strict
/// majority of assignments to the rest?
pub fn solve_emajsat(f: &Formula, k: usize, limits: &Limits) -> Result<MajorityAnswer> {
    let d = f.arity();
    check_k(k, d, false)?;
    if k > limits.search_arity_cap {
        return Err(Error::cap("prefix variables", k, limits.search_arity_cap));
    }
    let half = DyadicProb::half();
    let s = SubsetMask::from_positions(d, &(0..k).collect::<Vec<_>>());
    let mut counter = Counter::new(limits);
    for j in 0..1u64 << k {
        let prefix = Assignment::from_index(k, j);
        let x = Assignment::concat(&[&prefix, &Assignment::zeros(d - k)]);
        let p = counter.restricted_satisfaction(f, &x, &s)?;
        if p > half {
            return Ok(MajorityAnswer {
                yes: true,
                prefix: Some(prefix),
                probability: Some(p),
            });
        }
    }
    Ok(MajorityAnswer {
        yes: false,
        prefix: None,
        probability: None,
    })
}

/// Answer of a search over subsets of the first `k` variables.
#[derive(Clone, Debug, Serialize)]
pub struct OracleAnswer {
    pub yes: bool,
    pub witness: Option<SubsetMask>,
    pub probability: Option<DyadicProb>,
    pub candidates: u64,
}

fn prefix_search(
    f: &Formula,
    x: &Assignment,
    k: usize,
    limits: &Limits,
    mut accept: impl FnMut(&mut Counter, &SubsetMask) -> Result<Option<DyadicProb>>,
) -> Result<OracleAnswer> {
    x.expect_len(f.arity())?;
    check_k(k, f.arity(), false)?;
    let mut counter = Counter::new(limits);
    let mut search = SubsetSearch::new(&mut counter, f, x, k, limits)?;
    let mut found = None;
    let witness = search.find_first(k, |s| {
        let hit = accept(&mut counter, s)?;
        let yes = hit.is_some();
        found = hit;
        Ok(yes)
    })?;
    Ok(OracleAnswer {
        yes: witness.is_some(),
        witness,
        probability: found,
        candidates: search.tested(),
    })
}

/// Is there `S ⊆ [k]` with `P(f(y) | y_S = x_S) > 1/2`?
pub fn solve_ip1(f: &Formula, x: &Assignment, k: usize, limits: &Limits) -> Result<OracleAnswer> {
    let half = DyadicProb::half();
    prefix_search(f, x, k, limits, |counter, s| {
        let p = counter.restricted_satisfaction(f, x, s)?;
        Ok((p > half).then_some(p))
    })
}

/// Is there `S ⊆ [k]` with `P(f(y) = f(x) | y_S = x_S) ≥ δ`?
pub fn solve_ip2(
    f: &Formula,
    x: &Assignment,
    k: usize,
    delta: &Rational,
    limits: &Limits,
) -> Result<OracleAnswer> {
    check_delta(delta)?;
    prefix_search(f, x, k, limits, |counter, s| {
        let p = counter.agreement(f, x, s)?;
        Ok(p.ge_rational(delta).then_some(p))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapAnswer {
    Yes,
    No,
    /// Neither the Yes nor the No condition holds.
    Indeterminate,
}

impl From<GapAnswer> for Verdict {
    fn from(a: GapAnswer) -> Verdict {
        match a {
            GapAnswer::Yes => Verdict::Yes,
            GapAnswer::No => Verdict::No,
            GapAnswer::Indeterminate => Verdict::DontKnow,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Ip3Answer {
    pub answer: GapAnswer,
    /// δ-relevant set of size at most `k` (Yes), or (δ−γ)-relevant set of
    /// size at most `m` (Indeterminate).
    pub witness: Option<SubsetMask>,
    pub probability: Option<DyadicProb>,
    pub candidates: u64,
}

/// Yes if a δ-relevant set of size at most `k` exists; No if no set of size
/// at most `m` is (δ−γ)-relevant; Indeterminate otherwise.
pub fn solve_ip3(
    f: &Formula,
    x: &Assignment,
    k: usize,
    m: usize,
    delta: &Rational,
    gamma: &Rational,
    limits: &Limits,
) -> Result<Ip3Answer> {
    check_delta(delta)?;
    check_gamma(delta, gamma)?;
    x.expect_len(f.arity())?;
    check_k(k, f.arity(), false)?;
    if m < k || m > f.arity() {
        return Err(Error::invalid("m", format!("{m} is outside {k}..={}", f.arity())));
    }
    let yes = exact_search(f, x, k, delta, limits)?;
    if yes.witness.is_some() {
        return Ok(Ip3Answer {
            answer: GapAnswer::Yes,
            witness: yes.witness,
            probability: yes.probability,
            candidates: yes.candidates,
        });
    }
    let lowered = delta - gamma;
    let weak = exact_search(f, x, m, &lowered, limits)?;
    Ok(Ip3Answer {
        answer: if weak.witness.is_some() {
            GapAnswer::Indeterminate
        } else {
            GapAnswer::No
        },
        witness: weak.witness,
        probability: weak.probability,
        candidates: yes.candidates + weak.candidates,
    })
}
