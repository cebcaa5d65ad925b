//! δ-relevance: exact checks, subset search, sampling and the decision
//! problems built on them.
//!
//! A set `S` is δ-relevant for `f` and `x` when
//! `P(f(y) = f(x) | y_S = x_S) ≥ δ`, the probability taken over uniform `y`.

mod oracles;
mod sampling;
mod search;

use serde::Serialize;

pub use oracles::{
    solve_emajsat, solve_ip1, solve_ip2, solve_ip3, GapAnswer, Ip3Answer, MajorityAnswer, OracleAnswer,
};
pub use sampling::{amplified_sample_relevance, sample_count, sample_relevance, AmplifiedOutcome, SampleOutcome};

use crate::counting::{Counter, DyadicProb};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula, SubsetMask};
use crate::limits::Limits;
use crate::rational::{format_rational, Rational};
use num_traits::{One, Zero};
use sampling::{sub_seed, Sampler};
use search::SubsetSearch;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    DontKnow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Sampled,
    Amplified,
}

/// Whether a gapped instance satisfies its promise, checked exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Promise {
    /// A δ-relevant set of size at most `k` exists, or no set of size at most
    /// `k` is even (δ−γ)-relevant.
    Holds,
    /// Neither condition holds; any answer is acceptable and none is reliable.
    Violated,
    /// The exact check was beyond the configured caps.
    Unchecked,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelevanceReport {
    pub verdict: Verdict,
    pub witness: Option<SubsetMask>,
    /// Exact agreement probability of the witness (exact runs), or of the
    /// best candidate when there is no witness.
    pub probability: Option<DyadicProb>,
    /// Sampling detail for the accepted candidate, if sampled.
    pub estimate: Option<AmplifiedOutcome>,
    pub method: Method,
    /// Candidate subsets tested by the search.
    pub candidates: u64,
    pub promise: Option<Promise>,
}

pub(crate) fn check_delta(delta: &Rational) -> Result<()> {
    if delta <= &Rational::zero() || delta > &Rational::one() {
        return Err(Error::invalid(
            "delta",
            format!("{} is outside (0, 1]", format_rational(delta)),
        ));
    }
    Ok(())
}

pub(crate) fn check_gamma(delta: &Rational, gamma: &Rational) -> Result<()> {
    if gamma < &Rational::zero() || gamma >= delta {
        return Err(Error::invalid(
            "gamma",
            format!("{} is outside [0, delta)", format_rational(gamma)),
        ));
    }
    Ok(())
}

pub(crate) fn check_k(k: usize, d: usize, allow_zero: bool) -> Result<()> {
    if (k == 0 && !allow_zero) || k > d {
        let low = if allow_zero { 0 } else { 1 };
        return Err(Error::invalid("k", format!("{k} is outside {low}..={d}")));
    }
    Ok(())
}

/// Exact test of `P(f(y) = f(x) | y_S = x_S) ≥ δ`, returning the probability.
pub fn is_delta_relevant(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
    delta: &Rational,
) -> Result<(bool, DyadicProb)> {
    is_delta_relevant_with(f, x, s, delta, &Limits::default())
}

pub fn is_delta_relevant_with(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
    delta: &Rational,
    limits: &Limits,
) -> Result<(bool, DyadicProb)> {
    check_delta(delta)?;
    let p = Counter::new(limits).agreement(f, x, s)?;
    Ok((p.ge_rational(delta), p))
}

/// Is there a δ-relevant set of size at most `k` (`1 ≤ k ≤ d`)?
///
/// Subsets are tried by increasing size, then lexicographically, so the
/// witness is the first one in that order.
pub fn decide_relevant_input(
    f: &Formula,
    x: &Assignment,
    k: usize,
    delta: &Rational,
) -> Result<RelevanceReport> {
    decide_relevant_input_with(f, x, k, delta, &Limits::default())
}

pub fn decide_relevant_input_with(
    f: &Formula,
    x: &Assignment,
    k: usize,
    delta: &Rational,
    limits: &Limits,
) -> Result<RelevanceReport> {
    check_delta(delta)?;
    x.expect_len(f.arity())?;
    check_k(k, f.arity(), false)?;
    exact_search(f, x, k, delta, limits)
}

fn exact_search(
    f: &Formula,
    x: &Assignment,
    k: usize,
    delta: &Rational,
    limits: &Limits,
) -> Result<RelevanceReport> {
    let mut counter = Counter::new(limits);
    let mut search = SubsetSearch::new(&mut counter, f, x, f.arity(), limits)?;
    let mut found = None;
    let witness = search.find_first(k, |s| {
        let p = counter.agreement(f, x, s)?;
        let ok = p.ge_rational(delta);
        if ok {
            found = Some(p);
        }
        Ok(ok)
    })?;
    Ok(RelevanceReport {
        verdict: if witness.is_some() { Verdict::Yes } else { Verdict::No },
        witness,
        probability: found,
        estimate: None,
        method: Method::Exact,
        candidates: search.tested(),
        promise: None,
    })
}

/// Optimum of the minimisation problem: the least `k ≥ 0` with a δ-relevant
/// set of size `k`, its first witness and that witness's probability.
#[derive(Clone, Debug, Serialize)]
pub struct MinRelevant {
    pub k: usize,
    pub witness: SubsetMask,
    pub probability: DyadicProb,
    pub candidates: u64,
}

pub fn solve_min_relevant_input(f: &Formula, x: &Assignment, delta: &Rational) -> Result<MinRelevant> {
    solve_min_relevant_input_with(f, x, delta, &Limits::default())
}

pub fn solve_min_relevant_input_with(
    f: &Formula,
    x: &Assignment,
    delta: &Rational,
    limits: &Limits,
) -> Result<MinRelevant> {
    check_delta(delta)?;
    x.expect_len(f.arity())?;
    let report = exact_search(f, x, f.arity(), delta, limits)?;
    let witness = report
        .witness
        .ok_or_else(|| Error::Construction("the full support is always 1-relevant".into()))?;
    Ok(MinRelevant {
        k: witness.count(),
        witness,
        probability: report.probability.expect("witness carries its probability"),
        candidates: report.candidates,
    })
}

/// Sampled decision of the gapped problem: subsets of size at most `k` are
/// tried in search order, each by a majority of `rounds` sampling runs with
/// a seed derived from `seed` and the candidate's position in the order.
///
/// The promise is checked exactly when the caps allow; outside the promise
/// the verdict is the sampler's and is flagged as such.
pub fn decide_gapped(
    f: &Formula,
    x: &Assignment,
    k: usize,
    delta: &Rational,
    gamma: &Rational,
    seed: u64,
    rounds: u32,
) -> Result<RelevanceReport> {
    decide_gapped_with(f, x, k, delta, gamma, seed, rounds, &Limits::default())
}

#[allow(clippy::too_many_arguments)]
pub fn decide_gapped_with(
    f: &Formula,
    x: &Assignment,
    k: usize,
    delta: &Rational,
    gamma: &Rational,
    seed: u64,
    rounds: u32,
    limits: &Limits,
) -> Result<RelevanceReport> {
    check_delta(delta)?;
    check_gamma(delta, gamma)?;
    sample_count(gamma)?;
    x.expect_len(f.arity())?;
    check_k(k, f.arity(), false)?;
    let sampler = Sampler::new(f, x)?;
    let mut counter = Counter::new(limits);
    let mut search = SubsetSearch::new(&mut counter, f, x, f.arity(), limits)?;
    let mut ordinal = 0u64;
    let mut accepted = None;
    let witness = search.find_first(k, |s| {
        let outcome = sampler.amplified(s, delta, gamma, sub_seed(seed, "candidate", &[ordinal]), rounds)?;
        ordinal += 1;
        let yes = outcome.verdict == Verdict::Yes;
        if yes {
            accepted = Some(outcome);
        }
        Ok(yes)
    })?;
    let candidates = search.tested();
    let promise = check_promise(f, x, k, delta, gamma, limits)?;
    let probability = match &witness {
        Some(s) => Counter::new(limits).agreement(f, x, s).ok(),
        None => None,
    };
    Ok(RelevanceReport {
        verdict: if witness.is_some() { Verdict::Yes } else { Verdict::No },
        witness,
        probability,
        estimate: accepted,
        method: Method::Amplified,
        candidates,
        promise: Some(promise),
    })
}

fn check_promise(
    f: &Formula,
    x: &Assignment,
    k: usize,
    delta: &Rational,
    gamma: &Rational,
    limits: &Limits,
) -> Result<Promise> {
    let lowered = delta - gamma;
    let outcome = (|| -> Result<Promise> {
        if exact_search(f, x, k, delta, limits)?.witness.is_some() {
            return Ok(Promise::Holds);
        }
        if exact_search(f, x, k, &lowered, limits)?.witness.is_none() {
            return Ok(Promise::Holds);
        }
        Ok(Promise::Violated)
    })();
    match outcome {
        Ok(p) => Ok(p),
        Err(e) if e.is_cap_refusal() => Ok(Promise::Unchecked),
        Err(e) => Err(e),
    }
}

/// One step of [`greedy_min_relevant`].
#[derive(Clone, Debug, Serialize)]
pub struct GreedyStep {
    /// Variable added in this step.
    pub added: u32,
    /// Sampled agreement estimate of the set after adding it.
    pub estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreedyOutcome {
    pub k: usize,
    pub set: SubsetMask,
    pub steps: Vec<GreedyStep>,
    /// Exact `(δ−γ)`-relevance of the returned set, when tractable.
    pub exact_check: Option<bool>,
    pub exact_probability: Option<DyadicProb>,
    /// Sets accepted by sampling but rejected by the exact check.
    pub rejected_by_exact: u32,
}

/// Greedy upper bound for the gapped minimisation problem.
///
/// Starting from the empty set, the variable whose addition has the highest
/// sampled agreement is added (ties to the smaller index) until the amplified
/// sampler accepts. An accepted set is re-checked exactly for
/// `(δ−γ)`-relevance when the caps allow, and growth continues if it fails.
pub fn greedy_min_relevant(
    f: &Formula,
    x: &Assignment,
    delta: &Rational,
    gamma: &Rational,
    seed: u64,
    rounds: u32,
) -> Result<GreedyOutcome> {
    greedy_min_relevant_with(f, x, delta, gamma, seed, rounds, &Limits::default())
}

pub fn greedy_min_relevant_with(
    f: &Formula,
    x: &Assignment,
    delta: &Rational,
    gamma: &Rational,
    seed: u64,
    rounds: u32,
    limits: &Limits,
) -> Result<GreedyOutcome> {
    check_delta(delta)?;
    check_gamma(delta, gamma)?;
    let n = sample_count(gamma)?;
    x.expect_len(f.arity())?;
    let d = f.arity();
    let lowered = delta - gamma;
    let sampler = Sampler::new(f, x)?;
    let mut counter = Counter::new(limits);
    let mut set = SubsetMask::empty(d);
    let mut steps = Vec::new();
    let mut rejected_by_exact = 0;
    for step in 0u64.. {
        let outcome = sampler.amplified(&set, delta, gamma, sub_seed(seed, "accept", &[step]), rounds)?;
        let full = set.count() == d;
        if outcome.verdict == Verdict::Yes || full {
            match counter.agreement(f, x, &set) {
                Ok(p) => {
                    let ok = p.ge_rational(&lowered);
                    if ok || full {
                        return Ok(GreedyOutcome {
                            k: set.count(),
                            set,
                            steps,
                            exact_check: Some(ok),
                            exact_probability: Some(p),
                            rejected_by_exact,
                        });
                    }
                    rejected_by_exact += 1;
                }
                Err(e) if e.is_cap_refusal() => {
                    return Ok(GreedyOutcome {
                        k: set.count(),
                        set,
                        steps,
                        exact_check: None,
                        exact_probability: None,
                        rejected_by_exact,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        let mut best: Option<(u64, usize)> = None;
        for p in (0..d).filter(|&p| !set.contains_pos(p)) {
            let agreeing = sampler.count_agreeing(
                &set.with_pos(p),
                n,
                sub_seed(seed, "estimate", &[step, p as u64]),
                0,
            )?;
            if best.is_none_or(|(b, _)| agreeing > b) {
                best = Some((agreeing, p));
            }
        }
        let (agreeing, p) = best.expect("a free variable remains");
        set.insert_pos(p);
        steps.push(GreedyStep {
            added: p as u32 + 1,
            estimate: agreeing as f64 / n as f64,
        });
    }
    unreachable!("the loop returns once the set is full")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn running_example() -> Formula {
        Formula::parse("(x1 & x2) | !x3").unwrap()
    }

    fn x(bits: &str) -> Assignment {
        Assignment::parse(bits).unwrap()
    }

    #[test]
    fn exact_relevance_examples() {
        let s1 = SubsetMask::parse(3, "1").unwrap();
        let (ok, p) = is_delta_relevant(&running_example(), &x("110"), &s1, &ratio(3, 4)).unwrap();
        assert!(ok);
        assert_eq!(p, DyadicProb::new(3u32, 2));
        assert!(!is_delta_relevant(&running_example(), &x("110"), &s1, &ratio(4, 5)).unwrap().0);
        assert!(is_delta_relevant(&running_example(), &x("011"), &SubsetMask::full(3), &ratio(1, 1)).unwrap().0);
        assert!(is_delta_relevant(&running_example(), &x("110"), &s1, &ratio(0, 1)).is_err());
    }

    #[test]
    fn decide_examples() {
        let r = decide_relevant_input(&running_example(), &x("110"), 1, &ratio(1, 1)).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert_eq!(r.witness.unwrap().vars(), vec![3]);

        // Φ(1,1,1) = 1; fixing x1 = 1 leaves x2 ∨ ¬x3, true with probability 3/4
        let r = decide_relevant_input(&running_example(), &x("111"), 1, &ratio(3, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert_eq!(r.witness.unwrap().vars(), vec![1]);
        assert_eq!(r.probability.unwrap(), DyadicProb::new(3u32, 2));
        let r = decide_relevant_input(&running_example(), &x("111"), 1, &ratio(4, 5)).unwrap();
        assert_eq!(r.verdict, Verdict::No);

        let r = decide_relevant_input(&running_example(), &x("011"), 3, &ratio(1, 1)).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!(decide_relevant_input(&running_example(), &x("011"), 0, &ratio(1, 1)).is_err());
    }

    #[test]
    fn minimisation_examples() {
        let m = solve_min_relevant_input(&running_example(), &x("110"), &ratio(1, 1)).unwrap();
        assert_eq!((m.k, m.witness.vars()), (1, vec![3]));
        let m = solve_min_relevant_input(&running_example(), &x("110"), &ratio(5, 8)).unwrap();
        assert_eq!(m.k, 0);
        let one = Formula::with_arity(crate::Expr::Const(true), 2).unwrap();
        assert_eq!(solve_min_relevant_input(&one, &x("01"), &ratio(1, 1)).unwrap().k, 0);
    }

    #[test]
    fn gapped_examples() {
        for seed in 0..5 {
            let r = decide_gapped(&running_example(), &x("110"), 1, &ratio(95, 100), &ratio(1, 5), seed, 15).unwrap();
            assert_eq!(r.verdict, Verdict::Yes);
            assert_eq!(r.promise, Some(Promise::Holds));
            let xor = Formula::parse("x1 ^ x2 ^ x3 ^ x4").unwrap();
            let r = decide_gapped(&xor, &x("1010"), 3, &ratio(9, 10), &ratio(1, 5), seed, 15).unwrap();
            assert_eq!(r.verdict, Verdict::No);
            let r = decide_gapped(&xor, &x("1010"), 4, &ratio(9, 10), &ratio(1, 5), seed, 15).unwrap();
            assert_eq!(r.verdict, Verdict::Yes);
        }
    }

    #[test]
    fn greedy_examples() {
        let g = greedy_min_relevant(&running_example(), &x("110"), &ratio(95, 100), &ratio(1, 10), 3, 15).unwrap();
        assert_eq!((g.k, g.set.vars()), (1, vec![3]));
        let one = Formula::with_arity(crate::Expr::Const(true), 2).unwrap();
        assert_eq!(greedy_min_relevant(&one, &x("00"), &ratio(1, 1), &ratio(1, 10), 3, 15).unwrap().k, 0);
        let and6 = Formula::parse("x1 & x2 & x3 & x4 & x5 & x6").unwrap();
        let g = greedy_min_relevant(&and6, &x("111111"), &ratio(1, 1), &ratio(1, 100), 3, 1).unwrap();
        assert_eq!(g.k, 6);
        assert_eq!(g.exact_check, Some(true));
    }
}
