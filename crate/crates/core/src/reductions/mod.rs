//! Executable reductions between the relevance decision problems.
//!
//! The chain E-Maj-Sat → IP1 → IP2 → Relevant-Input transfers hardness to
//! the relevant-input problem, and SAT → IP3 does so for the gapped version.
//! Each transformer builds the reduced formula, point and bounds, records
//! which variables play which role, and checks the constructed point where
//! the construction promises `f'(x') = 1`. [`verify_reduction`] confirms on
//! small instances that the exact answers agree.

mod inapprox;
mod instance;
mod transform;
mod verify;

pub use inapprox::{inapprox_parameters, InapproxParameters};
pub use instance::{Block, ProblemInstance, ProblemKind};
pub use transform::{
    reduce_emajsat_to_ip1, reduce_ip1_to_ip2, reduce_ip2_to_relevant_input, reduce_sat_to_ip3, sat_ip3_sizes,
    Ip2Reduction, SatIp3Sizes,
};
pub use verify::{solve_instance, verify_reduction, InstanceAnswer, VerificationReport, VerificationStatus};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Assignment, Formula};
    use crate::limits::Limits;
    use crate::rational::ratio;

    fn f(text: &str) -> Formula {
        Formula::parse(text).unwrap()
    }

    fn lim() -> Limits {
        Limits::for_verification()
    }

    #[test]
    fn emajsat_to_ip1_shape() {
        let src = ProblemInstance::emajsat(f("x1 & x2"), 1).unwrap();
        let red = reduce_emajsat_to_ip1(&src).unwrap();
        assert_eq!(red.arity(), 4);
        assert_eq!(red.k, 2);
        assert_eq!(red.x.as_ref().unwrap().to_string(), "0100");
        assert_eq!(red.formula.render(), "((x1 & x3) ^ ((x1 ^ x2) & x4))");
        let names: Vec<_> = red.layout.iter().map(|b| (b.name.as_str(), b.len)).collect();
        assert_eq!(names, [("u", 1), ("v", 1), ("r", 1), ("t", 1)]);
    }

    #[test]
    fn emajsat_to_ip1_preserves_answers() {
        for (text, yes) in [("x1 & (x2 | x3)", true), ("x1 ^ x2", false)] {
            let src = ProblemInstance::emajsat(f(text), 1).unwrap();
            let red = reduce_emajsat_to_ip1(&src).unwrap();
            assert_eq!(red.arity(), src.arity() + 2);
            let rep = verify_reduction(&src, &red, &lim()).unwrap();
            assert!(rep.passed(), "{text}: {rep:?}");
            assert_eq!(rep.source.answer == crate::relevance::GapAnswer::Yes, yes);
        }
    }

    #[test]
    fn ip1_to_ip2_shape_and_answers() {
        let half = ratio(1, 2);
        for (text, yes) in [("x1 & (x2 | x3)", true), ("x1 ^ x2", false)] {
            let e = ProblemInstance::emajsat(f(text), 1).unwrap();
            let ip1 = reduce_emajsat_to_ip1(&e).unwrap();
            let red = reduce_ip1_to_ip2(&ip1, &half).unwrap();
            let n = red.gadget.gadget.n;
            assert_eq!(red.instance.arity(), ip1.arity() + 1 + n);
            let x = red.instance.x.as_ref().unwrap();
            assert!((ip1.arity()..x.len()).all(|p| x.get(p)));
            let rep = verify_reduction(&ip1, &red.instance, &lim()).unwrap();
            assert!(rep.passed(), "{text}: {rep:?}");
            assert_eq!(rep.reduced.answer == crate::relevance::GapAnswer::Yes, yes);
        }
        let ip1 = ProblemInstance::ip1(f("x1"), Assignment::parse("1").unwrap(), 1).unwrap();
        assert!(reduce_ip1_to_ip2(&ip1, &ratio(1, 1)).is_err());
        assert!(reduce_ip1_to_ip2(&ip1, &ratio(1, 4)).is_err());
    }

    #[test]
    fn ip2_to_relevant_input_shape_and_answers() {
        let half = ratio(1, 2);
        // f(x) = 1; fixing x1 = 1 gives agreement 3/4, fixing nothing 3/8
        let yes = ProblemInstance::ip2(f("x1 & (x2 | x3)"), Assignment::parse("111").unwrap(), 1, half.clone()).unwrap();
        // only x1 may be fixed and it does not reach 3/4
        let no = ProblemInstance::ip2(f("x1 & x2 & x3"), Assignment::parse("111").unwrap(), 1, ratio(3, 4)).unwrap();
        for (src, expect) in [(yes, true), (no, false)] {
            let red = reduce_ip2_to_relevant_input(&src).unwrap();
            assert_eq!(red.arity(), 8);
            let names: Vec<_> = red.layout.iter().map(|b| (b.name.as_str(), b.len)).collect();
            assert_eq!(names, [("u", 1), ("v", 1), ("r1", 2), ("r2", 2), ("r3", 2)]);
            let rep = verify_reduction(&src, &red, &lim()).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert_eq!(rep.source.answer == crate::relevance::GapAnswer::Yes, expect);
        }
    }

    #[test]
    fn sat_to_ip3_shape_and_answers() {
        let src = ProblemInstance::sat(Formula::with_arity(f("x1 | x2").into_root(), 3).unwrap()).unwrap();
        let (red, sizes) = reduce_sat_to_ip3(&src, &ratio(1, 2), &ratio(1, 4), None).unwrap();
        assert_eq!((sizes.q, sizes.p, sizes.k, sizes.m), (3, 3, 9, 9));
        assert_eq!(red.arity(), 21);
        assert!(reduce_sat_to_ip3(&src, &ratio(1, 2), &ratio(1, 4), Some(8)).is_err());

        for (text, yes) in [("x1 | x2", true), ("x1 & !x1", false)] {
            let src = ProblemInstance::sat(f(text)).unwrap();
            let (red, _) = reduce_sat_to_ip3(&src, &ratio(1, 2), &ratio(1, 4), None).unwrap();
            let rep = verify_reduction(&src, &red, &lim()).unwrap();
            assert!(rep.passed(), "{text}: {rep:?}");
            assert_eq!(rep.source.answer == crate::relevance::GapAnswer::Yes, yes);
        }
    }

    #[test]
    fn mismatched_kinds_are_rejected() {
        let e = ProblemInstance::emajsat(f("x1 & x2"), 1).unwrap();
        let s = ProblemInstance::sat(f("x1")).unwrap();
        let (ip3, _) = reduce_sat_to_ip3(&s, &ratio(1, 2), &ratio(1, 4), None).unwrap();
        let err = verify_reduction(&e, &ip3, &lim()).unwrap_err();
        assert_eq!(err.reason(), "kind_mismatch");
    }

    #[test]
    fn instances_round_trip_through_json() {
        let e = ProblemInstance::emajsat(f("x1 & (x2 | !x3)"), 2).unwrap();
        let ip1 = reduce_emajsat_to_ip1(&e).unwrap();
        let red = reduce_ip1_to_ip2(&ip1, &ratio(3, 4)).unwrap().instance;
        let text = serde_json::to_string(&red).unwrap();
        let back: ProblemInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, red);
        let bad = text.replace("\"k\":4", "\"k\":0");
        assert!(serde_json::from_str::<ProblemInstance>(&bad).is_err());
    }
}
