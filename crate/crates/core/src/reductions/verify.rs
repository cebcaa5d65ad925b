//! Exact oracles for every instance kind and the answer-preservation check.

use serde::Serialize;

use super::instance::{ProblemInstance, ProblemKind};
use crate::counting::{Counter, DyadicProb};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relevance::{decide_relevant_input_with, solve_emajsat, solve_ip1, solve_ip2, solve_ip3, GapAnswer};

/// Exact answer to an instance, with the evidence found.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceAnswer {
    pub kind: ProblemKind,
    pub answer: GapAnswer,
    /// Prefix assignment (E-Maj-Sat) or subset, in text form.
    pub witness: Option<String>,
    pub probability: Option<DyadicProb>,
}

fn yes_no(b: bool) -> GapAnswer {
    if b {
        GapAnswer::Yes
    } else {
        GapAnswer::No
    }
}

/// Decides `inst` by exhaustive search with exact probabilities.
pub fn solve_instance(inst: &ProblemInstance, limits: &Limits) -> Result<InstanceAnswer> {
    inst.validate()?;
    let f = &inst.formula;
    let (answer, witness, probability) = match inst.kind {
        ProblemKind::EMajSat => {
            let a = solve_emajsat(f, inst.k, limits)?;
            (yes_no(a.yes), a.prefix.map(|p| p.to_string()), a.probability)
        }
        ProblemKind::Ip1 => {
            let a = solve_ip1(f, inst.point()?, inst.k, limits)?;
            (yes_no(a.yes), a.witness.map(|s| s.to_string()), a.probability)
        }
        ProblemKind::Ip2 => {
            let a = solve_ip2(f, inst.point()?, inst.k, inst.delta_value()?, limits)?;
            (yes_no(a.yes), a.witness.map(|s| s.to_string()), a.probability)
        }
        ProblemKind::Ip3 => {
            let gamma = inst.gamma.as_ref().expect("validated");
            let m = inst.m.expect("validated");
            let a = solve_ip3(f, inst.point()?, inst.k, m, inst.delta_value()?, gamma, limits)?;
            (a.answer, a.witness.map(|s| s.to_string()), a.probability)
        }
        ProblemKind::RelevantInput => {
            let r = decide_relevant_input_with(f, inst.point()?, inst.k, inst.delta_value()?, limits)?;
            (yes_no(r.witness.is_some()), r.witness.map(|s| s.to_string()), r.probability)
        }
        ProblemKind::Sat => {
            let p = Counter::new(limits).satisfaction(f)?;
            (yes_no(!p.is_zero()), None, Some(p))
        }
    };
    Ok(InstanceAnswer {
        kind: inst.kind,
        answer,
        witness,
        probability,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationStatus {
    /// Both answers agree.
    Pass,
    Fail,
    /// An answer fell in a promise gap, so there is nothing to compare.
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub source: InstanceAnswer,
    pub reduced: InstanceAnswer,
    pub status: VerificationStatus,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == VerificationStatus::Pass
    }
}

fn follows(source: ProblemKind) -> Option<ProblemKind> {
    match source {
        ProblemKind::EMajSat => Some(ProblemKind::Ip1),
        ProblemKind::Ip1 => Some(ProblemKind::Ip2),
        ProblemKind::Ip2 => Some(ProblemKind::RelevantInput),
        ProblemKind::Sat => Some(ProblemKind::Ip3),
        ProblemKind::Ip3 | ProblemKind::RelevantInput => None,
    }
}

/// Solves both instances exactly and checks that the Yes/No answers agree.
pub fn verify_reduction(
    source: &ProblemInstance,
    reduced: &ProblemInstance,
    limits: &Limits,
) -> Result<VerificationReport> {
    if follows(source.kind) != Some(reduced.kind) {
        return Err(Error::KindMismatch {
            source_kind: source.kind.to_string(),
            reduced_kind: reduced.kind.to_string(),
        });
    }
    let s = solve_instance(source, limits)?;
    let r = solve_instance(reduced, limits)?;
    let status = if s.answer == GapAnswer::Indeterminate || r.answer == GapAnswer::Indeterminate {
        VerificationStatus::Skipped
    } else if s.answer == r.answer {
        VerificationStatus::Pass
    } else {
        VerificationStatus::Fail
    };
    Ok(VerificationReport {
        source: s,
        reduced: r,
        status,
    })
}
