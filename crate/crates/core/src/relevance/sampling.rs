//! Monte-Carlo relevance test with a probability gap.
//!
//! A run draws `n = ⌈2 ln 3 / γ²⌉` uniform completions of `x_S`, counts how
//! many keep the value `f(x)`, and answers No iff the fraction `ξ` is below
//! `δ − γ/2`. By Hoeffding's inequality each run errs with probability at most
//! 1/3 when the true probability is `≥ δ` or `< δ − γ`.
//!
//! Randomness comes from ChaCha8 keyed by SHA-256 of the user seed and a
//! stream index. Within a run, sample `i` consumes one `bool` per free
//! variable in increasing index order before sample `i + 1` starts.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::Verdict;
use crate::error::{Error, Result};
use crate::formula::program::Program;
use crate::formula::{Assignment, Formula, SubsetMask};
use crate::rational::{int, Rational};

const MAX_SAMPLES: u64 = 1 << 40;

/// Number of samples `⌈2 ln 3 / γ²⌉` for a gap `γ > 0`.
pub fn sample_count(gamma: &Rational) -> Result<u64> {
    if gamma <= &Rational::zero() {
        return Err(Error::invalid("gamma", "sampling needs a gap gamma > 0"));
    }
    let g = crate::rational::rational_to_f64(gamma);
    let n = (2.0 * 3f64.ln() / (g * g)).ceil();
    if !n.is_finite() || n > MAX_SAMPLES as f64 {
        return Err(Error::cap("sample count", n.min(u64::MAX as f64) as u64, MAX_SAMPLES));
    }
    Ok(n as u64)
}

/// Derives a 64-bit seed for a named sub-stream of `seed`.
pub(crate) fn sub_seed(seed: u64, tag: &str, indices: &[u64]) -> u64 {
    let digest = hash(seed, tag, indices);
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn hash(seed: u64, tag: &str, indices: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    for i in indices {
        h.update(i.to_le_bytes());
    }
    h.finalize().into()
}

fn stream(seed: u64, round: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(hash(seed, "round", &[round]))
}

/// Result of a single sampling run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub verdict: Verdict,
    /// Samples whose value agreed with `f(x)`.
    pub agreeing: u64,
    pub samples: u64,
    /// `ξ = agreeing / samples`.
    pub estimate: f64,
}

/// Majority vote over independent runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplifiedOutcome {
    pub verdict: Verdict,
    pub rounds: u32,
    pub yes_votes: u32,
    pub runs: Vec<SampleOutcome>,
}

/// A formula and assignment prepared for repeated sampling.
pub(crate) struct Sampler {
    program: Program,
    x: Assignment,
    fx: bool,
}

impl Sampler {
    pub fn new(f: &Formula, x: &Assignment) -> Result<Self> {
        let fx = f.evaluate(x)?;
        Ok(Sampler {
            program: Program::from_expr(f.root(), f.arity()),
            x: x.clone(),
            fx,
        })
    }

    /// Counts agreeing samples among `n` drawn from stream `round` of `seed`.
    pub fn count_agreeing(&self, s: &SubsetMask, n: u64, seed: u64, round: u64) -> Result<u64> {
        let d = self.x.len();
        s.expect_universe(d)?;
        let free: Vec<usize> = (0..d).filter(|&p| !s.contains_pos(p)).collect();
        let mut rng = stream(seed, round);
        let mut inputs: Vec<u64> = (0..d).map(|p| if self.x.get(p) { !0 } else { 0 }).collect();
        let mut regs = Vec::new();
        let mut agreeing = 0u64;
        let mut done = 0u64;
        while done < n {
            let block = (n - done).min(64);
            for &p in &free {
                inputs[p] = 0;
            }
            for j in 0..block {
                for &p in &free {
                    if rng.gen::<bool>() {
                        inputs[p] |= 1 << j;
                    }
                }
            }
            let out = self.program.eval_word(&inputs, &mut regs);
            let agree = if self.fx { out } else { !out };
            let valid = if block == 64 { !0 } else { (1u64 << block) - 1 };
            agreeing += u64::from((agree & valid).count_ones());
            done += block;
        }
        Ok(agreeing)
    }

    pub fn run(
        &self,
        s: &SubsetMask,
        delta: &Rational,
        gamma: &Rational,
        seed: u64,
        round: u64,
    ) -> Result<SampleOutcome> {
        let n = sample_count(gamma)?;
        let agreeing = self.count_agreeing(s, n, seed, round)?;
        let xi = Rational::new(BigInt::from(agreeing), BigInt::from(n));
        let threshold = delta - gamma / int(2);
        let verdict = if xi < threshold { Verdict::No } else { Verdict::Yes };
        Ok(SampleOutcome {
            verdict,
            agreeing,
            samples: n,
            estimate: agreeing as f64 / n as f64,
        })
    }

    pub fn amplified(
        &self,
        s: &SubsetMask,
        delta: &Rational,
        gamma: &Rational,
        seed: u64,
        rounds: u32,
    ) -> Result<AmplifiedOutcome> {
        check_rounds(rounds)?;
        let runs = (0..rounds)
            .map(|r| self.run(s, delta, gamma, seed, u64::from(r)))
            .collect::<Result<Vec<_>>>()?;
        let yes_votes = runs.iter().filter(|o| o.verdict == Verdict::Yes).count() as u32;
        let verdict = if yes_votes > rounds / 2 { Verdict::Yes } else { Verdict::No };
        Ok(AmplifiedOutcome {
            verdict,
            rounds,
            yes_votes,
            runs,
        })
    }
}

fn check_rounds(rounds: u32) -> Result<()> {
    if rounds.is_multiple_of(2) {
        return Err(Error::invalid("rounds", format!("{rounds} is not odd")));
    }
    Ok(())
}

/// One sampling run for the set `s`.
pub fn sample_relevance(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
    delta: &Rational,
    gamma: &Rational,
    seed: u64,
) -> Result<SampleOutcome> {
    super::check_delta(delta)?;
    super::check_gamma(delta, gamma)?;
    Sampler::new(f, x)?.run(s, delta, gamma, seed, 0)
}

/// Majority of `rounds` (odd) independent runs. Round 0 is the run made by
/// [`sample_relevance`] with the same seed.
pub fn amplified_sample_relevance(
    f: &Formula,
    x: &Assignment,
    s: &SubsetMask,
    delta: &Rational,
    gamma: &Rational,
    seed: u64,
    rounds: u32,
) -> Result<AmplifiedOutcome> {
    super::check_delta(delta)?;
    super::check_gamma(delta, gamma)?;
    check_rounds(rounds)?;
    Sampler::new(f, x)?.amplified(s, delta, gamma, seed, rounds)
}
