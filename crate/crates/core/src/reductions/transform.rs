//! The four instance transformers.

use num_bigint::BigInt;

use super::instance::{check_chain_delta, check_open_delta_gamma, layout, ProblemInstance, ProblemKind};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Expr, Formula};
use crate::gadgets::{raise_probability_gadget, ThresholdGadget};
use crate::rational::{ceil_log2, floor_log2, Rational};

/// Largest reduced arity the transformers will build.
const MAX_REDUCED_ARITY: usize = 1 << 20;

fn checked_arity(d: usize) -> Result<usize> {
    if d > MAX_REDUCED_ARITY {
        return Err(Error::cap("reduced arity", d, MAX_REDUCED_ARITY));
    }
    Ok(d)
}

fn ensure_true_at_point(f: &Formula, x: &Assignment, step: &str) -> Result<()> {
    if !f.evaluate(x)? {
        return Err(Error::Construction(format!("{step}: the reduced formula is 0 at the constructed point")));
    }
    Ok(())
}

fn bits(len: usize, value: bool) -> Assignment {
    if value {
        Assignment::ones(len)
    } else {
        Assignment::zeros(len)
    }
}

/// E-Maj-Sat to IP1 by duplicating the prefix variables.
///
/// `f'(u, v, r, t) = f(u, r) ⊕ ((⋁ u_i ⊕ v_i) ∧ t)` at `x' = (0_k, 1_k, 0, 0)`
/// with `k' = 2k`. Fixing `u_i` plays the role of assigning 0 to `x_i` and
/// fixing `v_i` that of assigning 1.
pub fn reduce_emajsat_to_ip1(source: &ProblemInstance) -> Result<ProblemInstance> {
    source.expect_kind(ProblemKind::EMajSat)?;
    source.validate()?;
    let (d, k) = (source.arity(), source.k);
    let kk = k as u32;
    let arity = checked_arity(d + k + 1)?;
    let host = source.formula.root().substitute(&|i| Expr::Var(if i <= kk { i } else { i + kk }));
    let differs = Expr::or((1..=kk).map(|i| Expr::xor(Expr::Var(i), Expr::Var(i + kk))).collect());
    let t = Expr::Var(arity as u32);
    let root = Expr::xor(host, Expr::and(vec![differs, t]));
    let x = Assignment::concat(&[&bits(k, false), &bits(k, true), &bits(d - k, false), &bits(1, false)]);
    let mut inst = ProblemInstance::ip1(Formula::with_arity(root, arity)?, x, 2 * k)?;
    inst.layout = layout(&[("u", k), ("v", k), ("r", d - k), ("t", 1)]);
    inst.validate()?;
    Ok(inst)
}

/// The IP2 instance together with the gadget it embeds.
#[derive(Clone, Debug)]
pub struct Ip2Reduction {
    pub instance: ProblemInstance,
    pub gadget: ThresholdGadget,
}

/// IP1 to IP2 at threshold `δ ∈ [1/2, 1)`.
///
/// `f'(y, t, r) = (f(y) ∧ t) ∨ Π(r)` at `x' = (x, 1, 1_n)`, where `Π` maps
/// `P(f ∧ t) > 1/4` to `P(f') ≥ δ` for hosts of arity `d + 1`.
pub fn reduce_ip1_to_ip2(source: &ProblemInstance, delta: &Rational) -> Result<Ip2Reduction> {
    source.expect_kind(ProblemKind::Ip1)?;
    source.validate()?;
    check_chain_delta(delta)?;
    let d = source.arity();
    let quarter = Rational::new(BigInt::from(1), BigInt::from(4));
    let gadget = raise_probability_gadget(d + 1, &quarter, delta)?;
    let n = gadget.gadget.n;
    let arity = checked_arity(d + 1 + n)?;
    let t = Expr::Var(d as u32 + 1);
    let host = Formula::with_arity(Expr::and(vec![source.formula.root().clone(), t]), d + 1)?;
    let f = gadget.attach(&host)?;
    debug_assert_eq!(f.arity(), arity);
    let x = Assignment::concat(&[source.point()?, &bits(1, true), &bits(n, true)]);
    ensure_true_at_point(&f, &x, "ip1 to ip2")?;
    let mut inst = ProblemInstance::ip2(f, x, source.k, delta.clone())?;
    inst.layout = layout(&[("y", d), ("t", 1), ("gadget", n)]);
    inst.validate()?;
    Ok(Ip2Reduction { instance: inst, gadget })
}

/// IP2 to Relevant-Input at the instance's `δ ∈ [1/2, 1)`.
///
/// `f'(u, v, r1, r2, r3) = (f(u, r1 ⊕ r2 ⊕ r3) ⊕ ¬f(x)) ∧ ⋀((u_i ⊕ ¬x_i) ∨ v_i)`
/// at `x' = (x_[k], 1_k, x_rest, x_rest, x_rest)`. The clauses make any small
/// relevant set choose, for each `i ≤ k`, either `u_i` or `v_i`, and the
/// tripled rest makes its variables too expensive to fix.
pub fn reduce_ip2_to_relevant_input(source: &ProblemInstance) -> Result<ProblemInstance> {
    source.expect_kind(ProblemKind::Ip2)?;
    source.validate()?;
    let delta = source.delta_value()?;
    check_chain_delta(delta)?;
    let (d, k) = (source.arity(), source.k);
    let rest = d - k;
    let arity = checked_arity(2 * k + 3 * rest)?;
    let x = source.point()?;
    let (kk, rr) = (k as u32, rest as u32);
    let host = source.formula.root().substitute(&|i| {
        if i <= kk {
            Expr::Var(i)
        } else {
            let j = i - kk;
            Expr::xor_all([2 * kk + j, 2 * kk + rr + j, 2 * kk + 2 * rr + j].map(Expr::Var))
        }
    });
    let host = if source.formula.evaluate(x)? { host } else { Expr::not(host) };
    let mut parts = vec![host];
    for i in 1..=kk {
        // u_i ⊕ ¬x_i is the literal "u_i = x_i"
        let u = if x.var(i) { Expr::Var(i) } else { Expr::not(Expr::Var(i)) };
        parts.push(Expr::or(vec![u, Expr::Var(kk + i)]));
    }
    let f = Formula::with_arity(Expr::and(parts), arity)?;
    let tail: Vec<bool> = (k..d).map(|p| x.get(p)).collect();
    let tail = Assignment::from_bools(&tail);
    let head = Assignment::from_bools(&(0..k).map(|p| x.get(p)).collect::<Vec<_>>());
    let xp = Assignment::concat(&[&head, &bits(k, true), &tail, &tail, &tail]);
    ensure_true_at_point(&f, &xp, "ip2 to relevant input")?;
    let mut inst = ProblemInstance::relevant_input(f, xp, k, delta.clone())?;
    inst.layout = layout(&[("u", k), ("v", k), ("r1", rest), ("r2", rest), ("r3", rest)]);
    inst.validate()?;
    Ok(inst)
}

/// Block sizes of the SAT to IP3 construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SatIp3Sizes {
    /// Copies of the input variables.
    pub q: usize,
    /// Extra conjunction width beyond `m'`.
    pub p: usize,
    pub k: usize,
    pub m: usize,
}

/// `q = ⌈log2(d/(1−δ))⌉`, `p = ⌊log2(1/(δ−γ))⌋ + 1`.
pub fn sat_ip3_sizes(d: usize, delta: &Rational, gamma: &Rational, m: Option<usize>) -> Result<SatIp3Sizes> {
    check_open_delta_gamma(delta, gamma)?;
    if d == 0 {
        return Err(Error::invalid("formula", "needs at least one variable"));
    }
    let one = Rational::from_integer(1.into());
    let q = ceil_log2(&(Rational::from_integer(d.into()) / (&one - delta)));
    let p = floor_log2(&(&one / (delta - gamma))) + 1;
    let q = usize::try_from(q).map_err(|_| Error::Construction(format!("copy count {q} is negative")))?;
    let p = usize::try_from(p).map_err(|_| Error::Construction(format!("width {p} is negative")))?;
    let k = d.checked_mul(q).ok_or_else(|| Error::cap("k'", usize::MAX, MAX_REDUCED_ARITY))?;
    let m = m.unwrap_or(k);
    if m < k {
        return Err(Error::invalid("m", format!("{m} is below k' = {k}")));
    }
    Ok(SatIp3Sizes { q, p, k, m })
}

/// SAT to IP3 with gap `γ`.
///
/// `f'(u^(1..q), v) = f(⋀_j u^(j)) ∨ ⋀_{m'+p} v` at the all-ones point, with
/// `k' = dq`. A satisfying assignment of `f` gives a δ-relevant set of size at
/// most `k'`; if `f` is unsatisfiable every set of size at most `m'` leaves at
/// least `p` variables of the conjunction free.
pub fn reduce_sat_to_ip3(
    source: &ProblemInstance,
    delta: &Rational,
    gamma: &Rational,
    m: Option<usize>,
) -> Result<(ProblemInstance, SatIp3Sizes)> {
    source.expect_kind(ProblemKind::Sat)?;
    source.validate()?;
    let d = source.arity();
    let sizes = sat_ip3_sizes(d, delta, gamma, m)?;
    let width = sizes.m + sizes.p;
    let arity = checked_arity(sizes.k + width)?;
    let (dd, q) = (d as u32, sizes.q as u32);
    let host = source
        .formula
        .root()
        .substitute(&|i| Expr::and((0..q).map(|j| Expr::Var(j * dd + i)).collect()));
    let start = sizes.k as u32;
    let conj = Expr::and((1..=width as u32).map(|i| Expr::Var(start + i)).collect());
    let f = Formula::with_arity(Expr::or(vec![host, conj]), arity)?;
    let x = Assignment::ones(arity);
    ensure_true_at_point(&f, &x, "sat to ip3")?;
    let mut inst = ProblemInstance::ip3(f, x, sizes.k, sizes.m, delta.clone(), gamma.clone())?;
    let names: Vec<String> = (1..=sizes.q).map(|j| format!("u{j}")).collect();
    let mut blocks: Vec<(&str, usize)> = names.iter().map(|n| (n.as_str(), d)).collect();
    blocks.push(("v", width));
    inst.layout = layout(&blocks);
    inst.validate()?;
    Ok((inst, sizes))
}
