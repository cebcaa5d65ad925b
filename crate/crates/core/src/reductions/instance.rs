//! Problem instances with named variable blocks.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::relevance::{check_delta, check_gamma, check_k};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Some assignment to `x1..xk` makes a strict majority of completions true.
    #[serde(rename = "emajsat")]
    EMajSat,
    /// Some `S ⊆ [k]` gives `P(f | y_S = x_S) > 1/2`.
    Ip1,
    /// Some `S ⊆ [k]` is δ-relevant.
    Ip2,
    /// Gapped: a δ-relevant set of size at most `k` (Yes) against no
    /// (δ−γ)-relevant set of size at most `m` (No).
    Ip3,
    /// Some set of size at most `k` is δ-relevant.
    RelevantInput,
    /// `f` is satisfiable.
    Sat,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::EMajSat => "emajsat",
            ProblemKind::Ip1 => "ip1",
            ProblemKind::Ip2 => "ip2",
            ProblemKind::Ip3 => "ip3",
            ProblemKind::RelevantInput => "relevant_input",
            ProblemKind::Sat => "sat",
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A named run of consecutive variables `x_start..x_{start+len-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

/// Consecutive blocks from `x1`, skipping empty ones.
pub(crate) fn layout(blocks: &[(&str, usize)]) -> Vec<Block> {
    let mut next = 1;
    let mut out = Vec::new();
    for &(name, len) in blocks {
        if len > 0 {
            out.push(Block {
                name: name.to_string(),
                start: next,
                len,
            });
        }
        next += len;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "InstanceRepr", try_from = "InstanceRepr")]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub formula: Formula,
    pub x: Option<Assignment>,
    /// Size bound (or prefix length); 0 for SAT.
    pub k: usize,
    pub m: Option<usize>,
    pub delta: Option<Rational>,
    pub gamma: Option<Rational>,
    pub layout: Vec<Block>,
}

impl ProblemInstance {
    fn plain(kind: ProblemKind, formula: Formula, x: Option<Assignment>, k: usize) -> Self {
        let layout = layout(&[("x", formula.arity())]);
        ProblemInstance {
            kind,
            formula,
            x,
            k,
            m: None,
            delta: None,
            gamma: None,
            layout,
        }
    }

    pub fn emajsat(formula: Formula, k: usize) -> Result<Self> {
        let d = formula.arity();
        let mut inst = Self::plain(ProblemKind::EMajSat, formula, None, k);
        inst.layout = layout(&[("u", k.min(d)), ("r", d.saturating_sub(k))]);
        inst.validated()
    }

    pub fn ip1(formula: Formula, x: Assignment, k: usize) -> Result<Self> {
        Self::plain(ProblemKind::Ip1, formula, Some(x), k).validated()
    }

    pub fn ip2(formula: Formula, x: Assignment, k: usize, delta: Rational) -> Result<Self> {
        let mut inst = Self::plain(ProblemKind::Ip2, formula, Some(x), k);
        inst.delta = Some(delta);
        inst.validated()
    }

    pub fn ip3(
        formula: Formula,
        x: Assignment,
        k: usize,
        m: usize,
        delta: Rational,
        gamma: Rational,
    ) -> Result<Self> {
        let mut inst = Self::plain(ProblemKind::Ip3, formula, Some(x), k);
        inst.m = Some(m);
        inst.delta = Some(delta);
        inst.gamma = Some(gamma);
        inst.validated()
    }

    pub fn relevant_input(formula: Formula, x: Assignment, k: usize, delta: Rational) -> Result<Self> {
        let mut inst = Self::plain(ProblemKind::RelevantInput, formula, Some(x), k);
        inst.delta = Some(delta);
        inst.validated()
    }

    pub fn sat(formula: Formula) -> Result<Self> {
        Self::plain(ProblemKind::Sat, formula, None, 0).validated()
    }

    pub fn arity(&self) -> usize {
        self.formula.arity()
    }

    /// The instance's point `x`; only SAT and E-Maj-Sat have none.
    pub fn point(&self) -> Result<&Assignment> {
        self.x
            .as_ref()
            .ok_or_else(|| Error::invalid("x", format!("a {} instance has no point", self.kind)))
    }

    pub fn delta_value(&self) -> Result<&Rational> {
        self.delta
            .as_ref()
            .ok_or_else(|| Error::invalid("delta", format!("a {} instance has no delta", self.kind)))
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.layout.iter().find(|b| b.name == name)
    }

    pub(crate) fn expect_kind(&self, kind: ProblemKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::invalid(
                "instance",
                format!("expected a {kind} instance, got {}", self.kind),
            ));
        }
        Ok(())
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the fields required by the kind and the layout partition.
    pub fn validate(&self) -> Result<()> {
        use ProblemKind::*;
        let d = self.arity();
        let needs_x = !matches!(self.kind, EMajSat | Sat);
        match (&self.x, needs_x) {
            (Some(x), true) => x.expect_len(d)?,
            (None, true) => return Err(Error::invalid("x", format!("a {} instance needs x", self.kind))),
            (Some(_), false) => {
                return Err(Error::invalid("x", format!("a {} instance takes no x", self.kind)))
            }
            (None, false) => {}
        }
        if self.kind == Sat {
            if self.k != 0 {
                return Err(Error::invalid("k", "a sat instance takes no k"));
            }
        } else {
            check_k(self.k, d, false)?;
        }
        let needs_delta = matches!(self.kind, Ip2 | Ip3 | RelevantInput);
        match (&self.delta, needs_delta) {
            (Some(delta), true) => check_delta(delta)?,
            (None, true) => {
                return Err(Error::invalid("delta", format!("a {} instance needs delta", self.kind)))
            }
            (Some(_), false) => {
                return Err(Error::invalid("delta", format!("a {} instance takes no delta", self.kind)))
            }
            (None, false) => {}
        }
        if self.kind == Ip3 {
            let (Some(gamma), Some(m)) = (&self.gamma, self.m) else {
                return Err(Error::invalid("ip3", "an ip3 instance needs gamma and m"));
            };
            check_gamma(self.delta.as_ref().expect("checked above"), gamma)?;
            if m < self.k || m > d {
                return Err(Error::invalid("m", format!("{m} is outside {}..={d}", self.k)));
            }
        } else if self.gamma.is_some() || self.m.is_some() {
            return Err(Error::invalid("ip3", format!("a {} instance takes no gamma or m", self.kind)));
        }
        let mut next = 1;
        for b in &self.layout {
            if b.start != next || b.len == 0 {
                return Err(Error::invalid(
                    "layout",
                    format!("block {} does not continue at x{next}", b.name),
                ));
            }
            next += b.len;
        }
        if next != d + 1 {
            return Err(Error::invalid(
                "layout",
                format!("blocks cover {} of {d} variables", next - 1),
            ));
        }
        Ok(())
    }
}

/// File form: formulas as text, rationals as `p/q` strings.
#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    kind: ProblemKind,
    formula: String,
    arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<Assignment>,
    #[serde(default)]
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<String>,
    #[serde(default)]
    layout: Vec<Block>,
}

impl From<ProblemInstance> for InstanceRepr {
    fn from(p: ProblemInstance) -> Self {
        InstanceRepr {
            kind: p.kind,
            formula: p.formula.render(),
            arity: p.formula.arity(),
            x: p.x,
            k: p.k,
            m: p.m,
            delta: p.delta.as_ref().map(format_rational),
            gamma: p.gamma.as_ref().map(format_rational),
            layout: p.layout,
        }
    }
}

impl TryFrom<InstanceRepr> for ProblemInstance {
    type Error = Error;

    fn try_from(r: InstanceRepr) -> Result<Self> {
        let root = crate::formula::parse(&r.formula)?;
        let formula = Formula::with_arity(root, r.arity)?;
        let layout = if r.layout.is_empty() {
            layout(&[("x", r.arity)])
        } else {
            r.layout
        };
        let inst = ProblemInstance {
            kind: r.kind,
            formula,
            x: r.x,
            k: r.k,
            m: r.m,
            delta: r.delta.as_deref().map(parse_rational).transpose()?,
            gamma: r.gamma.as_deref().map(parse_rational).transpose()?,
            layout,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// `δ ∈ [1/2, 1)`, the range where the chain's reductions apply.
pub(crate) fn check_chain_delta(delta: &Rational) -> Result<()> {
    let half = Rational::new(1.into(), 2.into());
    if delta < &half || delta >= &Rational::one() {
        return Err(Error::invalid(
            "delta",
            format!("{} is outside [1/2, 1)", format_rational(delta)),
        ));
    }
    Ok(())
}

/// `δ ∈ (0, 1)` and `γ ∈ [0, δ)`.
pub(crate) fn check_open_delta_gamma(delta: &Rational, gamma: &Rational) -> Result<()> {
    if delta <= &Rational::zero() || delta >= &Rational::one() {
        return Err(Error::invalid(
            "delta",
            format!("{} is outside (0, 1)", format_rational(delta)),
        ));
    }
    check_gamma(delta, gamma)
}
