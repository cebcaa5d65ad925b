//! Resolves formula, assignment and numeric parameters from flags and an
//! optional JSON query file, echoing the effective values.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::args::{Caps, Query};
use crate::Failure;
use relevance_core::rational::{format_rational, parse_rational};
use relevance_core::{Assignment, Formula, Limits, Rational, SubsetMask};

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct QueryFile {
    formula: Option<String>,
    arity: Option<usize>,
    x: Option<String>,
    s: Option<Value>,
    k: Option<usize>,
    m: Option<usize>,
    delta: Option<Value>,
    gamma: Option<Value>,
    seed: Option<u64>,
    rounds: Option<u32>,
}

pub fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: crate::EXIT_USAGE,
        reason: "io",
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// Rational from a JSON string or number; numbers are read from their
/// decimal text, so `0.95` is exactly 19/20.
fn rational_value(name: &str, v: &Value) -> Result<String, Failure> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(Failure::usage(format!("{name} must be a string or a number"))),
    }
}

fn subset_text(v: &Value) -> Result<String, Failure> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items.iter().map(|i| i.as_u64().map(|n| n.to_string())).collect();
            parts
                .map(|p| p.join(","))
                .ok_or_else(|| Failure::usage("s must list positive variable indices"))
        }
        _ => Err(Failure::usage("s must be a string or an array of indices")),
    }
}

pub struct Resolved {
    pub formula: Formula,
    pub x: Option<Assignment>,
    pub s: Option<SubsetMask>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub delta: Option<Rational>,
    pub gamma: Option<Rational>,
    pub seed: Option<u64>,
    pub rounds: Option<u32>,
}

impl Resolved {
    pub fn x(&self) -> Result<&Assignment, Failure> {
        self.x.as_ref().ok_or_else(|| Failure::usage("--x is required"))
    }

    pub fn s(&self) -> Result<&SubsetMask, Failure> {
        self.s.as_ref().ok_or_else(|| Failure::usage("--s is required"))
    }

    pub fn k(&self) -> Result<usize, Failure> {
        self.k.ok_or_else(|| Failure::usage("--k is required"))
    }

    pub fn delta(&self) -> Result<&Rational, Failure> {
        self.delta.as_ref().ok_or_else(|| Failure::usage("--delta is required"))
    }

    pub fn gamma(&self) -> Result<&Rational, Failure> {
        self.gamma.as_ref().ok_or_else(|| Failure::usage("--gamma is required"))
    }

    pub fn seed(&self) -> Result<u64, Failure> {
        self.seed.ok_or_else(|| Failure::usage("--seed is required for sampling"))
    }
}

/// Reads the query and echoes every value it finds into `params`.
pub fn resolve(q: &Query, params: &mut Map<String, Value>) -> Result<Resolved, Failure> {
    let file: QueryFile = match &q.input {
        Some(path) => {
            params.insert("input".into(), json!(path.display().to_string()));
            serde_json::from_str(&read_file(path)?).map_err(|e| Failure::usage(format!("bad query file: {e}")))?
        }
        None => QueryFile::default(),
    };
    let text = match (&q.formula, &file.formula) {
        (Some(_), Some(_)) => return Err(Failure::usage("give the formula either inline or in the input file, not both")),
        (Some(t), None) | (None, Some(t)) => t.clone(),
        (None, None) => return Err(Failure::usage("a formula is required (--formula or --input)")),
    };
    let root = relevance_core::formula::parse(&text)?;
    let arity = q.arity.or(file.arity).unwrap_or(root.max_var() as usize);
    let formula = Formula::with_arity(root, arity)?;
    params.insert("formula".into(), json!(formula.render()));
    params.insert("arity".into(), json!(arity));

    let x = match q.x.clone().or(file.x) {
        Some(bits) => {
            let x = Assignment::parse(&bits)?;
            if x.len() != arity {
                return Err(relevance_core::Error::ArityMismatch {
                    expected: arity,
                    found: x.len(),
                }
                .into());
            }
            params.insert("x".into(), json!(x.to_string()));
            Some(x)
        }
        None => None,
    };
    let s_text = match (&q.s, &file.s) {
        (Some(s), _) => Some(s.clone()),
        (None, Some(v)) => Some(subset_text(v)?),
        (None, None) => None,
    };
    let s = match s_text {
        Some(t) => {
            let s = SubsetMask::parse(arity, &t)?;
            params.insert("s".into(), json!(s.vars()));
            Some(s)
        }
        None => None,
    };
    let k = q.k.or(file.k);
    if let Some(k) = k {
        params.insert("k".into(), json!(k));
    }
    let m = file.m;
    if let Some(m) = m {
        params.insert("m".into(), json!(m));
    }
    let mut rational = |name: &'static str, flag: &Option<String>, field: &Option<Value>| -> Result<Option<Rational>, Failure> {
        let text = match (flag, field) {
            (Some(t), _) => Some(t.clone()),
            (None, Some(v)) => Some(rational_value(name, v)?),
            (None, None) => None,
        };
        match text {
            Some(t) => {
                let r = parse_rational(&t)?;
                params.insert(name.into(), json!(format_rational(&r)));
                Ok(Some(r))
            }
            None => Ok(None),
        }
    };
    let delta = rational("delta", &q.delta, &file.delta)?;
    let gamma = rational("gamma", &q.gamma, &file.gamma)?;
    let seed = q.seed.or(file.seed);
    if let Some(seed) = seed {
        params.insert("seed".into(), json!(seed));
    }
    let rounds = q.rounds.or(file.rounds);
    if let Some(r) = rounds {
        params.insert("rounds".into(), json!(r));
    }
    Ok(Resolved {
        formula,
        x,
        s,
        k,
        m,
        delta,
        gamma,
        seed,
        rounds,
    })
}

/// `base` with the overrides from flags or the environment, echoed.
pub fn limits(base: Limits, caps: &Caps, params: &mut Map<String, Value>) -> Limits {
    let mut l = base;
    if let Some(v) = caps.enum_cap {
        l.enum_cap = v;
    }
    if let Some(v) = caps.search_cap {
        l.search_arity_cap = v;
    }
    if let Some(v) = caps.candidate_budget {
        l.candidate_budget = v;
    }
    if let Some(v) = caps.branch_budget {
        l.branch_budget = v;
    }
    if let Some(v) = caps.characteristic_cap {
        l.characteristic_cap = v;
    }
    if let Some(v) = caps.shapley_cap {
        l.shapley_cap = v;
    }
    params.insert(
        "limits".into(),
        json!({
            "enum_cap": l.enum_cap,
            "search_arity_cap": l.search_arity_cap,
            "candidate_budget": l.candidate_budget,
            "branch_budget": l.branch_budget,
            "characteristic_cap": l.characteristic_cap,
            "shapley_cap": l.shapley_cap,
        }),
    );
    l
}

pub fn rational_arg(name: &'static str, text: &str, params: &mut Map<String, Value>) -> Result<Rational, Failure> {
    let r = parse_rational(text)?;
    params.insert(name.into(), json!(format_rational(&r)));
    Ok(r)
}
