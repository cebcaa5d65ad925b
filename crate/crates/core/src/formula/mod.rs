//! Boolean formulas over variables `x1..xd`: syntax, evaluation, truth tables
//! and compilation to ReLU networks.

mod bits;
mod parse;
pub(crate) mod program;
mod relu;

use std::collections::BTreeSet;
use std::fmt;

pub use bits::{Assignment, BitVec, SubsetMask};
pub use parse::parse;
pub use relu::{ReluLayer, ReluNetwork};

use crate::error::{Error, Result};
use program::Program;

/// Expression node. Variables are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(u32),
    Const(bool),
    Not(Box<Expr>),
    /// Conjunction of two or more operands.
    And(Vec<Expr>),
    /// Disjunction of two or more operands.
    Or(Vec<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(i: u32) -> Expr {
        assert!(i >= 1, "variables are 1-based");
        Expr::Var(i)
    }

    pub fn constant(value: bool) -> Expr {
        Expr::Const(value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Conjunction; an empty list is `1` and a single operand is returned as is.
    pub fn and(mut operands: Vec<Expr>) -> Expr {
        match operands.len() {
            0 => Expr::Const(true),
            1 => operands.pop().unwrap(),
            _ => Expr::And(operands),
        }
    }

    /// Disjunction; an empty list is `0` and a single operand is returned as is.
    pub fn or(mut operands: Vec<Expr>) -> Expr {
        match operands.len() {
            0 => Expr::Const(false),
            1 => operands.pop().unwrap(),
            _ => Expr::Or(operands),
        }
    }

    pub fn xor(a: Expr, b: Expr) -> Expr {
        Expr::Xor(Box::new(a), Box::new(b))
    }

    /// Left-associated XOR chain; empty is `0`.
    pub fn xor_all(operands: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = operands.into_iter();
        let Some(first) = it.next() else {
            return Expr::Const(false);
        };
        it.fold(first, Expr::xor)
    }

    pub fn max_var(&self) -> u32 {
        match self {
            Expr::Var(i) => *i,
            Expr::Const(_) => 0,
            Expr::Not(e) => e.max_var(),
            Expr::And(es) | Expr::Or(es) => es.iter().map(Expr::max_var).max().unwrap_or(0),
            Expr::Xor(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            Expr::Var(i) => {
                out.insert(*i);
            }
            Expr::Const(_) => {}
            Expr::Not(e) => e.collect_vars(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect_vars(out)),
            Expr::Xor(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Not(e) => 1 + e.size(),
            Expr::And(es) | Expr::Or(es) => 1 + es.iter().map(Expr::size).sum::<usize>(),
            Expr::Xor(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Replaces every variable `x_i` by `f(i)`.
    pub fn substitute(&self, f: &impl Fn(u32) -> Expr) -> Expr {
        match self {
            Expr::Var(i) => f(*i),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Not(e) => Expr::not(e.substitute(f)),
            Expr::And(es) => Expr::And(es.iter().map(|e| e.substitute(f)).collect()),
            Expr::Or(es) => Expr::Or(es.iter().map(|e| e.substitute(f)).collect()),
            Expr::Xor(a, b) => Expr::xor(a.substitute(f), b.substitute(f)),
        }
    }

    /// Renames `x_i` to `x_{i+offset}`.
    pub fn shifted(&self, offset: u32) -> Expr {
        self.substitute(&|i| Expr::Var(i + offset))
    }

    /// Evaluates on a 0-based slice of variable values.
    pub fn eval(&self, values: &[bool]) -> bool {
        match self {
            Expr::Var(i) => values[*i as usize - 1],
            Expr::Const(c) => *c,
            Expr::Not(e) => !e.eval(values),
            Expr::And(es) => es.iter().all(|e| e.eval(values)),
            Expr::Or(es) => es.iter().any(|e| e.eval(values)),
            Expr::Xor(a, b) => a.eval(values) ^ b.eval(values),
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Const(_) => true,
            Expr::Not(_) | Expr::Xor(..) => false,
            Expr::And(es) | Expr::Or(es) => es.iter().all(Expr::is_monotone),
        }
    }

    fn check_shape(&self) -> Result<()> {
        match self {
            Expr::Var(0) => Err(Error::invalid("formula", "variable index 0")),
            Expr::Var(_) | Expr::Const(_) => Ok(()),
            Expr::Not(e) => e.check_shape(),
            Expr::And(es) | Expr::Or(es) => {
                if es.len() < 2 {
                    return Err(Error::invalid("formula", "AND/OR need at least two operands"));
                }
                es.iter().try_for_each(Expr::check_shape)
            }
            Expr::Xor(a, b) => {
                a.check_shape()?;
                b.check_shape()
            }
        }
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Expr::Var(i) => {
                out.push('x');
                out.push_str(&i.to_string());
            }
            Expr::Const(c) => out.push(if *c { '1' } else { '0' }),
            Expr::Not(e) => {
                out.push('!');
                e.render_into(out);
            }
            Expr::And(es) => render_list(es, " & ", out),
            Expr::Or(es) => render_list(es, " | ", out),
            Expr::Xor(a, b) => {
                out.push('(');
                a.render_into(out);
                out.push_str(" ^ ");
                b.render_into(out);
                out.push(')');
            }
        }
    }
}

fn render_list(es: &[Expr], sep: &str, out: &mut String) {
    out.push('(');
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        e.render_into(out);
    }
    out.push(')');
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_into(&mut s);
        f.write_str(&s)
    }
}

/// A Boolean function `{0,1}^d → {0,1}` given by an expression and an arity.
///
/// The arity may exceed the largest variable index that occurs, so a formula
/// can ignore some of its inputs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula {
    root: Expr,
    arity: usize,
}

impl Formula {
    /// Formula whose arity is the largest variable index in `root`.
    pub fn new(root: Expr) -> Result<Self> {
        let arity = root.max_var() as usize;
        Formula::with_arity(root, arity)
    }

    pub fn with_arity(root: Expr, arity: usize) -> Result<Self> {
        root.check_shape()?;
        let max = root.max_var() as usize;
        if max > arity {
            return Err(Error::invalid(
                "arity",
                format!("formula mentions x{max} but arity is {arity}"),
            ));
        }
        Ok(Formula { root, arity })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Formula::new(parse(text)?)
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn into_root(self) -> Expr {
        self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Fully parenthesised text form, accepted back by [`Formula::parse`].
    pub fn render(&self) -> String {
        self.root.to_string()
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.root.collect_vars(&mut out);
        out
    }

    pub fn is_monotone(&self) -> bool {
        self.root.is_monotone()
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool> {
        a.expect_len(self.arity)?;
        Ok(self.root.eval(&a.to_bools()))
    }

    /// Truth table of length `2^d`; bit `j` is the value at the assignment
    /// whose variable `x_{i+1}` is bit `i` of `j`.
    pub fn truth_table(&self, cap: usize) -> Result<BitVec> {
        if self.arity > cap {
            return Err(Error::cap("arity for truth-table enumeration", self.arity, cap));
        }
        Ok(Program::from_expr(&self.root, self.arity).truth_table())
    }

    pub fn count_models(&self, cap: usize) -> Result<u64> {
        if self.arity > cap {
            return Err(Error::cap("arity for truth-table enumeration", self.arity, cap));
        }
        Ok(Program::from_expr(&self.root, self.arity).count_models())
    }

    pub fn compile_to_relu(&self) -> ReluNetwork {
        ReluNetwork::compile(self)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running_example() -> Formula {
        Formula::parse("(x1 & x2) | !x3").unwrap()
    }

    /// Independent oracle: per-assignment evaluation.
    fn naive_count(f: &Formula) -> u64 {
        (0..1u64 << f.arity())
            .filter(|&j| f.evaluate(&Assignment::from_index(f.arity(), j)).unwrap())
            .count() as u64
    }

    #[test]
    fn running_example_shape_and_values() {
        let f = running_example();
        assert_eq!(f.arity(), 3);
        assert!(f.evaluate(&Assignment::parse("110").unwrap()).unwrap());
        assert!(!f.evaluate(&Assignment::parse("011").unwrap()).unwrap());
        let table = f.truth_table(26).unwrap();
        assert_eq!(table.len(), 8);
        assert_eq!(table.count_ones(), 5);
    }

    #[test]
    fn trivial_tables() {
        let f = Formula::with_arity(Expr::Const(false), 3).unwrap();
        let t = f.truth_table(26).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.count_ones(), 0);
        let id = Formula::parse("x1").unwrap();
        let t = id.truth_table(26).unwrap();
        assert_eq!(t.iter().collect::<Vec<_>>(), vec![false, true]);
        let z = Formula::parse("x1 ^ x1").unwrap();
        assert_eq!(z.truth_table(26).unwrap().count_ones(), 0);
        let one = Formula::with_arity(Expr::Const(true), 4).unwrap();
        assert!(one.evaluate(&Assignment::zeros(4)).unwrap());
    }

    #[test]
    fn arity_mismatch_and_cap() {
        let f = running_example();
        assert!(matches!(
            f.evaluate(&Assignment::parse("11").unwrap()),
            Err(Error::ArityMismatch { expected: 3, found: 2 })
        ));
        let wide = Formula::parse("x30").unwrap();
        assert!(matches!(wide.truth_table(26), Err(Error::CapExceeded { cap: 26, .. })));
        assert!(Formula::with_arity(Expr::Var(5), 4).is_err());
    }

    #[test]
    fn word_boundaries() {
        // Variables above x6 select whole words of the table.
        let f = Formula::parse("x7 & !x1 | x8 & x3").unwrap();
        assert_eq!(f.truth_table(26).unwrap().count_ones(), naive_count(&f));
    }

    #[test]
    fn substitution_and_shift() {
        let f = running_example();
        let g = f.root().shifted(2);
        assert_eq!(g.to_string(), "((x3 & x4) | !x5)");
        let h = f.root().substitute(&|i| if i == 3 { Expr::Const(true) } else { Expr::Var(i) });
        let h = Formula::with_arity(h, 3).unwrap();
        assert_eq!(h.truth_table(26).unwrap().count_ones(), 2);
    }

    #[test]
    fn render_is_fully_parenthesised() {
        let f = Formula::parse("x1 | x2 & !x3 ^ x4").unwrap();
        assert_eq!(f.render(), "(x1 | ((x2 & !x3) ^ x4))");
    }
}
