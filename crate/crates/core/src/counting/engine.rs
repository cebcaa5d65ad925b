//! Hash-consed formula arena with memoised restriction and probability.
//!
//! Nodes are normalised on construction: AND/OR are flattened, sorted,
//! deduplicated and collapse on complementary pairs; XOR is flattened with
//! negations and constants pulled into a parity bit and equal operands
//! cancelled. Two formulas that normalise to the same node id are equivalent,
//! which the symmetry detection of the subset search relies on.

use std::collections::HashMap;

use num_bigint::BigUint;

use super::DyadicProb;
use crate::error::{Error, Result};
use crate::formula::program::{Instr, Program};
use crate::formula::Expr;
use crate::limits::Limits;

pub(crate) type Id = u32;

pub(crate) const FALSE: Id = 0;
pub(crate) const TRUE: Id = 1;

/// Components up to this many variables are enumerated directly.
const DIRECT_ENUM: usize = 16;
/// Single components up to this many variables are enumerated rather than split.
const SPLIT_ENUM: usize = 20;
/// Arena size above which a fresh query starts from an empty arena.
const RESET_NODES: usize = 1 << 21;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    False,
    True,
    Var(u32),
    Not(Id),
    And(Box<[Id]>),
    Or(Box<[Id]>),
    Xor(Box<[Id]>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    And,
    Or,
    Xor,
}

struct NodeData {
    node: Node,
    support: Box<[u32]>,
}

pub(crate) struct Engine {
    nodes: Vec<NodeData>,
    table: HashMap<Node, Id>,
    prob_memo: HashMap<Id, DyadicProb>,
    restrict_memo: HashMap<(Id, u32, bool), Id>,
    enum_cap: usize,
    branch_budget: u64,
    branches: u64,
}

impl Engine {
    pub fn new(limits: &Limits) -> Self {
        let mut e = Engine {
            nodes: Vec::new(),
            table: HashMap::new(),
            prob_memo: HashMap::new(),
            restrict_memo: HashMap::new(),
            enum_cap: limits.enum_cap,
            branch_budget: limits.branch_budget,
            branches: 0,
        };
        e.reset();
        e
    }

    fn reset(&mut self) {
        self.nodes.clear();
        self.table.clear();
        self.prob_memo.clear();
        self.restrict_memo.clear();
        self.intern(Node::False, Box::new([]));
        self.intern(Node::True, Box::new([]));
    }

    /// Starts a new top-level query: resets the branch counter and drops the
    /// arena if it has grown too large. Ids from earlier queries are invalid
    /// afterwards only if a reset happened, so callers re-import formulas
    /// per query.
    pub fn begin_query(&mut self) {
        self.branches = 0;
        if self.nodes.len() > RESET_NODES {
            self.reset();
        }
    }

    fn intern(&mut self, node: Node, support: Box<[u32]>) -> Id {
        if let Some(&id) = self.table.get(&node) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(NodeData {
            node: node.clone(),
            support,
        });
        self.table.insert(node, id);
        id
    }

    pub fn support(&self, id: Id) -> &[u32] {
        &self.nodes[id as usize].support
    }

    fn node(&self, id: Id) -> &Node {
        &self.nodes[id as usize].node
    }

    fn merged_support(&self, children: &[Id]) -> Box<[u32]> {
        let mut vars: Vec<u32> = children
            .iter()
            .flat_map(|&c| self.support(c).iter().copied())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars.into_boxed_slice()
    }

    pub fn constant(&self, value: bool) -> Id {
        if value {
            TRUE
        } else {
            FALSE
        }
    }

    pub fn var(&mut self, v: u32) -> Id {
        self.intern(Node::Var(v), Box::new([v]))
    }

    pub fn not(&mut self, a: Id) -> Id {
        match *self.node(a) {
            Node::False => TRUE,
            Node::True => FALSE,
            Node::Not(b) => b,
            _ => {
                let support = self.support(a).into();
                self.intern(Node::Not(a), support)
            }
        }
    }

    pub fn and(&mut self, children: Vec<Id>) -> Id {
        self.and_or(children, true)
    }

    pub fn or(&mut self, children: Vec<Id>) -> Id {
        self.and_or(children, false)
    }

    /// Shared normalisation of AND (`is_and`) and OR.
    fn and_or(&mut self, children: Vec<Id>, is_and: bool) -> Id {
        let (unit, zero) = if is_and { (TRUE, FALSE) } else { (FALSE, TRUE) };
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            if c == unit {
                continue;
            }
            if c == zero {
                return zero;
            }
            match self.node(c) {
                Node::And(cs) if is_and => flat.extend_from_slice(cs),
                Node::Or(cs) if !is_and => flat.extend_from_slice(cs),
                _ => flat.push(c),
            }
        }
        flat.sort_unstable();
        flat.dedup();
        for &c in &flat {
            if let Node::Not(b) = *self.node(c) {
                if flat.binary_search(&b).is_ok() {
                    return zero;
                }
            }
        }
        match flat.len() {
            0 => unit,
            1 => flat[0],
            _ => {
                let support = self.merged_support(&flat);
                let node = if is_and {
                    Node::And(flat.into_boxed_slice())
                } else {
                    Node::Or(flat.into_boxed_slice())
                };
                self.intern(node, support)
            }
        }
    }

    pub fn xor(&mut self, children: Vec<Id>) -> Id {
        let mut parity = false;
        let mut flat = Vec::with_capacity(children.len());
        let mut stack = children;
        while let Some(c) = stack.pop() {
            match self.node(c) {
                Node::False => {}
                Node::True => parity = !parity,
                Node::Not(b) => {
                    parity = !parity;
                    stack.push(*b);
                }
                Node::Xor(cs) => flat.extend_from_slice(cs),
                _ => flat.push(c),
            }
        }
        flat.sort_unstable();
        let mut kept: Vec<Id> = Vec::with_capacity(flat.len());
        for c in flat {
            if kept.last() == Some(&c) {
                kept.pop();
            } else {
                kept.push(c);
            }
        }
        let base = match kept.len() {
            0 => FALSE,
            1 => kept[0],
            _ => {
                let support = self.merged_support(&kept);
                self.intern(Node::Xor(kept.into_boxed_slice()), support)
            }
        };
        if parity {
            self.not(base)
        } else {
            base
        }
    }

    pub fn op(&mut self, op: Op, children: Vec<Id>) -> Id {
        match op {
            Op::And => self.and(children),
            Op::Or => self.or(children),
            Op::Xor => self.xor(children),
        }
    }

    /// Imports an expression, replacing each variable `x_i` by `leaf(i)`.
    pub fn import(&mut self, e: &Expr, leaf: &mut impl FnMut(&mut Engine, u32) -> Id) -> Id {
        match e {
            Expr::Var(i) => leaf(self, *i),
            Expr::Const(c) => self.constant(*c),
            Expr::Not(a) => {
                let a = self.import(a, leaf);
                self.not(a)
            }
            Expr::And(es) => {
                let cs = es.iter().map(|e| self.import(e, leaf)).collect();
                self.and(cs)
            }
            Expr::Or(es) => {
                let cs = es.iter().map(|e| self.import(e, leaf)).collect();
                self.or(cs)
            }
            Expr::Xor(a, b) => {
                let a = self.import(a, leaf);
                let b = self.import(b, leaf);
                self.xor(vec![a, b])
            }
        }
    }

    /// Imports an expression unchanged.
    pub fn import_plain(&mut self, e: &Expr) -> Id {
        self.import(e, &mut |eng, i| eng.var(i))
    }

    /// Imports an expression with the variables in `fixed` replaced by constants.
    pub fn import_restricted(&mut self, e: &Expr, fixed: &impl Fn(u32) -> Option<bool>) -> Id {
        self.import(e, &mut |eng, i| match fixed(i) {
            Some(b) => eng.constant(b),
            None => eng.var(i),
        })
    }

    fn mentions(&self, id: Id, v: u32) -> bool {
        self.support(id).binary_search(&v).is_ok()
    }

    /// Cofactor of `id` with `x_v` set to `value`.
    pub fn restrict(&mut self, id: Id, v: u32, value: bool) -> Id {
        if !self.mentions(id, v) {
            return id;
        }
        if let Some(&r) = self.restrict_memo.get(&(id, v, value)) {
            return r;
        }
        let r = match self.node(id).clone() {
            Node::False | Node::True => id,
            Node::Var(_) => self.constant(value),
            Node::Not(a) => {
                let a = self.restrict(a, v, value);
                self.not(a)
            }
            Node::And(cs) => {
                let cs = cs.iter().map(|&c| self.restrict(c, v, value)).collect();
                self.and(cs)
            }
            Node::Or(cs) => {
                let cs = cs.iter().map(|&c| self.restrict(c, v, value)).collect();
                self.or(cs)
            }
            Node::Xor(cs) => {
                let cs = cs.iter().map(|&c| self.restrict(c, v, value)).collect();
                self.xor(cs)
            }
        };
        self.restrict_memo.insert((id, v, value), r);
        r
    }

    /// `id` with variables `a` and `b` exchanged.
    pub fn swap_vars(&mut self, id: Id, a: u32, b: u32) -> Id {
        let mut memo = HashMap::new();
        self.swap_rec(id, a, b, &mut memo)
    }

    fn swap_rec(&mut self, id: Id, a: u32, b: u32, memo: &mut HashMap<Id, Id>) -> Id {
        if !self.mentions(id, a) && !self.mentions(id, b) {
            return id;
        }
        if let Some(&r) = memo.get(&id) {
            return r;
        }
        let r = match self.node(id).clone() {
            Node::False | Node::True => id,
            Node::Var(v) => self.var(if v == a { b } else { a }),
            Node::Not(c) => {
                let c = self.swap_rec(c, a, b, memo);
                self.not(c)
            }
            Node::And(cs) => {
                let cs = cs.iter().map(|&c| self.swap_rec(c, a, b, memo)).collect();
                self.and(cs)
            }
            Node::Or(cs) => {
                let cs = cs.iter().map(|&c| self.swap_rec(c, a, b, memo)).collect();
                self.or(cs)
            }
            Node::Xor(cs) => {
                let cs = cs.iter().map(|&c| self.swap_rec(c, a, b, memo)).collect();
                self.xor(cs)
            }
        };
        memo.insert(id, r);
        r
    }

    /// `id` with `x_a` and `x_b` both negated.
    pub fn flip_pair(&mut self, id: Id, a: u32, b: u32) -> Id {
        let mut memo = HashMap::new();
        self.flip_rec(id, a, b, &mut memo)
    }

    fn flip_rec(&mut self, id: Id, a: u32, b: u32, memo: &mut HashMap<Id, Id>) -> Id {
        if !self.mentions(id, a) && !self.mentions(id, b) {
            return id;
        }
        if let Some(&r) = memo.get(&id) {
            return r;
        }
        let r = match self.node(id).clone() {
            Node::False | Node::True => id,
            Node::Var(_) => self.not(id),
            Node::Not(c) => {
                let c = self.flip_rec(c, a, b, memo);
                self.not(c)
            }
            Node::And(cs) => {
                let cs = cs.iter().map(|&c| self.flip_rec(c, a, b, memo)).collect();
                self.and(cs)
            }
            Node::Or(cs) => {
                let cs = cs.iter().map(|&c| self.flip_rec(c, a, b, memo)).collect();
                self.or(cs)
            }
            Node::Xor(cs) => {
                let cs = cs.iter().map(|&c| self.flip_rec(c, a, b, memo)).collect();
                self.xor(cs)
            }
        };
        memo.insert(id, r);
        r
    }

    /// Pairs of variables that occur together as direct operands of some XOR
    /// node below `id`, each pair once with the smaller variable first.
    pub fn xor_var_pairs(&self, id: Id) -> Vec<(u32, u32)> {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![id];
        let mut pairs = std::collections::BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            match self.node(n) {
                Node::Not(c) => stack.push(*c),
                Node::And(cs) | Node::Or(cs) => stack.extend_from_slice(cs),
                Node::Xor(cs) => {
                    stack.extend_from_slice(cs);
                    let vars: Vec<u32> = cs
                        .iter()
                        .filter_map(|&c| match self.node(c) {
                            Node::Var(v) => Some(*v),
                            _ => None,
                        })
                        .collect();
                    if vars.len() > 16 {
                        for w in vars.windows(2) {
                            pairs.insert((w[0].min(w[1]), w[0].max(w[1])));
                        }
                    } else {
                        for (i, &a) in vars.iter().enumerate() {
                            for &b in &vars[i + 1..] {
                                pairs.insert((a.min(b), a.max(b)));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        pairs.into_iter().collect()
    }

    /// Top-level operator and operands, if `id` is an AND/OR/XOR node.
    pub fn operands(&self, id: Id) -> Option<(Op, &[Id])> {
        match self.node(id) {
            Node::And(cs) => Some((Op::And, cs)),
            Node::Or(cs) => Some((Op::Or, cs)),
            Node::Xor(cs) => Some((Op::Xor, cs)),
            _ => None,
        }
    }

    pub fn negated(&self, id: Id) -> Option<Id> {
        match *self.node(id) {
            Node::Not(a) => Some(a),
            _ => None,
        }
    }

    /// Groups `children` into classes whose variable sets are pairwise
    /// disjoint across classes. Classes are ordered by their first child.
    pub fn independent_groups(&self, children: &[Id]) -> Vec<Vec<Id>> {
        let mut parent: Vec<usize> = (0..children.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut owner: HashMap<u32, usize> = HashMap::new();
        for (i, &c) in children.iter().enumerate() {
            for &v in self.support(c) {
                match owner.get(&v) {
                    Some(&j) => {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        if ri != rj {
                            parent[ri.max(rj)] = ri.min(rj);
                        }
                    }
                    None => {
                        owner.insert(v, i);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<Id>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for (i, &c) in children.iter().enumerate() {
            let r = find(&mut parent, i);
            let g = *slot.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(c);
        }
        groups
    }

    /// Exact probability that `id` is true under the uniform distribution.
    pub fn prob(&mut self, id: Id) -> Result<DyadicProb> {
        if let Some(p) = self.prob_memo.get(&id) {
            return Ok(p.clone());
        }
        let p = match self.node(id).clone() {
            Node::False => DyadicProb::zero(),
            Node::True => DyadicProb::one(),
            Node::Var(_) => DyadicProb::half(),
            Node::Not(a) => self.prob(a)?.complement(),
            Node::And(cs) => self.prob_op(id, Op::And, &cs)?,
            Node::Or(cs) => self.prob_op(id, Op::Or, &cs)?,
            Node::Xor(cs) => self.prob_op(id, Op::Xor, &cs)?,
        };
        self.prob_memo.insert(id, p.clone());
        Ok(p)
    }

    fn prob_op(&mut self, id: Id, op: Op, children: &[Id]) -> Result<DyadicProb> {
        let width = self.support(id).len();
        if width <= DIRECT_ENUM {
            return Ok(self.enumerate(id));
        }
        let groups = self.independent_groups(children);
        if groups.len() > 1 {
            let mut acc: Option<DyadicProb> = None;
            for g in groups {
                let part = self.op(op, g);
                let p = self.prob(part)?;
                acc = Some(match acc {
                    None => p,
                    Some(a) => combine(op, &a, &p),
                });
            }
            return Ok(acc.expect("at least two groups"));
        }
        if width <= SPLIT_ENUM {
            return Ok(self.enumerate(id));
        }
        self.branches += 1;
        if self.branches > self.branch_budget {
            if width <= self.enum_cap {
                return Ok(self.enumerate(id));
            }
            return Err(Error::Intractable(format!(
                "a component over {width} variables does not decompose within {} case splits (enumeration cap {})",
                self.branch_budget, self.enum_cap
            )));
        }
        let v = self.branch_variable(children);
        let lo = self.restrict(id, v, false);
        let hi = self.restrict(id, v, true);
        let p_lo = self.prob(lo)?;
        let p_hi = self.prob(hi)?;
        Ok(p_lo.average(&p_hi))
    }

    /// Variable occurring in the most operands; ties go to the smallest index.
    fn branch_variable(&self, children: &[Id]) -> u32 {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for &c in children {
            for &v in self.support(c) {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(v, _)| v)
            .expect("branching on a constant")
    }

    fn enumerate(&self, id: Id) -> DyadicProb {
        let support = self.support(id);
        let mut program = Program::new(support.len());
        let mut regs = HashMap::new();
        self.emit(id, support, &mut program, &mut regs);
        // the output must be the last instruction
        let out = regs[&id];
        if out + 1 != program.len() {
            program.push(Instr::Or(vec![out]));
        }
        DyadicProb::new(BigUint::from(program.count_models()), support.len() as u32)
    }

    fn emit(&self, id: Id, support: &[u32], program: &mut Program, regs: &mut HashMap<Id, usize>) -> usize {
        if let Some(&r) = regs.get(&id) {
            return r;
        }
        let instr = match self.node(id) {
            Node::False => Instr::Const(false),
            Node::True => Instr::Const(true),
            Node::Var(v) => Instr::Input(support.binary_search(v).expect("variable outside support")),
            Node::Not(a) => Instr::Not(self.emit(*a, support, program, regs)),
            Node::And(cs) => Instr::And(cs.iter().map(|&c| self.emit(c, support, program, regs)).collect()),
            Node::Or(cs) => Instr::Or(cs.iter().map(|&c| self.emit(c, support, program, regs)).collect()),
            Node::Xor(cs) => Instr::Xor(cs.iter().map(|&c| self.emit(c, support, program, regs)).collect()),
        };
        let r = program.push(instr);
        regs.insert(id, r);
        r
    }

    /// Converts a node back into an expression.
    pub fn to_expr(&self, id: Id) -> Expr {
        match self.node(id) {
            Node::False => Expr::Const(false),
            Node::True => Expr::Const(true),
            Node::Var(v) => Expr::Var(*v),
            Node::Not(a) => Expr::not(self.to_expr(*a)),
            Node::And(cs) => Expr::and(cs.iter().map(|&c| self.to_expr(c)).collect()),
            Node::Or(cs) => Expr::or(cs.iter().map(|&c| self.to_expr(c)).collect()),
            Node::Xor(cs) => Expr::xor_all(cs.iter().map(|&c| self.to_expr(c))),
        }
    }
}

/// Probability of `op` applied to two independent events.
pub(crate) fn combine(op: Op, a: &DyadicProb, b: &DyadicProb) -> DyadicProb {
    match op {
        Op::And => a.and_independent(b),
        Op::Or => a.or_independent(b),
        Op::Xor => a.xor_independent(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Formula};

    fn engine() -> Engine {
        Engine::new(&Limits::default())
    }

    fn brute(text: &str) -> DyadicProb {
        let f = Formula::parse(text).unwrap();
        let count = f.count_models(26).unwrap();
        DyadicProb::new(count, f.arity() as u32)
    }

    #[test]
    fn normalisation_identifies_equivalent_shapes() {
        let mut e = engine();
        let a = e.import_plain(&parse("x1 & (x2 & x3)").unwrap());
        let b = e.import_plain(&parse("(x3 & x1) & x2 & x1").unwrap());
        assert_eq!(a, b);
        let c = e.import_plain(&parse("x1 ^ x2 ^ x1").unwrap());
        let d = e.import_plain(&parse("x2").unwrap());
        assert_eq!(c, d);
        let n = e.import_plain(&parse("!x1 ^ x2").unwrap());
        let m = e.import_plain(&parse("!(x2 ^ x1)").unwrap());
        assert_eq!(n, m);
        assert_eq!(e.import_plain(&parse("x1 & !x1").unwrap()), FALSE);
        assert_eq!(e.import_plain(&parse("x1 | !x1").unwrap()), TRUE);
        assert_eq!(e.import_plain(&parse("x1 ^ x1").unwrap()), FALSE);
    }

    #[test]
    fn probabilities_match_enumeration() {
        for text in [
            "(x1 & x2) | !x3",
            "x1 ^ x2 ^ x3",
            "(x1 | x2) & (x2 | x3) & !(x1 & x3)",
            "(x1 & x2) | (x3 & x4 & x5)",
        ] {
            let mut e = engine();
            let id = e.import_plain(&parse(text).unwrap());
            assert_eq!(e.prob(id).unwrap(), brute(text), "{text}");
        }
    }

    #[test]
    fn wide_formulas_use_splitting() {
        // 40 variables: a chain that only becomes independent after case splits
        let clauses: Vec<String> = (1..40).map(|i| format!("(x{} ^ x{})", i, i + 1)).collect();
        let text = clauses.join(" | ");
        let mut e = engine();
        let id = e.import_plain(&parse(&text).unwrap());
        // all-equal assignments falsify every clause: 2 of 2^40
        assert_eq!(e.prob(id).unwrap(), DyadicProb::new(2u32, 40).complement());
    }

    #[test]
    fn restriction_and_swap() {
        let mut e = engine();
        let id = e.import_plain(&parse("(x1 & x2) | !x3").unwrap());
        let r = e.restrict(id, 3, false);
        assert_eq!(r, TRUE);
        let s = e.swap_vars(id, 1, 2);
        assert_eq!(s, id);
        let t = e.swap_vars(id, 1, 3);
        assert_ne!(t, id);
    }

    #[test]
    fn flipping_a_parity_pair() {
        let mut e = engine();
        let id = e.import_plain(&parse("(x1 ^ x2 ^ x3) & x4").unwrap());
        assert_eq!(e.xor_var_pairs(id), vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(e.flip_pair(id, 1, 3), id);
        assert_ne!(e.flip_pair(id, 1, 4), id);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let limits = Limits {
            enum_cap: 20,
            branch_budget: 0,
            ..Limits::default()
        };
        let mut e = Engine::new(&limits);
        let clauses: Vec<String> = (1..30).map(|i| format!("(x{} ^ x{})", i, i + 1)).collect();
        let id = e.import_plain(&parse(&clauses.join(" | ")).unwrap());
        assert!(matches!(e.prob(id), Err(Error::Intractable(_))));
    }
}
