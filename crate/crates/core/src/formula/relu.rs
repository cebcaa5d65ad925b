//! Compilation of formulas into feed-forward ReLU networks.
//!
//! Gate encodings on {0,1}-valued signals:
//!
//! - `NOT z = 1 - z` (folded into the next affine map)
//! - `AND(z1, z2) = max(z1 + z2 - 1, 0)`
//! - `OR(z1, z2) = 1 - max(1 - z1 - z2, 0)`
//! - `XOR(z1, z2) = AND(OR(z1, z2), NOT AND(z1, z2))`
//!
//! Wider AND/OR gates are folded into binary ones. Signals that skip layers
//! are carried by pass-through units, `max(z, 0) = z`.

use std::collections::HashMap;

use num_rational::Rational64;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::Serialize;

use super::{Expr, Formula};
use crate::error::{Error, Result};

/// One affine map `W·h + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReluLayer {
    pub weights: Vec<Vec<Rational64>>,
    pub bias: Vec<Rational64>,
}

impl ReluLayer {
    pub fn output_dim(&self) -> usize {
        self.bias.len()
    }

    fn apply(&self, input: &[Rational64]) -> Vec<Rational64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                row.iter()
                    .zip(input)
                    .filter(|(w, _)| !w.is_zero())
                    .fold(*b, |acc, (w, v)| acc + w * v)
            })
            .collect()
    }
}

/// Hidden layers use `max(·, 0)`; the last layer is linear with one output,
/// thresholded at 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<ReluLayer>,
}

impl ReluNetwork {
    pub fn new(input_dim: usize, layers: Vec<ReluLayer>) -> Result<Self> {
        let mut dim = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.weights.len() != layer.bias.len() || layer.weights.iter().any(|r| r.len() != dim) {
                return Err(Error::invalid("network", format!("layer {i} does not chain")));
            }
            dim = layer.output_dim();
        }
        if dim != 1 || layers.len() < 2 {
            return Err(Error::invalid(
                "network",
                "need at least one hidden layer and a single output",
            ));
        }
        Ok(ReluNetwork { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[ReluLayer] {
        &self.layers
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn neuron_count(&self) -> usize {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(ReluLayer::output_dim)
            .sum()
    }

    /// Output before thresholding.
    pub fn forward_value(&self, input: &[Rational64]) -> Rational64 {
        assert_eq!(input.len(), self.input_dim);
        let (last, hidden) = self.layers.split_last().unwrap();
        let mut h = input.to_vec();
        for layer in hidden {
            h = layer.apply(&h);
            for v in &mut h {
                if *v < Rational64::zero() {
                    *v = Rational64::zero();
                }
            }
        }
        last.apply(&h)[0]
    }

    pub fn forward(&self, input: &[bool]) -> bool {
        let x: Vec<Rational64> = input.iter().map(|&b| Rational64::from_integer(b as i64)).collect();
        self.forward_value(&x) > Rational64::new(1, 2)
    }

    pub fn compile(f: &Formula) -> ReluNetwork {
        let mut c = Circuit::default();
        let out = c.lower(f.root());
        c.into_network(f.arity(), out)
    }
}

impl Serialize for ReluNetwork {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Layer {
            weights: Vec<Vec<String>>,
            bias: Vec<String>,
            activation: &'static str,
        }
        let n = self.layers.len();
        let layers: Vec<Layer> = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| Layer {
                weights: l
                    .weights
                    .iter()
                    .map(|r| r.iter().map(ToString::to_string).collect())
                    .collect(),
                bias: l.bias.iter().map(ToString::to_string).collect(),
                activation: if i + 1 < n { "relu" } else { "threshold_1/2" },
            })
            .collect();
        let mut st = s.serialize_struct("ReluNetwork", 2)?;
        st.serialize_field("input_dim", &self.input_dim)?;
        st.serialize_field("layers", &layers)?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Source {
    Const(bool),
    Input(usize),
    Gate(usize),
}

/// A signal, possibly negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Lit {
    src: Source,
    neg: bool,
}

impl Lit {
    fn negate(self) -> Lit {
        match self.src {
            Source::Const(c) => Lit {
                src: Source::Const(!c),
                neg: false,
            },
            _ => Lit {
                neg: !self.neg,
                ..self
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum GateKind {
    And,
    Or,
}

#[derive(Default)]
struct Circuit {
    gates: Vec<(GateKind, Lit, Lit)>,
    levels: Vec<usize>,
    dedup: HashMap<(GateKind, Lit, Lit), usize>,
}

impl Circuit {
    fn level(&self, l: Lit) -> usize {
        match l.src {
            Source::Gate(g) => self.levels[g],
            _ => 0,
        }
    }

    fn gate(&mut self, kind: GateKind, a: Lit, b: Lit) -> Lit {
        let key = (kind, a, b);
        let g = match self.dedup.get(&key) {
            Some(&g) => g,
            None => {
                let g = self.gates.len();
                self.gates.push(key);
                self.levels.push(1 + self.level(a).max(self.level(b)));
                self.dedup.insert(key, g);
                g
            }
        };
        Lit {
            src: Source::Gate(g),
            neg: false,
        }
    }

    fn fold(&mut self, kind: GateKind, es: &[Expr]) -> Lit {
        let mut acc = self.lower(&es[0]);
        for e in &es[1..] {
            let b = self.lower(e);
            acc = self.gate(kind, acc, b);
        }
        acc
    }

    fn lower(&mut self, e: &Expr) -> Lit {
        match e {
            Expr::Var(i) => Lit {
                src: Source::Input(*i as usize - 1),
                neg: false,
            },
            Expr::Const(c) => Lit {
                src: Source::Const(*c),
                neg: false,
            },
            Expr::Not(a) => self.lower(a).negate(),
            Expr::And(es) => self.fold(GateKind::And, es),
            Expr::Or(es) => self.fold(GateKind::Or, es),
            Expr::Xor(a, b) => {
                let a = self.lower(a);
                let b = self.lower(b);
                let either = self.gate(GateKind::Or, a, b);
                let both = self.gate(GateKind::And, a, b);
                self.gate(GateKind::And, either, both.negate())
            }
        }
    }

    fn into_network(self, input_dim: usize, out: Lit) -> ReluNetwork {
        let depth = self.level(out).max(1);
        // Last layer in which each source must be available as a unit.
        let mut last_use: HashMap<Source, usize> = HashMap::new();
        let mut need = |src: Source, layer: usize| {
            if !matches!(src, Source::Const(_)) {
                let e = last_use.entry(src).or_insert(layer);
                *e = (*e).max(layer);
            }
        };
        for (g, &(_, a, b)) in self.gates.iter().enumerate() {
            let consumer = self.levels[g];
            need(a.src, consumer - 1);
            need(b.src, consumer - 1);
        }
        need(out.src, depth);

        // Units of the previous layer: source -> (index, stores complement).
        let mut prev: HashMap<Source, (usize, bool)> =
            (0..input_dim).map(|i| (Source::Input(i), (i, false))).collect();
        let mut prev_dim = input_dim;
        let mut layers = Vec::with_capacity(depth + 1);

        // `value(lit) = c + w * h[idx]`, or a constant.
        let affine = |prev: &HashMap<Source, (usize, bool)>, l: Lit| -> (i64, Option<(usize, i64)>) {
            match l.src {
                Source::Const(c) => ((c ^ l.neg) as i64, None),
                src => {
                    let (idx, stored_neg) = prev[&src];
                    if stored_neg ^ l.neg {
                        (1, Some((idx, -1)))
                    } else {
                        (0, Some((idx, 1)))
                    }
                }
            }
        };

        for layer in 1..=depth {
            let mut rows: Vec<Vec<Rational64>> = Vec::new();
            let mut bias: Vec<Rational64> = Vec::new();
            let mut next: HashMap<Source, (usize, bool)> = HashMap::new();
            let mut emit = |rows: &mut Vec<Vec<Rational64>>,
                            terms: &[(i64, Option<(usize, i64)>)],
                            offset: i64,
                            sign: i64|
             -> usize {
                let mut row = vec![Rational64::zero(); prev_dim];
                let mut b = offset;
                for &(c, t) in terms {
                    b += sign * c;
                    if let Some((idx, w)) = t {
                        row[idx] += Rational64::from_integer(sign * w);
                    }
                }
                rows.push(row);
                bias.push(Rational64::from_integer(b));
                rows.len() - 1
            };
            for (g, &(kind, a, b)) in self.gates.iter().enumerate() {
                if self.levels[g] != layer {
                    continue;
                }
                let ta = affine(&prev, a);
                let tb = affine(&prev, b);
                let idx = match kind {
                    // max(A + B - 1, 0)
                    GateKind::And => emit(&mut rows, &[ta, tb], -1, 1),
                    // max(1 - A - B, 0), i.e. the complement of OR
                    GateKind::Or => emit(&mut rows, &[ta, tb], 1, -1),
                };
                next.insert(Source::Gate(g), (idx, kind == GateKind::Or));
            }
            let mut carried: Vec<Source> = last_use
                .iter()
                .filter(|(src, &until)| until >= layer && !next.contains_key(src) && prev.contains_key(src))
                .map(|(src, _)| *src)
                .collect();
            carried.sort_by_key(|s| match s {
                Source::Input(i) => (0, *i),
                Source::Gate(g) => (1, *g),
                Source::Const(_) => (2, 0),
            });
            for src in carried {
                let (pidx, stored_neg) = prev[&src];
                let idx = emit(&mut rows, &[(0, Some((pidx, 1)))], 0, 1);
                next.insert(src, (idx, stored_neg));
            }
            if rows.is_empty() {
                emit(&mut rows, &[], 0, 1);
            }
            prev_dim = rows.len();
            layers.push(ReluLayer { weights: rows, bias });
            prev = next;
        }

        let (c, t) = affine(&prev, out);
        let mut row = vec![Rational64::zero(); prev_dim];
        if let Some((idx, w)) = t {
            row[idx] = Rational64::from_integer(w);
        }
        layers.push(ReluLayer {
            weights: vec![row],
            bias: vec![Rational64::from_integer(c)],
        });
        ReluNetwork::new(input_dim, layers).expect("compiled network chains")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Assignment;
    use num_traits::One;

    fn agrees(f: &Formula) -> bool {
        let net = f.compile_to_relu();
        (0..1u64 << f.arity()).all(|j| {
            let a = Assignment::from_index(f.arity(), j);
            net.forward(&a.to_bools()) == f.evaluate(&a).unwrap()
        })
    }

    #[test]
    fn circuit_network_agrees() {
        let f = Formula::parse("(x1 & x2) | !x3").unwrap();
        assert!(agrees(&f));
        let net = f.compile_to_relu();
        assert_eq!(net.input_dim(), 3);
    }

    #[test]
    fn single_variable_is_one_pass_through_layer() {
        let f = Formula::parse("x1").unwrap();
        let net = f.compile_to_relu();
        assert_eq!(net.hidden_layers(), 1);
        assert_eq!(net.neuron_count(), 1);
        assert!(agrees(&f));
        let g = Formula::parse("!x1").unwrap();
        let net = g.compile_to_relu();
        assert!(!net.forward(&[true]));
        assert!(net.forward(&[false]));
    }

    #[test]
    fn outputs_are_exactly_zero_or_one() {
        let f = Formula::parse("(x1 ^ x2) | x3 & !(x4 ^ x1) | x2 & x3 & x4").unwrap();
        let net = f.compile_to_relu();
        for j in 0..16u64 {
            let a = Assignment::from_index(4, j);
            let x: Vec<Rational64> = a.to_bools().iter().map(|&b| Rational64::from_integer(b as i64)).collect();
            let v = net.forward_value(&x);
            assert!(v == Rational64::zero() || v == Rational64::one());
        }
        assert!(agrees(&f));
    }

    #[test]
    fn constants_and_unused_inputs() {
        for text in ["1", "0", "x1 & 0", "x2 | 1", "!(x1 ^ 1)"] {
            let f = Formula::with_arity(crate::formula::parse(text).unwrap(), 3).unwrap();
            assert!(agrees(&f), "{text}");
        }
    }

    #[test]
    fn rejects_broken_layer_chains() {
        let bad = ReluLayer {
            weights: vec![vec![Rational64::one(); 2]],
            bias: vec![Rational64::zero()],
        };
        assert!(ReluNetwork::new(3, vec![bad.clone(), bad]).is_err());
    }
}
