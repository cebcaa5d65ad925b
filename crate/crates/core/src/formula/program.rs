//! Straight-line programs evaluated on 64 assignments at a time.

use rayon::prelude::*;

use super::{BitVec, Expr};

/// Bit patterns of the six low variables across one 64-assignment word.
const LOW_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Words per parallel chunk when tabulating.
const PAR_CHUNK: usize = 1 << 12;

#[derive(Clone, Debug)]
pub(crate) enum Instr {
    Input(usize),
    Const(bool),
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Xor(Vec<usize>),
}

#[derive(Clone, Debug)]
pub(crate) struct Program {
    instrs: Vec<Instr>,
    n_inputs: usize,
}

impl Program {
    pub fn new(n_inputs: usize) -> Self {
        Program {
            instrs: Vec::new(),
            n_inputs,
        }
    }

    /// Appends an instruction; its register is the returned index. The last
    /// instruction is the program output.
    pub fn push(&mut self, instr: Instr) -> usize {
        self.instrs.push(instr);
        self.instrs.len() - 1
    }

    pub fn from_expr(e: &Expr, n_inputs: usize) -> Self {
        let mut p = Program::new(n_inputs);
        p.compile(e);
        p
    }

    fn compile(&mut self, e: &Expr) -> usize {
        match e {
            Expr::Var(i) => self.push(Instr::Input(*i as usize - 1)),
            Expr::Const(c) => self.push(Instr::Const(*c)),
            Expr::Not(a) => {
                let r = self.compile(a);
                self.push(Instr::Not(r))
            }
            Expr::And(es) => {
                let rs = es.iter().map(|e| self.compile(e)).collect();
                self.push(Instr::And(rs))
            }
            Expr::Or(es) => {
                let rs = es.iter().map(|e| self.compile(e)).collect();
                self.push(Instr::Or(rs))
            }
            Expr::Xor(a, b) => {
                let ra = self.compile(a);
                let rb = self.compile(b);
                self.push(Instr::Xor(vec![ra, rb]))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    /// Evaluates every instruction on one word of inputs.
    pub fn eval_word(&self, inputs: &[u64], regs: &mut Vec<u64>) -> u64 {
        regs.clear();
        for instr in &self.instrs {
            let v = match instr {
                Instr::Input(i) => inputs[*i],
                Instr::Const(c) => {
                    if *c {
                        !0
                    } else {
                        0
                    }
                }
                Instr::Not(r) => !regs[*r],
                Instr::And(rs) => rs.iter().fold(!0, |acc, &r| acc & regs[r]),
                Instr::Or(rs) => rs.iter().fold(0, |acc, &r| acc | regs[r]),
                Instr::Xor(rs) => rs.iter().fold(0, |acc, &r| acc ^ regs[r]),
            };
            regs.push(v);
        }
        *regs.last().expect("empty program")
    }

    fn table_word(&self, w: usize, inputs: &mut [u64], regs: &mut Vec<u64>) -> u64 {
        for (i, slot) in inputs.iter_mut().enumerate() {
            *slot = if i < 6 {
                LOW_PATTERNS[i]
            } else if (w >> (i - 6)) & 1 == 1 {
                !0
            } else {
                0
            };
        }
        self.eval_word(inputs, regs)
    }

    fn n_words(&self) -> usize {
        if self.n_inputs <= 6 {
            1
        } else {
            1usize << (self.n_inputs - 6)
        }
    }

    /// Full truth table. Word-range partitioning across threads yields the
    /// same bits as the sequential loop.
    pub fn truth_table(&self) -> BitVec {
        let len = 1usize << self.n_inputs;
        let mut words = vec![0u64; self.n_words()];
        let fill = |offset: usize, chunk: &mut [u64]| {
            let mut inputs = vec![0u64; self.n_inputs];
            let mut regs = Vec::with_capacity(self.instrs.len());
            for (k, out) in chunk.iter_mut().enumerate() {
                *out = self.table_word(offset + k, &mut inputs, &mut regs);
            }
        };
        if words.len() >= 2 * PAR_CHUNK {
            words
                .par_chunks_mut(PAR_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| fill(c * PAR_CHUNK, chunk));
        } else {
            fill(0, &mut words);
        }
        BitVec::from_words(len, words)
    }

    /// Number of satisfying assignments over all `2^n_inputs` inputs.
    pub fn count_models(&self) -> u64 {
        let n_words = self.n_words();
        let tail_mask = if self.n_inputs < 6 {
            (1u64 << (1 << self.n_inputs)) - 1
        } else {
            !0
        };
        let count = |range: std::ops::Range<usize>| -> u64 {
            let mut inputs = vec![0u64; self.n_inputs];
            let mut regs = Vec::with_capacity(self.instrs.len());
            range
                .map(|w| u64::from((self.table_word(w, &mut inputs, &mut regs) & tail_mask).count_ones()))
                .sum()
        };
        if n_words >= 2 * PAR_CHUNK {
            (0..n_words.div_ceil(PAR_CHUNK))
                .into_par_iter()
                .map(|c| count(c * PAR_CHUNK..((c + 1) * PAR_CHUNK).min(n_words)))
                .sum()
        } else {
            count(0..n_words)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Assignment, Formula};

    #[test]
    fn table_matches_scalar_evaluation() {
        let f = Formula::parse("(x1 ^ x7) & !(x3 | x8) | x2 & x9").unwrap();
        let t = f.truth_table(26).unwrap();
        for j in 0..1u64 << 9 {
            let a = Assignment::from_index(9, j);
            assert_eq!(t.get(j as usize), f.evaluate(&a).unwrap(), "j = {j}");
        }
    }

    #[test]
    fn parallel_table_is_bit_identical() {
        let e = parse("(x1 ^ x19) & (x5 | !x20) ^ x13 & x2").unwrap();
        let p = Program::from_expr(&e, 20);
        let table = p.truth_table();
        let mut inputs = vec![0u64; 20];
        let mut regs = Vec::new();
        for w in (0..table.words().len()).step_by(97) {
            assert_eq!(table.words()[w], p.table_word(w, &mut inputs, &mut regs));
        }
        assert_eq!(table.count_ones(), p.count_models());
    }

    #[test]
    fn small_tables_are_masked() {
        let p = Program::from_expr(&Expr::Const(true), 2);
        assert_eq!(p.count_models(), 4);
        assert_eq!(p.truth_table().count_ones(), 4);
        let p = Program::from_expr(&Expr::Const(true), 0);
        assert_eq!(p.count_models(), 1);
    }
}
