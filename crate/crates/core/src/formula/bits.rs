use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length packed bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            len,
            words: vec![!0; len.div_ceil(64)],
        };
        v.clear_tail();
        v
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(64));
        let mut v = BitVec { len, words };
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, pos: usize) -> bool {
        assert!(pos < self.len, "bit {pos} out of range {}", self.len);
        self.words[pos / 64] >> (pos % 64) & 1 == 1
    }

    pub fn set(&mut self, pos: usize, value: bool) {
        assert!(pos < self.len, "bit {pos} out of range {}", self.len);
        let mask = 1u64 << (pos % 64);
        if value {
            self.words[pos / 64] |= mask;
        } else {
            self.words[pos / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// An assignment `x ∈ {0,1}^d`. Position `i` holds the value of variable `x_{i+1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment(BitVec);

impl Assignment {
    pub fn zeros(d: usize) -> Self {
        Assignment(BitVec::zeros(d))
    }

    pub fn ones(d: usize) -> Self {
        Assignment(BitVec::ones(d))
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        Assignment(v)
    }

    /// Assignment whose bit `i` is bit `i` of `index` (x1 is the least significant bit).
    pub fn from_index(d: usize, index: u64) -> Self {
        let mut v = BitVec::zeros(d);
        for i in 0..d.min(64) {
            v.set(i, index >> i & 1 == 1);
        }
        Assignment(v)
    }

    /// Parses a bitstring whose leftmost character is `x1`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for (offset, c) in text.trim().char_indices() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(Error::Syntax {
                        offset,
                        message: format!("unexpected {c:?} in bitstring"),
                    })
                }
            }
        }
        Ok(Assignment::from_bools(&bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value at 0-based position `pos`.
    pub fn get(&self, pos: usize) -> bool {
        self.0.get(pos)
    }

    pub fn set(&mut self, pos: usize, value: bool) {
        self.0.set(pos, value);
    }

    /// Value of the 1-based variable `x_var`.
    pub fn var(&self, var: u32) -> bool {
        self.0.get(var as usize - 1)
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.0.iter().collect()
    }

    pub fn concat(parts: &[&Assignment]) -> Self {
        let bits: Vec<bool> = parts.iter().flat_map(|a| a.0.iter()).collect();
        Assignment::from_bools(&bits)
    }

    pub(crate) fn expect_len(&self, d: usize) -> Result<()> {
        if self.len() == d {
            Ok(())
        } else {
            Err(Error::ArityMismatch {
                expected: d,
                found: self.len(),
            })
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({:?})", self.0)
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Assignment::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A subset `S ⊆ [d]`, stored as a bit mask with a cached size.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    bits: BitVec,
    count: usize,
}

impl SubsetMask {
    pub fn empty(d: usize) -> Self {
        SubsetMask {
            bits: BitVec::zeros(d),
            count: 0,
        }
    }

    pub fn full(d: usize) -> Self {
        SubsetMask {
            bits: BitVec::ones(d),
            count: d,
        }
    }

    /// Builds a mask from 1-based variable indices.
    pub fn from_vars(d: usize, vars: &[u32]) -> Result<Self> {
        let mut mask = SubsetMask::empty(d);
        for &v in vars {
            if v == 0 || v as usize > d {
                return Err(Error::invalid(
                    "subset",
                    format!("variable x{v} is outside 1..={d}"),
                ));
            }
            mask.insert_pos(v as usize - 1);
        }
        Ok(mask)
    }

    pub(crate) fn from_positions(d: usize, positions: &[usize]) -> Self {
        let mut mask = SubsetMask::empty(d);
        for &p in positions {
            mask.insert_pos(p);
        }
        mask
    }

    /// Parses a comma-separated list of 1-based indices, optionally in braces
    /// and with `x` prefixes: `"1,3"`, `"{x1, x3}"`, `""`.
    pub fn parse(d: usize, text: &str) -> Result<Self> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut vars = Vec::new();
        for part in inner.split(',') {
            let p = part.trim();
            if p.is_empty() {
                continue;
            }
            let digits = p.strip_prefix('x').unwrap_or(p);
            let v: u32 = digits
                .parse()
                .map_err(|_| Error::invalid("subset", format!("bad index {p:?}")))?;
            vars.push(v);
        }
        SubsetMask::from_vars(d, &vars)
    }

    pub fn insert_pos(&mut self, pos: usize) {
        if !self.bits.get(pos) {
            self.bits.set(pos, true);
            self.count += 1;
        }
    }

    pub fn remove_pos(&mut self, pos: usize) {
        if self.bits.get(pos) {
            self.bits.set(pos, false);
            self.count -= 1;
        }
    }

    pub fn with_pos(&self, pos: usize) -> Self {
        let mut m = self.clone();
        m.insert_pos(pos);
        m
    }

    pub fn contains_pos(&self, pos: usize) -> bool {
        self.bits.get(pos)
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.bits.get(var as usize - 1)
    }

    /// Number of members `|S|`.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Length of the ambient index set `d`.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    /// 0-based positions in increasing order.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    /// 1-based variable indices in increasing order.
    pub fn vars(&self) -> Vec<u32> {
        self.positions().map(|p| p as u32 + 1).collect()
    }

    pub fn complement(&self) -> Self {
        let d = self.universe();
        let words = self.bits.words().iter().map(|w| !w).collect();
        SubsetMask {
            bits: BitVec::from_words(d, words),
            count: d - self.count,
        }
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.bits
            .words()
            .iter()
            .zip(other.bits.words())
            .all(|(a, b)| a & !b == 0)
    }

    pub(crate) fn expect_universe(&self, d: usize) -> Result<()> {
        if self.universe() == d {
            Ok(())
        } else {
            Err(Error::ArityMismatch {
                expected: d,
                found: self.universe(),
            })
        }
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.vars().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubsetMask{self}")
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.vars().serialize(s)
    }
}
