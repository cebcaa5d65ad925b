//! Subset search in size-then-lexicographic order.
//!
//! Two reductions of the search space never skip the lexicographically first
//! witness of any size:
//!
//! - a variable the function does not depend on never helps, so subsets
//!   containing one are dominated by the same subset without it;
//! - if exchanging two variables with equal values in `x` leaves the function
//!   unchanged, a subset and its image under the exchange have the same
//!   probability, so within each class of interchangeable variables only
//!   prefixes of the class (in index order) are tried;
//! - if negating two variables together leaves the function unchanged, fixing
//!   one of them while the other stays free changes nothing, so a subset
//!   holding one without the other is dominated by a smaller one.

use std::collections::{BTreeSet, HashMap};

use crate::counting::Counter;
use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula, SubsetMask};
use crate::limits::Limits;

pub(crate) struct SubsetSearch {
    d: usize,
    /// Positions that may enter a subset, increasing.
    allowed: Vec<usize>,
    /// For each entry of `allowed`, the index of the previous member of its
    /// symmetry class, which must be present before this one may be added.
    pred: Vec<Option<usize>>,
    /// For each entry of `allowed`, the entries that must accompany it.
    partners: Vec<Vec<usize>>,
    budget: u64,
    tested: u64,
}

impl SubsetSearch {
    /// Search over subsets of the first `universe` positions of `f`.
    pub fn new(
        counter: &mut Counter,
        f: &Formula,
        x: &Assignment,
        universe: usize,
        limits: &Limits,
    ) -> Result<Self> {
        if universe > limits.search_arity_cap {
            return Err(Error::cap(
                "variables in the subset search",
                universe,
                limits.search_arity_cap,
            ));
        }
        let engine = counter.engine();
        engine.begin_query();
        let root = engine.import_plain(f.root());
        let support = engine.support(root).to_vec();
        let mut allowed: Vec<usize> = support
            .iter()
            .map(|&v| v as usize - 1)
            .filter(|&p| p < universe)
            .collect();

        let mut linked: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in engine.xor_var_pairs(root) {
            if engine.flip_pair(root, a, b) == root {
                let (pa, pb) = (a as usize - 1, b as usize - 1);
                linked.entry(pa).or_default().push(pb);
                linked.entry(pb).or_default().push(pa);
            }
        }
        // a position whose partner can never be chosen is never useful
        loop {
            let before = allowed.len();
            let current: BTreeSet<usize> = allowed.iter().copied().collect();
            allowed.retain(|p| {
                linked
                    .get(p)
                    .is_none_or(|ws| ws.iter().all(|w| current.contains(w)))
            });
            if allowed.len() == before {
                break;
            }
        }
        let index: HashMap<usize, usize> = allowed.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let partners: Vec<Vec<usize>> = allowed
            .iter()
            .map(|p| {
                let mut ws: Vec<usize> = linked.get(p).map_or(Vec::new(), |ws| ws.iter().map(|w| index[w]).collect());
                ws.sort_unstable();
                ws.dedup();
                ws
            })
            .collect();

        // (representative variable, x value, index of the latest member)
        let mut classes: Vec<(u32, bool, usize)> = Vec::new();
        let mut pred = Vec::with_capacity(allowed.len());
        for (i, &p) in allowed.iter().enumerate() {
            let var = p as u32 + 1;
            let bit = x.get(p);
            let mut joined = None;
            for (c, class) in classes.iter().enumerate() {
                if class.1 == bit && engine.swap_vars(root, class.0, var) == root {
                    joined = Some(c);
                    break;
                }
            }
            match joined {
                Some(c) => {
                    pred.push(Some(classes[c].2));
                    classes[c].2 = i;
                }
                None => {
                    pred.push(None);
                    classes.push((var, bit, i));
                }
            }
        }
        Ok(SubsetSearch {
            d: f.arity(),
            allowed,
            pred,
            partners,
            budget: limits.candidate_budget,
            tested: 0,
        })
    }

    /// Number of candidate subsets tested so far.
    pub fn tested(&self) -> u64 {
        self.tested
    }

    /// First subset of size at most `max_size`, in size-then-lexicographic
    /// order, accepted by `test`.
    pub fn find_first(
        &mut self,
        max_size: usize,
        mut test: impl FnMut(&SubsetMask) -> Result<bool>,
    ) -> Result<Option<SubsetMask>> {
        let top = max_size.min(self.allowed.len());
        let mut state = DfsState {
            chosen: Vec::with_capacity(top),
            in_set: vec![false; self.allowed.len()],
            owed: vec![0; self.allowed.len()],
            pending: BTreeSet::new(),
        };
        for size in 0..=top {
            if let Some(hit) = self.dfs(0, size, &mut state, &mut test)? {
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }

    fn dfs(
        &mut self,
        start: usize,
        need: usize,
        st: &mut DfsState,
        test: &mut impl FnMut(&SubsetMask) -> Result<bool>,
    ) -> Result<Option<SubsetMask>> {
        if need == 0 {
            if !st.pending.is_empty() {
                return Ok(None);
            }
            self.tested += 1;
            if self.tested > self.budget {
                return Err(Error::cap("candidate subsets tested", self.tested, self.budget));
            }
            let positions: Vec<usize> = st.chosen.iter().map(|&i| self.allowed[i]).collect();
            let mask = SubsetMask::from_positions(self.d, &positions);
            return Ok(test(&mask)?.then_some(mask));
        }
        let n = self.allowed.len();
        if n < need {
            return Ok(None);
        }
        // an owed partner cannot be skipped
        let last = st.pending.first().map_or(n - need, |&p| p.min(n - need));
        for i in start..=last {
            if let Some(p) = self.pred[i] {
                if !st.in_set[p] {
                    continue;
                }
            }
            if self.partners[i].iter().any(|&w| w < i && !st.in_set[w]) {
                continue;
            }
            st.chosen.push(i);
            st.in_set[i] = true;
            st.pending.remove(&i);
            for &w in &self.partners[i] {
                if w > i {
                    st.owed[w] += 1;
                    st.pending.insert(w);
                }
            }
            let hit = if st.pending.len() < need {
                self.dfs(i + 1, need - 1, st, test)?
            } else {
                None
            };
            for &w in &self.partners[i] {
                if w > i {
                    st.owed[w] -= 1;
                    if st.owed[w] == 0 {
                        st.pending.remove(&w);
                    }
                }
            }
            if st.owed[i] > 0 {
                st.pending.insert(i);
            }
            st.in_set[i] = false;
            st.chosen.pop();
            if hit.is_some() {
                return Ok(hit);
            }
        }
        Ok(None)
    }
}

struct DfsState {
    chosen: Vec<usize>,
    in_set: Vec<bool>,
    /// How many chosen entries require each entry.
    owed: Vec<u32>,
    /// Entries owed but not chosen yet.
    pending: BTreeSet<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn search(text: &str, bits: &str) -> (SubsetSearch, Counter) {
        let f = Formula::parse(text).unwrap();
        let x = Assignment::parse(bits).unwrap();
        let mut c = Counter::new(&Limits::default());
        let s = SubsetSearch::new(&mut c, &f, &x, f.arity(), &Limits::default()).unwrap();
        (s, c)
    }

    #[test]
    fn symmetric_variables_share_a_class() {
        let (s, _) = search("x1 & x2 & x3", "110");
        // x1 and x2 are interchangeable; x3 has a different value
        assert_eq!(s.pred, vec![None, Some(0), None]);
    }

    #[test]
    fn visits_canonical_subsets_in_order() {
        let (mut s, _) = search("(x1 & x2) | x3 | x4", "0000");
        let mut seen = Vec::new();
        s.find_first(2, |m| {
            seen.push(m.to_string());
            Ok(false)
        })
        .unwrap();
        assert_eq!(seen, ["{}", "{1}", "{3}", "{1,2}", "{1,3}", "{3,4}"]);
    }

    #[test]
    fn parity_partners_enter_together() {
        let (mut s, _) = search("(x1 ^ x2 ^ x3) | x4", "0000");
        let mut seen = Vec::new();
        s.find_first(4, |m| {
            seen.push(m.to_string());
            Ok(false)
        })
        .unwrap();
        assert_eq!(seen, ["{}", "{4}", "{1,2,3}", "{1,2,3,4}"]);
    }

    #[test]
    fn partner_outside_the_universe_excludes_a_variable() {
        let f = Formula::parse("(x1 ^ x3) & x2").unwrap();
        let x = Assignment::parse("111").unwrap();
        let mut c = Counter::new(&Limits::default());
        let s = SubsetSearch::new(&mut c, &f, &x, 2, &Limits::default()).unwrap();
        assert_eq!(s.allowed, vec![1]);
    }

    #[test]
    fn dummies_are_skipped() {
        let f = Formula::with_arity(crate::formula::parse("x2").unwrap(), 3).unwrap();
        let x = Assignment::parse("010").unwrap();
        let mut c = Counter::new(&Limits::default());
        let mut s = SubsetSearch::new(&mut c, &f, &x, 3, &Limits::default()).unwrap();
        let hit = s.find_first(3, |m| Ok(m.count() == 1)).unwrap();
        assert_eq!(hit.unwrap().vars(), vec![2]);
        assert_eq!(s.tested(), 2);
    }
}
