//! Fixed-universe state sets.

use std::fmt;

use crate::cgs::StateId;

/// A set of states over a universe of `0..universe` state ids.
///
/// This is the value attached to every node of a formula during evaluation.
/// Sets compare equal only when both the universe and the members agree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SatSet {
    universe: usize,
    words: Vec<u64>,
}

impl SatSet {
    pub fn empty(universe: usize) -> Self {
        SatSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = SatSet {
            universe,
            words: vec![!0; universe.div_ceil(64)],
        };
        set.trim();
        set
    }

    /// Builds a set from state ids. Panics if an id lies outside the universe.
    pub fn from_states<I: IntoIterator<Item = StateId>>(universe: usize, states: I) -> Self {
        let mut set = Self::empty(universe);
        for q in states {
            set.insert(q);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.universe
    }

    pub fn contains(&self, q: StateId) -> bool {
        let i = q.index();
        i < self.universe && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn insert(&mut self, q: StateId) -> bool {
        let i = q.index();
        assert!(
            i < self.universe,
            "state {i} outside universe of {}",
            self.universe
        );
        let mask = 1 << (i % 64);
        let fresh = self.words[i / 64] & mask == 0;
        self.words[i / 64] |= mask;
        fresh
    }

    pub fn remove(&mut self, q: StateId) -> bool {
        let i = q.index();
        if i >= self.universe {
            return false;
        }
        let mask = 1 << (i % 64);
        let present = self.words[i / 64] & mask != 0;
        self.words[i / 64] &= !mask;
        present
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            set: self,
            word: 0,
            bits: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn union(&self, other: &SatSet) -> SatSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &SatSet) -> SatSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &SatSet) -> SatSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> SatSet {
        let mut out = SatSet {
            universe: self.universe,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.trim();
        out
    }

    pub fn is_subset(&self, other: &SatSet) -> bool {
        self.check_universe(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    fn zip(&self, other: &SatSet, op: impl Fn(u64, u64) -> u64) -> SatSet {
        self.check_universe(other);
        SatSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    fn check_universe(&self, other: &SatSet) {
        assert_eq!(
            self.universe, other.universe,
            "set operation over different universes"
        );
    }

    fn trim(&mut self) {
        let rem = self.universe % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for SatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.iter().map(|q| q.index()))
            .finish()
    }
}

impl<'a> IntoIterator for &'a SatSet {
    type Item = StateId;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

/// Ascending iterator over the members of a [`SatSet`].
pub struct Iter<'a> {
    set: &'a SatSet,
    word: usize,
    bits: u64,
}

impl Iterator for Iter<'_> {
    type Item = StateId;

    fn next(&mut self) -> Option<StateId> {
        loop {
            if self.bits != 0 {
                let bit = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                return Some(StateId::new(self.word * 64 + bit));
            }
            self.word += 1;
            self.bits = *self.set.words.get(self.word)?;
        }
    }
}
