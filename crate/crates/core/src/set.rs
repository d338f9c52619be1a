//! Contract universes and bitset-backed contract sets.

use std::collections::HashMap;
use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

use crate::error::{Error, Result};

/// Hard ceiling on universe size imposed by the `u64` characteristic vector.
pub const MAX_UNIVERSE: usize = 64;

/// Index of a contract inside its universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContractId(pub usize);

/// Labelled contract universe `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() > MAX_UNIVERSE {
            return Err(Error::UniverseTooLarge { size: labels.len(), max: MAX_UNIVERSE });
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Universe { labels, index })
    }

    /// Universe labelled `c0, c1, ...`.
    pub fn anonymous(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| format!("c{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: ContractId) -> &str {
        &self.labels[id.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn lookup(&self, label: &str) -> Option<ContractId> {
        self.index.get(label).copied().map(ContractId)
    }

    pub fn empty_set(&self) -> ContractSet {
        ContractSet::empty(self.len())
    }

    pub fn full_set(&self) -> ContractSet {
        ContractSet::full(self.len())
    }

    /// Builds a set from labels; unknown labels are an error.
    pub fn set_of<'a, I: IntoIterator<Item = &'a str>>(&self, labels: I) -> Result<ContractSet> {
        let mut s = self.empty_set();
        for l in labels {
            let id = self.lookup(l).ok_or_else(|| Error::UnknownContract(l.to_string()))?;
            s.insert(id.0);
        }
        Ok(s)
    }

    /// Parses `{a,b}` (braces optional, whitespace tolerated).
    pub fn parse_set(&self, text: &str) -> Result<ContractSet> {
        let t = text.trim();
        let inner = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(t);
        self.set_of(inner.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    /// Canonical rendering: labels in universe index order.
    pub fn format_set(&self, set: &ContractSet) -> String {
        let parts: Vec<&str> = set.iter().map(|i| self.labels[i].as_str()).collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn format_order(&self, ranking: &[usize]) -> String {
        let parts: Vec<&str> = ranking.iter().map(|&i| self.labels[i].as_str()).collect();
        parts.join(">")
    }
}

/// Subset of a finite universe stored as a characteristic bit vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContractSet {
    universe: u8,
    bits: u64,
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl ContractSet {
    pub fn empty(universe_size: usize) -> Self {
        assert!(universe_size <= MAX_UNIVERSE);
        ContractSet { universe: universe_size as u8, bits: 0 }
    }

    pub fn full(universe_size: usize) -> Self {
        assert!(universe_size <= MAX_UNIVERSE);
        ContractSet { universe: universe_size as u8, bits: full_mask(universe_size) }
    }

    pub fn singleton(universe_size: usize, index: usize) -> Self {
        let mut s = Self::empty(universe_size);
        s.insert(index);
        s
    }

    pub fn from_bits(universe_size: usize, bits: u64) -> Result<Self> {
        if universe_size > MAX_UNIVERSE {
            return Err(Error::UniverseTooLarge { size: universe_size, max: MAX_UNIVERSE });
        }
        if bits & !full_mask(universe_size) != 0 {
            return Err(Error::OutOfUniverse { universe_size, bits });
        }
        Ok(ContractSet { universe: universe_size as u8, bits })
    }

    /// Unchecked constructor for masks already known to fit.
    #[inline]
    pub(crate) fn raw(universe_size: usize, bits: u64) -> Self {
        debug_assert!(bits & !full_mask(universe_size) == 0);
        ContractSet { universe: universe_size as u8, bits }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe_size: usize, indices: I) -> Result<Self> {
        let mut s = Self::empty(universe_size);
        for i in indices {
            if i >= universe_size {
                return Err(Error::OutOfUniverse { universe_size, bits: 1u64.checked_shl(i as u32).unwrap_or(0) });
            }
            s.insert(i);
        }
        Ok(s)
    }

    #[inline]
    pub fn universe_size(&self) -> usize {
        self.universe as usize
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        index < self.universe_size() && self.bits >> index & 1 == 1
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.universe_size(), "contract {index} outside universe");
        self.bits |= 1 << index;
    }

    pub fn remove(&mut self, index: usize) {
        if index < self.universe_size() {
            self.bits &= !(1 << index);
        }
    }

    pub fn with(mut self, index: usize) -> Self {
        self.insert(index);
        self
    }

    pub fn without(mut self, index: usize) -> Self {
        self.remove(index);
        self
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe, other.universe);
        ContractSet { universe: self.universe, bits: self.bits | other.bits }
    }

    #[inline]
    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe, other.universe);
        ContractSet { universe: self.universe, bits: self.bits & other.bits }
    }

    #[inline]
    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe, other.universe);
        ContractSet { universe: self.universe, bits: self.bits & !other.bits }
    }

    #[inline]
    pub fn complement(&self) -> Self {
        ContractSet { universe: self.universe, bits: !self.bits & full_mask(self.universe_size()) }
    }

    #[inline]
    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    #[inline]
    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits & other.bits == 0
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> Members {
        Members(self.bits)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    /// All subsets of this set, ascending by mask.
    pub fn subsets(&self) -> Subsets {
        Subsets { full: self.bits, next: Some(0), universe: self.universe }
    }

    pub(crate) fn check_universe(&self, expected: usize) -> Result<()> {
        if self.universe_size() != expected {
            Err(Error::UniverseMismatch { expected, found: self.universe_size() })
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for ContractSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl BitOr for ContractSet {
    type Output = ContractSet;
    fn bitor(self, rhs: Self) -> Self {
        self.union(&rhs)
    }
}

impl BitAnd for ContractSet {
    type Output = ContractSet;
    fn bitand(self, rhs: Self) -> Self {
        self.intersection(&rhs)
    }
}

impl Sub for ContractSet {
    type Output = ContractSet;
    fn sub(self, rhs: Self) -> Self {
        self.difference(&rhs)
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// Submask enumeration in ascending numeric order.
pub struct Subsets {
    full: u64,
    next: Option<u64>,
    universe: u8,
}

impl Iterator for Subsets {
    type Item = ContractSet;
    fn next(&mut self) -> Option<ContractSet> {
        let cur = self.next?;
        self.next = if cur == self.full { None } else { Some((cur.wrapping_sub(self.full)) & self.full) };
        Some(ContractSet { universe: self.universe, bits: cur })
    }
}

/// Every subset of an `n`-element universe, ascending by mask.
pub fn powerset(n: usize) -> impl Iterator<Item = ContractSet> {
    ContractSet::full(n).subsets()
}
