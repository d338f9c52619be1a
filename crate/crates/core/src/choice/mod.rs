//! Choice functions over a finite contract universe.
//!
//! A [`ChoiceFunction`] maps every subset `X` of the universe to a subset of
//! `X`. Several representations are supported: an explicit table for small
//! universes, order maximisers, top-q selectors, thresholded utility
//! maximisation, unions of order maximisers, blockwise aggregation, and
//! general unions. All of them are immutable once built.

mod closure;
mod decompose;
mod plott;
pub mod table;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::set::{full_mask, ContractSet, MAX_UNIVERSE};

pub use closure::{closure_star, closure_table, invert_closure, nil_set};
pub use decompose::{decompose_into_orders, OrderDecomposition};
pub use plott::{is_plott, CheckMode, HeredityWitness, OutcastWitness, PlottReport};

/// A strict total order on the universe, best first, restricted to an
/// acceptable set. Its maximiser picks the best acceptable member of `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOrder {
    ranking: Vec<usize>,
    acceptable: ContractSet,
}

impl LinearOrder {
    /// `ranking` must list every contract of the universe exactly once.
    pub fn new(ranking: Vec<usize>, acceptable: Option<ContractSet>) -> Result<Self> {
        let n = ranking.len();
        if n > MAX_UNIVERSE {
            return Err(Error::UniverseTooLarge { size: n, max: MAX_UNIVERSE });
        }
        let mut seen = 0u64;
        for &c in &ranking {
            if c >= n || seen >> c & 1 == 1 {
                return Err(Error::InvalidChoice(format!("ranking {ranking:?} is not a permutation of 0..{n}")));
            }
            seen |= 1 << c;
        }
        let acceptable = match acceptable {
            Some(a) => {
                a.check_universe(n)?;
                a
            }
            None => ContractSet::full(n),
        };
        Ok(LinearOrder { ranking, acceptable })
    }

    pub fn universe_size(&self) -> usize {
        self.ranking.len()
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    pub fn acceptable(&self) -> ContractSet {
        self.acceptable
    }

    /// Acceptable contracts in rank order.
    pub fn acceptable_ranking(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranking.iter().copied().filter(|&c| self.acceptable.contains(c))
    }

    #[inline]
    fn max_bits(&self, x: u64) -> u64 {
        let avail = x & self.acceptable.bits();
        if avail == 0 {
            return 0;
        }
        for &c in &self.ranking {
            if avail >> c & 1 == 1 {
                return 1 << c;
            }
        }
        unreachable!()
    }

    #[inline]
    fn top_bits(&self, x: u64, quota: usize) -> u64 {
        let avail = x & self.acceptable.bits();
        if avail.count_ones() as usize <= quota {
            return avail;
        }
        let mut out = 0;
        let mut taken = 0;
        for &c in &self.ranking {
            if taken == quota {
                break;
            }
            if avail >> c & 1 == 1 {
                out |= 1 << c;
                taken += 1;
            }
        }
        out
    }
}

/// One block of an aggregate: a set of global contract indices and the
/// agent's choice function over the block, indexed locally in `members` order.
#[derive(Clone, Debug)]
pub struct Block {
    members: Vec<usize>,
    choice: ChoiceFunction,
}

impl Block {
    pub fn new(members: Vec<usize>, choice: ChoiceFunction) -> Result<Self> {
        if members.len() != choice.universe_size() {
            return Err(Error::UniverseMismatch { expected: members.len(), found: choice.universe_size() });
        }
        Ok(Block { members, choice })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn choice(&self) -> &ChoiceFunction {
        &self.choice
    }

    fn project(&self, x: u64) -> u64 {
        self.members.iter().enumerate().fold(0, |acc, (j, &g)| acc | ((x >> g & 1) << j))
    }

    fn lift(&self, local: u64) -> u64 {
        ContractSet::raw(self.members.len(), local).iter().fold(0, |acc, j| acc | 1 << self.members[j])
    }
}

#[derive(Clone, Debug)]
pub enum Repr {
    /// `table[mask]` is the chosen mask.
    ExplicitTable(Arc<[u64]>),
    LinearOrderMax(LinearOrder),
    QuotaByOrder {
        order: LinearOrder,
        quota: usize,
    },
    /// Argmax of utility over contracts with non-negative utility; ties go to
    /// the lowest index.
    UtilityThreshold(Vec<f64>),
    UnionOfOrders(Vec<LinearOrder>),
    Aggregate(Vec<Block>),
    /// Pointwise union of arbitrary choice functions.
    Union(Vec<ChoiceFunction>),
}

#[derive(Clone, Debug)]
pub struct ChoiceFunction {
    universe_size: usize,
    repr: Repr,
}

impl ChoiceFunction {
    /// Explicit table indexed by subset mask. Rejects tables that are not
    /// total, not selections, or choose something from the empty set.
    pub fn explicit(universe_size: usize, table: Vec<ContractSet>, cap: usize) -> Result<Self> {
        if universe_size > cap {
            return Err(Error::CapExceeded { size: universe_size, cap });
        }
        let expected = 1usize << universe_size;
        if table.len() != expected {
            return Err(Error::InvalidChoice(format!("explicit table has {} rows, expected {expected}", table.len())));
        }
        let mut bits = Vec::with_capacity(expected);
        for (mask, chosen) in table.iter().enumerate() {
            chosen.check_universe(universe_size)?;
            if chosen.bits() & !(mask as u64) != 0 {
                return Err(Error::InvalidChoice(format!("row {mask:#x} chooses outside its argument")));
            }
            bits.push(chosen.bits());
        }
        if bits[0] != 0 {
            return Err(Error::InvalidChoice("the empty set must choose the empty set".into()));
        }
        Ok(ChoiceFunction { universe_size, repr: Repr::ExplicitTable(bits.into()) })
    }

    /// Tabulates `f` over every subset and validates it as an explicit table.
    pub fn from_fn<F>(universe_size: usize, cap: usize, f: F) -> Result<Self>
    where
        F: Fn(ContractSet) -> ContractSet,
    {
        if universe_size > cap {
            return Err(Error::CapExceeded { size: universe_size, cap });
        }
        let table = crate::set::powerset(universe_size).map(f).collect();
        Self::explicit(universe_size, table, cap)
    }

    pub fn linear_order(order: LinearOrder) -> Self {
        ChoiceFunction { universe_size: order.universe_size(), repr: Repr::LinearOrderMax(order) }
    }

    pub fn quota(order: LinearOrder, quota: usize) -> Self {
        ChoiceFunction { universe_size: order.universe_size(), repr: Repr::QuotaByOrder { order, quota } }
    }

    pub fn utility(utilities: Vec<f64>) -> Result<Self> {
        if utilities.len() > MAX_UNIVERSE {
            return Err(Error::UniverseTooLarge { size: utilities.len(), max: MAX_UNIVERSE });
        }
        if utilities.iter().any(|u| u.is_nan()) {
            return Err(Error::InvalidChoice("utility must not be NaN".into()));
        }
        Ok(ChoiceFunction { universe_size: utilities.len(), repr: Repr::UtilityThreshold(utilities) })
    }

    pub fn union_of_orders(orders: Vec<LinearOrder>) -> Result<Self> {
        let n = orders.first().ok_or(Error::EmptyList)?.universe_size();
        for o in &orders {
            if o.universe_size() != n {
                return Err(Error::UniverseMismatch { expected: n, found: o.universe_size() });
            }
        }
        Ok(ChoiceFunction { universe_size: n, repr: Repr::UnionOfOrders(orders) })
    }

    /// Blockwise disjoint union. Blocks must partition `0..universe_size`.
    pub fn aggregate(universe_size: usize, blocks: Vec<Block>) -> Result<Self> {
        if universe_size > MAX_UNIVERSE {
            return Err(Error::UniverseTooLarge { size: universe_size, max: MAX_UNIVERSE });
        }
        let mut covered = 0u64;
        for b in &blocks {
            for &g in &b.members {
                if g >= universe_size || covered >> g & 1 == 1 {
                    return Err(Error::InvalidChoice(format!("blocks do not partition the universe (contract {g})")));
                }
                covered |= 1 << g;
            }
        }
        if covered != full_mask(universe_size) {
            return Err(Error::InvalidChoice("blocks do not cover the universe".into()));
        }
        Ok(ChoiceFunction { universe_size, repr: Repr::Aggregate(blocks) })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    /// `choose(X)`; errors if `X` lives in a different universe.
    pub fn choose(&self, x: &ContractSet) -> Result<ContractSet> {
        x.check_universe(self.universe_size)?;
        Ok(self.apply(*x))
    }

    /// `choose(X)` for a set already known to share this universe.
    #[inline]
    pub fn apply(&self, x: ContractSet) -> ContractSet {
        debug_assert_eq!(x.universe_size(), self.universe_size);
        ContractSet::raw(self.universe_size, self.eval(x.bits()))
    }

    #[inline]
    pub(crate) fn eval(&self, x: u64) -> u64 {
        match &self.repr {
            Repr::ExplicitTable(t) => t[x as usize],
            Repr::LinearOrderMax(o) => o.max_bits(x),
            Repr::QuotaByOrder { order, quota } => order.top_bits(x, *quota),
            Repr::UtilityThreshold(u) => {
                let mut best: Option<(usize, f64)> = None;
                for c in ContractSet::raw(self.universe_size, x).iter() {
                    let v = u[c];
                    if v >= 0.0 && best.is_none_or(|(_, b)| v > b) {
                        best = Some((c, v));
                    }
                }
                best.map_or(0, |(c, _)| 1 << c)
            }
            Repr::UnionOfOrders(orders) => orders.iter().fold(0, |acc, o| acc | o.max_bits(x)),
            Repr::Aggregate(blocks) => blocks.iter().fold(0, |acc, b| acc | b.lift(b.choice.eval(b.project(x)))),
            Repr::Union(parts) => parts.iter().fold(0, |acc, p| acc | p.eval(x)),
        }
    }

    /// Materialises the function as an explicit table.
    pub fn tabulate(&self, cap: usize, exec: Execution) -> Result<ChoiceFunction> {
        if self.universe_size > cap {
            return Err(Error::CapExceeded { size: self.universe_size, cap });
        }
        if let Repr::ExplicitTable(_) = self.repr {
            return Ok(self.clone());
        }
        let table: Vec<u64> = exec::map_range(exec, 1 << self.universe_size, |x| self.eval(x));
        Ok(ChoiceFunction { universe_size: self.universe_size, repr: Repr::ExplicitTable(table.into()) })
    }

    /// Exhaustive pointwise equality.
    pub fn agrees_with(&self, other: &ChoiceFunction, cap: usize, exec: Execution) -> Result<bool> {
        Ok(self.first_disagreement(other, cap, exec)?.is_none())
    }

    /// Lowest subset on which the two functions differ.
    pub fn first_disagreement(
        &self,
        other: &ChoiceFunction,
        cap: usize,
        exec: Execution,
    ) -> Result<Option<ContractSet>> {
        if other.universe_size != self.universe_size {
            return Err(Error::UniverseMismatch { expected: self.universe_size, found: other.universe_size });
        }
        if self.universe_size > cap {
            return Err(Error::CapExceeded { size: self.universe_size, cap });
        }
        let n = self.universe_size;
        Ok(exec::find_first(exec, 1 << n, |x| (self.eval(x) != other.eval(x)).then(|| ContractSet::raw(n, x))))
    }

    /// `choose(self, X) ⊆ choose(other, X)` for every `X`; returns the first
    /// subset where it fails.
    pub fn first_non_dominated(
        &self,
        other: &ChoiceFunction,
        cap: usize,
        exec: Execution,
    ) -> Result<Option<ContractSet>> {
        if other.universe_size != self.universe_size {
            return Err(Error::UniverseMismatch { expected: self.universe_size, found: other.universe_size });
        }
        if self.universe_size > cap {
            return Err(Error::CapExceeded { size: self.universe_size, cap });
        }
        let n = self.universe_size;
        Ok(exec::find_first(exec, 1 << n, |x| (self.eval(x) & !other.eval(x) != 0).then(|| ContractSet::raw(n, x))))
    }
}

/// Pointwise union of choice functions over one universe.
///
/// Unions of order maximisers stay in the order-union representation;
/// anything else becomes a general [`Repr::Union`].
pub fn union(cfs: &[ChoiceFunction]) -> Result<ChoiceFunction> {
    let n = cfs.first().ok_or(Error::EmptyList)?.universe_size();
    for cf in cfs {
        if cf.universe_size() != n {
            return Err(Error::UniverseMismatch { expected: n, found: cf.universe_size() });
        }
    }
    if cfs.len() == 1 {
        return Ok(cfs[0].clone());
    }
    let mut orders = Vec::new();
    for cf in cfs {
        match &cf.repr {
            Repr::LinearOrderMax(o) => orders.push(o.clone()),
            Repr::UnionOfOrders(os) => orders.extend(os.iter().cloned()),
            _ => {
                return Ok(ChoiceFunction { universe_size: n, repr: Repr::Union(cfs.to_vec()) });
            }
        }
    }
    ChoiceFunction::union_of_orders(orders)
}
