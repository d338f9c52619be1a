//! Stable sets for a two-sided market reduced to one Worker (`F`) and one
//! Firm (`G`).
//!
//! A set `S` is stable when both sides keep all of it (`F(S) = S = G(S)`)
//! and no outside contract is wanted by both sides. Stable sets correspond
//! to stable pairs `(Y, Z)` covering `C` with `G(Y) = F(Z)`; the relaxed
//! semi-stable pairs (`G(Y) ⊆ F(Z)`) are the state space of the
//! deferred-acceptance dynamics in [`process`].

mod lattice;
mod process;

use std::fmt;

use crate::choice::{closure_star, is_plott, CheckMode, ChoiceFunction};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::set::{full_mask, ContractSet};

pub use lattice::{
    blair_compare_stable, comparative_statics, lattice_join, lattice_meet, BlairOrdering, StaticsOutcome,
};
pub use process::{phi_step, run_to_fixpoint, side_optimal, sigma, ProcessTrace, TraceStep};

/// `F` is the Worker side, `G` the Firm side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    F,
    G,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::F => Side::G,
            Side::G => Side::F,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::F => "F",
            Side::G => "G",
        })
    }
}

/// The two aggregated choice functions over one universe.
#[derive(Clone, Debug)]
pub struct SidePair {
    f: ChoiceFunction,
    g: ChoiceFunction,
    certified: bool,
}

impl SidePair {
    /// Pairs the functions and certifies both as path-independent
    /// (exhaustively up to the cap, sampled above it).
    pub fn certify(f: ChoiceFunction, g: ChoiceFunction, cfg: &Config) -> Result<Self> {
        let mut sides = Self::uncertified(f, g)?;
        for side in [Side::F, Side::G] {
            let cf = sides.choice(side);
            let report = is_plott(cf, CheckMode::auto(cf.universe_size(), cfg), cfg)?;
            if !report.is_plott {
                return Err(Error::SideNotPlott(side));
            }
        }
        sides.certified = true;
        Ok(sides)
    }

    /// Pairs the functions without checking them. The dynamics refuse to run
    /// on uncertified sides.
    pub fn uncertified(f: ChoiceFunction, g: ChoiceFunction) -> Result<Self> {
        if f.universe_size() != g.universe_size() {
            return Err(Error::UniverseMismatch { expected: f.universe_size(), found: g.universe_size() });
        }
        Ok(SidePair { f, g, certified: false })
    }

    /// Pairs functions that are path-independent by construction, e.g.
    /// unions of order maximisers.
    pub fn trusted(f: ChoiceFunction, g: ChoiceFunction) -> Result<Self> {
        let mut sides = Self::uncertified(f, g)?;
        sides.certified = true;
        Ok(sides)
    }

    pub fn f(&self) -> &ChoiceFunction {
        &self.f
    }

    pub fn g(&self) -> &ChoiceFunction {
        &self.g
    }

    pub fn choice(&self, side: Side) -> &ChoiceFunction {
        match side {
            Side::F => &self.f,
            Side::G => &self.g,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn universe_size(&self) -> usize {
        self.f.universe_size()
    }

    pub fn full(&self) -> ContractSet {
        ContractSet::full(self.universe_size())
    }

    /// The same market with the roles of `F` and `G` exchanged.
    pub fn swapped(&self) -> SidePair {
        SidePair { f: self.g.clone(), g: self.f.clone(), certified: self.certified }
    }

    /// Replaces `F`, keeping `G`; certified only if both inputs were.
    pub fn with_f(&self, f: ChoiceFunction, f_certified: bool) -> Result<SidePair> {
        let mut sides = Self::uncertified(f, self.g.clone())?;
        sides.certified = self.certified && f_certified;
        Ok(sides)
    }

    pub(crate) fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(Error::NotCertified(Side::F))
        }
    }
}

/// `(Y, Z)` with `Y ∪ Z = C` and `G(Y) ⊆ F(Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SemiStablePair {
    y: ContractSet,
    z: ContractSet,
}

impl SemiStablePair {
    /// Validates both conditions against `sides`.
    pub fn new(sides: &SidePair, y: ContractSet, z: ContractSet) -> Result<Self> {
        y.check_universe(sides.universe_size())?;
        z.check_universe(sides.universe_size())?;
        let p = SemiStablePair { y, z };
        p.validate(sides)?;
        Ok(p)
    }

    /// `(∅, C)`.
    pub fn bottom(sides: &SidePair) -> Self {
        let n = sides.universe_size();
        SemiStablePair { y: ContractSet::empty(n), z: ContractSet::full(n) }
    }

    pub fn y(&self) -> ContractSet {
        self.y
    }

    pub fn z(&self) -> ContractSet {
        self.z
    }

    pub fn validate(&self, sides: &SidePair) -> Result<()> {
        if self.y.universe_size() != sides.universe_size() {
            return Err(Error::UniverseMismatch { expected: sides.universe_size(), found: self.y.universe_size() });
        }
        if (self.y | self.z).bits() != full_mask(sides.universe_size()) {
            return Err(Error::NotSemiStable("Y ∪ Z does not cover the universe".into()));
        }
        if !sides.g.apply(self.y).is_subset(&sides.f.apply(self.z)) {
            return Err(Error::NotSemiStable("G(Y) is not contained in F(Z)".into()));
        }
        Ok(())
    }

    /// Componentwise order: `Y` grows, `Z` shrinks.
    pub fn le(&self, other: &SemiStablePair) -> bool {
        self.y.is_subset(&other.y) && other.z.is_subset(&self.z)
    }

    /// `(Y1 ∪ Y2, Z1 ∩ Z2)`, semi-stable whenever both inputs are.
    pub fn combine(&self, other: &SemiStablePair) -> SemiStablePair {
        SemiStablePair { y: self.y | other.y, z: self.z & other.z }
    }

    pub(crate) fn raw(y: ContractSet, z: ContractSet) -> Self {
        SemiStablePair { y, z }
    }
}

/// `(Y, Z)` with `Y ∪ Z = C` and `G(Y) = F(Z) = set`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StablePair {
    pub y: ContractSet,
    pub z: ContractSet,
    pub set: ContractSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    /// `side` does not keep all of `S`; it would choose `choice` instead.
    Unchosen {
        side: Side,
        choice: ContractSet,
    },
    /// Both sides would pick up `contract` if it were offered alongside `S`.
    Blocked {
        contract: usize,
    },
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::Stable)
    }
}

/// Direct check of both stability conditions. `F` is checked before `G`,
/// and blocking contracts are reported lowest index first.
pub fn is_stable_set(sides: &SidePair, s: &ContractSet) -> Result<StabilityVerdict> {
    s.check_universe(sides.universe_size())?;
    Ok(verdict(sides, *s))
}

pub(crate) fn verdict(sides: &SidePair, s: ContractSet) -> StabilityVerdict {
    for side in [Side::F, Side::G] {
        let chosen = sides.choice(side).apply(s);
        if chosen != s {
            return StabilityVerdict::Unchosen { side, choice: chosen };
        }
    }
    for c in s.complement().iter() {
        let with = s.with(c);
        if sides.f.apply(with).contains(c) && sides.g.apply(with).contains(c) {
            return StabilityVerdict::Blocked { contract: c };
        }
    }
    StabilityVerdict::Stable
}

#[inline]
pub(crate) fn is_stable_bits(sides: &SidePair, s: u64) -> bool {
    if sides.f.eval(s) != s || sides.g.eval(s) != s {
        return false;
    }
    let n = sides.universe_size();
    ContractSet::raw(n, full_mask(n) & !s).iter().all(|c| {
        let with = s | 1 << c;
        sides.f.eval(with) >> c & 1 == 0 || sides.g.eval(with) >> c & 1 == 0
    })
}

/// Stability through closures: `F*(S) ∪ G*(S) = C`, for sets that both
/// sides already keep.
pub fn is_stable_set_via_closure(sides: &SidePair, s: &ContractSet) -> Result<bool> {
    s.check_universe(sides.universe_size())?;
    for side in [Side::F, Side::G] {
        if sides.choice(side).apply(*s) != *s {
            return Err(Error::S1Violated(format!("side {side} does not keep the whole set")));
        }
    }
    let cover = closure_star(&sides.f, s)? | closure_star(&sides.g, s)?;
    Ok(cover == sides.full())
}

/// The stable set `G(Y) = F(Z)` of a stable pair.
pub fn pair_to_set(sides: &SidePair, y: &ContractSet, z: &ContractSet) -> Result<ContractSet> {
    y.check_universe(sides.universe_size())?;
    z.check_universe(sides.universe_size())?;
    if (*y | *z) != sides.full() {
        return Err(Error::NotStable("Y ∪ Z does not cover the universe".into()));
    }
    let s = sides.g.apply(*y);
    if s != sides.f.apply(*z) {
        return Err(Error::NotStable("G(Y) differs from F(Z)".into()));
    }
    Ok(s)
}

/// `(G*(S), F*(S))` for a stable `S`.
pub fn set_to_pair(sides: &SidePair, s: &ContractSet) -> Result<StablePair> {
    match is_stable_set(sides, s)? {
        StabilityVerdict::Stable => {}
        v => return Err(Error::NotStable(format!("{v:?}"))),
    }
    Ok(StablePair { y: closure_star(&sides.g, s)?, z: closure_star(&sides.f, s)?, set: *s })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::set::powerset;

    #[test]
    fn complements_market_verdicts() {
        let sides = complements_market();
        assert_eq!(is_stable_set(&sides, &s(2, &[0])).unwrap(), StabilityVerdict::Blocked { contract: 1 });
        assert_eq!(
            is_stable_set(&sides, &s(2, &[0, 1])).unwrap(),
            StabilityVerdict::Unchosen { side: Side::G, choice: s(2, &[1]) }
        );
        assert_eq!(is_stable_set(&sides, &s(2, &[])).unwrap(), StabilityVerdict::Blocked { contract: 0 });
        assert_eq!(
            is_stable_set(&sides, &s(2, &[1])).unwrap(),
            StabilityVerdict::Unchosen { side: Side::F, choice: s(2, &[]) }
        );
        assert!(matches!(
            SidePair::certify(sides.f().clone(), sides.g().clone(), &Config::default()),
            Err(Error::SideNotPlott(Side::F))
        ));
    }

    #[test]
    fn polar2_singletons_are_stable() {
        let sides = polar2();
        assert!(is_stable_set(&sides, &s(2, &[0])).unwrap().is_stable());
        assert!(is_stable_set(&sides, &s(2, &[1])).unwrap().is_stable());
        assert!(is_stable_set_via_closure(&sides, &s(2, &[0])).unwrap());
        assert_eq!(closure_star(sides.f(), &s(2, &[0])).unwrap(), s(2, &[0, 1]));
    }

    #[test]
    fn closure_form_agrees_on_every_kept_set() {
        for sides in [polar2(), utility_market()] {
            let n = sides.universe_size();
            for x in powerset(n) {
                let kept = sides.f().apply(x) == x && sides.g().apply(x) == x;
                if kept {
                    assert_eq!(
                        is_stable_set_via_closure(&sides, &x).unwrap(),
                        is_stable_set(&sides, &x).unwrap().is_stable()
                    );
                } else {
                    assert!(matches!(is_stable_set_via_closure(&sides, &x), Err(Error::S1Violated(_))));
                }
                assert_eq!(is_stable_bits(&sides, x.bits()), is_stable_set(&sides, &x).unwrap().is_stable());
            }
        }
        // Both sides accept everything: S = C is kept and covered.
        let all = ChoiceFunction::union_of_orders(
            (0..3).map(|i| crate::choice::LinearOrder::new(vec![i, (i + 1) % 3, (i + 2) % 3], None).unwrap()).collect(),
        )
        .unwrap();
        let sides = SidePair::certify(all.clone(), all, &Config::default()).unwrap();
        assert!(is_stable_set_via_closure(&sides, &ContractSet::full(3)).unwrap());
    }

    #[test]
    fn utility_market_b_contract_passes_closure_form() {
        let sides = utility_market();
        assert!(is_stable_set_via_closure(&sides, &s(6, &[1])).unwrap());
        assert!(is_stable_set(&sides, &s(6, &[1])).unwrap().is_stable());
    }

    #[test]
    fn pair_conversions() {
        let sides = polar2();
        let p = set_to_pair(&sides, &s(2, &[0])).unwrap();
        assert_eq!((p.y, p.z), (s(2, &[0]), s(2, &[0, 1])));
        assert_eq!(pair_to_set(&sides, &p.y, &p.z).unwrap(), s(2, &[0]));
        assert!(matches!(set_to_pair(&sides, &s(2, &[0, 1])), Err(Error::NotStable(_))));
        assert!(matches!(pair_to_set(&sides, &s(2, &[]), &s(2, &[0])), Err(Error::NotStable(_))));

        let market = complements_market();
        for x in powerset(2) {
            assert!(matches!(set_to_pair(&market, &x), Err(Error::NotStable(_))));
        }
    }

    #[test]
    fn semi_stable_validation() {
        let sides = polar2();
        assert!(SemiStablePair::new(&sides, s(2, &[]), s(2, &[0, 1])).is_ok());
        assert!(matches!(SemiStablePair::new(&sides, s(2, &[]), s(2, &[0])), Err(Error::NotSemiStable(_))));
        // G({b}) = {b} but F(C) = {a}.
        assert!(matches!(SemiStablePair::new(&sides, s(2, &[1]), s(2, &[0, 1])), Err(Error::NotSemiStable(_))));
    }
}
