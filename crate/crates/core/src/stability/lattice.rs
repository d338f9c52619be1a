use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::process::sigma;
use super::{is_stable_set, verdict, SemiStablePair, SidePair, StabilityVerdict};
use crate::choice::{closure_star, is_plott, CheckMode, ChoiceFunction};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::hyperorder::blair_leq;
use crate::set::{full_mask, ContractSet};

fn require_stable(sides: &SidePair, s: &ContractSet) -> Result<()> {
    match is_stable_set(sides, s)? {
        StabilityVerdict::Stable => Ok(()),
        v => Err(Error::NotStable(format!("{s:?}: {v:?}"))),
    }
}

/// Least upper bound of stable sets under `⪯_G`: run `Φ` from
/// `(∪ G*(S_i), ∩ F*(S_i))`.
pub fn lattice_join(sides: &SidePair, sets: &[ContractSet]) -> Result<ContractSet> {
    sides.require_certified()?;
    if sets.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut y = ContractSet::empty(sides.universe_size());
    let mut z = sides.full();
    for s in sets {
        require_stable(sides, s)?;
        y = y | closure_star(sides.g(), s)?;
        z = z & closure_star(sides.f(), s)?;
    }
    let start =
        SemiStablePair::new(sides, y, z).map_err(|e| Error::Internal(format!("join start is not semi-stable: {e}")))?;
    sigma(sides, &start)
}

/// Greatest lower bound under `⪯_G`, i.e. the join under `⪯_F`.
pub fn lattice_meet(sides: &SidePair, sets: &[ContractSet]) -> Result<ContractSet> {
    lattice_join(&sides.swapped(), sets)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlairOrdering {
    Less,
    Greater,
    Equal,
    Incomparable,
}

/// Compares two stable sets under `⪯_G`.
pub fn blair_compare_stable(sides: &SidePair, s: &ContractSet, t: &ContractSet) -> Result<BlairOrdering> {
    require_stable(sides, s)?;
    require_stable(sides, t)?;
    let st = blair_leq(sides.g(), s, t)?;
    let ts = blair_leq(sides.g(), t, s)?;
    Ok(match (st, ts) {
        (true, true) => {
            if s != t {
                return Err(Error::Internal("Blair order is not antisymmetric on stable sets".into()));
            }
            BlairOrdering::Equal
        }
        (true, false) => BlairOrdering::Less,
        (false, true) => BlairOrdering::Greater,
        (false, false) => BlairOrdering::Incomparable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StaticsOutcome {
    /// The stable set reached under the weakened `F'`.
    pub stable: ContractSet,
    /// Starting pair `(G*(S), F'*(F*(S)))`.
    pub start: SemiStablePair,
    /// Whether the original set is still stable under `(F', G)`.
    pub original_still_stable: bool,
}

/// Moves a stable set `S` to the market where `F` is replaced by a weaker
/// `F' ⊇ F`. The result `S'` satisfies `S ⪯_G S'` and `S' ⪯_F S`.
pub fn comparative_statics(
    sides: &SidePair,
    f_prime: &ChoiceFunction,
    s: &ContractSet,
    cfg: &Config,
) -> Result<StaticsOutcome> {
    sides.require_certified()?;
    let n = sides.universe_size();
    if f_prime.universe_size() != n {
        return Err(Error::UniverseMismatch { expected: n, found: f_prime.universe_size() });
    }
    if let Some(w) = non_dominated(sides.f(), f_prime, cfg)? {
        return Err(Error::NotDominated { witness: w.bits() });
    }
    let report = is_plott(f_prime, CheckMode::auto(n, cfg), cfg)?;
    if !report.is_plott {
        return Err(Error::NotPlott("weakened F".into()));
    }
    require_stable(sides, s)?;

    let weakened = sides.with_f(f_prime.clone(), true)?;
    let y = closure_star(sides.g(), s)?;
    let z = closure_star(f_prime, &closure_star(sides.f(), s)?)?;
    let start = SemiStablePair::new(&weakened, y, z)
        .map_err(|e| Error::Internal(format!("statics start is not semi-stable: {e}")))?;
    let stable = sigma(&weakened, &start)?;
    if !blair_leq(sides.g(), s, &stable)? {
        return Err(Error::Internal("weakening F did not improve G".into()));
    }
    if !blair_leq(sides.f(), &stable, s)? {
        return Err(Error::Internal("weakening F improved F".into()));
    }
    let original_still_stable = verdict(&weakened, *s).is_stable();
    Ok(StaticsOutcome { stable, start, original_still_stable })
}

fn non_dominated(f: &ChoiceFunction, f_prime: &ChoiceFunction, cfg: &Config) -> Result<Option<ContractSet>> {
    let n = f.universe_size();
    if n <= cfg.cap {
        return f.first_non_dominated(f_prime, cfg.cap, cfg.execution);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.trials {
        let x = ContractSet::raw(n, rng.gen::<u64>() & full_mask(n));
        if !f.apply(x).is_subset(&f_prime.apply(x)) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::choice::union;

    #[test]
    fn join_and_meet_on_polar2() {
        let sides = polar2();
        let (a, b) = (s(2, &[0]), s(2, &[1]));
        assert_eq!(lattice_join(&sides, &[a]).unwrap(), a);
        assert_eq!(lattice_join(&sides, &[a, b]).unwrap(), b);
        assert_eq!(lattice_meet(&sides, &[a, b]).unwrap(), a);
        assert!(matches!(lattice_join(&sides, &[]), Err(Error::EmptyList)));
        assert!(matches!(lattice_join(&sides, &[s(2, &[0, 1])]), Err(Error::NotStable(_))));
    }

    #[test]
    fn comparisons() {
        let sides = polar2();
        let (a, b) = (s(2, &[0]), s(2, &[1]));
        assert_eq!(blair_compare_stable(&sides, &a, &a).unwrap(), BlairOrdering::Equal);
        assert_eq!(blair_compare_stable(&sides, &a, &b).unwrap(), BlairOrdering::Less);
        assert_eq!(blair_compare_stable(&sides, &b, &a).unwrap(), BlairOrdering::Greater);
        // Opposite under the F side.
        assert_eq!(blair_compare_stable(&sides.swapped(), &a, &b).unwrap(), BlairOrdering::Greater);
    }

    #[test]
    fn unchanged_f_leaves_set_in_place() {
        let sides = utility_market();
        for t in [0, 1, 2] {
            let out = comparative_statics(&sides, &sides.f().clone(), &s(6, &[t]), &Config::default()).unwrap();
            assert_eq!(out.stable, s(6, &[t]));
            assert!(out.original_still_stable);
        }
    }

    #[test]
    fn polar2_weakened_worker() {
        let sides = polar2();
        let f_prime = union(&[sides.f().clone(), sides.g().clone()]).unwrap();
        assert_eq!(f_prime.apply(s(2, &[0, 1])), s(2, &[0, 1]));
        let out = comparative_statics(&sides, &f_prime, &s(2, &[0]), &Config::default()).unwrap();
        assert_eq!((out.start.y(), out.start.z()), (s(2, &[0]), s(2, &[0, 1])));
        assert_eq!(out.stable, s(2, &[1]));
        assert!(blair_leq(sides.g(), &s(2, &[0]), &out.stable).unwrap());
        // b blocks {a} once the worker also accepts b alongside a.
        assert!(!out.original_still_stable);
    }

    #[test]
    fn statics_rejects_non_dominating_weakening() {
        let sides = polar2();
        let err = comparative_statics(&sides, &sides.g().clone(), &s(2, &[0]), &Config::default()).unwrap_err();
        assert!(matches!(err, Error::NotDominated { .. }));
    }
}
