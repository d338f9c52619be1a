use super::{SemiStablePair, Side, SidePair, StablePair};
use crate::error::{Error, Result};
use crate::set::{ContractSet, Universe};

/// One round of generalised deferred acceptance: `F` offers `F(Z)`, `G`
/// keeps `G(F(Z))`, and the rejected offers leave `Z`.
///
/// `Φ(Y, Z) = (Y ∪ F(Z), (Z ∖ F(Z)) ∪ G(F(Z)))`.
pub fn phi_step(sides: &SidePair, p: &SemiStablePair) -> Result<SemiStablePair> {
    sides.require_certified()?;
    p.validate(sides)?;
    let (next, _, _) = step(sides, p)?;
    Ok(next)
}

fn step(sides: &SidePair, p: &SemiStablePair) -> Result<(SemiStablePair, ContractSet, ContractSet)> {
    let offer = sides.f().apply(p.z);
    let accepted = sides.g().apply(offer);
    let next = SemiStablePair::raw(p.y | offer, (p.z - offer) | accepted);
    next.validate(sides).map_err(|e| Error::Internal(format!("Φ left the semi-stable pairs: {e}")))?;
    if !p.le(&next) {
        return Err(Error::Internal("Φ is not monotone".into()));
    }
    Ok((next, offer, accepted))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub pair: SemiStablePair,
    /// `F(Z)`.
    pub offer: ContractSet,
    /// `G(F(Z))`.
    pub accepted: ContractSet,
}

/// Snapshots from the starting pair up to and including the fixpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessTrace {
    pub steps: Vec<TraceStep>,
    pub terminated_at: usize,
    pub result: StablePair,
}

impl ProcessTrace {
    /// `step k: Y={..} Z={..} F(Z)={..} G(F(Z))={..}`, one line per snapshot.
    pub fn export(&self, universe: &Universe) -> String {
        self.steps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                format!(
                    "step {k}: Y={} Z={} F(Z)={} G(F(Z))={}\n",
                    universe.format_set(&s.pair.y),
                    universe.format_set(&s.pair.z),
                    universe.format_set(&s.offer),
                    universe.format_set(&s.accepted)
                )
            })
            .collect()
    }
}

/// Iterates `Φ` from `p0` to its fixpoint.
///
/// `Z` can only shrink, and once it stops shrinking `Y` settles after one
/// more round, so at most `|C| + 2` snapshots are recorded; exceeding that
/// is reported as an internal error.
pub fn run_to_fixpoint(sides: &SidePair, p0: &SemiStablePair) -> Result<ProcessTrace> {
    sides.require_certified()?;
    p0.validate(sides)?;
    let bound = sides.universe_size() + 2;
    let mut steps = Vec::with_capacity(bound);
    let mut cur = *p0;
    loop {
        let (next, offer, accepted) = step(sides, &cur)?;
        steps.push(TraceStep { pair: cur, offer, accepted });
        if next == cur {
            break;
        }
        if steps.len() >= bound {
            return Err(Error::Internal(format!("Φ did not settle within {bound} snapshots")));
        }
        cur = next;
    }
    let last = steps.last().expect("at least one snapshot");
    // At a fixpoint F(Z) = G(F(Z)) ⊆ Y, and outcast gives G(Y) = F(Z).
    if last.offer != last.accepted {
        return Err(Error::Internal("fixpoint with F(Z) ≠ G(F(Z))".into()));
    }
    let set = sides.g().apply(cur.y);
    if set != last.offer {
        return Err(Error::Internal("fixpoint with G(Y) ≠ F(Z)".into()));
    }
    let terminated_at = steps.len() - 1;
    Ok(ProcessTrace { steps, terminated_at, result: StablePair { y: cur.y, z: cur.z, set } })
}

/// `σ(Y, Z)`: the stable set reached from a semi-stable pair.
pub fn sigma(sides: &SidePair, p: &SemiStablePair) -> Result<ContractSet> {
    Ok(run_to_fixpoint(sides, p)?.result.set)
}

/// The stable set best for `favored` (and worst for the other side).
pub fn side_optimal(sides: &SidePair, favored: Side) -> Result<ContractSet> {
    match favored {
        Side::F => sigma(sides, &SemiStablePair::bottom(sides)),
        Side::G => {
            let swapped = sides.swapped();
            sigma(&swapped, &SemiStablePair::bottom(&swapped))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{is_stable_set, set_to_pair};
    use super::*;

    #[test]
    fn polar2_single_step() {
        let sides = polar2();
        let p = phi_step(&sides, &SemiStablePair::bottom(&sides)).unwrap();
        assert_eq!((p.y(), p.z()), (s(2, &[0]), s(2, &[0, 1])));
        // Already fixed.
        assert_eq!(phi_step(&sides, &p).unwrap(), p);
    }

    #[test]
    fn polar2_extremes() {
        let sides = polar2();
        let trace = run_to_fixpoint(&sides, &SemiStablePair::bottom(&sides)).unwrap();
        assert_eq!(trace.result.set, s(2, &[0]));
        assert!(trace.steps.len() <= 4);
        assert_eq!(side_optimal(&sides, Side::F).unwrap(), s(2, &[0]));
        assert_eq!(side_optimal(&sides, Side::G).unwrap(), s(2, &[1]));
    }

    #[test]
    fn utility_market_first_offer_is_e() {
        // F(C) = {e}: e carries the largest worker utility (30); G({e}) = ∅.
        let sides = utility_market();
        let p = phi_step(&sides, &SemiStablePair::bottom(&sides)).unwrap();
        assert_eq!(p.y(), s(6, &[4]));
        assert_eq!(p.z(), s(6, &[0, 1, 2, 3, 5]));
    }

    #[test]
    fn utility_market_trace() {
        let sides = utility_market();
        let u = Universe::new(["a", "b", "c", "d", "e", "f"]).unwrap();
        let trace = run_to_fixpoint(&sides, &SemiStablePair::bottom(&sides)).unwrap();
        assert_eq!(
            trace.export(&u),
            "step 0: Y={} Z={a,b,c,d,e,f} F(Z)={e} G(F(Z))={}\n\
             step 1: Y={e} Z={a,b,c,d,f} F(Z)={c} G(F(Z))={c}\n\
             step 2: Y={c,e} Z={a,b,c,d,f} F(Z)={c} G(F(Z))={c}\n"
        );
        assert_eq!(trace.terminated_at, 2);
        assert_eq!(trace.result.set, s(6, &[2]));
    }

    #[test]
    fn stable_pairs_are_fixed() {
        let sides = utility_market();
        for t in [0, 1, 2] {
            let p = set_to_pair(&sides, &s(6, &[t])).unwrap();
            let start = SemiStablePair::new(&sides, p.y, p.z).unwrap();
            let trace = run_to_fixpoint(&sides, &start).unwrap();
            assert_eq!(trace.steps.len(), 1);
            assert_eq!(trace.result.set, s(6, &[t]));
        }
    }

    #[test]
    fn uncertified_sides_are_refused() {
        let sides = complements_market();
        assert!(matches!(run_to_fixpoint(&sides, &SemiStablePair::bottom(&sides)), Err(Error::NotCertified(_))));
        assert!(matches!(phi_step(&sides, &SemiStablePair::bottom(&sides)), Err(Error::NotCertified(_))));
    }

    #[test]
    fn foreign_pair_is_rejected() {
        let sides = polar2();
        // Semi-stable for the swapped market only.
        let swapped = sides.swapped();
        let p = SemiStablePair::new(&swapped, s(2, &[1]), s(2, &[0, 1])).unwrap();
        assert!(matches!(phi_step(&sides, &p), Err(Error::NotSemiStable(_))));
        assert!(is_stable_set(&sides, &s(2, &[1])).unwrap().is_stable());
    }
}
