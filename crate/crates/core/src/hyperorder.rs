//! Hyper-relations between contract sets induced by a choice function.
//!
//! The Blair relation `A ⪯ B` holds when adding `A` to `B` leaves the choice
//! inside `B`. The Lehmann relation `A ≺ B` is its strict, essential-only
//! cousin; a relation satisfying axioms L0-L5 determines a unique
//! path-independent function through `T(A) = A ∖ L(A)`, which
//! [`reconstruct_choice`] materialises.

use std::collections::HashSet;
use std::fmt;

use crate::choice::{is_plott, CheckMode, ChoiceFunction};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec;
use crate::set::{full_mask, ContractSet, Universe};

#[derive(Clone, Debug)]
pub struct BlairRelation {
    cf: ChoiceFunction,
}

impl BlairRelation {
    pub fn new(cf: ChoiceFunction) -> Self {
        BlairRelation { cf }
    }

    pub fn choice(&self) -> &ChoiceFunction {
        &self.cf
    }

    pub fn holds(&self, a: &ContractSet, b: &ContractSet) -> Result<bool> {
        blair_leq(&self.cf, a, b)
    }
}

/// `G(A ∪ B) ⊆ B`.
pub fn blair_leq(cf: &ChoiceFunction, a: &ContractSet, b: &ContractSet) -> Result<bool> {
    a.check_universe(cf.universe_size())?;
    b.check_universe(cf.universe_size())?;
    let joint = cf.apply(*a | *b);
    let holds = joint.is_subset(b);
    debug_assert!(!holds || joint == cf.apply(*b), "Blair relation on a non-path-independent function");
    Ok(holds)
}

#[inline]
pub(crate) fn blair_bits(cf: &ChoiceFunction, a: u64, b: u64) -> bool {
    cf.eval(a | b) & !b == 0
}

/// A hyper-relation given by its set of true ordered pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionalRelation {
    universe_size: usize,
    pairs: HashSet<(u64, u64)>,
}

impl ExtensionalRelation {
    /// Relation holding on exactly the listed pairs.
    pub fn from_true_pairs<I>(universe_size: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ContractSet, ContractSet)>,
    {
        let mut set = HashSet::new();
        for (a, b) in pairs {
            a.check_universe(universe_size)?;
            b.check_universe(universe_size)?;
            set.insert((a.bits(), b.bits()));
        }
        Ok(ExtensionalRelation { universe_size, pairs: set })
    }

    /// Relation from a full truth table; every ordered pair must be present.
    pub fn from_table<I>(universe_size: usize, entries: I, cap: usize) -> Result<Self>
    where
        I: IntoIterator<Item = ((ContractSet, ContractSet), bool)>,
    {
        if universe_size > cap {
            return Err(Error::CapExceeded { size: universe_size, cap });
        }
        let mut seen = HashSet::new();
        let mut pairs = HashSet::new();
        for ((a, b), v) in entries {
            a.check_universe(universe_size)?;
            b.check_universe(universe_size)?;
            seen.insert((a.bits(), b.bits()));
            if v {
                pairs.insert((a.bits(), b.bits()));
            }
        }
        let total = 1usize << (2 * universe_size);
        if seen.len() != total {
            return Err(Error::TableIncomplete { missing: total - seen.len() });
        }
        Ok(ExtensionalRelation { universe_size, pairs })
    }

    /// Parses lines `{A} < {B}`; blank lines and `#` comments are skipped.
    pub fn parse(universe: &Universe, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once('<')
                .ok_or_else(|| Error::Syntax { line: i + 1, msg: format!("expected `{{A}} < {{B}}`, got `{line}`") })?;
            let parse = |s: &str| {
                let s = s.trim();
                if !(s.starts_with('{') && s.ends_with('}')) {
                    return Err(Error::Syntax { line: i + 1, msg: format!("expected a braced set, got `{s}`") });
                }
                universe.parse_set(s)
            };
            pairs.push((parse(a)?, parse(b)?));
        }
        Self::from_true_pairs(universe.len(), pairs)
    }

    /// True pairs, sorted by `(A, B)` mask.
    pub fn format(&self, universe: &Universe) -> String {
        let mut pairs: Vec<_> = self.pairs.iter().copied().collect();
        pairs.sort_unstable();
        pairs
            .into_iter()
            .map(|(a, b)| {
                let a = ContractSet::raw(self.universe_size, a);
                let b = ContractSet::raw(self.universe_size, b);
                format!("{} < {}\n", universe.format_set(&a), universe.format_set(&b))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum LehmannRelation {
    Derived(ChoiceFunction),
    Extensional(ExtensionalRelation),
}

impl LehmannRelation {
    pub fn universe_size(&self) -> usize {
        match self {
            LehmannRelation::Derived(cf) => cf.universe_size(),
            LehmannRelation::Extensional(t) => t.universe_size,
        }
    }

    pub fn holds(&self, a: &ContractSet, b: &ContractSet) -> Result<bool> {
        lehmann_prec(self, a, b)
    }

    #[inline]
    fn prec_bits(&self, a: u64, b: u64) -> bool {
        match self {
            LehmannRelation::Derived(cf) => cf.eval(b) != 0 && cf.eval(a | b) & a == 0,
            LehmannRelation::Extensional(t) => t.pairs.contains(&(a, b)),
        }
    }

    /// `∅ ≺ B`.
    pub fn is_essential(&self, b: &ContractSet) -> bool {
        self.prec_bits(0, b.bits())
    }

    /// Contracts whose singleton is not essential.
    pub fn negligible(&self) -> ContractSet {
        let n = self.universe_size();
        let bits = (0..n).filter(|&c| !self.prec_bits(0, 1 << c)).fold(0, |acc, c| acc | 1 << c);
        ContractSet::raw(n, bits)
    }
}

/// `G(B) ≠ ∅` and `G(A ∪ B) ∩ A = ∅` for derived relations; table lookup otherwise.
pub fn lehmann_prec(rel: &LehmannRelation, a: &ContractSet, b: &ContractSet) -> Result<bool> {
    let n = rel.universe_size();
    a.check_universe(n)?;
    b.check_universe(n)?;
    let holds = rel.prec_bits(a.bits(), b.bits());
    if let LehmannRelation::Derived(cf) = rel {
        debug_assert!(!holds || cf.apply(*a | *b) == cf.apply(*b));
    }
    Ok(holds)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// Irreflexivity.
    L0,
    /// Left weakening.
    L1,
    /// Union.
    L2,
    /// Right strengthening.
    L3,
    /// Cancellation.
    L4,
    /// Domination.
    L5,
    Transitivity,
}

impl Axiom {
    pub const ALL: [Axiom; 7] = [Axiom::L0, Axiom::L1, Axiom::L2, Axiom::L3, Axiom::L4, Axiom::L5, Axiom::Transitivity];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::L0 => "L0 irreflexivity",
            Axiom::L1 => "L1 left weakening",
            Axiom::L2 => "L2 union",
            Axiom::L3 => "L3 right strengthening",
            Axiom::L4 => "L4 cancellation",
            Axiom::L5 => "L5 domination",
            Axiom::Transitivity => "transitivity",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome for one axiom. A failure carries the sets involved, in the
/// order used by [`witness_violates`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomStatus {
    Pass,
    Fail(Vec<ContractSet>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub results: Vec<(Axiom, AxiomStatus)>,
}

impl AxiomReport {
    pub fn overall(&self) -> bool {
        self.results.iter().all(|(_, s)| *s == AxiomStatus::Pass)
    }

    pub fn status(&self, axiom: Axiom) -> &AxiomStatus {
        &self.results.iter().find(|(a, _)| *a == axiom).expect("every axiom is audited").1
    }
}

/// Re-evaluates a failure witness against the relation.
///
/// Layouts: L0 `[A]`; L1 `[A', A, B]`; L2 `[A1, A2, B]`; L3 `[A, B, B']`;
/// L4 `[A, B]`; L5 `[A, B]` with `A` essential and `B` not;
/// transitivity `[A, B, D]`.
pub fn witness_violates(rel: &LehmannRelation, axiom: Axiom, sets: &[ContractSet]) -> bool {
    let p = |a: &ContractSet, b: &ContractSet| rel.prec_bits(a.bits(), b.bits());
    let e = ContractSet::empty(rel.universe_size());
    match (axiom, sets) {
        (Axiom::L0, [a]) => p(a, a),
        (Axiom::L1, [a1, a, b]) => a1.is_subset(a) && p(a, b) && !p(a1, b),
        (Axiom::L2, [a1, a2, b]) => p(a1, b) && p(a2, b) && !p(&(*a1 | *a2), b),
        (Axiom::L3, [a, b, b1]) => b.is_subset(b1) && p(a, b) && !p(a, b1),
        (Axiom::L4, [a, b]) => p(a, &(*a | *b)) && !p(a, b),
        (Axiom::L5, [a, b]) => p(&e, a) && !p(&e, b) && !p(b, a),
        (Axiom::Transitivity, [a, b, d]) => p(a, b) && p(b, d) && !p(a, d),
        _ => false,
    }
}

/// Exhaustively audits L0-L5 plus transitivity. L2 is checked on pairs,
/// which for finite families is equivalent by induction.
pub fn audit_lehmann_axioms(rel: &LehmannRelation, cfg: &Config) -> Result<AxiomReport> {
    let n = rel.universe_size();
    if n > cfg.audit_cap {
        return Err(Error::CapExceeded { size: n, cap: cfg.audit_cap });
    }
    let size = 1u64 << n;
    let full = full_mask(n);
    let rows: Vec<Vec<bool>> =
        exec::map_range(cfg.execution, size, |a| (0..size).map(|b| rel.prec_bits(a, b)).collect());
    let p = |a: u64, b: u64| rows[a as usize][b as usize];
    let sets = |v: &[u64]| v.iter().map(|&m| ContractSet::raw(n, m)).collect::<Vec<_>>();
    let ex = cfg.execution;

    let l0 = exec::find_first(ex, size, |a| p(a, a).then(|| sets(&[a])));
    let l1 = exec::find_first(ex, size, |a| {
        (0..size)
            .filter(|&b| p(a, b))
            .find_map(|b| ContractSet::raw(n, a).subsets().find(|s| !p(s.bits(), b)).map(|s| sets(&[s.bits(), a, b])))
    });
    let l2 = exec::find_first(ex, size, |b| {
        let below: Vec<u64> = (0..size).filter(|&a| p(a, b)).collect();
        below
            .iter()
            .enumerate()
            .find_map(|(i, &a1)| below[i..].iter().find(|&&a2| !p(a1 | a2, b)).map(|&a2| sets(&[a1, a2, b])))
    });
    let l3 = exec::find_first(ex, size, |a| {
        (0..size).filter(|&b| p(a, b)).find_map(|b| {
            ContractSet::raw(n, full & !b)
                .subsets()
                .map(|extra| b | extra.bits())
                .find(|&b1| !p(a, b1))
                .map(|b1| sets(&[a, b, b1]))
        })
    });
    let l4 = exec::find_first(ex, size, |a| (0..size).find(|&b| p(a, a | b) && !p(a, b)).map(|b| sets(&[a, b])));
    let l5 = exec::find_first(ex, size, |a| {
        if !p(0, a) {
            return None;
        }
        (0..size).find(|&b| !p(0, b) && !p(b, a)).map(|b| sets(&[a, b]))
    });
    let trans = exec::find_first(ex, size, |a| {
        (0..size).filter(|&b| p(a, b)).find_map(|b| (0..size).find(|&d| p(b, d) && !p(a, d)).map(|d| sets(&[a, b, d])))
    });

    let status = |w: Option<Vec<ContractSet>>| w.map_or(AxiomStatus::Pass, AxiomStatus::Fail);
    Ok(AxiomReport {
        results: vec![
            (Axiom::L0, status(l0)),
            (Axiom::L1, status(l1)),
            (Axiom::L2, status(l2)),
            (Axiom::L3, status(l3)),
            (Axiom::L4, status(l4)),
            (Axiom::L5, status(l5)),
            (Axiom::Transitivity, status(trans)),
        ],
    })
}

/// `L(A) = D ∪ {c : {c} ≺ A}` with `D` the negligible contracts.
pub fn l_operator(rel: &LehmannRelation, a: &ContractSet) -> Result<ContractSet> {
    let n = rel.universe_size();
    a.check_universe(n)?;
    Ok(ContractSet::raw(n, l_bits(rel, n, a.bits())))
}

fn l_bits(rel: &LehmannRelation, n: usize, a: u64) -> u64 {
    (0..n).filter(|&c| !rel.prec_bits(0, 1 << c) || rel.prec_bits(1 << c, a)).fold(0, |acc, c| acc | 1 << c)
}

/// Rebuilds the choice function `T(A) = A ∖ L(A)` as an explicit table.
pub fn reconstruct_choice(rel: &LehmannRelation, cfg: &Config) -> Result<ChoiceFunction> {
    let report = audit_lehmann_axioms(rel, cfg)?;
    if !report.overall() {
        return Err(Error::AxiomsFail(Box::new(report)));
    }
    let n = rel.universe_size();
    let table = exec::map_range(cfg.execution, 1 << n, |a| ContractSet::raw(n, a & !l_bits(rel, n, a)));
    let cf = ChoiceFunction::explicit(n, table, cfg.cap)?;
    let check = is_plott(&cf, CheckMode::Exhaustive, cfg)?;
    if !check.is_plott {
        return Err(Error::Internal("reconstructed choice is not path-independent".into()));
    }
    Ok(cf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::fixtures::*;
    use crate::choice::{closure_star, union, LinearOrder};
    use crate::set::powerset;

    fn cfg() -> Config {
        Config::default()
    }

    fn polar2_g() -> ChoiceFunction {
        // b > a
        ChoiceFunction::linear_order(LinearOrder::new(vec![1, 0], None).unwrap())
    }

    #[test]
    fn blair_examples() {
        let g = polar2_g();
        assert!(blair_leq(&g, &set(2, &[0]), &set(2, &[1])).unwrap());
        assert!(!blair_leq(&g, &set(2, &[1]), &set(2, &[0])).unwrap());
        for a in powerset(2) {
            assert!(BlairRelation::new(g.clone()).holds(&a, &a).unwrap());
        }
        assert!(blair_leq(&g, &ContractSet::full(3), &set(2, &[0])).is_err());
    }

    #[test]
    fn lehmann_examples() {
        let ord = LehmannRelation::Derived(ord3());
        assert!(lehmann_prec(&ord, &set(3, &[0]), &set(3, &[1])).unwrap());
        for a in powerset(3) {
            assert!(!lehmann_prec(&ord, &a, &a).unwrap());
        }
        let utility = LehmannRelation::Derived(utility_worker());
        assert!(lehmann_prec(&utility, &set(6, &[3]), &set(6, &[1])).unwrap());
    }

    #[test]
    fn l_operator_examples() {
        let ord = LehmannRelation::Derived(ord3());
        assert_eq!(l_operator(&ord, &set(3, &[2])).unwrap(), set(3, &[0, 1]));

        let f = utility_worker();
        let utility = LehmannRelation::Derived(f.clone());
        assert_eq!(utility.negligible(), set(6, &[3]));
        // Negligible arguments map to D.
        assert_eq!(l_operator(&utility, &set(6, &[3])).unwrap(), set(6, &[3]));
        assert_eq!(l_operator(&utility, &ContractSet::empty(6)).unwrap(), set(6, &[3]));
        // Oracle: c belongs to L({b}) iff F({c}) = ∅ or F({c, b}) = {b}.
        let b = set(6, &[1]);
        let oracle: Vec<usize> = (0..6)
            .filter(|&c| f.apply(ContractSet::singleton(6, c)).is_empty() || (c != 1 && f.apply(b.with(c)) == b))
            .collect();
        assert_eq!(oracle, vec![0, 3, 5]);
        assert_eq!(l_operator(&utility, &b).unwrap(), set(6, &[0, 3, 5]));
    }

    #[test]
    fn derived_relations_pass_audit_and_round_trip() {
        let restricted = ChoiceFunction::linear_order(LinearOrder::new(vec![0, 2, 1], Some(set(3, &[0, 1]))).unwrap());
        for cf in [
            ord3(),
            quota(),
            utility_worker(),
            utility_firm(),
            restricted.clone(),
            union(&[ord3(), restricted]).unwrap(),
        ] {
            let rel = LehmannRelation::Derived(cf.clone());
            let report = audit_lehmann_axioms(&rel, &cfg()).unwrap();
            assert!(report.overall(), "{report:?}");
            let back = reconstruct_choice(&rel, &cfg()).unwrap();
            assert!(back.agrees_with(&cf, 16, Default::default()).unwrap());
        }
    }

    #[test]
    fn all_negligible_reconstructs_constant_empty() {
        let empty = ChoiceFunction::linear_order(LinearOrder::new(vec![0, 1, 2], Some(ContractSet::empty(3))).unwrap());
        let rel = LehmannRelation::Derived(empty);
        assert_eq!(rel.negligible(), ContractSet::full(3));
        let t = reconstruct_choice(&rel, &cfg()).unwrap();
        assert!(powerset(3).all(|a| t.apply(a).is_empty()));
    }

    #[test]
    fn fabricated_cancellation_breach_is_reported() {
        // {a} ≺ {a,b} recorded, {a} ≺ {b} absent.
        let rel = LehmannRelation::Extensional(
            ExtensionalRelation::from_true_pairs(2, [(set(2, &[0]), set(2, &[0, 1]))]).unwrap(),
        );
        let report = audit_lehmann_axioms(&rel, &cfg()).unwrap();
        assert!(!report.overall());
        let AxiomStatus::Fail(w) = report.status(Axiom::L4) else { panic!("L4 should fail") };
        assert_eq!(w, &vec![set(2, &[0]), set(2, &[1])]);
        for (axiom, status) in &report.results {
            if let AxiomStatus::Fail(w) = status {
                assert!(witness_violates(&rel, *axiom, w), "{axiom}");
            }
        }
        assert!(matches!(reconstruct_choice(&rel, &cfg()), Err(Error::AxiomsFail(_))));
    }

    #[test]
    fn extensional_copy_of_derived_behaves_identically() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let derived = LehmannRelation::Derived(ord3());
        let pairs = powerset(3)
            .flat_map(|a| powerset(3).map(move |b| (a, b)))
            .filter(|(a, b)| lehmann_prec(&derived, a, b).unwrap());
        let ext = ExtensionalRelation::from_true_pairs(3, pairs).unwrap();
        let text = ext.format(&u);
        assert!(text.contains("{x} < {y}\n"));
        let parsed = ExtensionalRelation::parse(&u, &text).unwrap();
        assert_eq!(parsed, ext);
        let rel = LehmannRelation::Extensional(parsed);
        assert!(audit_lehmann_axioms(&rel, &cfg()).unwrap().overall());
        assert!(reconstruct_choice(&rel, &cfg()).unwrap().agrees_with(&ord3(), 16, Default::default()).unwrap());
    }

    #[test]
    fn partial_tables_are_rejected() {
        let entries = [((set(1, &[]), set(1, &[0])), true)];
        assert!(matches!(ExtensionalRelation::from_table(1, entries, 8), Err(Error::TableIncomplete { missing: 3 })));
        let u = Universe::new(["a"]).unwrap();
        assert!(ExtensionalRelation::parse(&u, "{a} {a}").is_err());
    }

    #[test]
    fn audit_cap_is_enforced() {
        let big = ChoiceFunction::linear_order(LinearOrder::new((0..9).collect(), None).unwrap());
        assert!(matches!(
            audit_lehmann_axioms(&LehmannRelation::Derived(big), &cfg()),
            Err(Error::CapExceeded { size: 9, cap: 8 })
        ));
    }

    fn plott_corpus() -> Vec<ChoiceFunction> {
        let restricted = ChoiceFunction::linear_order(LinearOrder::new(vec![1, 0, 2], Some(set(3, &[1, 2]))).unwrap());
        vec![ord3(), quota(), union(&[quota(), restricted.clone()]).unwrap(), restricted]
    }

    #[test]
    fn blair_laws_hold_exhaustively() {
        for g in plott_corpus() {
            let all: Vec<_> = powerset(3).collect();
            for &a in &all {
                for &b in &all {
                    let ab = blair_leq(&g, &a, &b).unwrap();
                    // Via closure.
                    assert_eq!(ab, a.is_subset(&closure_star(&g, &b).unwrap()));
                    let rel = LehmannRelation::Derived(g.clone());
                    if lehmann_prec(&rel, &a, &b).unwrap() {
                        assert!(ab);
                    }
                    for &d in &all {
                        if ab && blair_leq(&g, &b, &d).unwrap() {
                            assert!(blair_leq(&g, &a, &d).unwrap());
                        }
                        if ab && blair_leq(&g, &d, &b).unwrap() {
                            assert!(blair_leq(&g, &(a | d), &b).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn l_operator_monotone_under_cover() {
        // A ⊆ L(A) ∪ B implies L(A) ⊆ L(B).
        for g in plott_corpus() {
            let rel = LehmannRelation::Derived(g);
            for a in powerset(3) {
                let la = l_operator(&rel, &a).unwrap();
                for b in powerset(3) {
                    if a.is_subset(&(la | b)) {
                        assert!(la.is_subset(&l_operator(&rel, &b).unwrap()));
                    }
                }
            }
        }
    }
}
