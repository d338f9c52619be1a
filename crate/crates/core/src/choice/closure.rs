use super::ChoiceFunction;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::set::{full_mask, ContractSet};

/// Largest superset of `X` with the same choice as `X`.
///
/// For a path-independent `G` this is `X ∪ {c ∉ X : G(X ∪ c) = G(X)}`; the
/// result is meaningless for other functions.
pub fn closure_star(cf: &ChoiceFunction, x: &ContractSet) -> Result<ContractSet> {
    x.check_universe(cf.universe_size())?;
    Ok(ContractSet::raw(cf.universe_size(), closure_bits(cf, x.bits())))
}

pub(crate) fn closure_bits(cf: &ChoiceFunction, x: u64) -> u64 {
    let n = cf.universe_size();
    let gx = cf.eval(x);
    let outside = full_mask(n) & !x;
    ContractSet::raw(n, outside).iter().filter(|&c| cf.eval(x | 1 << c) == gx).fold(x, |acc, c| acc | 1 << c)
}

/// `G*(X)` for every mask `X`, indexed by mask.
pub fn closure_table(cf: &ChoiceFunction, cap: usize, exec: Execution) -> Result<Vec<ContractSet>> {
    let n = cf.universe_size();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    Ok(exec::map_range(exec, 1 << n, |x| ContractSet::raw(n, closure_bits(cf, x))))
}

/// Contracts that never influence a choice: `G*(∅)`.
pub fn nil_set(cf: &ChoiceFunction) -> ContractSet {
    ContractSet::raw(cf.universe_size(), closure_bits(cf, 0))
}

/// Recovers `G(X)` from the closure as `{x ∈ X : x ∉ G*(X ∖ x)}`.
pub fn invert_closure(cf: &ChoiceFunction, x: &ContractSet) -> Result<ContractSet> {
    x.check_universe(cf.universe_size())?;
    let kept =
        x.iter().filter(|&c| closure_bits(cf, x.bits() & !(1 << c)) >> c & 1 == 0).fold(0, |acc, c| acc | 1 << c);
    Ok(ContractSet::raw(cf.universe_size(), kept))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::choice::LinearOrder;
    use crate::set::powerset;

    // Definition scan: union of every Y ⊇ X with G(Y) = G(X).
    fn closure_by_definition(cf: &ChoiceFunction, x: ContractSet) -> ContractSet {
        let gx = cf.apply(x);
        powerset(cf.universe_size()).filter(|y| x.is_subset(y) && cf.apply(*y) == gx).fold(x, |acc, y| acc | y)
    }

    #[test]
    fn closure_of_y_under_ord3_adds_x() {
        let got = closure_star(&ord3(), &set(3, &[1])).unwrap();
        assert_eq!(got, set(3, &[0, 1]));
        assert_eq!(got, closure_by_definition(&ord3(), set(3, &[1])));
    }

    #[test]
    fn closure_of_full_universe_is_itself() {
        for cf in [ord3(), quota(), utility_worker()] {
            let full = ContractSet::full(cf.universe_size());
            assert_eq!(closure_star(&cf, &full).unwrap(), full);
        }
    }

    #[test]
    fn utility_worker_nil_set_is_d() {
        // Singleton scan: d (index 3) is the only contract with F({c}) = ∅.
        let f = utility_worker();
        let scan: Vec<usize> = (0..6).filter(|&c| f.apply(ContractSet::singleton(6, c)).is_empty()).collect();
        assert_eq!(scan, vec![3]);
        assert_eq!(closure_star(&f, &ContractSet::empty(6)).unwrap(), set(6, &[3]));
        assert_eq!(nil_set(&f), set(6, &[3]));
    }

    #[test]
    fn nil_set_of_orders() {
        assert!(nil_set(&ord3()).is_empty());
        let restricted = ChoiceFunction::linear_order(LinearOrder::new(vec![2, 1, 0], Some(set(3, &[1]))).unwrap());
        assert_eq!(nil_set(&restricted), set(3, &[0, 2]));
    }

    #[test]
    fn inversion_recovers_choice() {
        assert_eq!(invert_closure(&ord3(), &ContractSet::full(3)).unwrap(), set(3, &[2]));
        assert_eq!(invert_closure(&ord3(), &ContractSet::empty(3)).unwrap(), ContractSet::empty(3));
        assert_eq!(invert_closure(&quota(), &ContractSet::full(3)).unwrap(), set(3, &[0, 1]));
        for cf in [ord3(), quota(), utility_worker(), utility_firm()] {
            for x in powerset(cf.universe_size()) {
                assert_eq!(invert_closure(&cf, &x).unwrap(), cf.apply(x));
                assert_eq!(closure_star(&cf, &x).unwrap(), closure_by_definition(&cf, x));
            }
        }
    }

    #[test]
    fn closure_table_matches_pointwise() {
        let t = closure_table(&utility_firm(), 16, Execution::Parallel).unwrap();
        for x in powerset(6) {
            assert_eq!(t[x.bits() as usize], closure_star(&utility_firm(), &x).unwrap());
        }
        assert!(closure_star(&ord3(), &ContractSet::full(2)).is_err());
    }
}
