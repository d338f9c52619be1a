use super::{nil_set, ChoiceFunction, LinearOrder};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec;
use crate::set::{full_mask, ContractSet};

/// A cover of a path-independent function by order maximisers.
///
/// Every order ranks the support (`C ∖ Nil`) and treats the Nil-set as
/// unacceptable; Nil contracts trail the ranking in index order.
#[derive(Clone, Debug)]
pub struct OrderDecomposition {
    universe_size: usize,
    support: ContractSet,
    orders: Vec<LinearOrder>,
}

impl OrderDecomposition {
    pub fn support(&self) -> ContractSet {
        self.support
    }

    pub fn orders(&self) -> &[LinearOrder] {
        &self.orders
    }

    /// Union of the orders; the constant-empty function when there are none.
    pub fn to_choice_function(&self) -> ChoiceFunction {
        if self.orders.is_empty() {
            let order =
                LinearOrder::new((0..self.universe_size).collect(), Some(ContractSet::empty(self.universe_size)))
                    .expect("identity ranking");
            return ChoiceFunction::linear_order(order);
        }
        ChoiceFunction::union_of_orders(self.orders.clone()).expect("orders share a universe")
    }
}

/// Writes `cf` as a union of order maximisers that each pick inside `cf`.
///
/// An order `c1 > c2 > ...` picks inside `cf` exactly when every `c_i` is
/// chosen from `C ∖ {c1, ..., c_{i-1}}` (heredity does the rest), so orders
/// are grown greedily along that chain. Targets `(X, x)` with `x ∈ cf(X)` are
/// visited in mask order; an uncovered target gets a new order that avoids
/// the rest of `X` until `x` is chosen. Redundant orders are then pruned front
/// to back. The cover is sound but carries no minimum-size guarantee.
pub fn decompose_into_orders(cf: &ChoiceFunction, cfg: &Config) -> Result<OrderDecomposition> {
    let n = cf.universe_size();
    if n > cfg.cap {
        return Err(Error::CapExceeded { size: n, cap: cfg.cap });
    }
    let table = cf.tabulate(cfg.cap, cfg.execution)?;
    let nil = nil_set(&table);
    let support = nil.complement();
    let size = 1usize << n;

    let mut rankings: Vec<Vec<usize>> = Vec::new();
    let mut picks: Vec<Vec<u64>> = Vec::new();
    let mut covered = vec![0u64; size];
    if !support.is_empty() {
        for x in 0..size as u64 {
            let missing = table.eval(x) & !covered[x as usize];
            for target in ContractSet::raw(n, missing).iter() {
                if covered[x as usize] >> target & 1 == 1 {
                    continue;
                }
                let ranking = grow_order(&table, n, support.bits(), x, target)?;
                let p = order_picks(&ranking, n, cfg);
                for (c, m) in covered.iter_mut().zip(&p) {
                    *c |= m;
                }
                rankings.push(ranking);
                picks.push(p);
            }
        }
    }

    // Drop orders whose picks are all supplied by the remaining ones.
    let mut keep = vec![true; rankings.len()];
    for i in 0..rankings.len() {
        keep[i] = false;
        let redundant = (0..size).all(|x| {
            let others = (0..rankings.len()).filter(|&j| keep[j]).fold(0, |acc, j| acc | picks[j][x]);
            others == table.eval(x as u64)
        });
        if !redundant {
            keep[i] = true;
        }
    }

    let union_ok = (0..size).all(|x| {
        let u = (0..rankings.len()).filter(|&j| keep[j]).fold(0, |acc, j| acc | picks[j][x]);
        u == table.eval(x as u64)
    });
    if !union_ok {
        return Err(Error::NotPlott("order cover does not reproduce the function".into()));
    }

    let orders = rankings
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(mut ranking, _)| {
            ranking.extend(nil.iter());
            LinearOrder::new(ranking, Some(support))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderDecomposition { universe_size: n, support, orders })
}

/// Best-first ranking of the support in which `target` precedes the rest of `x`.
fn grow_order(table: &ChoiceFunction, n: usize, support: u64, x: u64, target: usize) -> Result<Vec<usize>> {
    let mut remaining = full_mask(n);
    let mut ranking = Vec::with_capacity(support.count_ones() as usize);
    let mut placed = false;
    loop {
        let chosen = table.eval(remaining);
        if chosen == 0 {
            break;
        }
        let next = if placed {
            chosen.trailing_zeros() as usize
        } else if chosen >> target & 1 == 1 {
            placed = true;
            target
        } else {
            let outside = chosen & !x;
            if outside == 0 {
                return Err(Error::NotPlott(format!(
                    "outcast fails: choice from {remaining:#x} lies inside {x:#x} but misses contract {target}"
                )));
            }
            outside.trailing_zeros() as usize
        };
        ranking.push(next);
        remaining &= !(1 << next);
    }
    if remaining & support != 0 || !placed {
        return Err(Error::NotPlott(format!("choice from {remaining:#x} is empty but meets the support")));
    }
    Ok(ranking)
}

/// Mask of the order's maximum over each subset.
fn order_picks(ranking: &[usize], n: usize, cfg: &Config) -> Vec<u64> {
    let mut rank = vec![usize::MAX; n];
    for (r, &c) in ranking.iter().enumerate() {
        rank[c] = r;
    }
    exec::map_range(cfg.execution, 1 << n, |x| {
        ContractSet::raw(n, x).iter().filter(|&c| rank[c] != usize::MAX).min_by_key(|&c| rank[c]).map_or(0, |c| 1 << c)
    })
}
