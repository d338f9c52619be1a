use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ChoiceFunction;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec;
use crate::set::{full_mask, ContractSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { seed: u64, trials: usize },
}

impl CheckMode {
    /// Exhaustive up to the cap, sampled with the configured seed above it.
    pub fn auto(universe_size: usize, cfg: &Config) -> Self {
        if universe_size <= cfg.cap {
            CheckMode::Exhaustive
        } else {
            CheckMode::Sampled { seed: cfg.seed, trials: cfg.trials }
        }
    }
}

/// `element ∈ G(big) ∩ small` but `element ∉ G(small)`, with `small ⊆ big`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeredityWitness {
    pub big: ContractSet,
    pub small: ContractSet,
    pub element: usize,
}

impl HeredityWitness {
    pub fn reproduces(&self, cf: &ChoiceFunction) -> bool {
        self.small.is_subset(&self.big)
            && self.small.contains(self.element)
            && cf.apply(self.big).contains(self.element)
            && !cf.apply(self.small).contains(self.element)
    }
}

/// `G(x) ⊆ y ⊆ x` but `G(y) ≠ G(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutcastWitness {
    pub x: ContractSet,
    pub y: ContractSet,
}

impl OutcastWitness {
    pub fn reproduces(&self, cf: &ChoiceFunction) -> bool {
        let gx = cf.apply(self.x);
        gx.is_subset(&self.y) && self.y.is_subset(&self.x) && cf.apply(self.y) != gx
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlottReport {
    pub is_plott: bool,
    pub heredity_witness: Option<HeredityWitness>,
    pub outcast_witness: Option<OutcastWitness>,
    pub mode: CheckMode,
}

/// Checks path independence through its Heredity + Outcast characterisation.
///
/// The exhaustive scan uses single-element steps: Heredity is tested on
/// every `(B, B∖{b})` and Outcast on every `(X, X∖{x})` with `x` rejected.
/// Chaining single removals shows these cover all pairs `A ⊆ B` and all
/// `G(X) ⊆ Y ⊆ X`. Heredity is scanned first; the reported witness is the
/// one with the lowest `B` (resp. `X`) mask.
pub fn is_plott(cf: &ChoiceFunction, mode: CheckMode, cfg: &Config) -> Result<PlottReport> {
    let n = cf.universe_size();
    let (heredity, outcast) = match mode {
        CheckMode::Exhaustive => {
            if n > cfg.cap {
                return Err(Error::CapExceeded { size: n, cap: cfg.cap });
            }
            let h = exec::find_first(cfg.execution, 1 << n, |b| local_heredity(cf, n, b));
            let o =
                if h.is_none() { exec::find_first(cfg.execution, 1 << n, |x| local_outcast(cf, n, x)) } else { None };
            (h, o)
        }
        CheckMode::Sampled { seed, trials } => sampled(cf, n, seed, trials),
    };
    Ok(PlottReport {
        is_plott: heredity.is_none() && outcast.is_none(),
        heredity_witness: heredity,
        outcast_witness: outcast,
        mode,
    })
}

fn local_heredity(cf: &ChoiceFunction, n: usize, b: u64) -> Option<HeredityWitness> {
    let gb = cf.eval(b);
    for i in ContractSet::raw(n, b).iter() {
        let a = b & !(1 << i);
        let lost = gb & a & !cf.eval(a);
        if lost != 0 {
            return Some(HeredityWitness {
                big: ContractSet::raw(n, b),
                small: ContractSet::raw(n, a),
                element: lost.trailing_zeros() as usize,
            });
        }
    }
    None
}

fn local_outcast(cf: &ChoiceFunction, n: usize, x: u64) -> Option<OutcastWitness> {
    let gx = cf.eval(x);
    for i in ContractSet::raw(n, x & !gx).iter() {
        let y = x & !(1 << i);
        if cf.eval(y) != gx {
            return Some(OutcastWitness { x: ContractSet::raw(n, x), y: ContractSet::raw(n, y) });
        }
    }
    None
}

fn sampled(
    cf: &ChoiceFunction,
    n: usize,
    seed: u64,
    trials: usize,
) -> (Option<HeredityWitness>, Option<OutcastWitness>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = full_mask(n);
    for _ in 0..trials {
        let b = rng.gen::<u64>() & full;
        let a = b & rng.gen::<u64>();
        let lost = cf.eval(b) & a & !cf.eval(a);
        if lost != 0 {
            let w = HeredityWitness {
                big: ContractSet::raw(n, b),
                small: ContractSet::raw(n, a),
                element: lost.trailing_zeros() as usize,
            };
            return (Some(w), None);
        }
        let x = rng.gen::<u64>() & full;
        let gx = cf.eval(x);
        let y = gx | (x & rng.gen::<u64>());
        if cf.eval(y) != gx {
            return (None, Some(OutcastWitness { x: ContractSet::raw(n, x), y: ContractSet::raw(n, y) }));
        }
    }
    (None, None)
}
