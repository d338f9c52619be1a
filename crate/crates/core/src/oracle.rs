//! Brute-force ground truth: exhaustive stable-set enumeration, Blair
//! matrices, lattice verification and seeded instance generation.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::choice::{ChoiceFunction, LinearOrder};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec::{filter_range, map_range};
use crate::hyperorder::blair_bits;
use crate::set::{ContractSet, Universe};
use crate::stability::{
    is_stable_bits, lattice_join, lattice_meet, phi_step, set_to_pair, side_optimal, SemiStablePair, Side, SidePair,
};

/// Name of the generator behind [`generate_instance`]; part of every fingerprint.
pub const GENERATOR: &str = "chacha8";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableSetCatalog {
    pub universe_size: usize,
    /// Hash of both choice tables and the generator name.
    pub fingerprint: String,
    /// Ascending by bit pattern.
    pub stable_sets: Vec<ContractSet>,
    /// `blair_g[i][j]` iff `S_i ⪯_G S_j`.
    pub blair_g: Vec<Vec<bool>>,
    /// `blair_f[i][j]` iff `S_i ⪯_F S_j`.
    pub blair_f: Vec<Vec<bool>>,
}

impl StableSetCatalog {
    pub fn len(&self) -> usize {
        self.stable_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stable_sets.is_empty()
    }

    pub fn index_of(&self, s: &ContractSet) -> Option<usize> {
        self.stable_sets.iter().position(|t| t == s)
    }

    /// Minimum under `⪯_G` (the `F`-optimal set), if the order has one.
    pub fn g_minimum(&self) -> Option<usize> {
        (0..self.len()).find(|&i| (0..self.len()).all(|j| self.blair_g[i][j]))
    }

    /// Maximum under `⪯_G` (the `G`-optimal set).
    pub fn g_maximum(&self) -> Option<usize> {
        (0..self.len()).find(|&i| (0..self.len()).all(|j| self.blair_g[j][i]))
    }

    /// Text form used for golden files:
    ///
    /// ```text
    /// fingerprint <hex>
    /// stable 2
    /// S0 {a}
    /// S1 {b}
    /// G-order
    ///   1 1
    ///   0 1
    /// F-order
    ///   ...
    /// ```
    pub fn export(&self, universe: &Universe) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fingerprint {}", self.fingerprint);
        let _ = writeln!(out, "stable {}", self.len());
        for (i, s) in self.stable_sets.iter().enumerate() {
            let _ = writeln!(out, "S{i} {}", universe.format_set(s));
        }
        for (name, m) in [("G-order", &self.blair_g), ("F-order", &self.blair_f)] {
            let _ = writeln!(out, "{name}");
            for row in m {
                let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
                let _ = writeln!(out, "  {}", cells.join(" "));
            }
        }
        out
    }
}

fn fingerprint(sides: &SidePair) -> String {
    let n = sides.universe_size();
    let mut h = Sha256::new();
    h.update(GENERATOR.as_bytes());
    h.update((n as u64).to_le_bytes());
    for cf in [sides.f(), sides.g()] {
        for x in 0..1u64 << n {
            h.update(cf.eval(x).to_le_bytes());
        }
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Tests every subset of `C` for stability. Works on uncertified sides too.
pub fn enumerate_stable_sets(sides: &SidePair, cfg: &Config) -> Result<StableSetCatalog> {
    let n = sides.universe_size();
    if n > cfg.cap {
        return Err(Error::CapExceeded { size: n, cap: cfg.cap });
    }
    let stable_sets: Vec<ContractSet> = filter_range(cfg.execution, 1u64 << n, |s| is_stable_bits(sides, s))
        .into_iter()
        .map(|b| ContractSet::raw(n, b))
        .collect();
    let k = stable_sets.len() as u64;
    let matrix = |cf: &ChoiceFunction| -> Vec<Vec<bool>> {
        map_range(cfg.execution, k, |i| {
            stable_sets.iter().map(|t| blair_bits(cf, stable_sets[i as usize].bits(), t.bits())).collect()
        })
    };
    let blair_g = matrix(sides.g());
    let blair_f = matrix(sides.f());
    Ok(StableSetCatalog { universe_size: n, fingerprint: fingerprint(sides), stable_sets, blair_g, blair_f })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeFailure {
    /// `i ⪯ j` and `j ⪯ i` with `i ≠ j`.
    NotAntisymmetric(usize, usize),
    NotTransitive(usize, usize, usize),
    /// `i ⪯_G j` disagrees with `j ⪯_F i`.
    NotPolarized(usize, usize),
    NoJoin(usize, usize),
    NoMeet(usize, usize),
    /// Engine result differs from the matrix (pair, expected index, engine set).
    JoinMismatch(usize, usize, usize, ContractSet),
    MeetMismatch(usize, usize, usize, ContractSet),
    /// `side_optimal` is not the matching extreme of the catalog.
    ExtremeMismatch(Side, ContractSet),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LatticeReport {
    pub pairs_checked: usize,
    pub failures: Vec<LatticeFailure>,
}

impl LatticeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Least upper bound of `i, j` read off a partial-order matrix.
fn matrix_lub(m: &[Vec<bool>], i: usize, j: usize) -> Option<usize> {
    let upper: Vec<usize> = (0..m.len()).filter(|&k| m[i][k] && m[j][k]).collect();
    upper.iter().copied().find(|&k| upper.iter().all(|&u| m[k][u]))
}

fn matrix_glb(m: &[Vec<bool>], i: usize, j: usize) -> Option<usize> {
    let lower: Vec<usize> = (0..m.len()).filter(|&k| m[k][i] && m[k][j]).collect();
    lower.iter().copied().find(|&k| lower.iter().all(|&l| m[l][k]))
}

/// Checks the catalog's `⪯_G` matrix is a polarized lattice order and that
/// the engine's join, meet and side-optimal sets agree with it.
pub fn verify_lattice(catalog: &StableSetCatalog, sides: &SidePair) -> Result<LatticeReport> {
    let k = catalog.len();
    let (g, f) = (&catalog.blair_g, &catalog.blair_f);
    let mut report = LatticeReport::default();
    let fail = &mut report.failures;
    for i in 0..k {
        for j in 0..k {
            if i != j && g[i][j] && g[j][i] {
                fail.push(LatticeFailure::NotAntisymmetric(i, j));
            }
            if g[i][j] != f[j][i] {
                fail.push(LatticeFailure::NotPolarized(i, j));
            }
            for l in 0..k {
                if g[i][j] && g[j][l] && !g[i][l] {
                    fail.push(LatticeFailure::NotTransitive(i, j, l));
                }
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            report.pairs_checked += 1;
            let pair = [catalog.stable_sets[i], catalog.stable_sets[j]];
            match matrix_lub(g, i, j) {
                None => fail.push(LatticeFailure::NoJoin(i, j)),
                Some(want) => {
                    let got = lattice_join(sides, &pair)?;
                    if got != catalog.stable_sets[want] {
                        fail.push(LatticeFailure::JoinMismatch(i, j, want, got));
                    }
                }
            }
            match matrix_glb(g, i, j) {
                None => fail.push(LatticeFailure::NoMeet(i, j)),
                Some(want) => {
                    let got = lattice_meet(sides, &pair)?;
                    if got != catalog.stable_sets[want] {
                        fail.push(LatticeFailure::MeetMismatch(i, j, want, got));
                    }
                }
            }
        }
    }
    if k > 0 {
        for (side, extreme) in [(Side::F, catalog.g_minimum()), (Side::G, catalog.g_maximum())] {
            let got = side_optimal(sides, side)?;
            if extreme.map(|e| catalog.stable_sets[e]) != Some(got) {
                fail.push(LatticeFailure::ExtremeMismatch(side, got));
            }
        }
    }
    Ok(report)
}

/// Number of random orders united on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SideSpec {
    pub f_orders: usize,
    pub g_orders: usize,
}

impl SideSpec {
    pub fn new(f_orders: usize, g_orders: usize) -> Self {
        SideSpec { f_orders, g_orders }
    }
}

/// A uniformly shuffled ranking with each contract acceptable with probability 3/4.
pub fn random_order<R: Rng>(rng: &mut R, n: usize) -> LinearOrder {
    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.shuffle(rng);
    let acceptable = ContractSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.75))).expect("in range");
    LinearOrder::new(ranking, Some(acceptable)).expect("permutation")
}

/// Union of `k` random orders; path-independent by construction.
pub fn random_plott_choice<R: Rng>(rng: &mut R, n: usize, k: usize) -> ChoiceFunction {
    let orders = (0..k.max(1)).map(|_| random_order(rng, n)).collect();
    ChoiceFunction::union_of_orders(orders).expect("same universe")
}

/// Deterministic random market; both sides re-verified path-independent.
pub fn generate_instance(seed: u64, universe_size: usize, spec: SideSpec, cfg: &Config) -> Result<SidePair> {
    if universe_size > cfg.cap {
        return Err(Error::CapExceeded { size: universe_size, cap: cfg.cap });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_plott_choice(&mut rng, universe_size, spec.f_orders);
    let g = random_plott_choice(&mut rng, universe_size, spec.g_orders);
    SidePair::certify(f, g, cfg).map_err(|e| Error::Internal(format!("generated side failed certification: {e}")))
}

/// Semi-stable pairs drawn from a pool seeded with `(∅, C)` and the stable
/// pairs, grown by `Φ` images, pairwise combinations and rejection samples.
pub fn sample_semi_stable_pairs<R: Rng>(
    sides: &SidePair,
    stable: &[ContractSet],
    rng: &mut R,
    count: usize,
) -> Result<Vec<SemiStablePair>> {
    let n = sides.universe_size();
    let full = sides.full();
    let mut pool = vec![SemiStablePair::bottom(sides)];
    for s in stable {
        let p = set_to_pair(sides, s)?;
        pool.push(SemiStablePair::new(sides, p.y, p.z)?);
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let pick = match rng.gen_range(0..3) {
            0 => {
                let p = pool[rng.gen_range(0..pool.len())];
                phi_step(sides, &p)?
            }
            1 => {
                let a = pool[rng.gen_range(0..pool.len())];
                let b = pool[rng.gen_range(0..pool.len())];
                a.combine(&b)
            }
            _ => {
                let mut found = None;
                for _ in 0..64 {
                    let y = ContractSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.5))).expect("in range");
                    let keep = ContractSet::from_indices(n, y.iter().filter(|_| rng.gen_bool(0.5))).expect("in range");
                    let z = (full - y) | keep;
                    if let Ok(p) = SemiStablePair::new(sides, y, z) {
                        found = Some(p);
                        break;
                    }
                }
                match found {
                    Some(p) => p,
                    None => continue,
                }
            }
        };
        pool.push(pick);
        out.push(pick);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{is_plott, CheckMode};
    use crate::stability::fixtures::{complements_market, polar2, s, utility_market};

    #[test]
    fn example_catalogs() {
        let cfg = Config::default();
        assert!(enumerate_stable_sets(&complements_market(), &cfg).unwrap().is_empty());

        let polar = enumerate_stable_sets(&polar2(), &cfg).unwrap();
        assert_eq!(polar.stable_sets, vec![s(2, &[0]), s(2, &[1])]);
        assert_eq!(polar.blair_g, vec![vec![true, true], vec![false, true]]);

        let one = enumerate_stable_sets(&utility_market(), &cfg).unwrap();
        assert_eq!(one.stable_sets, vec![s(6, &[0]), s(6, &[1]), s(6, &[2])]);
    }

    #[test]
    fn polar2_lattice_is_a_chain() {
        let sides = polar2();
        let cat = enumerate_stable_sets(&sides, &Config::default()).unwrap();
        let report = verify_lattice(&cat, &sides).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.pairs_checked, 3);
        assert_eq!((cat.g_minimum(), cat.g_maximum()), (Some(0), Some(1)));
    }

    #[test]
    fn export_format() {
        let sides = polar2();
        let cat = enumerate_stable_sets(&sides, &Config::default()).unwrap();
        let u = Universe::new(["a", "b"]).unwrap();
        let text = cat.export(&u);
        let body: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(body, ["stable 2", "S0 {a}", "S1 {b}", "G-order", "  1 1", "  0 1", "F-order", "  1 0", "  1 1"]);
        assert_eq!(cat.fingerprint.len(), 16);
    }

    #[test]
    fn cap_is_enforced() {
        let sides = generate_instance(1, 6, SideSpec::new(1, 1), &Config::default()).unwrap();
        let err = enumerate_stable_sets(&sides, &Config::default().with_cap(5)).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { size: 6, cap: 5 }));
    }

    #[test]
    fn generation_is_deterministic_and_plott() {
        let cfg = Config::default();
        for seed in 0..200 {
            let a = generate_instance(seed, 6, SideSpec::new(2, 3), &cfg).unwrap();
            let b = generate_instance(seed, 6, SideSpec::new(2, 3), &cfg).unwrap();
            assert!(a.f().agrees_with(b.f(), cfg.cap, cfg.execution).unwrap());
            assert!(a.g().agrees_with(b.g(), cfg.cap, cfg.execution).unwrap());
            assert!(is_plott(a.f(), CheckMode::Exhaustive, &cfg).unwrap().is_plott);
        }
    }

    #[test]
    fn single_order_sides_are_single_valued() {
        let sides = generate_instance(9, 5, SideSpec::new(1, 1), &Config::default()).unwrap();
        for x in crate::set::powerset(5) {
            assert!(sides.f().apply(x).len() <= 1);
            assert!(sides.g().apply(x).len() <= 1);
        }
    }

    #[test]
    fn parallel_and_sequential_scans_agree() {
        for seed in 0..20 {
            let sides = generate_instance(seed, 8, SideSpec::new(2, 2), &Config::default()).unwrap();
            let par = enumerate_stable_sets(&sides, &Config::default()).unwrap();
            let seq = enumerate_stable_sets(&sides, &Config::default().sequential()).unwrap();
            assert_eq!(par, seq);
        }
    }

    #[test]
    fn sampled_pairs_are_semi_stable() {
        let sides = generate_instance(3, 7, SideSpec::new(2, 2), &Config::default()).unwrap();
        let cat = enumerate_stable_sets(&sides, &Config::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pairs = sample_semi_stable_pairs(&sides, &cat.stable_sets, &mut rng, 100).unwrap();
        assert_eq!(pairs.len(), 100);
        for p in pairs {
            p.validate(&sides).unwrap();
        }
    }
}
