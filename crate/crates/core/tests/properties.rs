use plott_core::choice::{closure_star, invert_closure, is_plott, nil_set, union, CheckMode};
use plott_core::hyperorder::blair_leq;
use plott_core::oracle::{enumerate_stable_sets, generate_instance, random_plott_choice, SideSpec};
use plott_core::stability::{is_stable_set, phi_step, run_to_fixpoint, set_to_pair};
use plott_core::{Config, ContractSet, MarketInstance, SemiStablePair, SidePair};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn market() -> impl Strategy<Value = SidePair> {
    (any::<u64>(), 2usize..=7, 1usize..=3, 1usize..=3)
        .prop_map(|(seed, n, f, g)| generate_instance(seed, n, SideSpec::new(f, g), &Config::default()).unwrap())
}

fn with_sets(k: usize) -> impl Strategy<Value = (SidePair, Vec<ContractSet>)> {
    market().prop_flat_map(move |sides| {
        let n = sides.universe_size();
        let sets = proptest::collection::vec(0u64..(1 << n), k)
            .prop_map(move |v| v.into_iter().map(|b| ContractSet::from_bits(n, b).unwrap()).collect());
        (Just(sides), sets)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn choice_is_selective_idempotent_and_path_independent((sides, xs) in with_sets(2)) {
        let (x, y) = (xs[0], xs[1]);
        for g in [sides.f(), sides.g()] {
            prop_assert!(g.apply(x).is_subset(&x));
            prop_assert_eq!(g.apply(g.apply(x)), g.apply(x));
            prop_assert_eq!(g.apply(x | y), g.apply(g.apply(x) | y));
            // Sub-additivity.
            prop_assert!(g.apply(x | y).is_subset(&(g.apply(x) | g.apply(y))));
        }
    }

    #[test]
    fn closure_axioms_inversion_and_nil((sides, xs) in with_sets(2)) {
        let (x, y) = (xs[0], xs[0] | xs[1]);
        for g in [sides.f(), sides.g()] {
            let cx = closure_star(g, &x).unwrap();
            prop_assert!(x.is_subset(&cx));
            prop_assert_eq!(closure_star(g, &cx).unwrap(), cx);
            prop_assert!(cx.is_subset(&closure_star(g, &y).unwrap()));
            prop_assert_eq!(invert_closure(g, &x).unwrap(), g.apply(x));
            let nil = nil_set(g);
            prop_assert_eq!(g.apply(x - nil), g.apply(x));
            prop_assert_eq!(g.apply(x | nil), g.apply(x));
        }
    }

    #[test]
    fn union_of_plott_functions_is_plott(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_plott_choice(&mut rng, n, 2);
        let b = random_plott_choice(&mut rng, n, 1);
        let u = union(&[a.clone(), b.clone()]).unwrap();
        prop_assert!(is_plott(&u, CheckMode::Exhaustive, &Config::default()).unwrap().is_plott);
        for x in plott_core::set::powerset(n) {
            prop_assert_eq!(u.apply(x), a.apply(x) | b.apply(x));
        }
    }

    #[test]
    fn phi_keeps_pairs_semi_stable_and_grows(sides in market()) {
        let mut p = SemiStablePair::bottom(&sides);
        for _ in 0..=sides.universe_size() + 1 {
            let next = phi_step(&sides, &p).unwrap();
            next.validate(&sides).unwrap();
            prop_assert!(p.le(&next));
            prop_assert!(p.y().is_subset(&next.y()) && next.z().is_subset(&p.z()));
            p = next;
        }
        prop_assert_eq!(phi_step(&sides, &p).unwrap(), p);
    }

    #[test]
    fn process_result_is_below_every_stable_set_above_start(sides in market()) {
        let cat = enumerate_stable_sets(&sides, &Config::default()).unwrap();
        let pairs: Vec<SemiStablePair> = cat
            .stable_sets
            .iter()
            .map(|s| {
                let p = set_to_pair(&sides, s).unwrap();
                SemiStablePair::new(&sides, p.y, p.z).unwrap()
            })
            .collect();
        for a in &pairs {
            for b in &pairs {
                let start = a.combine(b);
                let s = run_to_fixpoint(&sides, &start).unwrap().result.set;
                for t in &cat.stable_sets {
                    if blair_leq(sides.g(), &start.y(), t).unwrap() {
                        prop_assert!(blair_leq(sides.g(), &s, t).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn combined_semi_stable_pairs_stay_semi_stable(sides in market(), seeds in any::<(u64, u64)>()) {
        let n = sides.universe_size();
        let pick = |seed: u64| {
            let mut p = SemiStablePair::bottom(&sides);
            for _ in 0..(seed % (n as u64 + 2)) {
                p = phi_step(&sides, &p).unwrap();
            }
            p
        };
        let (a, b) = (pick(seeds.0), pick(seeds.1));
        let c = a.combine(&b);
        prop_assert!(c.validate(&sides).is_ok());
        prop_assert_eq!(c.y(), a.y() | b.y());
        prop_assert_eq!(c.z(), a.z() & b.z());
    }

    #[test]
    fn polarization_and_choice_of_higher_sets((sides, ts) in with_sets(1)) {
        let cat = enumerate_stable_sets(&sides, &Config::default()).unwrap();
        let t = ts[0];
        for s in &cat.stable_sets {
            for u in &cat.stable_sets {
                prop_assert_eq!(blair_leq(sides.g(), s, u).unwrap(), blair_leq(sides.f(), u, s).unwrap());
            }
            if blair_leq(sides.g(), s, &t).unwrap() {
                prop_assert!(blair_leq(sides.f(), &sides.g().apply(t), s).unwrap());
            }
        }
    }

    #[test]
    fn every_catalog_entry_is_stable_and_nothing_else_is(sides in market()) {
        let cat = enumerate_stable_sets(&sides, &Config::default()).unwrap();
        for x in plott_core::set::powerset(sides.universe_size()) {
            let listed = cat.stable_sets.contains(&x);
            prop_assert_eq!(is_stable_set(&sides, &x).unwrap().is_stable(), listed);
        }
    }

    #[test]
    fn market_text_round_trips(
        firms in 1usize..=3,
        workers in 1usize..=3,
        owners in proptest::collection::vec((0usize..3, 0usize..3, -5i64..5, -5i64..5), 1..8),
        kinds in proptest::collection::vec(0u8..4, 6),
    ) {
        let mut text = String::new();
        text.push_str(&format!("[firms] {}\n", (0..firms).map(|i| format!("f{i}")).collect::<Vec<_>>().join(" ")));
        text.push_str(&format!("[workers] {}\n", (0..workers).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")));
        text.push_str("[contracts]\n");
        let contracts: Vec<(usize, usize)> = owners.iter().map(|&(f, w, _, _)| (f % firms, w % workers)).collect();
        for (i, ((f, w), &(_, _, uw, uf))) in contracts.iter().zip(&owners).enumerate() {
            text.push_str(&format!("c{i} f{f} w{w} {uw} {uf}\n"));
        }
        let agents = (0..firms).map(|i| (format!("f{i}"), true)).chain((0..workers).map(|i| (format!("w{i}"), false)));
        for (k, (name, is_firm)) in agents.enumerate() {
            let idx = name[1..].parse::<usize>().unwrap();
            let block: Vec<String> = contracts
                .iter()
                .enumerate()
                .filter(|(_, &(f, w))| if is_firm { f == idx } else { w == idx })
                .map(|(i, _)| format!("c{i}"))
                .collect();
            match kinds[k] {
                0 => text.push_str(&format!("[choice {name}] kind=order\n{}\n", block.iter().rev().cloned().collect::<Vec<_>>().join(" "))),
                1 => text.push_str(&format!("[choice {name}] kind=quota q=2\n{}\n", block.join(" "))),
                2 => text.push_str(&format!(
                    "[choice {name}] kind=order acceptable={{{}}}\n{}\n",
                    block.iter().step_by(2).cloned().collect::<Vec<_>>().join(","),
                    block.join(" ")
                )),
                _ => text.push_str(&format!("[choice {name}] kind=utility\n")),
            }
        }
        let m = MarketInstance::parse(&text, &Config::default()).unwrap();
        let printed = m.to_text();
        let again = MarketInstance::parse(&printed, &Config::default()).unwrap();
        prop_assert_eq!(&again, &m);
        prop_assert_eq!(again.to_text(), printed);
        prop_assert!(m.certified_sides(&Config::default()).is_ok());
    }
}
