use std::collections::BTreeSet;

use proptest::prelude::*;

use pcmap::billiard::extract_return_map;
use pcmap::census::{enumerate_periodic_orbits, run_census};
use pcmap::chains::{coordinate_set, is_chain, is_extremal_shape};
use pcmap::conjugacy::{build_table, h_value};
use pcmap::cylinder::cylinders;
use pcmap::fuzz::{fuzz_generate, fuzz_scene};
use pcmap::gapflow::{build_atlas, check_atlas};
use pcmap::interval::{normalize, total_length};
use pcmap::rational::{self, ratio, Rational};
use pcmap::SidedInterval;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn point() -> impl Strategy<Value = Rational> {
    (0i64..1000).prop_map(|k| ratio(k, 1000))
}

fn interval() -> impl Strategy<Value = SidedInterval> {
    (0i64..64, 1i64..16, any::<bool>(), any::<bool>())
        .prop_map(|(a, w, lc, hc)| SidedInterval::new(ratio(a, 64), ratio(a + w, 64), lc, hc).unwrap())
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pq_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = ratio(p, q);
        prop_assert_eq!(rational::parse(&rational::to_pq(&r)).unwrap(), r);
    }

    #[test]
    fn normalize_preserves_membership(parts in prop::collection::vec(interval(), 1..8), x in point()) {
        let merged = normalize(parts.clone());
        prop_assert_eq!(merged.iter().any(|j| j.contains(&x)), parts.iter().any(|j| j.contains(&x)));
        prop_assert!(merged.windows(2).all(|w| w[0].hi <= w[1].lo && !w[0].intersects(&w[1])));
        prop_assert_eq!(normalize(merged.clone()), merged);
    }

    #[test]
    fn generated_maps_validate_and_are_injective(n in 1usize..6, seed in any::<u64>(), x in point(), y in point()) {
        let map = fuzz_generate(n, seed).unwrap();
        prop_assert!(map.validate().is_ok());
        prop_assert!(map.kappa() < &rational::one());
        let (fx, fy) = (map.evaluate(&x).unwrap(), map.evaluate(&y).unwrap());
        prop_assert!(fx >= rational::zero() && fx < rational::one());
        prop_assert_eq!(fx == fy, x == y);
    }

    #[test]
    fn cylinder_count_is_linear(n in 1usize..6, seed in any::<u64>()) {
        let map = fuzz_generate(n, seed).unwrap();
        for k in [1usize, 5, 12, 25] {
            let cs = cylinders(&map, k).unwrap();
            prop_assert!(cs.len() <= k * (n - 1) + 1, "k={} count={}", k, cs.len());
        }
    }

    #[test]
    fn enumerated_orbits_are_cycles(n in 1usize..6, seed in any::<u64>()) {
        let map = fuzz_generate(n, seed).unwrap();
        let orbits = enumerate_periodic_orbits(&map, 12).unwrap();
        let mut seen = BTreeSet::new();
        for o in &orbits {
            prop_assert_eq!(o.points.len(), o.period);
            prop_assert_eq!(map.iterate(o.least(), o.period).unwrap(), o.least().clone());
            for (i, p) in o.points.iter().enumerate() {
                prop_assert!(seen.insert(p.clone()));
                if i > 0 {
                    prop_assert_ne!(p, o.least());
                }
            }
        }
    }

    #[test]
    fn counting_bound(n in 1usize..6, seed in any::<u64>()) {
        let map = fuzz_generate(n, seed).unwrap();
        let census = run_census(&map, 12).unwrap();
        prop_assert!(census.m() + census.d() <= n);
        let regions: Vec<_> = census.regions.iter().flatten().collect();
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                prop_assert!(a.intervals().iter().all(|j| !b.meets(j)));
            }
        }
    }

    #[test]
    fn gap_atlas_structure(n in 1usize..6, seed in any::<u64>()) {
        let map = fuzz_generate(n, seed).unwrap();
        let atlas = build_atlas(&map, 20).unwrap();
        let checks = check_atlas(&map, &atlas).unwrap();
        prop_assert!(checks.all_ok(), "{:?}", checks);
        let layers: Vec<SidedInterval> = atlas.all_layers().map(|(_, _, l)| l.interval.clone()).collect();
        prop_assert!(total_length(&normalize(layers)) <= rational::one());
    }

    #[test]
    fn conjugacy_is_monotone(n in 1usize..5, seed in any::<u64>(), x in point(), y in point()) {
        let map = fuzz_generate(n, seed).unwrap();
        let table = build_table(&map, 12, 0).unwrap();
        let (hx, hy) = (h_value(&table, &x).unwrap(), h_value(&table, &y).unwrap());
        prop_assert!(hx.lo <= hx.hi);
        if x < y {
            prop_assert!(hx.lo <= hy.hi);
        }
    }

    #[test]
    fn chains_obey_coordinate_bound(pairs in prop::collection::vec((1u32..6, 1u32..6), 1..6)) {
        if is_chain(&pairs).unwrap() {
            let s = pairs.len();
            let size = coordinate_set(&pairs).len();
            prop_assert!(size <= s + 1);
            prop_assert_eq!(size == s + 1, is_extremal_shape(&pairs));
        }
    }

    #[test]
    fn billiard_extract_matches_first_return(seed in any::<u64>(), k in 0i64..997) {
        let scene = fuzz_scene(seed).unwrap();
        if let Ok(ex) = extract_return_map(&scene) {
            let q = ratio(k, 997);
            if let Ok(v) = scene.first_return(&q) {
                prop_assert_eq!(ex.evaluate(&q), Some(v));
            }
            prop_assert!(ex.discontinuity_bound_ok());
        }
    }
}
