use proptest::prelude::*;

use berge_core::adversary::{brute_force_cover_check, default_block_sizes, SearchLimits};
use berge_core::oracle::make_random_oracle;
use berge_core::partition::{cover_prefix, CoverConfig};
use berge_core::{verify_family, ColouringOracle, Params};

#[test]
fn tight_block_colouring_stops_being_coverable_at_twelve() {
    let p = Params::adversary(1, 3, 3).unwrap();
    for w in 9..=13u32 {
        let o = ColouringOracle::adversarial(default_block_sizes(1, 3, 3, u64::from(w)).unwrap());
        let res = brute_force_cover_check(&o, w, &p, SearchLimits::default()).unwrap();
        assert_eq!(res.coverable, w < 12, "window {w}");
        if let Some(paths) = res.witness {
            assert!(verify_family(&paths, w, &p, &o).ok);
        }
    }
}

#[test]
fn renaming_colours_keeps_coverability() {
    for seed in 0..12 {
        let (k, t, r, w) = if seed % 2 == 0 { (3, 3, 2, 8) } else { (2, 2, 2, 7) };
        let p = Params::with_colours(1, k, t, r).unwrap();
        let src = make_random_oracle(r, k, seed);
        let o = ColouringOracle::tabulate(k, r, w, |vs| src.colour_of(vs).unwrap()).unwrap();
        let swapped = ColouringOracle::tabulate(k, r, w, |vs| 3 - src.colour_of(vs).unwrap()).unwrap();
        let a = brute_force_cover_check(&o, w, &p, SearchLimits::default()).unwrap();
        let b = brute_force_cover_check(&swapped, w, &p, SearchLimits::default()).unwrap();
        assert_eq!(a.coverable, b.coverable, "seed {seed}");
    }
}

proptest! {
    #[test]
    fn coverage_is_monotone_in_the_prefix(seed in 0u64..1000, n in 5u32..15) {
        let p = Params::partition(1, 3, 2).unwrap();
        let o = make_random_oracle(2, 3, seed);
        let cert = cover_prefix(&o, &p, n, &CoverConfig::default()).unwrap();
        for m in 1..=cert.covered_prefix {
            prop_assert!(verify_family(&cert.paths, m, &p, &o).ok);
        }
        prop_assert!(!verify_family(&cert.paths, cert.covered_prefix + 1, &p, &o).ok);
    }
}
