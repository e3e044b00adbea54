use std::collections::BTreeSet;

use fasep_core::coupling::{apply_substitution, run_coupled, SubstitutionMap};
use fasep_core::dynamics::{apply_move, enabled_moves, run_to_frozen, sample_uniform_ring, Runner};
use fasep_core::rng::seeded;
use fasep_core::tasep::{final_config_tasep, record_set, ring_final_measure};
use fasep_core::{ClockScheme, LatticeConfig, Model, RateParams, Topology};
use num::{BigRational, One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn double_zeros(cfg: &LatticeConfig) -> BTreeSet<usize> {
    let n = cfg.len();
    let last = if cfg.is_ring() { n } else { n - 1 };
    (0..last).filter(|&i| cfg.get(i) == 0 && cfg.get((i + 1) % n) == 0).collect()
}

fn ring_with(len: std::ops::Range<usize>, below_half: bool) -> impl Strategy<Value = LatticeConfig> {
    len.prop_flat_map(move |l| {
        let max_n = if below_half { (l - 1) / 2 } else { l };
        (Just(l), 1..=max_n.max(1), any::<u64>())
    })
    .prop_map(|(l, n, seed)| sample_uniform_ring(l, n, seed).unwrap())
}

proptest! {
    #[test]
    fn totally_asymmetric_runs_end_at_record_construction(cfg in ring_with(6..40, true), seed in any::<u64>()) {
        let expected = final_config_tasep(&cfg).unwrap();
        let params = RateParams::new(1.0).unwrap();
        for scheme in [ClockScheme::SiteAssociated, ClockScheme::ParticleAssociated] {
            let run = run_to_frozen(&cfg, params, scheme, seed, 1_000_000).unwrap();
            prop_assert_eq!(&run.final_config, &expected);
        }
        prop_assert_eq!(record_set(&expected).unwrap().sites, record_set(&cfg).unwrap().sites);
    }

    #[test]
    fn no_double_zero_is_ever_created(bits in prop::collection::vec(0u8..2, 4..30), ring in any::<bool>(),
                                      p in 0.0..=1.0f64, seed in any::<u64>()) {
        let topology = if ring { Topology::Ring } else { Topology::ClosedWindow };
        let mut cfg = LatticeConfig::new(topology, bits).unwrap();
        let params = RateParams::new(p).unwrap();
        let mut rng = seeded(seed);
        let holes_free = ring && cfg.is_no_adjacent_holes();
        for _ in 0..200 {
            let moves = enabled_moves(&cfg, params);
            if moves.is_empty() {
                break;
            }
            let (mv, _) = moves.moves[rng.random_range(0..moves.len())];
            let next = apply_move(&cfg, mv);
            prop_assert!(double_zeros(&next).is_subset(&double_zeros(&cfg)));
            if holes_free {
                prop_assert!(next.is_no_adjacent_holes());
            }
            cfg = next;
        }
    }

    #[test]
    fn coupled_images_stay_translates(asep in ring_with(3..30, false), p in 0.0..=1.0f64, seed in any::<u64>()) {
        let run = run_coupled(&asep, RateParams::new(p).unwrap(), seed, 3.0).unwrap();
        prop_assert_eq!(run.violations, 0);
        prop_assert_eq!(run.hole_pair_violations, 0);
        let fin = &run.final_state;
        let (img, _) = apply_substitution(SubstitutionMap::HighDensity, &fin.asep);
        prop_assert_eq!(img.rotated(fin.offset), fin.fasep.clone());
    }
}

#[test]
fn closed_form_measures_are_probability_laws() {
    for len in 3usize..=14 {
        for particles in 1..len.div_ceil(2) {
            let law = ring_final_measure(len, particles).unwrap();
            let total: BigRational = law.values().sum();
            assert_eq!(total, BigRational::one(), "L={len} N={particles}");
            for (cfg, w) in &law {
                assert!(cfg.is_frozen() && cfg.particle_count() == particles);
                assert!(*w > BigRational::zero());
            }
        }
    }
}

#[test]
fn runs_are_reproducible_and_snapshots_on_grid() {
    let cfg = LatticeConfig::ring("110110100110101101").unwrap();
    let params = RateParams::new(0.4).unwrap();
    let run = |scheme| {
        Runner::new(Model::Fasep, params, scheme, 99)
            .snapshot_every(Some(0.5))
            .run_for_time(&cfg, 4.0)
            .unwrap()
    };
    for scheme in [ClockScheme::SiteAssociated, ClockScheme::ParticleAssociated] {
        let (a, b) = (run(scheme), run(scheme));
        assert_eq!(a, b);
        let times: Vec<f64> = a.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, (0..=8).map(|k| k as f64 * 0.5).collect::<Vec<_>>());
        assert_eq!(a.snapshots[0].config, cfg);
        assert_eq!(a.snapshots.last().unwrap().config, a.final_config);
        assert_eq!(a.process_time, 4.0);
    }
}
