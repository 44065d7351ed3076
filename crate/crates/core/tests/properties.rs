mod common;

use common::*;
use dynsleuth_core::env_families::{builtin_candidate_set, Family, BUILTIN_SETS};
use dynsleuth_core::ga_attack::{
    crossover_at, ga_search, mutate, two_point_crossover, AgentKind, FitnessConfig, GaConfig, MapGenome,
    OracleTarget, SearchSpace,
};
use dynsleuth_core::gridworld::{lidar, parse_map, render_map, validate_constraints};
use dynsleuth_core::neuralnet::{decode_policy, encode_policy, InputContract, MlpParams, MlpPolicy, PolicyHead};
use dynsleuth_core::report::{parse_report, AnyReport, AttackMethod, AttackReport, SeedResult};
use dynsleuth_core::seeding::stream;
use dynsleuth_core::shadow_inference::extract_features;
use dynsleuth_core::{GridMap, MdpSpec};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = (usize, usize, Vec<bool>, usize)> {
    (1usize..=7, 1usize..=7).prop_flat_map(|(w, h)| {
        (Just(w), Just(h), proptest::collection::vec(any::<bool>(), w * h), 0..w * h)
    })
}

fn valid_map_strategy() -> impl Strategy<Value = GridMap> {
    (any::<u64>(), 0.0f64..0.45).prop_map(|(seed, density)| {
        dynsleuth_core::gridworld::random_map(7, 7, 48, density, &mut stream(seed, "prop_map", 0), 100_000)
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn validator_matches_brute_force((w, h, wall, goal) in grid_strategy()) {
        let map = GridMap::new(w, h, wall.clone(), goal).unwrap();
        let got = validate_constraints(&map);
        let want = constraints_oracle(w, h, &wall, goal);
        prop_assert_eq!(got.connected, want.connected);
        prop_assert_eq!(got.unique_goal_free, want.goal_free);
        prop_assert_eq!(got.no_2x2_block, want.no_block);
        prop_assert_eq!(got.pass, want.connected && want.goal_free && want.no_block);
    }

    #[test]
    fn crossover_keeps_every_position_from_a_parent(
        a in proptest::collection::vec(0u8..=1, 49),
        b in proptest::collection::vec(0u8..=1, 49),
        seed in any::<u64>(),
    ) {
        let p1 = MapGenome::new(a, 48).unwrap();
        let p2 = MapGenome::new(b, 48).unwrap();
        let child = two_point_crossover(&p1, &p2, &mut stream(seed, "prop_x", 0)).unwrap();
        prop_assert!(is_two_point_child(&p1.bits, &p2.bits, &child.bits, 48));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn render_parse_round_trip(map in valid_map_strategy()) {
        let text = render_map(&map);
        let back = parse_map(&text).unwrap();
        prop_assert_eq!(&back, &map);
        prop_assert_eq!(render_map(&back), text);
    }

    #[test]
    fn lidar_matches_ray_march(map in valid_map_strategy()) {
        for cell in map.free_cells() {
            prop_assert_eq!(lidar(&map, cell).unwrap().0, lidar_oracle(&map, cell));
        }
    }

    #[test]
    fn crossover_segment_is_exact(
        a in proptest::collection::vec(0u8..=1, 49),
        b in proptest::collection::vec(0u8..=1, 49),
        x in 0usize..=49,
        y in 0usize..=49,
    ) {
        let (lo, hi) = (x.min(y), x.max(y));
        let p1 = MapGenome::new(a, 48).unwrap();
        let p2 = MapGenome::new(b, 48).unwrap();
        let child = crossover_at(&p1, &p2, lo, hi).unwrap();
        for i in 0..49 {
            let want = if i == 48 { 0 } else if (lo..hi).contains(&i) { p2.bits[i] } else { p1.bits[i] };
            prop_assert_eq!(child.bits[i], want);
        }
    }

    #[test]
    fn policy_bytes_round_trip(seed in any::<u64>(), hidden in 1usize..24, head in 0u8..3) {
        let (dims, head, input) = match head {
            0 => (vec![8, hidden, 5], PolicyHead::QValues, InputContract::Lidar),
            1 => (vec![8, hidden, hidden, 5], PolicyHead::Logits, InputContract::Lidar),
            _ => (vec![3, hidden, 1], PolicyHead::Gaussian { log_std: -1.25 }, InputContract::PointBot),
        };
        let params = MlpParams::init(&dims, &mut stream(seed, "prop_policy", 0)).unwrap();
        let policy = MlpPolicy::new(params, head, input).unwrap();
        let bytes = encode_policy(&policy);
        let back = decode_policy(&bytes).unwrap();
        prop_assert_eq!(encode_policy(&back), bytes);
        let same_bits = back.params.as_slice().iter().zip(policy.params.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits());
        prop_assert!(same_bits);
    }

    #[test]
    fn attack_report_json_round_trip(score in 0.0f64..100.0, rec in 0.0f64..1.0, secs in 0.0f64..1e4) {
        let map = common::seeded_maps(1, 3).remove(0);
        let run = SeedResult {
            seed: 4,
            best_score: score,
            recovery: Some(rec),
            evaluations: 9,
            seconds: secs,
            map: render_map(&map).lines().map(str::to_owned).collect(),
            history: None,
        };
        let report = AttackReport::new(AttackMethod::Ga, AgentKind::Pg, "p".into(), None, serde_json::json!({}), vec![run], secs).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        match parse_report(&text).unwrap() {
            AnyReport::Attack(back) => {
                prop_assert_eq!(&back, &report);
                prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
            }
            other => prop_assert!(false, "wrong kind {:?}", other),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn gradients_match_finite_differences(seed in any::<u64>()) {
        let worst = finite_difference_case(seed);
        prop_assert!(worst < 1e-4, "relative error {}", worst);
    }
}

#[test]
fn mutation_flips_follow_the_binomial() {
    let beta = 0.05;
    let genome = MapGenome::new(vec![0; 49], 48).unwrap();
    let mut rng = stream(11, "mutation_stats", 0);
    let trials = 4000;
    let mut per_bit = vec![0usize; 49];
    for _ in 0..trials {
        let child = mutate(&genome, beta, &mut rng).unwrap();
        for (i, b) in child.bits.iter().enumerate() {
            per_bit[i] += *b as usize;
        }
    }
    assert_eq!(per_bit[48], 0, "goal bit mutated");
    let n = (trials * 48) as f64;
    let total: usize = per_bit.iter().sum();
    let sigma = (n * beta * (1.0 - beta)).sqrt();
    assert!((total as f64 - n * beta).abs() <= 3.0 * sigma, "{total} flips, expected {}", n * beta);
}

#[test]
fn lidar_matches_ray_march_on_twenty_maps() {
    for map in seeded_maps(20, 21) {
        for cell in map.free_cells() {
            assert_eq!(lidar(&map, cell).unwrap().0, lidar_oracle(&map, cell), "cell {cell}\n{map}");
        }
    }
}

#[test]
fn greedy_walks_are_shortest_paths() {
    for map in seeded_maps(5, 22) {
        assert!(greedy_vs_shortest(&map, &MdpSpec::default()).is_empty(), "{map}");
    }
}

#[test]
fn elitism_never_loses_the_best() {
    let truth = seeded_maps(1, 23).remove(0);
    let target = OracleTarget::from_map(&truth, &MdpSpec::default(), None);
    let cfg = GaConfig { population_size: 16, elite_size: 2, generations: 15, ..GaConfig::default() };
    for seed in 0..4 {
        let out = ga_search(
            &target,
            &GaConfig { seed, ..cfg.clone() },
            &SearchSpace::of_map(&truth),
            &FitnessConfig::deterministic(),
            Some(&truth),
        )
        .unwrap();
        assert!(out.history.best_fitness.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn feature_vectors_have_two_entries_per_candidate() {
    for name in BUILTIN_SETS {
        let set = builtin_candidate_set(name).unwrap();
        let policy = match set.family {
            Family::PointBot => MlpPolicy::new(
                MlpParams::init(&[3, 1], &mut stream(1, "feat", 0)).unwrap(),
                PolicyHead::Gaussian { log_std: -1.0 },
                InputContract::PointBot,
            ),
            _ => MlpPolicy::new(
                MlpParams::init(&[8, 16, 5], &mut stream(1, "feat", 1)).unwrap(),
                PolicyHead::Logits,
                InputContract::Lidar,
            ),
        }
        .unwrap();
        let f = extract_features(&policy, &set, 3, MdpSpec::default(), 5).unwrap();
        assert_eq!(f.vector.len(), 2 * set.len(), "{name}");
        assert!(f.vector.iter().all(|v| v.is_finite()));
    }
}
