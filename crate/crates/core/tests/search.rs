use dynsleuth_core::baseline_attacks::{random_search, rl_search, Budget, RlSearchConfig};
use dynsleuth_core::ga_attack::{ga_search, Fitness, FitnessConfig, GaConfig, OracleTarget, SearchSpace};
use dynsleuth_core::gridworld::{is_valid, parse_map};
use dynsleuth_core::{GridMap, MdpSpec};

fn three_by_three() -> (GridMap, OracleTarget) {
    let truth = parse_map("...\n.#.\n..G").unwrap();
    let target = OracleTarget::from_map(&truth, &MdpSpec::default(), None);
    (truth, target)
}

/// Every valid 3x3 map with the goal in the corner, with its fitness.
fn enumerate(fit: &Fitness<'_>) -> Vec<(GridMap, f64)> {
    (0u32..1 << 8)
        .filter_map(|bits| {
            let mut cells: Vec<bool> = (0..8).map(|i| bits >> i & 1 == 1).collect();
            cells.push(false);
            let map = GridMap::new(3, 3, cells, 8).unwrap();
            is_valid(&map).then(|| {
                let s = fit.score(&map).unwrap();
                (map, s)
            })
        })
        .collect()
}

#[test]
fn ga_matches_brute_force_on_three_by_three() {
    let (truth, target) = three_by_three();
    let fc = FitnessConfig::deterministic();
    let fit = Fitness::new(&target, fc.clone()).unwrap();
    let all = enumerate(&fit);
    let best = all.iter().map(|(_, s)| *s).fold(f64::MIN, f64::max);
    let winners: Vec<&GridMap> = all.iter().filter(|(_, s)| *s == best).map(|(m, _)| m).collect();
    assert!(winners.contains(&&truth), "the true map should score the maximum");
    let cfg = GaConfig { population_size: 32, generations: 20, ..GaConfig::default() };
    let hits = (0..20)
        .filter(|&seed| {
            let out = ga_search(&target, &GaConfig { seed, ..cfg.clone() }, &SearchSpace::of_map(&truth), &fc, None)
                .unwrap();
            out.best_score == best
        })
        .count();
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn random_search_finds_the_maximum_with_ten_passes_of_budget() {
    let (truth, target) = three_by_three();
    let fit = Fitness::new(&target, FitnessConfig::deterministic()).unwrap();
    let all = enumerate(&fit);
    let best = all.iter().map(|(_, s)| *s).fold(f64::MIN, f64::max);
    let out = random_search(&fit, &SearchSpace::of_map(&truth), Budget::Evaluations(all.len() as u64 * 10), 4).unwrap();
    assert_eq!(out.best_score, best);
    assert!(is_valid(&out.best));
}

#[test]
fn random_search_improves_with_budget_and_counts_calls() {
    let truth = parse_map("..#....\n.......\n.#..#..\n.......\n...#...\n.#.....\n......G").unwrap();
    let target = OracleTarget::from_map(&truth, &MdpSpec::default(), None);
    let space = SearchSpace::of_map(&truth);
    let mut last = f64::MIN;
    for b in [1u64, 10, 100, 700] {
        let fit = Fitness::new(&target, FitnessConfig::deterministic()).unwrap();
        let out = random_search(&fit, &space, Budget::Evaluations(b), 9).unwrap();
        assert_eq!(out.evaluations, b);
        assert_eq!(fit.evaluations(), b);
        assert!(out.best_score >= last);
        last = out.best_score;
    }
    let fit = Fitness::new(&target, FitnessConfig::deterministic()).unwrap();
    assert!(random_search(&fit, &space, Budget::Evaluations(0), 9).is_err());
}

#[test]
fn rl_search_reports_a_valid_scored_map() {
    let (truth, target) = three_by_three();
    let fit = Fitness::new(&target, FitnessConfig::deterministic()).unwrap();
    let cfg = RlSearchConfig { learning_starts: 50, ..RlSearchConfig::with_steps(600) };
    let out = rl_search(&fit, &SearchSpace::of_map(&truth), &cfg).unwrap();
    assert!(is_valid(&out.best));
    let check = Fitness::new(&target, FitnessConfig::deterministic()).unwrap();
    assert_eq!(check.score(&out.best).unwrap(), out.best_score);
    assert_eq!(fit.evaluations(), out.evaluations);
    let again = rl_search(&Fitness::new(&target, FitnessConfig::deterministic()).unwrap(), &SearchSpace::of_map(&truth), &cfg)
        .unwrap();
    assert_eq!(again.best, out.best);
}
