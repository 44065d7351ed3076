use dynsleuth_core::env_families::{builtin_candidate_set, FamilyParams};
use dynsleuth_core::neuralnet::{InputContract, MlpParams, MlpPolicy, PolicyHead};
use dynsleuth_core::trainers::{
    evaluate_policy, goal_rate, train_dqn, train_gaussian_pg, train_pg, DqnConfig, GaussianPgConfig, GridEnv,
    PgConfig, PointBotEnv,
};
use dynsleuth_core::{GridMap, MdpSpec};

fn empty_5x5() -> GridEnv {
    GridEnv::new(GridMap::empty(5, 5, 24).unwrap(), MdpSpec::default()).unwrap()
}

#[test]
fn dqn_solves_an_empty_room() {
    let env = empty_5x5();
    let cfg = DqnConfig { total_steps: 20_000, eps_decay_end_step: 12_000, ..DqnConfig::default() };
    let policy = train_dqn(&env, &cfg, 1, None).unwrap();
    assert!(goal_rate(&policy, &env, 2).unwrap() >= 0.95);
}

#[test]
fn pg_solves_an_empty_room() {
    let env = empty_5x5();
    let cfg = PgConfig { total_episodes: 20_000, min_episodes: 20_000, ..PgConfig::default() };
    let policy = train_pg(&env, &cfg, 1, None).unwrap();
    assert!(goal_rate(&policy, &env, 2).unwrap() >= 0.95);
}

#[test]
fn gaussian_pg_beats_standing_still() {
    let set = builtin_candidate_set("pointbot6").unwrap();
    let FamilyParams::PointBot(params) = set.candidates[5].params.clone() else { panic!("pointbot set") };
    let mut env = PointBotEnv::new(params).unwrap();
    let trained = train_gaussian_pg(&env, &GaussianPgConfig::default(), 3, None).unwrap();
    let idle = MlpPolicy::new(
        MlpParams::zeros(&[3, 1]).unwrap(),
        PolicyHead::Gaussian { log_std: -5.0 },
        InputContract::PointBot,
    )
    .unwrap();
    let after = evaluate_policy(&trained, &mut env, 10, 4).unwrap().mean;
    let before = evaluate_policy(&idle, &mut env, 10, 4).unwrap().mean;
    assert!(after > before + 0.1, "{before} -> {after}");
}
