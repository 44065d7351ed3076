use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use dynsleuth_bench::{lidar_policy, maps};
use dynsleuth_core::ga_attack::{ga_search, AgentKind, Fitness, FitnessConfig, GaConfig, SearchSpace};
use dynsleuth_core::gridworld::{lidar, value_iteration};
use dynsleuth_core::MdpSpec;
use std::hint::black_box;

fn bench_value_iteration(c: &mut Criterion) {
    let maps = maps(8, 1);
    let spec = MdpSpec::default();
    c.bench_function("value_iteration_7x7", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % maps.len();
            black_box(value_iteration(&maps[i], &spec, 1e-8))
        })
    });
}

fn bench_forward(c: &mut Criterion) {
    let policy = lidar_policy(2);
    let map = &maps(1, 2)[0];
    let obs = lidar(map, 0).unwrap().to_features();
    c.bench_function("mlp_forward_8_64_64_5", |b| b.iter(|| black_box(policy.outputs(black_box(&obs)).unwrap())));
}

fn bench_fitness(c: &mut Criterion) {
    let policy = lidar_policy(3);
    let maps = maps(16, 3);
    let cfg = FitnessConfig::for_agent(AgentKind::Pg);
    // fresh instance per batch so the response cache starts cold
    c.bench_function("fitness_16_maps_cold_cache", |b| {
        b.iter_batched(
            || Fitness::new(&policy, cfg.clone()).unwrap(),
            |f| {
                for m in &maps {
                    black_box(f.score(m).unwrap());
                }
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_ga_generation(c: &mut Criterion) {
    let policy = lidar_policy(4);
    let space = SearchSpace::new(7, 7, 48);
    let fit = FitnessConfig::for_agent(AgentKind::Pg);
    let cfg = GaConfig { generations: 1, ..GaConfig::default() };
    let mut group = c.benchmark_group("ga");
    group.sample_size(20);
    group.bench_function("init_plus_one_generation", |b| {
        b.iter(|| black_box(ga_search(&policy, &cfg, &space, &fit, None).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_value_iteration, bench_forward, bench_fitness, bench_ga_generation);
criterion_main!(benches);
