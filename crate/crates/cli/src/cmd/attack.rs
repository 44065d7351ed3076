use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use dynsleuth_core::baseline_attacks::{random_search, rl_search, Budget, RlSearchConfig, SearchOutcome};
use dynsleuth_core::ga_attack::{
    ga_multi_seed, recovery_rate, AgentKind, Fitness, FitnessConfig, GaConfig, SearchSpace, DEFAULT_GA_SEEDS,
};
use dynsleuth_core::gridworld::render_rows;
use dynsleuth_core::neuralnet::load_policy;
use dynsleuth_core::report::{AttackMethod, AttackReport, SeedResult};
use dynsleuth_core::GridMap;

use super::train::with_suffix;
use super::{parse_cell, parse_size, read_map};
use crate::run::{manifest_path, Run};
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ga,
    Random,
    Rl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Dqn,
    Pg,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    /// Target .policy file
    #[arg(long)]
    pub policy: PathBuf,
    /// Must match the head stored in the policy file
    #[arg(long, value_enum)]
    pub agent_kind: Kind,
    /// Independent runs; run i uses seed `seed + i` [default: 8]
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// True map, used only to report recovery rates
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Grid size HxW when no --truth is given
    #[arg(long)]
    pub size: Option<String>,
    /// Goal r,c when no --truth is given
    #[arg(long)]
    pub goal: Option<String>,
    /// Fitness evaluations per run for random and rl [default: the GA's count]
    #[arg(long)]
    pub budget: Option<u64>,
    /// Wall-clock budget per run for random search, instead of --budget
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

fn seed_result(seed: u64, o: &SearchOutcome, evaluations: u64, truth: Option<&GridMap>) -> Result<SeedResult> {
    Ok(SeedResult {
        seed,
        best_score: o.best_score,
        recovery: truth.map(|t| recovery_rate(&o.best, t)).transpose()?,
        evaluations,
        seconds: o.seconds,
        map: render_rows(&o.best),
        history: None,
    })
}

pub fn run(args: AttackArgs) -> Result<()> {
    let s = Settings::load(args.config.as_deref(), &args.sets)?;
    s.check_keys(
        &["seeds", "seed", "truth", "size", "goal", "budget", "budget_seconds"],
        &["ga", "fitness", "space", "rl"],
    )?;
    let kind = match args.agent_kind {
        Kind::Dqn => AgentKind::Dqn,
        Kind::Pg => AgentKind::Pg,
    };
    let policy = load_policy(&args.policy).with_context(|| format!("loading policy {}", args.policy.display()))?;
    if policy.head.name() != kind.head_name() {
        bail!(
            "--agent-kind {} expects a {} head but {} has a {} head",
            kind.title().to_lowercase(),
            kind.head_name(),
            args.policy.display(),
            policy.head.name()
        );
    }
    let n_seeds = s.value(args.seeds, "seeds", DEFAULT_GA_SEEDS)?;
    anyhow::ensure!(n_seeds > 0, "--seeds must be at least 1");
    let base_seed = s.value(args.seed, "seed", 0u64)?;
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| base_seed + i).collect();
    let truth_path = s.optional(args.truth, "truth")?;
    let truth = truth_path.as_deref().map(read_map).transpose()?;
    let space = match &truth {
        Some(t) => SearchSpace::of_map(t),
        None => {
            let (Some(size), Some(goal)) = (s.optional(args.size, "size")?, s.optional(args.goal, "goal")?) else {
                bail!("without --truth, both --size and --goal are required");
            };
            let (h, w) = parse_size(&size)?;
            let (r, c) = parse_cell(&goal)?;
            anyhow::ensure!(r < h && c < w, "goal {r},{c} outside a {h}x{w} grid");
            SearchSpace::new(w, h, r * w + c)
        }
    };
    let space = s.apply("space", space)?;
    let fitness_cfg = s.apply("fitness", FitnessConfig::for_agent(kind))?;
    let ga_cfg = s.apply("ga", GaConfig::default())?;

    let mut run = Run::start();
    run.seeds(&seeds);
    run.config("method", format!("{:?}", args.method).to_lowercase())?;
    run.config("agent_kind", kind)?;
    run.config("policy", &args.policy)?;
    run.config("space", space)?;
    run.config("fitness", &fitness_cfg)?;
    let log_path = with_suffix(&args.out, ".log");
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut log = BufWriter::new(File::create(&log_path).with_context(|| format!("creating {}", log_path.display()))?);

    let started = Instant::now();
    let (method, config, runs) = match args.method {
        Method::Ga => {
            run.config("ga", &ga_cfg)?;
            let out = ga_multi_seed(&policy, &ga_cfg, &seeds, &space, &fitness_cfg, truth.as_ref())?;
            let mut runs = Vec::with_capacity(out.runs.len());
            for r in out.runs {
                writeln!(log, "seed={} best_score={} evaluations={} seconds={:.3}", r.seed, r.best_score, r.evaluations, r.seconds)?;
                runs.push(SeedResult {
                    seed: r.seed,
                    best_score: r.best_score,
                    recovery: r.recovery,
                    evaluations: r.evaluations,
                    seconds: r.seconds,
                    map: render_rows(&r.best),
                    history: Some(r.history),
                });
            }
            (AttackMethod::Ga, serde_json::to_value(&ga_cfg)?, runs)
        }
        Method::Random | Method::Rl => {
            let evals = s.value(args.budget, "budget", ga_cfg.evaluations() as u64)?;
            let seconds = s.optional(args.budget_seconds, "budget_seconds")?;
            let fitness = Fitness::new(&policy, fitness_cfg.clone())?;
            let mut runs = Vec::with_capacity(seeds.len());
            let config;
            let method;
            if args.method == Method::Random {
                let budget = match seconds {
                    Some(sec) => Budget::Seconds(sec),
                    None => Budget::Evaluations(evals),
                };
                run.config("budget", budget)?;
                config = serde_json::to_value(budget)?;
                method = AttackMethod::Random;
                for &seed in &seeds {
                    let before = fitness.evaluations();
                    let o = random_search(&fitness, &space, budget, seed)?;
                    let used = fitness.evaluations() - before;
                    writeln!(log, "seed={seed} best_score={} fitness_calls={used}", o.best_score)?;
                    runs.push(seed_result(seed, &o, used, truth.as_ref())?);
                }
            } else {
                if seconds.is_some() {
                    bail!("--budget-seconds applies to random search only");
                }
                let base = s.apply("rl", RlSearchConfig::with_steps(evals))?;
                run.config("rl", &base)?;
                config = serde_json::to_value(&base)?;
                method = AttackMethod::Rl;
                for &seed in &seeds {
                    let before = fitness.evaluations();
                    let o = rl_search(&fitness, &space, &RlSearchConfig { seed, ..base.clone() })?;
                    let used = fitness.evaluations() - before;
                    writeln!(log, "seed={seed} best_score={} fitness_calls={used}", o.best_score)?;
                    runs.push(seed_result(seed, &o, used, truth.as_ref())?);
                }
            }
            (method, config, runs)
        }
    };
    let report = AttackReport::new(
        method,
        kind,
        args.policy.display().to_string(),
        truth_path.map(|p| p.display().to_string()),
        config,
        runs,
        started.elapsed().as_secs_f64(),
    )?;
    writeln!(log, "best_run={} best_score={} recovery={:?}", report.best_run, report.best_score, report.recovery)?;
    log.flush()?;
    drop(log);
    run.artifact(&log_path);
    match report.recovery {
        Some(r) => println!("best score {} (run {}), recovery {:.4}", report.best_score, report.best_run, r),
        None => println!("best score {} (run {})", report.best_score, report.best_run),
    }
    for row in &report.chosen_map {
        println!("  {row}");
    }
    run.write_json(&args.out, &report)?;
    run.finish(&manifest_path(&args.out))
}
