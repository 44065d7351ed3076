use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use dynsleuth_core::env_families::FamilyParams;
use dynsleuth_core::neuralnet::encode_policy;
use dynsleuth_core::seeding::derive_seed;
use dynsleuth_core::trainers::{
    evaluate_policy, goal_eval, train_dqn, train_gaussian_pg, train_pg, DqnConfig, GaussianPgConfig, GridEnv,
    PgConfig, PointBotEnv,
};
use dynsleuth_core::{MdpSpec, MlpPolicy};

use super::{load_candidate, read_map};
use crate::run::{manifest_path, Run};
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnvKind {
    Grid,
    Slipgrid,
    Pointbot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Dqn,
    Pg,
    Gpg,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub env: EnvKind,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Floor plan for --env grid
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// <set>:<label> for --env slipgrid|pointbot, e.g. pointbot6:Strong
    #[arg(long)]
    pub candidate: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output .policy file; the log and manifest are written next to it
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let s = Settings::load(args.config.as_deref(), &args.sets)?;
    s.check_keys(&["seed", "map", "candidate"], &["dqn", "pg", "gpg", "mdp"])?;
    let seed = s.value(args.seed, "seed", 0u64)?;
    let mdp = s.apply("mdp", MdpSpec::default())?;
    let map_path = s.optional(args.map, "map")?;
    let candidate = s.optional(args.candidate, "candidate")?;

    let mut run = Run::start();
    run.seed(seed);
    run.config("env", format!("{:?}", args.env).to_lowercase())?;
    run.config("algo", format!("{:?}", args.algo).to_lowercase())?;
    let log_path = with_suffix(&args.out, ".log");
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut log = BufWriter::new(File::create(&log_path).with_context(|| format!("creating {}", log_path.display()))?);

    let policy: MlpPolicy = match (args.env, args.algo) {
        (EnvKind::Grid | EnvKind::Slipgrid, Algo::Dqn | Algo::Pg) => {
            let env = match args.env {
                EnvKind::Grid => {
                    let Some(p) = map_path else { bail!("--env grid needs --map") };
                    run.config("map", &p)?;
                    GridEnv::new(read_map(&p)?, mdp)?
                }
                _ => {
                    let Some(spec) = candidate else { bail!("--env slipgrid needs --candidate <set>:<label>") };
                    let c = load_candidate(&spec)?;
                    let FamilyParams::SlipGrid(p) = c.params else { bail!("candidate {spec} is not a slipgrid candidate") };
                    run.config("candidate", &spec)?;
                    GridEnv::slippery(p, mdp)?
                }
            };
            run.config("mdp", mdp)?;
            let policy = if args.algo == Algo::Dqn {
                let cfg = s.apply("dqn", DqnConfig::default())?;
                run.config("dqn", &cfg)?;
                train_dqn(&env, &cfg, seed, Some(&mut log))?
            } else {
                let cfg = s.apply("pg", PgConfig::default())?;
                run.config("pg", &cfg)?;
                train_pg(&env, &cfg, seed, Some(&mut log))?
            };
            let eval = goal_eval(&policy, &env, derive_seed(seed, "train_final_eval", 0))?;
            writeln!(log, "final goal_rate={:.4} mean_eval_return={:.4}", eval.rate, eval.mean_return)?;
            println!("goal rate {:.3} over {} start cells", eval.rate, env.start_cells().len());
            policy
        }
        (EnvKind::Pointbot, Algo::Gpg) => {
            let Some(spec) = candidate else { bail!("--env pointbot needs --candidate <set>:<label>") };
            let c = load_candidate(&spec)?;
            let FamilyParams::PointBot(p) = c.params else { bail!("candidate {spec} is not a pointbot candidate") };
            run.config("candidate", &spec)?;
            let cfg = s.apply("gpg", GaussianPgConfig::default())?;
            run.config("gpg", &cfg)?;
            let mut env = PointBotEnv::new(p)?;
            let policy = train_gaussian_pg(&env, &cfg, seed, Some(&mut log))?;
            let stats = evaluate_policy(&policy, &mut env, 20, derive_seed(seed, "train_final_eval", 0))?;
            writeln!(log, "final mean_return={:.4} variance={:.6}", stats.mean, stats.variance)?;
            println!("mean return {:.3} over 20 episodes", stats.mean);
            policy
        }
        (env, algo) => bail!(
            "algorithm {} does not apply to --env {} (grid and slipgrid take dqn|pg, pointbot takes gpg)",
            format!("{algo:?}").to_lowercase(),
            format!("{env:?}").to_lowercase()
        ),
    };
    log.flush()?;
    drop(log);
    run.artifact(&log_path);
    run.write_bytes(&args.out, &encode_policy(&policy))?;
    run.finish(&manifest_path(&args.out))
}

pub fn with_suffix(path: &std::path::Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}
