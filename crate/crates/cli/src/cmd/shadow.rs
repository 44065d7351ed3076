use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use dynsleuth_core::env_families::{CandidateSet, Family};
use dynsleuth_core::neuralnet::{encode_policy, load_policy};
use dynsleuth_core::shadow_inference::{
    build_dataset, extract_features, fit_classifier, infer_candidate, run_inference_experiment, train_shadow_policies,
    InferenceConfig, LinearSvmModel, ShadowDataset, ShadowPolicy, ShadowTrainer, SvmConfig, DEFAULT_TRIALS,
};
use dynsleuth_core::trainers::{DqnConfig, GaussianPgConfig, PgConfig};
use dynsleuth_core::MdpSpec;
use serde::{Deserialize, Serialize};

use super::load_candidates;
use crate::run::{manifest_path, Run};
use crate::settings::Settings;

pub const SHADOW_INDEX: &str = "shadows.json";
pub const SHADOW_INDEX_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainerKind {
    Gpg,
    Pg,
    Dqn,
}

/// Options shared by every shadow subcommand.
#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum ShadowCmd {
    /// Train m shadow policies per candidate
    Train {
        /// Built-in set name or .candidates.json path
        #[arg(long)]
        candidates: String,
        /// Shadow policies per candidate [default: 32]
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        trainer: Option<TrainerKind>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Reward-statistic features of trained shadow policies
    Features {
        #[arg(long)]
        candidates: String,
        /// Directory written by `shadow train`
        #[arg(long)]
        shadows: PathBuf,
        /// Trials per candidate environment [default: 20]
        #[arg(long)]
        k: Option<usize>,
        /// Seed indices below this go to the train split [default: 8]
        #[arg(long)]
        train_seeds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output .features.csv
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the linear SVM on the train split of a feature table
    Fit {
        #[arg(long)]
        features: PathBuf,
        /// Output .svm.json
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Name the candidate a target policy was trained on
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        candidates: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional JSON result file
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Train, extract, fit and evaluate in one go
    Experiment {
        #[arg(long)]
        candidates: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        train_seeds: Option<usize>,
        #[arg(long, value_enum)]
        trainer: Option<TrainerKind>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output report .json
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowEntry {
    pub candidate: usize,
    pub seed_index: usize,
    pub seed: u64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowIndex {
    pub schema_version: u32,
    pub candidate_set: String,
    pub family: Family,
    pub labels: Vec<String>,
    pub trainer: ShadowTrainer,
    pub m: usize,
    pub seed: u64,
    pub policies: Vec<ShadowEntry>,
}

const TRAINER_SECTIONS: [&str; 4] = ["gpg", "pg", "dqn", "mdp"];

fn trainer(s: &Settings, flag: Option<TrainerKind>, family: Family) -> Result<ShadowTrainer> {
    let base = ShadowTrainer::default_for(family);
    let kind = match s.optional(flag.map(|k| format!("{k:?}").to_lowercase()), "trainer")? {
        Some(k) => k,
        None => base.name().to_owned(),
    };
    let t = match (kind.as_str(), base) {
        ("gpg", ShadowTrainer::GaussianPg(c)) => ShadowTrainer::GaussianPg(s.apply("gpg", c)?),
        ("gpg", _) => ShadowTrainer::GaussianPg(s.apply("gpg", GaussianPgConfig::default())?),
        ("pg", ShadowTrainer::Pg(c)) => ShadowTrainer::Pg(s.apply("pg", c)?),
        ("pg", _) => ShadowTrainer::Pg(s.apply("pg", PgConfig::default())?),
        ("dqn", ShadowTrainer::Dqn(c)) => ShadowTrainer::Dqn(s.apply("dqn", c)?),
        ("dqn", _) => ShadowTrainer::Dqn(s.apply("dqn", DqnConfig::default())?),
        (other, _) => bail!("unknown trainer {other:?} (gpg|pg|dqn)"),
    };
    Ok(t)
}

fn index_path(dir: &Path) -> PathBuf {
    dir.join(SHADOW_INDEX)
}

fn load_index(dir: &Path) -> Result<ShadowIndex> {
    let p = index_path(dir);
    if !p.exists() {
        bail!("missing shadow index {} (run `dynsleuth shadow train` first)", p.display());
    }
    let index: ShadowIndex =
        serde_json::from_str(&std::fs::read_to_string(&p)?).with_context(|| format!("parsing {}", p.display()))?;
    if index.schema_version != SHADOW_INDEX_SCHEMA_VERSION {
        bail!("{} has schema_version {}, expected {SHADOW_INDEX_SCHEMA_VERSION}", p.display(), index.schema_version);
    }
    Ok(index)
}

fn check_labels(set: &CandidateSet, labels: &[String], what: &str) -> Result<()> {
    if set.labels() != labels {
        bail!("{what} was built for candidates {:?}, not {:?}", labels, set.labels());
    }
    Ok(())
}

pub fn run(cmd: ShadowCmd) -> Result<()> {
    match cmd {
        ShadowCmd::Train { candidates, m, trainer: kind, seed, out, common } => {
            let s = Settings::load(common.config.as_deref(), &common.sets)?;
            s.check_keys(&["m", "seed", "trainer"], &TRAINER_SECTIONS)?;
            let set = load_candidates(&candidates)?;
            let m = s.value(m, "m", 32usize)?;
            anyhow::ensure!(m > 0, "--m must be at least 1");
            let seed = s.value(seed, "seed", 0u64)?;
            let t = trainer(&s, kind, set.family)?;
            let mdp = s.apply("mdp", MdpSpec::default())?;
            let mut run = Run::start();
            run.seed(seed);
            run.config("candidates", &candidates)?;
            run.config("m", m)?;
            run.config("trainer", &t)?;
            run.config("mdp", mdp)?;
            let shadows = train_shadow_policies(&set, m, &t, mdp, seed)?;
            let mut entries = Vec::with_capacity(shadows.len());
            for sh in &shadows {
                let file = format!("c{}_s{:03}.policy", sh.candidate, sh.seed_index);
                run.write_bytes(&out.join(&file), &encode_policy(&sh.policy))?;
                entries.push(ShadowEntry { candidate: sh.candidate, seed_index: sh.seed_index, seed: sh.seed, file });
            }
            let index = ShadowIndex {
                schema_version: SHADOW_INDEX_SCHEMA_VERSION,
                candidate_set: candidates,
                family: set.family,
                labels: set.labels(),
                trainer: t,
                m,
                seed,
                policies: entries,
            };
            run.write_json(&index_path(&out), &index)?;
            println!("trained {} shadow policies into {}", shadows.len(), out.display());
            run.finish(&manifest_path(&out))
        }
        ShadowCmd::Features { candidates, shadows, k, train_seeds, seed, out, common } => {
            let s = Settings::load(common.config.as_deref(), &common.sets)?;
            s.check_keys(&["k", "train_seeds", "seed"], &["mdp"])?;
            let set = load_candidates(&candidates)?;
            let index = load_index(&shadows)?;
            check_labels(&set, &index.labels, &format!("shadow directory {}", shadows.display()))?;
            let k = s.value(k, "k", DEFAULT_TRIALS)?;
            let train_seeds = s.value(train_seeds, "train_seeds", 8usize)?;
            let seed = s.value(seed, "seed", index.seed)?;
            let mdp = s.apply("mdp", MdpSpec::default())?;
            let mut policies = Vec::with_capacity(index.policies.len());
            for e in &index.policies {
                let p = shadows.join(&e.file);
                if !p.exists() {
                    bail!("missing shadow policy {} listed in {}", p.display(), index_path(&shadows).display());
                }
                policies.push(ShadowPolicy {
                    candidate: e.candidate,
                    seed_index: e.seed_index,
                    seed: e.seed,
                    policy: load_policy(&p)?,
                });
            }
            let mut run = Run::start();
            run.seed(seed);
            run.config("candidates", &candidates)?;
            run.config("shadows", &shadows)?;
            run.config("k", k)?;
            run.config("train_seeds", train_seeds)?;
            let ds = build_dataset(&set, &policies, train_seeds, k, mdp, seed)?;
            run.write_bytes(&out, ds.to_csv().as_bytes())?;
            println!("wrote {} feature rows ({} columns) to {}", ds.rows.len(), 2 * set.len(), out.display());
            run.finish(&manifest_path(&out))
        }
        ShadowCmd::Fit { features, out, common } => {
            let s = Settings::load(common.config.as_deref(), &common.sets)?;
            s.check_keys(&[], &["svm"])?;
            if !features.exists() {
                bail!("missing feature table {} (run `dynsleuth shadow features` first)", features.display());
            }
            let ds = ShadowDataset::load_csv(&features)?;
            let cfg = s.apply("svm", SvmConfig::default())?;
            let mut run = Run::start();
            run.seed(cfg.seed);
            run.config("features", &features)?;
            run.config("svm", &cfg)?;
            let model = fit_classifier(&ds, &cfg)?;
            run.write_bytes(&out, model.to_json()?.as_bytes())?;
            println!("fit {} classes on {} train rows", model.n_classes(), model.fit_rows.len());
            run.finish(&manifest_path(&out))
        }
        ShadowCmd::Infer { model, policy, candidates, k, seed, out, common } => {
            let s = Settings::load(common.config.as_deref(), &common.sets)?;
            s.check_keys(&["k", "seed"], &["mdp"])?;
            for (p, what) in [(&model, "model"), (&policy, "policy")] {
                if !p.exists() {
                    bail!("missing {what} file {}", p.display());
                }
            }
            let set = load_candidates(&candidates)?;
            let svm = LinearSvmModel::load(&model)?;
            let target = load_policy(&policy)?;
            let k = s.value(k, "k", DEFAULT_TRIALS)?;
            let seed = s.value(seed, "seed", 0u64)?;
            let mdp = s.apply("mdp", MdpSpec::default())?;
            let f = extract_features(&target, &set, k, mdp, seed)?;
            let (label, scores) = infer_candidate(&svm, &f.vector)?;
            println!("{}", set.candidates[label].label);
            if let Some(out) = out {
                let mut run = Run::start();
                run.seed(seed);
                run.config("model", &model)?;
                run.config("policy", &policy)?;
                run.config("candidates", &candidates)?;
                run.config("k", k)?;
                let result = serde_json::json!({
                    "schema_version": 1,
                    "label": set.candidates[label].label,
                    "index": label,
                    "scores": scores,
                    "features": f.vector,
                });
                run.write_json(&out, &result)?;
                run.finish(&manifest_path(&out))?;
            }
            Ok(())
        }
        ShadowCmd::Experiment { candidates, m, k, train_seeds, trainer: kind, seed, out, common } => {
            let s = Settings::load(common.config.as_deref(), &common.sets)?;
            s.check_keys(&["m", "k", "train_seeds", "trainer", "seed"], &["gpg", "pg", "dqn", "mdp", "svm"])?;
            let set = load_candidates(&candidates)?;
            let base = InferenceConfig::for_family(set.family);
            let cfg = InferenceConfig {
                m: s.value(m, "m", base.m)?,
                k: s.value(k, "k", base.k)?,
                train_seed_count: s.value(train_seeds, "train_seeds", base.train_seed_count)?,
                trainer: trainer(&s, kind, set.family)?,
                svm: s.apply("svm", base.svm)?,
                mdp: s.apply("mdp", base.mdp)?,
                seed: s.value(seed, "seed", base.seed)?,
            };
            let mut run = Run::start();
            run.seed(cfg.seed);
            run.config("candidates", &candidates)?;
            run.config("inference", &cfg)?;
            let report = run_inference_experiment(&candidates, &set, &cfg)?;
            println!(
                "macro-average accuracy {:.2}% (raw features {:.2}%)",
                100.0 * report.standardized.macro_accuracy,
                100.0 * report.raw.macro_accuracy
            );
            for (label, acc) in report.labels.iter().zip(&report.standardized.per_candidate_accuracy) {
                println!("  {label:<16} {:.2}%", 100.0 * acc);
            }
            run.write_json(&out, &report)?;
            run.finish(&manifest_path(&out))
        }
    }
}
