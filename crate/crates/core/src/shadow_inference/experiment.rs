use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{DatasetRow, ShadowDataset, Split};
use super::shadow::{extract_features, train_shadow_policies, ShadowPolicy, ShadowTrainer, DEFAULT_TRIALS};
use super::svm::{fit_classifier, infer_candidate, LinearSvmModel, SvmConfig};
use crate::env_families::{CandidateSet, Family};
use crate::error::{domain, Error, Result};
use crate::gridworld::MdpSpec;
use crate::seeding::derive_seed;

pub const INFERENCE_SCHEMA_VERSION: u32 = 1;
pub const INFERENCE_KIND: &str = "inference";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Shadow policies per candidate.
    pub m: usize,
    /// The first this-many seed indices of each candidate are used for fitting.
    pub train_seed_count: usize,
    /// Trials per candidate environment in a feature vector.
    pub k: usize,
    pub trainer: ShadowTrainer,
    pub svm: SvmConfig,
    pub mdp: MdpSpec,
    pub seed: u64,
}

impl InferenceConfig {
    pub fn for_family(family: Family) -> Self {
        Self {
            m: 32,
            train_seed_count: 8,
            k: DEFAULT_TRIALS,
            trainer: ShadowTrainer::default_for(family),
            svm: SvmConfig::default(),
            mdp: MdpSpec::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_seed_count == 0 || self.train_seed_count >= self.m {
            return domain("need 0 < train_seed_count < m");
        }
        if self.k == 0 {
            return domain("k must be at least 1");
        }
        self.svm.validate()?;
        self.mdp.validate()
    }
}

/// Feature-extraction seed of a shadow policy.
pub fn feature_seed(root: u64, n_candidates: usize, candidate: usize, seed_index: usize) -> u64 {
    derive_seed(root, "features", (seed_index * n_candidates + candidate) as u64)
}

/// Feature rows of trained shadow policies, split by seed index.
pub fn build_dataset(
    candidates: &CandidateSet,
    shadows: &[ShadowPolicy],
    train_seed_count: usize,
    k: usize,
    mdp: MdpSpec,
    root_seed: u64,
) -> Result<ShadowDataset> {
    let n = candidates.len();
    let rows: Vec<DatasetRow> = shadows
        .par_iter()
        .map(|s| {
            let seed = feature_seed(root_seed, n, s.candidate, s.seed_index);
            let f = extract_features(&s.policy, candidates, k, mdp, seed)?;
            Ok(DatasetRow {
                label: s.candidate,
                seed_index: s.seed_index,
                split: if s.seed_index < train_seed_count { Split::Train } else { Split::Test },
                features: f.vector,
            })
        })
        .collect::<Result<_>>()?;
    let mut ds = ShadowDataset::new(n);
    for r in rows {
        ds.push(r)?;
    }
    Ok(ds)
}

/// Test-split performance of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub per_candidate_accuracy: Vec<f64>,
    pub macro_accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

pub fn evaluate_model(model: &LinearSvmModel, dataset: &ShadowDataset, split: Split) -> Result<Evaluation> {
    let n = dataset.n_candidates;
    let mut confusion = vec![vec![0usize; n]; n];
    for r in dataset.split(split) {
        let (pred, _) = infer_candidate(model, &r.features)?;
        confusion[r.label][pred] += 1;
    }
    let per: Vec<f64> = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: usize = row.iter().sum();
            if total == 0 {
                f64::NAN
            } else {
                row[i] as f64 / total as f64
            }
        })
        .collect();
    let scored: Vec<f64> = per.iter().copied().filter(|a| a.is_finite()).collect();
    if scored.is_empty() {
        return domain(format!("no {} rows to evaluate", split.name()));
    }
    Ok(Evaluation {
        macro_accuracy: scored.iter().sum::<f64>() / scored.len() as f64,
        per_candidate_accuracy: per,
        confusion,
    })
}

/// Evidence that only train-split policies shaped the classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitHygiene {
    pub train_rows: usize,
    pub test_rows: usize,
    pub fit_rows: usize,
    pub passed: bool,
}

/// Checks a model's fit provenance against the dataset split.
pub fn check_split_hygiene(model: &LinearSvmModel, dataset: &ShadowDataset) -> Result<SplitHygiene> {
    let train: std::collections::HashSet<(usize, usize)> =
        dataset.split(Split::Train).map(|r| (r.label, r.seed_index)).collect();
    let test: std::collections::HashSet<(usize, usize)> =
        dataset.split(Split::Test).map(|r| (r.label, r.seed_index)).collect();
    let clean = model.fit_rows.iter().all(|p| train.contains(p) && !test.contains(p))
        && train.is_disjoint(&test);
    let report = SplitHygiene {
        train_rows: train.len(),
        test_rows: test.len(),
        fit_rows: model.fit_rows.len(),
        passed: clean,
    };
    if !clean {
        return Err(Error::Domain("a test-split policy contributed to classifier fitting".into()));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub schema_version: u32,
    pub kind: String,
    /// Name of the candidate set (a built-in name or the file it came from).
    pub candidate_set: String,
    pub family: Family,
    pub labels: Vec<String>,
    pub config: InferenceConfig,
    /// Standardized-feature classifier (the headline numbers).
    pub standardized: Evaluation,
    /// Same pipeline without standardization.
    pub raw: Evaluation,
    pub split_hygiene: SplitHygiene,
    pub seconds: f64,
}

/// Shadow training, features, fit on the train seeds, evaluation on the rest.
pub fn run_inference_experiment(
    set_name: &str,
    candidates: &CandidateSet,
    cfg: &InferenceConfig,
) -> Result<InferenceReport> {
    cfg.validate()?;
    candidates.validate()?;
    let started = Instant::now();
    let shadows = train_shadow_policies(candidates, cfg.m, &cfg.trainer, cfg.mdp, cfg.seed)?;
    let dataset = build_dataset(candidates, &shadows, cfg.train_seed_count, cfg.k, cfg.mdp, cfg.seed)?;
    let model = fit_classifier(&dataset, &cfg.svm)?;
    let split_hygiene = check_split_hygiene(&model, &dataset)?;
    let raw_model = fit_classifier(&dataset, &SvmConfig { standardize: false, ..cfg.svm.clone() })?;
    check_split_hygiene(&raw_model, &dataset)?;
    Ok(InferenceReport {
        schema_version: INFERENCE_SCHEMA_VERSION,
        kind: INFERENCE_KIND.into(),
        candidate_set: set_name.into(),
        family: candidates.family,
        labels: candidates.labels(),
        config: cfg.clone(),
        standardized: evaluate_model(&model, &dataset, Split::Test)?,
        raw: evaluate_model(&raw_model, &dataset, Split::Test)?,
        split_hygiene,
        seconds: started.elapsed().as_secs_f64(),
    })
}
