//! Candidate inference: shadow policies trained on each known dynamics
//! candidate, reward-statistic features, and a linear SVM that names the
//! candidate a target policy was trained on.

mod dataset;
mod experiment;
mod shadow;
mod svm;

pub use dataset::{DatasetRow, ShadowDataset, Split};
pub use experiment::{
    build_dataset, check_split_hygiene, evaluate_model, feature_seed, run_inference_experiment,
    Evaluation, InferenceConfig, InferenceReport, SplitHygiene, INFERENCE_KIND,
    INFERENCE_SCHEMA_VERSION,
};
pub use shadow::{
    extract_features, shadow_seed, train_shadow_policies, train_shadow_subset, Features,
    ShadowPolicy, ShadowTrainer, DEFAULT_TRIALS,
};
pub use svm::{fit_classifier, infer_candidate, svm_objective, LinearSvmModel, SvmConfig, SVM_SCHEMA_VERSION};
