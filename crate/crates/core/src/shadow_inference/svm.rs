use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::{ShadowDataset, Split};
use crate::error::{domain, Error, Result};
use crate::gridworld::argmax;
use crate::seeding::stream;

pub const SVM_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Weight of the mean hinge loss against ½‖w‖².
    pub c: f64,
    pub epochs: usize,
    /// Multiplier on the Pegasos step size 1/(λt), λ = 1/C.
    pub lr: f64,
    pub seed: u64,
    /// Minibatch size; `None` takes one full-batch step per epoch.
    pub batch_size: Option<usize>,
    pub standardize: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            epochs: 500,
            lr: 1.0,
            seed: 0,
            batch_size: None,
            standardize: true,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.lr > 0.0) || self.epochs == 0 {
            return domain("SVM needs C > 0, lr > 0 and at least one epoch");
        }
        if self.batch_size == Some(0) {
            return domain("SVM batch size must be positive");
        }
        Ok(())
    }
}

/// One-vs-rest linear SVM over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub schema_version: u32,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    /// (label, seed index) of every row used for standardization and fitting.
    pub fit_rows: Vec<(usize, usize)>,
    /// Summed one-vs-rest objective of the averaged iterate after each epoch.
    pub objective_history: Vec<f64>,
}

impl LinearSvmModel {
    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn standardize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "feature of length {} for a model of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    /// Per-class decision values w_c·x_std + b_c.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.standardize(x)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| dot(w, &z) + b)
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: LinearSvmModel = serde_json::from_str(text)?;
        if m.schema_version != SVM_SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported model schema {}", m.schema_version)));
        }
        if m.std.len() != m.mean.len()
            || m.weights.len() != m.biases.len()
            || m.weights.iter().any(|w| w.len() != m.mean.len())
        {
            return Err(Error::Format("inconsistent model dimensions".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Label (lowest index on ties) and per-class scores for one feature vector.
pub fn infer_candidate(model: &LinearSvmModel, feature: &[f64]) -> Result<(usize, Vec<f64>)> {
    let scores = model.scores(feature)?;
    Ok((argmax(&scores), scores))
}

/// Fits on the train split only.
pub fn fit_classifier(dataset: &ShadowDataset, cfg: &SvmConfig) -> Result<LinearSvmModel> {
    cfg.validate()?;
    let rows: Vec<_> = dataset.split(Split::Train).collect();
    let classes = dataset.n_candidates;
    let present = dataset.counts(Split::Train).iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return domain("classifier needs at least two classes in the train split");
    }
    let dim = 2 * classes;
    let n = rows.len() as f64;

    let (mean, std) = if cfg.standardize {
        let mean: Vec<f64> = (0..dim).map(|d| rows.iter().map(|r| r.features[d]).sum::<f64>() / n).collect();
        let std = (0..dim)
            .map(|d| {
                let var = rows.iter().map(|r| (r.features[d] - mean[d]).powi(2)).sum::<f64>() / n;
                if var.sqrt() > 1e-12 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        (mean, std)
    } else {
        (vec![0.0; dim], vec![1.0; dim])
    };
    let xs: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.features.iter().zip(mean.iter().zip(&std)).map(|(v, (m, s))| (v - m) / s).collect())
        .collect();
    // Dimensions constant over the train split carry no signal and get zero weight.
    let degenerate: Vec<bool> = (0..dim).map(|d| xs.iter().all(|x| x[d] == xs[0][d]) && cfg.standardize).collect();

    let mut weights = Vec::with_capacity(classes);
    let mut biases = Vec::with_capacity(classes);
    let mut objective = vec![0.0; cfg.epochs];
    for class in 0..classes {
        let ys: Vec<f64> = rows.iter().map(|r| if r.label == class { 1.0 } else { -1.0 }).collect();
        let (mut w, b, history) = pegasos(&xs, &ys, cfg, class as u64);
        for (d, w) in w.iter_mut().enumerate() {
            if degenerate[d] {
                *w = 0.0;
            }
        }
        for (o, h) in objective.iter_mut().zip(history) {
            *o += h;
        }
        weights.push(w);
        biases.push(b);
    }
    Ok(LinearSvmModel {
        schema_version: SVM_SCHEMA_VERSION,
        mean,
        std,
        weights,
        biases,
        fit_rows: rows.iter().map(|r| (r.label, r.seed_index)).collect(),
        objective_history: objective,
    })
}

/// ½‖w‖² + C·mean hinge.
pub fn svm_objective(xs: &[Vec<f64>], ys: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .sum::<f64>()
        / xs.len() as f64;
    0.5 * dot(w, w) + c * hinge
}

/// Binary Pegasos subgradient descent on the objective scaled by 1/C.
///
/// Iterates are projected onto the ball ‖w‖ ≤ √C that contains the optimum,
/// and the returned model averages the second half of the iterates. The
/// history holds the objective of the returned estimate after every epoch.
fn pegasos(xs: &[Vec<f64>], ys: &[f64], cfg: &SvmConfig, class: u64) -> (Vec<f64>, f64, Vec<f64>) {
    let dim = xs[0].len();
    let lambda = 1.0 / cfg.c;
    let radius = cfg.c.sqrt();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; dim];
    let mut b_avg = 0.0;
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let batch = cfg.batch_size.unwrap_or(xs.len()).min(xs.len());
    let total = (cfg.epochs * xs.len().div_ceil(batch)) as u64;
    let burn_in = total / 2;
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        if cfg.batch_size.is_some() {
            order.shuffle(&mut stream(cfg.seed, "svm_epoch", class << 32 | epoch as u64));
        }
        for chunk in order.chunks(batch) {
            t += 1;
            let eta = cfg.lr / (lambda * t as f64);
            let mut gw = vec![0.0; dim];
            let mut gb = 0.0;
            for &i in chunk {
                if ys[i] * (dot(&w, &xs[i]) + b) < 1.0 {
                    for (g, x) in gw.iter_mut().zip(&xs[i]) {
                        *g += ys[i] * x;
                    }
                    gb += ys[i];
                }
            }
            let k = chunk.len() as f64;
            let shrink = 1.0 - eta * lambda;
            for (wd, g) in w.iter_mut().zip(&gw) {
                *wd = shrink * *wd + eta * g / k;
            }
            b += eta * gb / k;
            let norm = dot(&w, &w).sqrt();
            if norm > radius {
                for wd in w.iter_mut() {
                    *wd *= radius / norm;
                }
            }
            if t <= burn_in {
                w_avg.copy_from_slice(&w);
                b_avg = b;
            } else {
                let a = 1.0 / (t - burn_in) as f64;
                for (avg, wd) in w_avg.iter_mut().zip(&w) {
                    *avg += a * (wd - *avg);
                }
                b_avg += a * (b - b_avg);
            }
        }
        history.push(svm_objective(xs, ys, &w_avg, b_avg, cfg.c));
    }
    (w_avg, b_avg, history)
}
