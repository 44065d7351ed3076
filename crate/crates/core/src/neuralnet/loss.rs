//! Losses returning `(value, gradient with respect to the prediction)`.

use crate::error::{Error, Result};

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// `-log softmax(logits)[target]` and its gradient `softmax - onehot(target)`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= logits.len() {
        return Err(Error::Shape(format!(
            "target {target} out of range for {} logits",
            logits.len()
        )));
    }
    let loss = -log_softmax(logits)[target];
    let mut grad = softmax(logits);
    grad[target] -= 1.0;
    Ok((loss, grad))
}

/// Mean squared error `mean((pred - target)^2)`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "prediction length {} vs target length {}",
            pred.len(),
            target.len()
        )));
    }
    let n = pred.len() as f64;
    let loss = pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n;
    let grad = pred.iter().zip(target).map(|(p, t)| 2.0 * (p - t) / n).collect();
    Ok((loss, grad))
}

/// Shannon entropy of `softmax(logits)` and its gradient with respect to the logits.
pub fn softmax_entropy(logits: &[f64]) -> (f64, Vec<f64>) {
    let p = softmax(logits);
    let logp = log_softmax(logits);
    let h: f64 = -p.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
    // dH/dz_j = -p_j (log p_j + H)
    let grad = p.iter().zip(&logp).map(|(p, l)| -p * (l + h)).collect();
    (h, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_cost_ln_k() {
        let (loss, grad) = softmax_cross_entropy(&[0.7; 5], 2).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-12);
        assert!((grad[2] + 0.8).abs() < 1e-12);
        assert!(softmax_cross_entropy(&[0.0; 5], 5).is_err());
    }

    #[test]
    fn mse_at_target_is_zero() {
        let (loss, grad) = mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![0.0, 0.0]);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    fn fd(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut up = x.to_vec();
                let mut dn = x.to_vec();
                up[i] += h;
                dn[i] -= h;
                (f(&up) - f(&dn)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn losses_match_finite_differences() {
        let z = [0.3, -1.2, 2.0, 0.1, -0.4];
        let t = [1.0, 0.0, -0.5, 2.0, 0.3];
        let (_, g) = softmax_cross_entropy(&z, 3).unwrap();
        let num = fd(|z| softmax_cross_entropy(z, 3).unwrap().0, &z, 1e-5);
        for (a, b) in g.iter().zip(&num) {
            assert!((a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1e-6));
        }
        let (_, g) = mse_loss(&z, &t).unwrap();
        let num = fd(|z| mse_loss(z, &t).unwrap().0, &z, 1e-5);
        for (a, b) in g.iter().zip(&num) {
            assert!((a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1e-6));
        }
        let (_, g) = softmax_entropy(&z);
        let num = fd(|z| softmax_entropy(z).0, &z, 1e-5);
        for (a, b) in g.iter().zip(&num) {
            assert!((a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1e-6));
        }
    }
}
