use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Parameters of a fully-connected ReLU network.
///
/// All parameters live in one flat buffer, layer by layer: the weight matrix
/// (`inputs × outputs`, row-major) followed by the bias vector. Gradients use
/// the same type and layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    dims: Vec<usize>,
    data: Vec<f64>,
}

/// Per-layer inputs and pre-activations recorded by a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    inputs: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    /// Pre-activation values of every layer, output layer last.
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre_activations
    }

    pub fn output(&self) -> &[f64] {
        self.pre_activations.last().expect("non-empty network")
    }
}

fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return domain(format!("a network needs at least 2 layer dims, got {dims:?}"));
    }
    if dims.contains(&0) {
        return domain(format!("layer dims must be positive, got {dims:?}"));
    }
    Ok(())
}

impl MlpParams {
    /// Zero-mean uniform weights in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, zero biases.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut params = Self::zeros(dims)?;
        let mut offset = 0;
        for w in dims.windows(2) {
            let scale = 1.0 / (w[0] as f64).sqrt();
            for v in &mut params.data[offset..offset + w[0] * w[1]] {
                *v = rng.random_range(-scale..scale);
            }
            offset += w[0] * w[1] + w[1];
        }
        Ok(params)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![0.0; param_count(dims)],
        })
    }

    pub fn from_flat(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        check_dims(dims)?;
        if data.len() != param_count(dims) {
            return Err(Error::Shape(format!(
                "dims {dims:?} need {} parameters, got {}",
                param_count(dims),
                data.len()
            )));
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    /// A zero-filled buffer of the same shape, for accumulating gradients.
    pub fn zeros_like(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            data: vec![0.0; self.data.len()],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn layer_offset(&self, layer: usize) -> usize {
        param_count(&self.dims[..=layer])
    }

    /// Weights (`inputs × outputs`, row-major) and bias of one layer.
    pub fn layer(&self, layer: usize) -> (&[f64], &[f64]) {
        let (n_in, n_out) = (self.dims[layer], self.dims[layer + 1]);
        let off = self.layer_offset(layer);
        let (w, rest) = self.data[off..].split_at(n_in * n_out);
        (w, &rest[..n_out])
    }

    pub fn layer_mut(&mut self, layer: usize) -> (&mut [f64], &mut [f64]) {
        let (n_in, n_out) = (self.dims[layer], self.dims[layer + 1]);
        let off = self.layer_offset(layer);
        let (w, rest) = self.data[off..].split_at_mut(n_in * n_out);
        (w, &mut rest[..n_out])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims[0] {
            return Err(Error::Shape(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.dims[0]
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        let last = self.num_layers() - 1;
        for l in 0..self.num_layers() {
            let mut z = affine(self.layer(l), &a);
            if l != last {
                relu_in_place(&mut z);
            }
            a = z;
        }
        Ok(a)
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.check_input(x)?;
        let n = self.num_layers();
        let mut inputs = Vec::with_capacity(n);
        let mut pre_activations = Vec::with_capacity(n);
        let mut a = x.to_vec();
        for l in 0..n {
            let z = affine(self.layer(l), &a);
            let mut next = z.clone();
            relu_in_place(&mut next);
            inputs.push(a);
            pre_activations.push(z);
            a = next;
        }
        Ok(ForwardTrace {
            inputs,
            pre_activations,
        })
    }

    /// Gradients of `upstream · forward(x)` with respect to every parameter.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<MlpParams> {
        let trace = self.forward_trace(x)?;
        let mut grads = self.zeros_like();
        self.accumulate_backward(&trace, upstream, &mut grads)?;
        Ok(grads)
    }

    /// Adds the gradient of `upstream · output` for a recorded trace into `grads`.
    pub fn accumulate_backward(
        &self,
        trace: &ForwardTrace,
        upstream: &[f64],
        grads: &mut MlpParams,
    ) -> Result<()> {
        if upstream.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "upstream gradient has length {}, network outputs {}",
                upstream.len(),
                self.output_dim()
            )));
        }
        if grads.dims != self.dims {
            return Err(Error::Shape("gradient buffer shape differs from network".into()));
        }
        let mut delta = upstream.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let input = &trace.inputs[l];
            {
                let (gw, gb) = grads.layer_mut(l);
                for (g, d) in gb.iter_mut().zip(&delta) {
                    *g += d;
                }
                for i in 0..n_in {
                    let a = input[i];
                    if a == 0.0 {
                        continue;
                    }
                    let row = &mut gw[i * n_out..(i + 1) * n_out];
                    for (g, d) in row.iter_mut().zip(&delta) {
                        *g += a * d;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let (w, _) = self.layer(l);
            let below = &trace.pre_activations[l - 1];
            let mut prev = vec![0.0; n_in];
            for i in 0..n_in {
                if below[i] <= 0.0 {
                    continue;
                }
                let row = &w[i * n_out..(i + 1) * n_out];
                prev[i] = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
            }
            delta = prev;
        }
        Ok(())
    }
}

fn affine((w, b): (&[f64], &[f64]), x: &[f64]) -> Vec<f64> {
    let n_out = b.len();
    let mut z = b.to_vec();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &w[i * n_out..(i + 1) * n_out];
        for (zj, wij) in z.iter_mut().zip(row) {
            *zj += xi * wij;
        }
    }
    z
}

fn relu_in_place(z: &mut [f64]) {
    for v in z {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    #[test]
    fn init_shapes_match_lidar_network() {
        let p = MlpParams::init(&[8, 64, 64, 5], &mut rng_from_seed(0)).unwrap();
        assert_eq!(p.layer(0).0.len(), 8 * 64);
        assert_eq!(p.layer(1).0.len(), 64 * 64);
        assert_eq!(p.layer(2).0.len(), 64 * 5);
        assert!(p.layer(2).1.iter().all(|&b| b == 0.0));
        let bound = 1.0 / 8f64.sqrt();
        assert!(p.layer(0).0.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn init_is_deterministic_and_rejects_bad_dims() {
        let a = MlpParams::init(&[2, 2], &mut rng_from_seed(3)).unwrap();
        let b = MlpParams::init(&[2, 2], &mut rng_from_seed(3)).unwrap();
        assert_eq!(a, b);
        assert!(MlpParams::init(&[5], &mut rng_from_seed(3)).is_err());
        assert!(MlpParams::init(&[], &mut rng_from_seed(3)).is_err());
        assert!(MlpParams::init(&[3, 0, 2], &mut rng_from_seed(3)).is_err());
    }

    #[test]
    fn zero_and_identity_networks() {
        let z = MlpParams::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(z.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);

        let mut id = MlpParams::zeros(&[3, 3]).unwrap();
        for i in 0..3 {
            id.layer_mut(0).0[i * 3 + i] = 1.0;
        }
        assert_eq!(id.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        assert!(id.forward(&[1.0]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let p = MlpParams::init(&[4, 6, 3], &mut rng_from_seed(9)).unwrap();
        let g = p.backward(&[0.3, -1.0, 2.0, 0.5], &[0.0; 3]).unwrap();
        assert!(g.as_slice().iter().all(|&v| v == 0.0));
        assert!(p.backward(&[0.3, -1.0, 2.0, 0.5], &[0.0; 2]).is_err());
    }

    #[test]
    fn dead_relu_blocks_incoming_gradient() {
        let mut p = MlpParams::zeros(&[2, 2, 1]).unwrap();
        {
            let (w, b) = p.layer_mut(0);
            w.copy_from_slice(&[1.0, -1.0, 1.0, -1.0]);
            b.copy_from_slice(&[0.0, 0.0]);
        }
        p.layer_mut(1).0.copy_from_slice(&[1.0, 1.0]);
        // Hidden unit 1 has pre-activation -2 for x = (1, 1).
        let g = p.backward(&[1.0, 1.0], &[1.0]).unwrap();
        let (gw, gb) = g.layer(0);
        assert_eq!(gw[1], 0.0);
        assert_eq!(gw[3], 0.0);
        assert_eq!(gb[1], 0.0);
        assert_eq!(gw[0], 1.0);
    }
}
