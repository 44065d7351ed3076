use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::loss::softmax;
use super::MlpParams;
use crate::error::{Error, Result};
use crate::gridworld::argmax;

/// How the network output is turned into actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolicyHead {
    /// Action values; the policy acts greedily.
    QValues,
    /// Action logits of a softmax policy.
    Logits,
    /// Mean of a 1-d Gaussian action with a state-independent log std.
    Gaussian { log_std: f64 },
}

impl PolicyHead {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyHead::QValues => "qvalues",
            PolicyHead::Logits => "logits",
            PolicyHead::Gaussian { .. } => "gaussian",
        }
    }
}

/// What the network expects as input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputContract {
    /// The 8 LiDAR distances in N, NE, E, SE, S, SW, W, NW order.
    Lidar,
    /// A 0/1 map genome (the flip-search state).
    SearchState,
    /// PointBot observation `(x / 10, v, 1)`.
    PointBot,
}

impl InputContract {
    pub fn tag(self) -> u8 {
        match self {
            InputContract::Lidar => 0,
            InputContract::SearchState => 1,
            InputContract::PointBot => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(InputContract::Lidar),
            1 => Some(InputContract::SearchState),
            2 => Some(InputContract::PointBot),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpPolicy {
    pub params: MlpParams,
    pub head: PolicyHead,
    pub input: InputContract,
}

impl MlpPolicy {
    pub fn new(params: MlpParams, head: PolicyHead, input: InputContract) -> Result<Self> {
        if matches!(head, PolicyHead::Gaussian { .. }) && params.output_dim() != 1 {
            return Err(Error::Shape("a Gaussian head needs a single output".into()));
        }
        Ok(Self {
            params,
            head,
            input,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.params.output_dim()
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self.head, PolicyHead::QValues)
    }

    pub fn outputs(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.params.forward(obs)
    }

    /// Action probabilities. A Q-value head yields a one-hot distribution on
    /// its greedy action.
    pub fn action_distribution(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let out = self.params.forward(obs)?;
        match self.head {
            PolicyHead::QValues => {
                let mut p = vec![0.0; out.len()];
                p[argmax(&out)] = 1.0;
                Ok(p)
            }
            PolicyHead::Logits => Ok(softmax(&out)),
            PolicyHead::Gaussian { .. } => Err(Error::Domain(
                "a Gaussian policy has no discrete action distribution".into(),
            )),
        }
    }

    pub fn greedy_action(&self, obs: &[f64]) -> Result<usize> {
        if let PolicyHead::Gaussian { .. } = self.head {
            return Err(Error::Domain("a Gaussian policy has no discrete greedy action".into()));
        }
        Ok(argmax(&self.params.forward(obs)?))
    }

    /// Discrete action: greedy for Q-values, sampled for logits.
    pub fn act_discrete<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<usize> {
        match self.head {
            PolicyHead::QValues => self.greedy_action(obs),
            PolicyHead::Logits => Ok(sample_categorical(&self.action_distribution(obs)?, rng)),
            PolicyHead::Gaussian { .. } => Err(Error::Domain(
                "continuous policy used on a discrete environment".into(),
            )),
        }
    }

    /// Continuous action sampled from the Gaussian head (not clipped).
    pub fn act_continuous<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<f64> {
        match self.head {
            PolicyHead::Gaussian { log_std } => {
                let mean = self.params.forward(obs)?[0];
                let z: f64 = StandardNormal.sample(rng);
                Ok(mean + log_std.exp() * z)
            }
            _ => Err(Error::Domain(
                "discrete policy used on a continuous environment".into(),
            )),
        }
    }
}

pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
