use std::collections::VecDeque;

use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub terminal: bool,
}

/// Fixed-capacity FIFO experience buffer with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            items: VecDeque::with_capacity(capacity.max(1)),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn oldest(&self) -> Option<&Transition> {
        self.items.front()
    }

    /// `n` transitions drawn uniformly with replacement.
    pub fn sample<'a, R: Rng + ?Sized>(&'a self, n: usize, rng: &mut R) -> Vec<&'a Transition> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n)
            .map(|_| &self.items[rng.random_range(0..self.items.len())])
            .collect()
    }
}

/// Linear interpolation from `start` at step 0 to `end` at `end_step`, flat after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSchedule {
    pub start: f64,
    pub end: f64,
    pub end_step: u64,
}

impl LinearSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.end_step == 0 || step >= self.end_step {
            return self.end;
        }
        let frac = step as f64 / self.end_step as f64;
        self.start + frac * (self.end - self.start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    fn t(i: usize) -> Transition {
        Transition {
            obs: vec![i as f64],
            action: 0,
            reward: 0.0,
            next_obs: vec![],
            terminal: false,
        }
    }

    #[test]
    fn buffer_evicts_oldest_first() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(t(i));
            assert!(b.len() <= 3);
        }
        assert_eq!(b.oldest().unwrap().obs, vec![2.0]);
        let s = b.sample(10, &mut rng_from_seed(0));
        assert_eq!(s.len(), 10);
        assert!(s.iter().all(|x| x.obs[0] >= 2.0));
    }

    #[test]
    fn schedule_endpoints() {
        let s = LinearSchedule { start: 1.0, end: 0.02, end_step: 100_000 };
        assert_eq!(s.value(0), 1.0);
        assert_eq!(s.value(100_000), 0.02);
        assert_eq!(s.value(250_000), 0.02);
        assert!((s.value(50_000) - 0.51).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for step in (0..=120_000).step_by(1000) {
            let v = s.value(step);
            assert!(v <= prev);
            prev = v;
        }
    }
}
