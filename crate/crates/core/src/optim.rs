//! First-order optimisers over a flat parameter vector.
//!
//! Entries with `trainable[i] == false` are never touched, including by
//! weight decay.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    AdamW,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Sgd(Sgd),
    AdamW(AdamW),
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, weight_decay: f64, dim: usize) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd(Sgd { lr, weight_decay }),
            OptimizerKind::AdamW => Optimizer::AdamW(AdamW::new(lr, weight_decay, dim)),
        }
    }

    pub fn step(&mut self, x: &mut [f64], grad: &[f64], trainable: &[bool]) {
        match self {
            Optimizer::Sgd(o) => o.step(x, grad, trainable),
            Optimizer::AdamW(o) => o.step(x, grad, trainable),
        }
    }
}

/// Plain gradient descent with optional L2 decay folded into the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Sgd {
    pub lr: f64,
    pub weight_decay: f64,
}

impl Sgd {
    pub fn step(&mut self, x: &mut [f64], grad: &[f64], trainable: &[bool]) {
        for i in 0..x.len() {
            if trainable[i] {
                x[i] -= self.lr * (grad[i] + self.weight_decay * x[i]);
            }
        }
    }
}

/// Adam with decoupled weight decay.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamW {
    pub fn new(lr: f64, weight_decay: f64, dim: usize) -> Self {
        Self { lr, weight_decay, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    pub fn step(&mut self, x: &mut [f64], grad: &[f64], trainable: &[bool]) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for i in 0..x.len() {
            if !trainable[i] {
                continue;
            }
            let g = grad[i];
            x[i] -= self.lr * self.weight_decay * x[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            x[i] -= self.lr * mh / (sqrt(vh) + self.eps);
        }
    }
}
