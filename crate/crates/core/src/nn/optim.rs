//! Parameters and the optimizers that update them.
//!
//! Optimizers are registered by name and picked at runtime from
//! [`OptimizerConfig::name`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use super::NnError;

/// A named trainable tensor and its gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    /// Rows (along axis 0) that are never updated.
    pub frozen_rows: Vec<usize>,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape());
        Param { name: name.into(), value, grad, frozen_rows: Vec::new() }
    }

    pub fn frozen(mut self, rows: &[usize]) -> Self {
        self.frozen_rows = rows.to_vec();
        self
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    fn row_len(&self) -> usize {
        let rows = self.value.shape().first().copied().unwrap_or(1).max(1);
        self.value.len() / rows
    }

    fn is_frozen(&self, flat: usize) -> bool {
        !self.frozen_rows.is_empty() && self.frozen_rows.contains(&(flat / self.row_len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub name: String,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub momentum: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            name: "adam".into(),
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            momentum: 0.9,
        }
    }
}

pub trait Optimizer: Send {
    fn name(&self) -> &'static str;

    /// Applies one update from the accumulated gradients. `params` must be
    /// passed in the same order on every call.
    fn step(&mut self, params: &mut [&mut Param]);

    fn steps_taken(&self) -> u64;
}

/// One bias-corrected Adam update of a flat parameter slice at step `t ≥ 1`.
#[allow(clippy::too_many_arguments)]
pub fn adam_update(
    value: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
) {
    let c1 = 1.0 - beta1.powi(t as i32);
    let c2 = 1.0 - beta2.powi(t as i32);
    for i in 0..value.len() {
        let g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        value[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam { lr, beta1, beta2, eps, t: 0, m: Vec::new(), v: Vec::new() }
    }
}

impl Optimizer for Adam {
    fn name(&self) -> &'static str {
        "adam"
    }

    fn step(&mut self, params: &mut [&mut Param]) {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
            self.v = self.m.clone();
        }
        self.t += 1;
        for (i, p) in params.iter_mut().enumerate() {
            let frozen: Vec<(usize, Vec<f64>)> = if p.frozen_rows.is_empty() {
                Vec::new()
            } else {
                let rl = p.row_len();
                p.frozen_rows
                    .iter()
                    .map(|&r| (r, p.value.data()[r * rl..(r + 1) * rl].to_vec()))
                    .collect()
            };
            let Param { value, grad, .. } = &mut **p;
            adam_update(
                value.data_mut(),
                grad.data(),
                &mut self.m[i],
                &mut self.v[i],
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                self.t,
            );
            for (r, saved) in frozen {
                let rl = saved.len();
                p.value.data_mut()[r * rl..(r + 1) * rl].copy_from_slice(&saved);
            }
        }
    }

    fn steps_taken(&self) -> u64 {
        self.t
    }
}

/// Plain SGD with classical momentum: `v ← μv + g; w ← w − lr·v`.
#[derive(Debug, Clone)]
pub struct SgdMomentum {
    pub lr: f64,
    pub momentum: f64,
    t: u64,
    velocity: Vec<Vec<f64>>,
}

impl SgdMomentum {
    pub fn new(lr: f64, momentum: f64) -> Self {
        SgdMomentum { lr, momentum, t: 0, velocity: Vec::new() }
    }
}

impl Optimizer for SgdMomentum {
    fn name(&self) -> &'static str {
        "sgd_momentum"
    }

    fn step(&mut self, params: &mut [&mut Param]) {
        if self.velocity.is_empty() {
            self.velocity = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
        }
        self.t += 1;
        for (i, p) in params.iter_mut().enumerate() {
            for j in 0..p.value.len() {
                if p.is_frozen(j) {
                    continue;
                }
                let vel = &mut self.velocity[i][j];
                *vel = self.momentum * *vel + p.grad.data()[j];
                p.value.data_mut()[j] -= self.lr * *vel;
            }
        }
    }

    fn steps_taken(&self) -> u64 {
        self.t
    }
}

pub type OptimizerFactory = fn(&OptimizerConfig) -> Box<dyn Optimizer>;

fn registry() -> &'static BTreeMap<&'static str, OptimizerFactory> {
    static REGISTRY: OnceLock<BTreeMap<&'static str, OptimizerFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut map: BTreeMap<&'static str, OptimizerFactory> = BTreeMap::new();
        map.insert("adam", |c| Box::new(Adam::new(c.lr, c.beta1, c.beta2, c.eps)));
        map.insert("sgd_momentum", |c| Box::new(SgdMomentum::new(c.lr, c.momentum)));
        map
    })
}

pub fn available_optimizers() -> Vec<&'static str> {
    registry().keys().copied().collect()
}

pub fn create_optimizer(config: &OptimizerConfig) -> Result<Box<dyn Optimizer>, NnError> {
    let factory = registry()
        .get(config.name.as_str())
        .ok_or_else(|| NnError::UnknownOptimizer(config.name.clone()))?;
    Ok(factory(config))
}
