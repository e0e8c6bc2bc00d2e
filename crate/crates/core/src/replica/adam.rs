use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Global gradient-norm ceiling; `0` disables clipping.
    pub clip_norm: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: 1.0,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.clip_norm >= 0.0
            && self.clip_norm.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams("adam hyperparameters out of range".into()))
        }
    }
}

/// Moments are kept in f64 whatever the parameter precision.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(config: AdamConfig, n: usize) -> Self {
        Self {
            config,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// Global L2 norm of a gradient, accumulated in f64.
pub fn global_norm<T: Float>(g: &[T]) -> f64 {
    g.iter()
        .map(|x| {
            let x = x.to_f64().unwrap_or(f64::NAN);
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

/// One bias-corrected Adam update after clipping the gradient to `clip_norm`.
///
/// ```text
/// g ← g · min(1, clip / ‖g‖)
/// m ← β1 m + (1 − β1) g        v ← β2 v + (1 − β2) g²
/// w ← w − lr · (m / (1 − β1ᵗ)) / (√(v / (1 − β2ᵗ)) + ε)
/// ```
pub fn adam_step<T: Float>(opt: &mut OptimizerState, weights: &mut [T], grads: &[T]) -> Result<()> {
    if weights.len() != opt.m.len() || grads.len() != opt.m.len() {
        return Err(Error::shape("adam parameters", opt.m.len(), grads.len()));
    }
    let c = opt.config;
    let norm = global_norm(grads);
    let clip = if c.clip_norm > 0.0 && norm > c.clip_norm {
        c.clip_norm / norm
    } else {
        1.0
    };
    opt.step += 1;
    let t = opt.step.min(i32::MAX as u64) as i32;
    let bc1 = 1.0 - c.beta1.powi(t);
    let bc2 = 1.0 - c.beta2.powi(t);
    for ((w, &g), (m, v)) in weights.iter_mut().zip(grads).zip(opt.m.iter_mut().zip(opt.v.iter_mut())) {
        let g = g.to_f64().unwrap_or(f64::NAN) * clip;
        *m = c.beta1 * *m + (1.0 - c.beta1) * g;
        *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
        let delta = c.lr * (*m / bc1) / ((*v / bc2).sqrt() + c.eps);
        let updated = w.to_f64().unwrap_or(f64::NAN) - delta;
        *w = T::from(updated).unwrap_or_else(T::nan);
    }
    Ok(())
}
