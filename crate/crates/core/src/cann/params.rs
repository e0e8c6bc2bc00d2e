use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::angle::{PI, TAU};
use crate::{Error, Result};

/// Distance term used inside the recurrent kernel exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelExponent {
    /// `exp(-d² / 2a²)`, separable on the torus.
    #[default]
    Squared,
    /// `exp(-d / 2a²)` with `d` the unsquared circular distance.
    Linear,
}

pub const DEFAULT_NEURONS: usize = 37;
pub const DEFAULT_SETTLE_STEPS: usize = 10;
/// `k` is set to this fraction of the critical normalization constant.
pub const DEFAULT_K_RATIO: f64 = 0.3;

/// Geometry and constants of a ring (`dims = 1`) or 3-torus (`dims = 3`) attractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CannParams {
    pub dims: usize,
    pub n_per_axis: usize,
    pub tau: f64,
    /// Neuron density per axis, `n / 2π`.
    pub rho: f64,
    pub j0: f64,
    /// Kernel width in radians.
    pub a: f64,
    /// Divisive normalization constant.
    pub k: f64,
    pub a_ext: f64,
    pub b_ext: f64,
    pub dt: f64,
    pub kernel_exponent: KernelExponent,
    /// Integration steps per input frame when generating labels.
    pub settle_steps: usize,
}

impl CannParams {
    /// Default constants for the given geometry; `k` is `0.3·k_c`.
    pub fn new(dims: usize, n_per_axis: usize) -> Self {
        let a = 0.5;
        let mut p = Self {
            dims,
            n_per_axis,
            tau: 1.0,
            rho: n_per_axis as f64 / TAU,
            j0: 4.0,
            a,
            k: 0.0,
            a_ext: 10.0,
            b_ext: 1.0 / (4.0 * a * a),
            dt: 0.05,
            kernel_exponent: KernelExponent::Squared,
            settle_steps: DEFAULT_SETTLE_STEPS,
        };
        p.k = DEFAULT_K_RATIO * p.critical_k();
        p
    }

    pub fn ring(n_per_axis: usize) -> Self {
        Self::new(1, n_per_axis)
    }

    pub fn torus(n_per_axis: usize) -> Self {
        Self::new(3, n_per_axis)
    }

    /// `k_c = ρ·J₀² / (8·√(2π·a))`.
    pub fn critical_k(&self) -> f64 {
        self.rho * self.j0 * self.j0 / (8.0 * Float::sqrt(2.0 * PI * self.a))
    }

    /// Re-derives `k` as `ratio · k_c` after the other constants changed.
    pub fn with_k_ratio(mut self, ratio: f64) -> Self {
        self.k = ratio * self.critical_k();
        self
    }

    pub fn neuron_count(&self) -> usize {
        self.n_per_axis.pow(self.dims as u32)
    }

    /// Angular spacing between neighbouring preferences on one axis.
    pub fn spacing(&self) -> f64 {
        TAU / self.n_per_axis as f64
    }

    /// Preferred values `p_i = i·2π/n` along one axis.
    pub fn axis_preferences(&self) -> Vec<f64> {
        (0..self.n_per_axis)
            .map(|i| i as f64 * self.spacing())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParams(msg));
        if self.dims != 1 && self.dims != 3 {
            return bad(format!("dims must be 1 or 3, got {}", self.dims));
        }
        if self.n_per_axis < 3 {
            return bad(format!("n_per_axis must be >= 3, got {}", self.n_per_axis));
        }
        let finite = [
            self.tau, self.rho, self.j0, self.a, self.k, self.a_ext, self.b_ext, self.dt,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all constants must be finite".into());
        }
        if self.tau <= 0.0 || self.a <= 0.0 || self.rho <= 0.0 {
            return bad("tau, a and rho must be positive".into());
        }
        if self.dt <= 0.0 || self.dt > self.tau / 10.0 {
            return bad(format!("dt must lie in (0, tau/10], got {}", self.dt));
        }
        let kc = self.critical_k();
        if !(self.k > 0.0 && self.k < kc) {
            return bad(format!("k must lie in (0, k_c = {kc}), got {}", self.k));
        }
        if self.a_ext <= 0.0 || self.b_ext <= 0.0 {
            return bad("a_ext and b_ext must be positive".into());
        }
        if self.settle_steps == 0 {
            return bad("settle_steps must be positive".into());
        }
        Ok(())
    }
}
