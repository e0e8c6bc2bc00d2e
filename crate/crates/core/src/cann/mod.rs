//! Reference continuous attractor networks.
//!
//! A ring (`dims = 1`) models head-direction cells and a 3-torus (`dims = 3`) models
//! grid cells. The state evolves by explicit Euler integration of
//!
//! ```text
//! τ dU/dt = −U + ρ·(J ⊛ r) + I_ext,   r = [U]₊² / (1 + kρ·Σ[U]₊²)
//! ```
//!
//! with a Gaussian kernel `J` on periodic boundaries, and is read out by
//! population-vector decoding (axis reductions first on the torus).

mod decode;
mod dynamics;
mod kernel;
mod params;

use alloc::vec;
use alloc::vec::Vec;

pub use decode::{
    decode_1d, decode_3d, reconstruct_bump, reduce_3d, AxisReduction, Decoded1d, Decoded3d,
};
pub use dynamics::{
    external_input, external_input_into, firing_rates, firing_rates_into, step, BumpState, Cann,
};
pub use kernel::{kernel_value, recurrent_dense, Kernel, DENSE_MAX_N};
pub use params::{CannParams, KernelExponent, DEFAULT_K_RATIO, DEFAULT_NEURONS, DEFAULT_SETTLE_STEPS};

use crate::angle::wrap_tau;
use crate::{Error, Result};

/// Drives a network frame by frame: each frame holds the stimulus fixed for
/// `settle_steps` integration steps.
#[derive(Debug, Clone)]
pub struct CannRunner {
    cann: Cann,
    state: BumpState,
    drive: Vec<f64>,
    point: Vec<f64>,
}

impl CannRunner {
    pub fn new(params: CannParams) -> Result<Self> {
        let cann = Cann::new(params)?;
        let state = cann.zero_state();
        let drive = vec![0.0; cann.params().neuron_count()];
        Ok(Self {
            cann,
            state,
            drive,
            point: Vec::with_capacity(3),
        })
    }

    pub fn params(&self) -> &CannParams {
        self.cann.params()
    }

    pub fn state(&self) -> &BumpState {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state = self.cann.zero_state();
    }

    /// Advances one frame with the stimulus `point` (wrapped to `[0, 2π)` per axis).
    pub fn advance(&mut self, point: &[f64]) -> Result<()> {
        self.point.clear();
        self.point.extend(point.iter().map(|&p| wrap_tau(p)));
        external_input_into(self.cann.params(), &self.point, &mut self.drive)?;
        let steps = self.cann.params().settle_steps;
        self.cann.settle(&mut self.state, &self.drive, steps)
    }

    /// Raw label of the current state: `(num, den)` per axis, axes in x, y, z order.
    pub fn label(&self) -> Result<Vec<f64>> {
        let n = self.params().n_per_axis;
        match self.params().dims {
            1 => {
                let d = decode_1d(&self.state.u, n)?;
                Ok(vec![d.num, d.den])
            }
            _ => Ok(decode_3d(&self.state.u, n)?.components().to_vec()),
        }
    }

    /// Decoded angle in `(−π, π]` per axis.
    pub fn decode_angles(&self) -> Result<Vec<f64>> {
        let n = self.params().n_per_axis;
        match self.params().dims {
            1 => Ok(vec![decode_1d(&self.state.u, n)?.theta]),
            _ => Ok(decode_3d(&self.state.u, n)?
                .axes
                .iter()
                .map(|a| a.theta)
                .collect()),
        }
    }
}

/// Per-frame raw labels for a stimulus sequence given per axis (`axes[d][t]`).
pub fn run_cann_sequence(params: &CannParams, axes: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    run_cann_sequence_with(params, axes, |_, _| {})
}

/// As [`run_cann_sequence`], handing every settled state to `observe`.
pub fn run_cann_sequence_with<F>(
    params: &CannParams,
    axes: &[Vec<f64>],
    mut observe: F,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(usize, &BumpState),
{
    if axes.len() != params.dims {
        return Err(Error::shape("stimulus axes", params.dims, axes.len()));
    }
    let frames = axes.first().map_or(0, Vec::len);
    if let Some(bad) = axes.iter().find(|a| a.len() != frames) {
        return Err(Error::shape("stimulus axis length", frames, bad.len()));
    }
    let mut runner = CannRunner::new(params.clone())?;
    let mut labels = Vec::with_capacity(frames);
    let mut point = vec![0.0; params.dims];
    for t in 0..frames {
        for (p, axis) in point.iter_mut().zip(axes) {
            *p = axis[t];
        }
        runner.advance(&point)?;
        observe(t, runner.state());
        labels.push(runner.label()?);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests;
