use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use super::kernel::Kernel;
use super::params::CannParams;
use crate::angle::circular_distance;
use crate::{Error, Result};

/// Synaptic inputs and firing rates of every neuron.
///
/// Neuron `i` of a torus sits at `(x, y, z) = (i % n, (i / n) % n, i / n²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpState {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    /// Preferred value of each index along one axis, `i·2π/n`.
    pub neuron_prefs: Vec<f64>,
}

impl BumpState {
    pub fn zeros(params: &CannParams) -> Self {
        let count = params.neuron_count();
        Self {
            u: vec![0.0; count],
            r: vec![0.0; count],
            neuron_prefs: params.axis_preferences(),
        }
    }

    /// Per-axis preferences of neuron `index`.
    pub fn prefs_of(&self, index: usize) -> [f64; 3] {
        let n = self.neuron_prefs.len();
        [
            self.neuron_prefs[index % n],
            self.neuron_prefs[(index / n) % n],
            self.neuron_prefs[(index / (n * n)) % n],
        ]
    }
}

/// Gaussian drive `a_ext·exp(−b_ext·d²)` centred on `p_ext` (one coordinate per axis).
pub fn external_input(params: &CannParams, p_ext: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; params.neuron_count()];
    external_input_into(params, p_ext, &mut out)?;
    Ok(out)
}

pub fn external_input_into(params: &CannParams, p_ext: &[f64], out: &mut [f64]) -> Result<()> {
    if p_ext.len() != params.dims {
        return Err(Error::shape("stimulus point", params.dims, p_ext.len()));
    }
    if p_ext.iter().any(|v| !v.is_finite()) {
        return Err(Error::InputDomain("stimulus must be finite".into()));
    }
    if out.len() != params.neuron_count() {
        return Err(Error::shape("drive array", params.neuron_count(), out.len()));
    }
    let n = params.n_per_axis;
    let h = params.spacing();
    // Squared circular distance per axis and index, reused across the volume.
    let sq: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let mut row = [0.0; 3];
            for (a, p) in p_ext.iter().enumerate() {
                let d = circular_distance(*p, i as f64 * h);
                row[a] = d * d;
            }
            row
        })
        .collect();
    for (i, o) in out.iter_mut().enumerate() {
        let d2 = match params.dims {
            1 => sq[i][0],
            _ => sq[i % n][0] + sq[(i / n) % n][1] + sq[i / (n * n)][2],
        };
        *o = params.a_ext * Float::exp(-params.b_ext * d2);
    }
    Ok(())
}

/// Divisively normalized rates `[U]₊² / (1 + kρ·Σ[U]₊²)`.
pub fn firing_rates(params: &CannParams, u: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; u.len()];
    firing_rates_into(params, u, &mut r);
    r
}

pub fn firing_rates_into(params: &CannParams, u: &[f64], r: &mut [f64]) {
    let mut total = 0.0;
    for (ri, &ui) in r.iter_mut().zip(u) {
        let p = if ui > 0.0 { ui * ui } else { 0.0 };
        *ri = p;
        total += p;
    }
    let inv = 1.0 / (1.0 + params.k * params.rho * total);
    for ri in r.iter_mut() {
        *ri *= inv;
    }
}

/// A reference attractor network: parameters plus the precomputed kernel.
#[derive(Debug, Clone)]
pub struct Cann {
    params: CannParams,
    kernel: Kernel,
    recurrent: Vec<f64>,
    scratch: Vec<f64>,
}

impl Cann {
    pub fn new(params: CannParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::new_unchecked(params))
    }

    /// Skips parameter validation (degenerate kernels in tests).
    pub(crate) fn new_unchecked(params: CannParams) -> Self {
        let kernel = Kernel::build_unchecked(&params);
        let count = params.neuron_count();
        Self {
            params,
            kernel,
            recurrent: vec![0.0; count],
            scratch: Vec::new(),
        }
    }

    pub fn params(&self) -> &CannParams {
        &self.params
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn zero_state(&self) -> BumpState {
        BumpState::zeros(&self.params)
    }

    /// One explicit Euler step `U ← U + (dt/τ)(−U + ρ·J⊛r + I_ext)`, then rates.
    pub fn step(&mut self, state: &mut BumpState, i_ext: &[f64]) -> Result<()> {
        let count = self.params.neuron_count();
        if state.u.len() != count || state.r.len() != count {
            return Err(Error::shape("bump state", count, state.u.len()));
        }
        if i_ext.len() != count {
            return Err(Error::shape("drive array", count, i_ext.len()));
        }
        self.kernel
            .convolve(&state.r, &mut self.recurrent, &mut self.scratch);
        let p = &self.params;
        let gain = p.dt / p.tau;
        let mut finite = true;
        for ((u, &rec), &ie) in state.u.iter_mut().zip(&self.recurrent).zip(i_ext) {
            *u += gain * (-*u + p.rho * rec + ie);
            finite &= u.is_finite();
        }
        if !finite {
            return Err(Error::NonFinite("synaptic input".into()));
        }
        firing_rates_into(p, &state.u, &mut state.r);
        Ok(())
    }

    /// `steps` Euler steps under a constant drive.
    pub fn settle(&mut self, state: &mut BumpState, i_ext: &[f64], steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(state, i_ext)?;
        }
        Ok(())
    }
}

/// Convenience wrapper building the kernel for a single step.
pub fn step(params: &CannParams, state: &BumpState, i_ext: &[f64]) -> Result<BumpState> {
    let mut cann = Cann::new(params.clone())?;
    let mut next = state.clone();
    cann.step(&mut next, i_ext)?;
    Ok(next)
}
