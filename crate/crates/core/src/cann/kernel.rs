//! Recurrent connection kernel and its circular convolution.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use super::params::{CannParams, KernelExponent};
use crate::angle::{circular_distance, PI};
use crate::{Error, Result};

/// `J(Δ)` for a displacement `Δ` (one component per axis, radians).
pub fn kernel_value(params: &CannParams, delta: &[f64]) -> f64 {
    peak(params) * shape_value(params, delta)
}

/// Kernel without its amplitude, `exp(−dist / 2a²)`.
fn shape_value(params: &CannParams, delta: &[f64]) -> f64 {
    let d2: f64 = delta
        .iter()
        .map(|&d| {
            let c = circular_distance(d, 0.0);
            c * c
        })
        .sum();
    let dist = match params.kernel_exponent {
        KernelExponent::Squared => d2,
        KernelExponent::Linear => Float::sqrt(d2),
    };
    Float::exp(-dist / (2.0 * params.a * params.a))
}

fn peak(params: &CannParams) -> f64 {
    params.j0 / Float::sqrt(2.0 * PI * params.a)
}

/// Precomputed kernel, specialised to the cheapest exact evaluation.
#[derive(Debug, Clone)]
pub enum Kernel {
    /// `J = amplitude · Π_axis profile[offset_axis]`. Holds the `n×n` circulant matrix
    /// `circ[src * n + dst] = profile[(dst - src) mod n]`.
    Separable {
        n: usize,
        dims: usize,
        amplitude: f64,
        circ: Vec<f64>,
    },
    /// Full stencil indexed by per-axis offsets (linear exponent on the torus).
    Stencil { n: usize, weights: Vec<f64> },
}

impl Kernel {
    pub fn build(params: &CannParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::build_unchecked(params))
    }

    pub(crate) fn build_unchecked(params: &CannParams) -> Self {
        let n = params.n_per_axis;
        let h = params.spacing();
        let axis_offset = |d: usize| d as f64 * h;
        match (params.kernel_exponent, params.dims) {
            (KernelExponent::Squared, _) | (KernelExponent::Linear, 1) => {
                // Profile without amplitude; for the linear ring the exponent is |Δ|.
                let amp = peak(params);
                let profile: Vec<f64> = (0..n)
                    .map(|d| shape_value(params, &[axis_offset(d)]))
                    .collect();
                let mut circ = vec![0.0; n * n];
                for src in 0..n {
                    for dst in 0..n {
                        circ[src * n + dst] = profile[(dst + n - src) % n];
                    }
                }
                Kernel::Separable {
                    n,
                    dims: params.dims,
                    amplitude: amp,
                    circ,
                }
            }
            (KernelExponent::Linear, _) => {
                let mut weights = vec![0.0; n * n * n];
                for dz in 0..n {
                    for dy in 0..n {
                        for dx in 0..n {
                            weights[(dz * n + dy) * n + dx] = kernel_value(
                                params,
                                &[axis_offset(dx), axis_offset(dy), axis_offset(dz)],
                            );
                        }
                    }
                }
                Kernel::Stencil { n, weights }
            }
        }
    }

    /// `out = J ⊛ r` (without the density factor ρ). `scratch` is resized as needed.
    pub fn convolve(&self, r: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        match self {
            Kernel::Separable {
                n,
                dims,
                amplitude,
                circ,
            } => {
                let n = *n;
                if *dims == 1 {
                    circulant_lines(circ, n, r, out);
                } else {
                    scratch.resize(2 * r.len(), 0.0);
                    let (t1, t2) = scratch.split_at_mut(r.len());
                    circulant_lines(circ, n, r, t1);
                    circulant_rows(circ, n, t1, t2);
                    circulant_planes(circ, n, t2, out);
                }
                for v in out.iter_mut() {
                    *v *= *amplitude;
                }
            }
            Kernel::Stencil { n, weights } => {
                let n = *n;
                for (dst, o) in out.iter_mut().enumerate() {
                    let (dz, dy, dx) = (dst / (n * n), (dst / n) % n, dst % n);
                    let mut acc = 0.0;
                    for (src, &rv) in r.iter().enumerate() {
                        if rv == 0.0 {
                            continue;
                        }
                        let (sz, sy, sx) = (src / (n * n), (src / n) % n, src % n);
                        let off = (((dz + n - sz) % n) * n + (dy + n - sy) % n) * n + (dx + n - sx) % n;
                        acc += weights[off] * rv;
                    }
                    *o = acc;
                }
            }
        }
    }
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Convolution along the contiguous axis of every length-`n` line.
fn circulant_lines(circ: &[f64], n: usize, src: &[f64], dst: &mut [f64]) {
    for (s, d) in src.chunks_exact(n).zip(dst.chunks_exact_mut(n)) {
        d.fill(0.0);
        for (j, &v) in s.iter().enumerate() {
            if v != 0.0 {
                axpy(d, v, &circ[j * n..(j + 1) * n]);
            }
        }
    }
}

/// Convolution along the middle axis of an `n³` volume.
fn circulant_rows(circ: &[f64], n: usize, src: &[f64], dst: &mut [f64]) {
    let plane = n * n;
    for (s, d) in src.chunks_exact(plane).zip(dst.chunks_exact_mut(plane)) {
        d.fill(0.0);
        for ys in 0..n {
            let row = &s[ys * n..(ys + 1) * n];
            for yd in 0..n {
                axpy(&mut d[yd * n..(yd + 1) * n], circ[ys * n + yd], row);
            }
        }
    }
}

/// Convolution along the slowest axis of an `n³` volume.
fn circulant_planes(circ: &[f64], n: usize, src: &[f64], dst: &mut [f64]) {
    let plane = n * n;
    dst.fill(0.0);
    for zs in 0..n {
        let sp = &src[zs * plane..(zs + 1) * plane];
        for zd in 0..n {
            axpy(&mut dst[zd * plane..(zd + 1) * plane], circ[zs * n + zd], sp);
        }
    }
}

/// Largest per-axis size accepted by [`recurrent_dense`].
pub const DENSE_MAX_N: usize = 17;

/// Cross-check path: `Σ_j J(p_i − p_j)·r_j` evaluated pairwise from [`kernel_value`].
pub fn recurrent_dense(params: &CannParams, r: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    if params.n_per_axis > DENSE_MAX_N {
        return Err(Error::InvalidParams(alloc::format!(
            "dense evaluation limited to n <= {DENSE_MAX_N}"
        )));
    }
    let count = params.neuron_count();
    if r.len() != count {
        return Err(Error::shape("firing rates", count, r.len()));
    }
    let n = params.n_per_axis;
    let h = params.spacing();
    let coords = |i: usize| -> [f64; 3] {
        [
            (i % n) as f64 * h,
            ((i / n) % n) as f64 * h,
            (i / (n * n)) as f64 * h,
        ]
    };
    let dims = params.dims;
    let mut out = vec![0.0; count];
    for (i, o) in out.iter_mut().enumerate() {
        let pi = coords(i);
        let mut acc = 0.0;
        for (j, &rj) in r.iter().enumerate() {
            let pj = coords(j);
            let delta = [pi[0] - pj[0], pi[1] - pj[1], pi[2] - pj[2]];
            acc += kernel_value(params, &delta[..dims]) * rj;
        }
        *o = acc;
    }
    Ok(out)
}
