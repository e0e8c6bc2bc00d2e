use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::angle::{atan2_pi, TAU};
use crate::{Error, Result};

/// Population-vector readout of a ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded1d {
    /// Bump angle in `(−π, π]`.
    pub theta: f64,
    /// Continuous neuron coordinate in `[0, n)`.
    pub y: f64,
    /// `Σ U_i sin(2π i / n)`.
    pub num: f64,
    /// `Σ U_i cos(2π i / n)`.
    pub den: f64,
}

/// Relative size below which the population vector counts as cancelled.
const ACTIVITY_EPS: f64 = 1e-9;

pub fn decode_1d(u: &[f64], n: usize) -> Result<Decoded1d> {
    if u.len() != n {
        return Err(Error::shape("ring activity", n, u.len()));
    }
    let (mut num, mut den, mut mass) = (0.0, 0.0, 0.0);
    for (i, &ui) in u.iter().enumerate() {
        let phase = TAU * i as f64 / n as f64;
        num += ui * Float::sin(phase);
        den += ui * Float::cos(phase);
        mass += Float::abs(ui);
    }
    if !(mass > 0.0) || Float::hypot(num, den) <= ACTIVITY_EPS * mass {
        return Err(Error::ZeroActivity);
    }
    let theta = atan2_pi(num, den);
    let mut y = (theta * n as f64 / TAU) % n as f64;
    if y < 0.0 {
        y += n as f64;
    }
    if y >= n as f64 {
        y = 0.0;
    }
    Ok(Decoded1d { theta, y, num, den })
}

/// Activity summed onto each axis of an `n³` volume.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisReduction {
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
}

impl AxisReduction {
    pub fn axes(&self) -> [&[f64]; 3] {
        [&self.sx, &self.sy, &self.sz]
    }
}

pub fn reduce_3d(u: &[f64], n: usize) -> Result<AxisReduction> {
    if u.len() != n * n * n {
        return Err(Error::shape("torus activity", n * n * n, u.len()));
    }
    let mut red = AxisReduction {
        sx: vec![0.0; n],
        sy: vec![0.0; n],
        sz: vec![0.0; n],
    };
    for (z, plane) in u.chunks_exact(n * n).enumerate() {
        for (y, line) in plane.chunks_exact(n).enumerate() {
            let mut row = 0.0;
            for (x, &v) in line.iter().enumerate() {
                red.sx[x] += v;
                row += v;
            }
            red.sy[y] += row;
            red.sz[z] += row;
        }
    }
    Ok(red)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded3d {
    pub axes: [Decoded1d; 3],
}

impl Decoded3d {
    /// Decoded neuron coordinates `(y_x, y_y, y_z)`.
    pub fn coords(&self) -> [f64; 3] {
        [self.axes[0].y, self.axes[1].y, self.axes[2].y]
    }

    /// `[num_x, den_x, num_y, den_y, num_z, den_z]`.
    pub fn components(&self) -> [f64; 6] {
        let [x, y, z] = self.axes;
        [x.num, x.den, y.num, y.den, z.num, z.den]
    }
}

pub fn decode_3d(u: &[f64], n: usize) -> Result<Decoded3d> {
    let red = reduce_3d(u, n)?;
    Ok(Decoded3d {
        axes: [
            decode_1d(&red.sx, n)?,
            decode_1d(&red.sy, n)?,
            decode_1d(&red.sz, n)?,
        ],
    })
}

/// Approximate volume from its axis reductions: `SX⊗SY⊗SZ / T²` with `T = Σ SX`.
pub fn reconstruct_bump(red: &AxisReduction) -> Result<Vec<f64>> {
    let n = red.sx.len();
    if red.sy.len() != n || red.sz.len() != n {
        return Err(Error::shape("axis reduction", n, red.sy.len().min(red.sz.len())));
    }
    if red.axes().iter().any(|a| a.iter().any(|&v| v < 0.0 || !v.is_finite())) {
        return Err(Error::InputDomain(
            "reductions must be finite and non-negative".into(),
        ));
    }
    let total: f64 = red.sx.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroActivity);
    }
    let norm = 1.0 / (total * total);
    let mut out = vec![0.0; n * n * n];
    for (z, &vz) in red.sz.iter().enumerate() {
        for (y, &vy) in red.sy.iter().enumerate() {
            let w = vz * vy * norm;
            let base = (z * n + y) * n;
            for (x, &vx) in red.sx.iter().enumerate() {
                out[base + x] = w * vx;
            }
        }
    }
    Ok(out)
}
