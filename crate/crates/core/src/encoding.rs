//! Interpolated one-hot inputs and `(num, den)` label handling.
//!
//! A stimulus `θ` is wrapped to `[0, 2π)` and mapped to the real index
//! `C = θ / 2π · N_p`. The encoding puts `1 − frac(C)` on neuron `⌊C⌋ mod N_p` and
//! `frac(C)` on `(⌊C⌋ + 1) mod N_p`, so each block sums to one and nearby angles share
//! support. Position inputs concatenate three such blocks (x, y, z).

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::angle::{atan2_pi, wrap_tau, TAU};
use crate::{Error, Result};

pub const RING_INTERVALS: usize = 37;
pub const POSITION_WIDTH: usize = 3 * RING_INTERVALS;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput {
    pub v: Vec<f64>,
    /// Real index `C` of each block.
    pub c: Vec<f64>,
    /// Fractional part of each `C`.
    pub c_frac: Vec<f64>,
    pub n_p: usize,
}

/// Writes the two-point interpolation of `i_ext` into `block` (length `n_p`) and
/// returns `C`.
pub fn encode_angle_into<T: Float>(i_ext: f64, block: &mut [T]) -> Result<f64> {
    if !i_ext.is_finite() {
        return Err(Error::InputDomain("stimulus must be finite".into()));
    }
    let n_p = block.len();
    let c = wrap_tau(i_ext) / TAU * n_p as f64;
    let lower = Float::floor(c);
    let frac = c - lower;
    let i0 = (lower as usize) % n_p;
    let i1 = (i0 + 1) % n_p;
    block.iter_mut().for_each(|v| *v = T::zero());
    let cast = |x: f64| T::from(x).unwrap_or_else(T::zero);
    block[i0] = cast(1.0 - frac);
    block[i1] = block[i1] + cast(frac);
    Ok(c)
}

pub fn encode_angle(i_ext: f64, n_p: usize) -> Result<EncodedInput> {
    if n_p < 2 {
        return Err(Error::InvalidParams("need at least two intervals".into()));
    }
    let mut v = vec![0.0; n_p];
    let c = encode_angle_into(i_ext, &mut v)?;
    Ok(EncodedInput {
        v,
        c: vec![c],
        c_frac: vec![c - Float::floor(c)],
        n_p,
    })
}

/// Concatenated `[Vx | Vy | Vz]` encoding of a ring-coordinate triple.
pub fn encode_position(p: [f64; 3]) -> Result<EncodedInput> {
    let mut v = vec![0.0; POSITION_WIDTH];
    let mut c = Vec::with_capacity(3);
    for (block, &coord) in v.chunks_exact_mut(RING_INTERVALS).zip(&p) {
        c.push(encode_angle_into(coord, block)?);
    }
    let c_frac = c.iter().map(|&x| x - Float::floor(x)).collect();
    Ok(EncodedInput {
        v,
        c,
        c_frac,
        n_p: RING_INTERVALS,
    })
}

/// Encodes one frame of a stimulus (one value per axis) into `out`, whose length
/// must be `axes × RING_INTERVALS`.
pub fn encode_frame_into<T: Float>(point: &[f64], out: &mut [T]) -> Result<()> {
    if out.len() != point.len() * RING_INTERVALS {
        return Err(Error::shape(
            "encoded frame",
            point.len() * RING_INTERVALS,
            out.len(),
        ));
    }
    for (block, &coord) in out.chunks_exact_mut(RING_INTERVALS).zip(point) {
        encode_angle_into(coord, block)?;
    }
    Ok(())
}

/// Pairs shorter than this cannot be decoded.
pub const PAIR_EPS: f64 = 1e-9;

/// `atan2(num, den)` in `(−π, π]`.
pub fn decode_label(num: f64, den: f64) -> Result<f64> {
    if !num.is_finite() || !den.is_finite() {
        return Err(Error::NonFinite("label pair".into()));
    }
    if Float::hypot(num, den) < PAIR_EPS {
        return Err(Error::ZeroActivity);
    }
    Ok(atan2_pi(num, den))
}

/// Scales a `(num, den)` pair to unit length.
pub fn normalize_pair(num: f64, den: f64) -> Result<(f64, f64)> {
    let norm = Float::hypot(num, den);
    if !(norm >= PAIR_EPS) {
        return Err(Error::ZeroActivity);
    }
    Ok((num / norm, den / norm))
}

/// Normalizes every consecutive pair of a raw label row in place.
pub fn normalize_label(row: &mut [f64]) -> Result<()> {
    for pair in row.chunks_exact_mut(2) {
        let (n, d) = normalize_pair(pair[0], pair[1])?;
        pair[0] = n;
        pair[1] = d;
    }
    Ok(())
}

/// Decoded angle per axis of a label row.
pub fn decode_row(row: &[f64]) -> Result<Vec<f64>> {
    row.chunks_exact(2)
        .map(|p| decode_label(p[0], p[1]))
        .collect()
}
