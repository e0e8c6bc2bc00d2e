use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use super::arch::{ReplicaArchitecture, ReplicaWeights};
use super::ops::{affine, dot, sigmoid};
use crate::encoding::decode_label;
use crate::{Error, Result};

/// Hidden and cell vectors of every recurrent layer, stored layer after layer.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState<T = f32> {
    pub h: Vec<T>,
    pub c: Vec<T>,
    units: usize,
}

impl<T: Float> HiddenState<T> {
    pub fn new(arch: &ReplicaArchitecture) -> Self {
        let n = arch.lstm_layers * arch.lstm_units;
        Self {
            h: vec![T::zero(); n],
            c: vec![T::zero(); n],
            units: arch.lstm_units,
        }
    }

    pub fn reset(&mut self) {
        self.h.iter_mut().for_each(|v| *v = T::zero());
        self.c.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn layers(&self) -> usize {
        self.h.len() / self.units
    }

    pub fn layer_h(&self, layer: usize) -> &[T] {
        &self.h[layer * self.units..(layer + 1) * self.units]
    }

    pub fn layer_c(&self, layer: usize) -> &[T] {
        &self.c[layer * self.units..(layer + 1) * self.units]
    }

    fn fits(&self, arch: &ReplicaArchitecture) -> bool {
        self.units == arch.lstm_units && self.h.len() == arch.lstm_layers * arch.lstm_units
    }
}

/// Every activation of one frame; kept per frame during training.
#[derive(Debug, Clone)]
pub(crate) struct FrameTrace<T> {
    pub a1: Vec<T>,
    pub a2: Vec<T>,
    /// Activated gates `[i | f | g | o]` per layer.
    pub gates: Vec<T>,
    pub c: Vec<T>,
    pub tanh_c: Vec<T>,
    pub h: Vec<T>,
    pub d: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Float> FrameTrace<T> {
    pub fn new(arch: &ReplicaArchitecture) -> Self {
        let n = arch.lstm_layers * arch.lstm_units;
        Self {
            a1: vec![T::zero(); arch.fc_sizes[0]],
            a2: vec![T::zero(); arch.fc_sizes[1]],
            gates: vec![T::zero(); 4 * n],
            c: vec![T::zero(); n],
            tanh_c: vec![T::zero(); n],
            h: vec![T::zero(); n],
            d: vec![T::zero(); arch.decoder_units],
            y: vec![T::zero(); arch.output_size],
        }
    }
}

/// One frame:
///
/// ```text
/// a1 = relu(W1 x + b1)            a2 = relu(W2 a1 + b2)
/// per layer l with input u (a2 for the first layer, h of layer l-1 otherwise):
///   z = W_ih u + W_hh h_prev + b,  z = [z_i | z_f | z_g | z_o]
///   i = σ(z_i)  f = σ(z_f)  g = tanh(z_g)  o = σ(z_o)
///   c = f ⊙ c_prev + i ⊙ g         h = o ⊙ tanh(c)
/// d = tanh(Wd h_top + bd)          y = Wo d + bo
/// ```
pub(crate) fn step_into<T: Float>(w: &ReplicaWeights<T>, h_prev: &[T], c_prev: &[T], x: &[T], fr: &mut FrameTrace<T>) {
    let p = w.params();
    let o = &w.offsets;
    let relu = |v: &mut [T]| v.iter_mut().for_each(|a| *a = a.max(T::zero()));

    let fc1 = o.fc[0];
    affine(&p[fc1.w..fc1.b], &p[fc1.b..fc1.b + fc1.rows], x, &mut fr.a1);
    relu(&mut fr.a1);
    let fc2 = o.fc[1];
    affine(&p[fc2.w..fc2.b], &p[fc2.b..fc2.b + fc2.rows], &fr.a1, &mut fr.a2);
    relu(&mut fr.a2);

    let h = w.arch().lstm_units;
    for (l, r) in o.lstm.iter().enumerate() {
        let (below, rest) = fr.h.split_at_mut(l * h);
        let input: &[T] = if l == 0 { &fr.a2 } else { &below[(l - 1) * h..] };
        let w_ih = &p[r.w_ih..r.w_hh];
        let w_hh = &p[r.w_hh..r.b];
        let bias = &p[r.b..r.b + 4 * h];
        let hp = &h_prev[l * h..(l + 1) * h];
        let gates = &mut fr.gates[4 * l * h..4 * (l + 1) * h];
        for (k, z) in gates.iter_mut().enumerate() {
            let pre = bias[k] + dot(&w_ih[k * r.input..(k + 1) * r.input], input) + dot(&w_hh[k * h..(k + 1) * h], hp);
            *z = if (2 * h..3 * h).contains(&k) { pre.tanh() } else { sigmoid(pre) };
        }
        let (gi, rest_g) = gates.split_at(h);
        let (gf, rest_g) = rest_g.split_at(h);
        let (gg, go) = rest_g.split_at(h);
        let cp = &c_prev[l * h..(l + 1) * h];
        let c = &mut fr.c[l * h..(l + 1) * h];
        let tc = &mut fr.tanh_c[l * h..(l + 1) * h];
        let hl = &mut rest[..h];
        for j in 0..h {
            c[j] = gf[j] * cp[j] + gi[j] * gg[j];
            tc[j] = c[j].tanh();
            hl[j] = go[j] * tc[j];
        }
    }

    let top = &fr.h[(o.lstm.len() - 1) * h..];
    let dec = o.decoder;
    affine(&p[dec.w..dec.b], &p[dec.b..dec.b + dec.rows], top, &mut fr.d);
    fr.d.iter_mut().for_each(|v| *v = v.tanh());
    let out = o.output;
    affine(&p[out.w..out.b], &p[out.b..out.b + out.rows], &fr.d, &mut fr.y);
}

/// Inference engine: shared weights, caller-owned [`HiddenState`]s.
#[derive(Debug, Clone)]
pub struct Replica<T = f32> {
    weights: ReplicaWeights<T>,
    frame: FrameTrace<T>,
}

impl<T: Float> Replica<T> {
    pub fn new(weights: ReplicaWeights<T>) -> Self {
        let frame = FrameTrace::new(weights.arch());
        Self { weights, frame }
    }

    pub fn weights(&self) -> &ReplicaWeights<T> {
        &self.weights
    }

    pub fn arch(&self) -> &ReplicaArchitecture {
        self.weights.arch()
    }

    pub fn new_state(&self) -> HiddenState<T> {
        HiddenState::new(self.arch())
    }

    /// Runs one frame, updating `state` in place, and returns the output layer.
    pub fn step(&mut self, state: &mut HiddenState<T>, x: &[T]) -> Result<&[T]> {
        let arch = self.weights.arch();
        if x.len() != arch.input_size {
            return Err(Error::shape("replica input", arch.input_size, x.len()));
        }
        if !state.fits(arch) {
            return Err(Error::shape("hidden state", arch.lstm_layers * arch.lstm_units, state.h.len()));
        }
        step_into(&self.weights, &state.h, &state.c, x, &mut self.frame);
        state.h.copy_from_slice(&self.frame.h);
        state.c.copy_from_slice(&self.frame.c);
        Ok(&self.frame.y)
    }

    /// Per-frame outputs of a flat input sequence, starting from the zero state.
    pub fn run_sequence(&mut self, xs: &[T]) -> Result<Vec<T>> {
        let arch = self.weights.arch();
        let (n_in, n_out) = (arch.input_size, arch.output_size);
        if xs.is_empty() || xs.len() % n_in != 0 {
            return Err(Error::shape("input sequence", n_in, xs.len()));
        }
        let mut state = self.new_state();
        let mut ys = Vec::with_capacity(xs.len() / n_in * n_out);
        for x in xs.chunks_exact(n_in) {
            ys.extend_from_slice(self.step(&mut state, x)?);
        }
        Ok(ys)
    }
}

/// Functional single step: returns the output and the successor state.
pub fn forward_step<T: Float>(
    weights: &ReplicaWeights<T>,
    state: &HiddenState<T>,
    x: &[T],
) -> Result<(Vec<T>, HiddenState<T>)> {
    let mut replica = Replica::new(weights.clone());
    let mut next = state.clone();
    let y = replica.step(&mut next, x)?.to_vec();
    Ok((y, next))
}

/// Flat per-frame outputs for a flat input sequence.
pub fn forward_sequence<T: Float>(weights: &ReplicaWeights<T>, xs: &[T]) -> Result<Vec<T>> {
    Replica::new(weights.clone()).run_sequence(xs)
}

/// Angles of consecutive output pairs.
pub fn decode_output<T: Float>(y: &[T]) -> Result<Vec<f64>> {
    y.chunks_exact(2)
        .map(|p| decode_label(p[0].to_f64().unwrap_or(f64::NAN), p[1].to_f64().unwrap_or(f64::NAN)))
        .collect()
}
