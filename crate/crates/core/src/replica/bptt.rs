use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use super::arch::{Dense, ReplicaArchitecture, ReplicaWeights};
use super::net::{step_into, FrameTrace, HiddenState};
use super::ops::{affine_back_input, affine_back_params, axpy, outer_acc};
use crate::{Error, Result};

/// Reusable buffers for reverse-mode differentiation through time.
#[derive(Debug, Clone)]
pub struct Bptt<T = f32> {
    traces: Vec<FrameTrace<T>>,
    dh_next: Vec<T>,
    dc_next: Vec<T>,
    dz: Vec<T>,
    dh: Vec<T>,
    dinput: Vec<T>,
    da1: Vec<T>,
    da2: Vec<T>,
    dd: Vec<T>,
    dy: Vec<T>,
}

impl<T: Float> Bptt<T> {
    pub fn new(arch: &ReplicaArchitecture) -> Self {
        let h = arch.lstm_units;
        let n = arch.lstm_layers * h;
        let widest = arch.fc_sizes[1].max(h);
        Self {
            traces: Vec::new(),
            dh_next: vec![T::zero(); n],
            dc_next: vec![T::zero(); n],
            dz: vec![T::zero(); 4 * h],
            dh: vec![T::zero(); h],
            dinput: vec![T::zero(); widest],
            da1: vec![T::zero(); arch.fc_sizes[0]],
            da2: vec![T::zero(); arch.fc_sizes[1]],
            dd: vec![T::zero(); arch.decoder_units],
            dy: vec![T::zero(); arch.output_size],
        }
    }

    /// Loss and exact gradient of one chunk.
    ///
    /// The loss is the mean over frames and output components of the squared error.
    /// `grads` is overwritten. `state` is the state entering the chunk (treated as a
    /// constant) and is replaced by the state leaving it.
    pub fn run(
        &mut self,
        w: &ReplicaWeights<T>,
        state: &mut HiddenState<T>,
        xs: &[T],
        targets: &[T],
        grads: &mut [T],
    ) -> Result<f64> {
        let arch = w.arch();
        let (n_in, n_out, h) = (arch.input_size, arch.output_size, arch.lstm_units);
        if xs.is_empty() || xs.len() % n_in != 0 {
            return Err(Error::shape("input sequence", n_in, xs.len()));
        }
        let frames = xs.len() / n_in;
        if targets.len() != frames * n_out {
            return Err(Error::shape("label sequence", frames * n_out, targets.len()));
        }
        if grads.len() != w.params().len() {
            return Err(Error::shape("gradient vector", w.params().len(), grads.len()));
        }
        if state.h.len() != arch.lstm_layers * h {
            return Err(Error::shape("hidden state", arch.lstm_layers * h, state.h.len()));
        }
        while self.traces.len() < frames {
            self.traces.push(FrameTrace::new(arch));
        }

        for t in 0..frames {
            let (done, todo) = self.traces.split_at_mut(t);
            let (hp, cp) = match done.last() {
                Some(prev) => (&prev.h[..], &prev.c[..]),
                None => (&state.h[..], &state.c[..]),
            };
            step_into(w, hp, cp, &xs[t * n_in..(t + 1) * n_in], &mut todo[0]);
        }

        let scale = 2.0 / (frames * n_out) as f64;
        let mut sse = 0.0;
        for (fr, yt) in self.traces[..frames].iter().zip(targets.chunks_exact(n_out)) {
            for (&y, &target) in fr.y.iter().zip(yt) {
                let e = (y - target).to_f64().unwrap_or(f64::NAN);
                sse += e * e;
            }
        }
        let loss = sse / (frames * n_out) as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite("training loss".into()));
        }

        grads.iter_mut().for_each(|g| *g = T::zero());
        self.dh_next.iter_mut().for_each(|v| *v = T::zero());
        self.dc_next.iter_mut().for_each(|v| *v = T::zero());
        let p = w.params();
        let o = &w.offsets;
        let layers = o.lstm.len();
        let scale = T::from(scale).unwrap();
        let dense_w = |d: Dense| (d.w, d.b, d.b + d.rows);

        for t in (0..frames).rev() {
            let fr = &self.traces[t];
            let (h_prev, c_prev) = if t > 0 {
                (&self.traces[t - 1].h[..], &self.traces[t - 1].c[..])
            } else {
                (&state.h[..], &state.c[..])
            };

            for ((g, &y), &target) in self.dy.iter_mut().zip(&fr.y).zip(&targets[t * n_out..]) {
                *g = scale * (y - target);
            }
            let (ow, ob, oe) = dense_w(o.output);
            {
                let (gw, gb) = grads[ow..oe].split_at_mut(ob - ow);
                affine_back_params(&self.dy, &fr.d, gw, gb);
            }
            self.dd.iter_mut().for_each(|v| *v = T::zero());
            affine_back_input(&p[ow..ob], &self.dy, &mut self.dd);
            for (g, &d) in self.dd.iter_mut().zip(&fr.d) {
                *g = *g * (T::one() - d * d);
            }
            let top = &fr.h[(layers - 1) * h..];
            let (dw, db, de) = dense_w(o.decoder);
            {
                let (gw, gb) = grads[dw..de].split_at_mut(db - dw);
                affine_back_params(&self.dd, top, gw, gb);
            }
            let above = &mut self.dinput[..h];
            above.iter_mut().for_each(|v| *v = T::zero());
            affine_back_input(&p[dw..db], &self.dd, above);

            for l in (0..layers).rev() {
                let r = o.lstm[l];
                let span = l * h..(l + 1) * h;
                for j in 0..h {
                    self.dh[j] = self.dinput[j] + self.dh_next[l * h + j];
                }
                let gates = &fr.gates[4 * l * h..4 * (l + 1) * h];
                let tc = &fr.tanh_c[span.clone()];
                let cp = &c_prev[span.clone()];
                let dc_next = &mut self.dc_next[span.clone()];
                for j in 0..h {
                    let (i, f, g, og) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                    let dh = self.dh[j];
                    let dc = dh * og * (T::one() - tc[j] * tc[j]) + dc_next[j];
                    self.dz[j] = dc * g * i * (T::one() - i);
                    self.dz[h + j] = dc * cp[j] * f * (T::one() - f);
                    self.dz[2 * h + j] = dc * i * (T::one() - g * g);
                    self.dz[3 * h + j] = dh * tc[j] * og * (T::one() - og);
                    dc_next[j] = dc * f;
                }
                let input: &[T] = if l == 0 { &fr.a2 } else { &fr.h[(l - 1) * h..l * h] };
                {
                    let (gih, rest) = grads[r.w_ih..r.b + 4 * h].split_at_mut(r.w_hh - r.w_ih);
                    let (ghh, gb) = rest.split_at_mut(r.b - r.w_hh);
                    outer_acc(&self.dz, input, gih);
                    outer_acc(&self.dz, &h_prev[span.clone()], ghh);
                    axpy(T::one(), &self.dz, gb);
                }
                let dhn = &mut self.dh_next[span];
                dhn.iter_mut().for_each(|v| *v = T::zero());
                affine_back_input(&p[r.w_hh..r.b], &self.dz, dhn);
                let din = &mut self.dinput[..r.input];
                din.iter_mut().for_each(|v| *v = T::zero());
                affine_back_input(&p[r.w_ih..r.w_hh], &self.dz, din);
            }

            for (g, (&din, &a)) in self.da2.iter_mut().zip(self.dinput.iter().zip(&fr.a2)) {
                *g = if a > T::zero() { din } else { T::zero() };
            }
            let (f2w, f2b, f2e) = dense_w(o.fc[1]);
            {
                let (gw, gb) = grads[f2w..f2e].split_at_mut(f2b - f2w);
                affine_back_params(&self.da2, &fr.a1, gw, gb);
            }
            self.da1.iter_mut().for_each(|v| *v = T::zero());
            affine_back_input(&p[f2w..f2b], &self.da2, &mut self.da1);
            for (g, &a) in self.da1.iter_mut().zip(&fr.a1) {
                if a <= T::zero() {
                    *g = T::zero();
                }
            }
            let (f1w, f1b, f1e) = dense_w(o.fc[0]);
            let (gw, gb) = grads[f1w..f1e].split_at_mut(f1b - f1w);
            affine_back_params(&self.da1, &xs[t * n_in..(t + 1) * n_in], gw, gb);
        }

        let last = &self.traces[frames - 1];
        state.h.copy_from_slice(&last.h);
        state.c.copy_from_slice(&last.c);
        Ok(loss)
    }
}

/// Full-sequence loss and gradient from the zero state.
pub fn bptt_gradients<T: Float>(weights: &ReplicaWeights<T>, xs: &[T], targets: &[T]) -> Result<(f64, Vec<T>)> {
    let mut grads = vec![T::zero(); weights.params().len()];
    let mut state = HiddenState::new(weights.arch());
    let loss = Bptt::new(weights.arch()).run(weights, &mut state, xs, targets, &mut grads)?;
    Ok((loss, grads))
}

/// Loss of a sequence without gradients.
pub fn sequence_loss<T: Float>(weights: &ReplicaWeights<T>, xs: &[T], targets: &[T]) -> Result<f64> {
    let ys = super::net::forward_sequence(weights, xs)?;
    if ys.len() != targets.len() {
        return Err(Error::shape("label sequence", ys.len(), targets.len()));
    }
    let sse: f64 = ys
        .iter()
        .zip(targets)
        .map(|(&y, &t)| {
            let e = (y - t).to_f64().unwrap_or(f64::NAN);
            e * e
        })
        .sum();
    Ok(sse / ys.len() as f64)
}
