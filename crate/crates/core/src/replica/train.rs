use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, OptimizerState};
use super::arch::{ReplicaArchitecture, ReplicaWeights};
use super::bptt::{sequence_loss, Bptt};
use super::net::HiddenState;
use crate::encoding::{encode_frame_into, RING_INTERVALS};
use crate::trajgen::LabeledSequence;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub init_seed: u64,
    /// Frames per backpropagation window; `0` backpropagates through the whole
    /// sequence. With a window, one optimizer step is taken per window and the
    /// recurrent state is carried into the next window.
    pub truncation: usize,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            init_seed: 7,
            truncation: 0,
            adam: AdamConfig::default(),
        }
    }
}

/// A training sequence in network form: flat encoded inputs and flat targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T = f32> {
    pub seed: u64,
    pub inputs: Vec<T>,
    pub targets: Vec<T>,
}

impl<T: Float> Sample<T> {
    pub fn from_labeled(seq: &LabeledSequence) -> Result<Self> {
        let dims = seq.dims();
        let width = dims * RING_INTERVALS;
        let mut inputs = vec![T::zero(); seq.len() * width];
        for (row, frame) in seq.inputs.iter().zip(inputs.chunks_exact_mut(width)) {
            encode_frame_into(row, frame)?;
        }
        let mut targets = Vec::with_capacity(seq.len() * 2 * dims);
        for row in &seq.labels {
            if row.len() != 2 * dims {
                return Err(Error::shape("label row", 2 * dims, row.len()));
            }
            targets.extend(row.iter().map(|&v| T::from(v).unwrap()));
        }
        Ok(Self {
            seed: seq.seed,
            inputs,
            targets,
        })
    }

    pub fn frames(&self, arch: &ReplicaArchitecture) -> usize {
        self.inputs.len() / arch.input_size
    }
}

/// Supplies the training sequences of each epoch.
pub trait EpochSource<T> {
    fn epoch(&mut self, epoch: usize) -> Result<&[Sample<T>]>;
}

/// The same pool every epoch.
impl<T> EpochSource<T> for Vec<Sample<T>> {
    fn epoch(&mut self, _epoch: usize) -> Result<&[Sample<T>]> {
        Ok(self)
    }
}

/// Fresh sequences per epoch from a generator closure.
pub struct Regenerate<T, F> {
    make: F,
    buf: Vec<Sample<T>>,
}

impl<T, F> Regenerate<T, F>
where
    F: FnMut(usize) -> Result<Vec<Sample<T>>>,
{
    pub fn new(make: F) -> Self {
        Self { make, buf: Vec::new() }
    }
}

impl<T, F> EpochSource<T> for Regenerate<T, F>
where
    F: FnMut(usize) -> Result<Vec<Sample<T>>>,
{
    fn epoch(&mut self, epoch: usize) -> Result<&[Sample<T>]> {
        self.buf = (self.make)(epoch)?;
        Ok(&self.buf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// Zero-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T = f32> {
    /// Weights of the epoch with the lowest validation loss.
    pub best: ReplicaWeights<T>,
    pub last: ReplicaWeights<T>,
    pub log: TrainLog,
}

/// Mean loss over a set of sequences, each run from the zero state.
pub fn evaluate_loss<T: Float>(weights: &ReplicaWeights<T>, samples: &[Sample<T>]) -> Result<f64> {
    if samples.is_empty() {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    for s in samples {
        total += sequence_loss(weights, &s.inputs, &s.targets)?;
    }
    Ok(total / samples.len() as f64)
}

/// Trains from a seeded initialization. Sequences are visited in the order the
/// source yields them and each window takes one Adam step, so the result is a pure
/// function of the data, `config` and `arch`. `observe` sees every epoch log as it
/// is produced.
pub fn train<T, S, O>(
    arch: ReplicaArchitecture,
    config: &TrainConfig,
    source: &mut S,
    val: &[Sample<T>],
    mut observe: O,
) -> Result<TrainOutcome<T>>
where
    T: Float,
    S: EpochSource<T> + ?Sized,
    O: FnMut(&EpochLog),
{
    config.adam.validate()?;
    let weights = ReplicaWeights::<T>::init(arch, config.init_seed)?;
    train_from(weights, config, source, val, &mut observe)
}

/// As [`train`], starting from given weights.
pub fn train_from<T, S, O>(
    mut weights: ReplicaWeights<T>,
    config: &TrainConfig,
    source: &mut S,
    val: &[Sample<T>],
    mut observe: O,
) -> Result<TrainOutcome<T>>
where
    T: Float,
    S: EpochSource<T> + ?Sized,
    O: FnMut(&EpochLog),
{
    let arch = weights.arch().clone();
    let (n_in, n_out) = (arch.input_size, arch.output_size);
    let mut opt = OptimizerState::new(config.adam, weights.params().len());
    let mut grads = vec![T::zero(); weights.params().len()];
    let mut bptt = Bptt::new(&arch);
    let mut state = HiddenState::new(&arch);
    let mut log = TrainLog {
        best_val_loss: f64::INFINITY,
        ..TrainLog::default()
    };
    let mut best = weights.clone();

    for epoch in 0..config.epochs {
        let samples = source.epoch(epoch)?;
        if samples.is_empty() {
            return Err(Error::InvalidParams("epoch has no training sequences".into()));
        }
        let mut epoch_loss = 0.0;
        for s in samples {
            let frames = s.frames(&arch);
            if frames == 0 || s.inputs.len() != frames * n_in {
                return Err(Error::shape("training inputs", frames.max(1) * n_in, s.inputs.len()));
            }
            let window = if config.truncation == 0 { frames } else { config.truncation };
            state.reset();
            let mut seq_loss = 0.0;
            let mut start = 0;
            while start < frames {
                let end = (start + window).min(frames);
                let loss = bptt
                    .run(
                        &weights,
                        &mut state,
                        &s.inputs[start * n_in..end * n_in],
                        &s.targets[start * n_out..end * n_out],
                        &mut grads,
                    )
                    .map_err(|e| match e {
                        Error::NonFinite(_) => Error::Diverged { epoch, seed: s.seed },
                        other => other,
                    })?;
                adam_step(&mut opt, weights.params_mut(), &grads)?;
                if weights.params().iter().any(|p| !p.is_finite()) {
                    return Err(Error::Diverged { epoch, seed: s.seed });
                }
                seq_loss += loss * (end - start) as f64;
                start = end;
            }
            epoch_loss += seq_loss / frames as f64;
        }
        let train_loss = epoch_loss / samples.len() as f64;
        let val_loss = if val.is_empty() {
            train_loss
        } else {
            evaluate_loss(&weights, val)?
        };
        let entry = EpochLog {
            epoch,
            train_loss,
            val_loss,
        };
        if val_loss < log.best_val_loss {
            log.best_val_loss = val_loss;
            log.best_epoch = epoch;
            best.params_mut().copy_from_slice(weights.params());
        }
        observe(&entry);
        log.epochs.push(entry);
    }
    Ok(TrainOutcome {
        best,
        last: weights,
        log,
    })
}
