//! Seeded stimulus sequences and oracle-labelled datasets.
//!
//! A sequence is a chain of segments, each either constant or a linear ramp. One axis
//! is generated from the stream `derive_seed(spec.seed, axis)` with draws in this
//! order:
//!
//! 1. segment count `lo + below(hi − lo + 1)`, clamped to the length;
//! 2. start value `uniform(v_lo, v_hi)`;
//! 3. one `next_f64` weight per segment;
//! 4. per segment, `below(2)` (0 = constant, 1 = ramp) then a target `uniform(v_lo, v_hi)`
//!    (drawn for constant segments too, and ignored).
//!
//! Durations are `min_len + ⌊free · w_k / Σw⌋` with `free = length − count · min_len`;
//! the frames left over go one each to the first segments. A ramp moves from the
//! current value to its target, reaching it on the segment's last frame. When the
//! value range is the whole circle the ramp follows the shorter arc and values are
//! wrapped back into `(−π, π]`, so stimuli cross the ring boundary the way they do at
//! run time.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::angle::{wrap_pi, PI, TAU};
use crate::cann::{run_cann_sequence, CannParams};
use crate::encoding::normalize_label;
use crate::rng::{derive_seed, SplitMix64};
use crate::{Error, Result};

/// Preferred shortest segment, relaxed for very short sequences.
pub const MIN_SEGMENT_FRAMES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub seed: u64,
    pub length: usize,
    pub dims: usize,
    pub segment_count_range: [usize; 2],
    pub value_range: [f64; 2],
}

impl SequenceSpec {
    pub fn new(seed: u64, length: usize, dims: usize) -> Self {
        Self {
            seed,
            length,
            dims,
            segment_count_range: [2, 8],
            value_range: [-PI, PI],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.segment_count_range;
        let [v_lo, v_hi] = self.value_range;
        if self.length < 2 {
            return Err(Error::InvalidParams("sequence length must be at least 2".into()));
        }
        if self.dims != 1 && self.dims != 3 {
            return Err(Error::InvalidParams("dims must be 1 or 3".into()));
        }
        if lo == 0 || lo > hi {
            return Err(Error::InvalidParams("segment count range is empty".into()));
        }
        if !(v_lo.is_finite() && v_hi.is_finite() && v_lo < v_hi && v_lo >= -PI && v_hi <= PI) {
            return Err(Error::InvalidParams("value range must be a proper sub-interval of [-pi, pi]".into()));
        }
        Ok(())
    }

    fn full_circle(&self) -> bool {
        self.value_range[1] - self.value_range[0] >= TAU - 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Constant,
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    pub pattern: Pattern,
    pub from: f64,
    pub to: f64,
}

/// Segment layout of one axis.
pub fn generate_segments(spec: &SequenceSpec, axis: usize) -> Result<Vec<Segment>> {
    spec.validate()?;
    let mut rng = SplitMix64::new(derive_seed(spec.seed, axis as u64));
    let [lo, hi] = spec.segment_count_range;
    let [v_lo, v_hi] = spec.value_range;
    let count = (lo + rng.below((hi - lo + 1) as u64) as usize).min(spec.length);
    let min_len = MIN_SEGMENT_FRAMES.min(spec.length / count).max(1);
    let mut value = rng.uniform(v_lo, v_hi);

    let weights: Vec<f64> = (0..count).map(|_| rng.next_f64()).collect();
    let total: f64 = weights.iter().sum();
    let free = spec.length - count * min_len;
    let mut lens: Vec<usize> = weights
        .iter()
        .map(|w| {
            let share = if total > 0.0 { w / total } else { 1.0 / count as f64 };
            min_len + ((free as f64 * share) as usize).min(free)
        })
        .collect();
    let mut assigned: usize = lens.iter().sum();
    // Rounding can in principle overshoot by a frame; trim from the back.
    for l in lens.iter_mut().rev() {
        while assigned > spec.length && *l > 1 {
            *l -= 1;
            assigned -= 1;
        }
    }
    for k in 0..spec.length - assigned {
        lens[k % count] += 1;
    }

    let full = spec.full_circle();
    let mut start = 0;
    let mut segments = Vec::with_capacity(count);
    for len in lens {
        let pattern = if rng.below(2) == 0 { Pattern::Constant } else { Pattern::Ramp };
        let target = rng.uniform(v_lo, v_hi);
        let to = match pattern {
            Pattern::Constant => value,
            Pattern::Ramp if full => value + wrap_pi(target - value),
            Pattern::Ramp => target,
        };
        segments.push(Segment {
            start,
            len,
            pattern,
            from: value,
            to,
        });
        value = if full { wrap_pi(to) } else { to };
        start += len;
    }
    Ok(segments)
}

fn render(segments: &[Segment], full: bool, out: &mut Vec<f64>) {
    for s in segments {
        for k in 0..s.len {
            let v = match s.pattern {
                Pattern::Constant => s.from,
                Pattern::Ramp => s.from + (s.to - s.from) * ((k + 1) as f64 / s.len as f64),
            };
            out.push(if full { wrap_pi(v) } else { v });
        }
    }
}

/// Stimulus per axis: `result[axis][frame]`.
pub fn generate_sequence(spec: &SequenceSpec) -> Result<Vec<Vec<f64>>> {
    let full = spec.full_circle();
    (0..spec.dims)
        .map(|axis| {
            let segments = generate_segments(spec, axis)?;
            let mut values = Vec::with_capacity(spec.length);
            render(&segments, full, &mut values);
            Ok(values)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    fn stream(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Val => 1,
            Split::Test => 2,
        }
    }
}

/// One labelled sequence. `inputs[t]` holds one stimulus per axis, `labels[t]` one
/// unit `(num, den)` pair per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSequence {
    pub split: Split,
    pub seed: u64,
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<Vec<f64>>,
}

impl LabeledSequence {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }
}

/// Counts and lengths of every split, all derived from one master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetPlan {
    pub seed: u64,
    pub dims: usize,
    pub train_count: usize,
    pub val_count: usize,
    pub test_count: usize,
    pub train_length: usize,
    pub test_length: usize,
    pub segment_count_range: [usize; 2],
    pub test_segment_count_range: [usize; 2],
}

impl Default for DatasetPlan {
    fn default() -> Self {
        Self {
            seed: 42,
            dims: 1,
            train_count: 12,
            val_count: 3,
            test_count: 2,
            train_length: 500,
            test_length: 3750,
            segment_count_range: [2, 8],
            test_segment_count_range: [15, 60],
        }
    }
}

/// Stream offset of epoch-regenerated training seeds; the fixed pool uses 0..3.
const EPOCH_STREAM_BASE: u64 = 16;

impl DatasetPlan {
    pub fn validate(&self) -> Result<()> {
        if self.train_count != 4 * self.val_count {
            return Err(Error::InvalidParams("train:val counts must be 4:1".into()));
        }
        if self.test_count > 0
            && (self.test_length < 3750 || self.test_length < 7 * self.train_length)
        {
            return Err(Error::InvalidParams(
                "test sequences need at least 3750 frames and 7x the training length".into(),
            ));
        }
        SequenceSpec::new(0, self.train_length, self.dims).validate()
    }

    /// Seed of sequence `index` of a fixed split.
    pub fn seed_of(&self, split: Split, index: usize) -> u64 {
        derive_seed(derive_seed(self.seed, split.stream()), index as u64)
    }

    /// Seed of training sequence `index` regenerated for `epoch`. Epoch 0 is the
    /// fixed training pool.
    pub fn epoch_seed(&self, epoch: usize, index: usize) -> u64 {
        if epoch == 0 {
            return self.seed_of(Split::Train, index);
        }
        derive_seed(derive_seed(self.seed, EPOCH_STREAM_BASE + epoch as u64), index as u64)
    }

    pub fn spec(&self, split: Split, seed: u64) -> SequenceSpec {
        let (length, range) = match split {
            Split::Test => (self.test_length, self.test_segment_count_range),
            _ => (self.train_length, self.segment_count_range),
        };
        SequenceSpec {
            segment_count_range: range,
            ..SequenceSpec::new(seed, length, self.dims)
        }
    }

    pub fn count(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train_count,
            Split::Val => self.val_count,
            Split::Test => self.test_count,
        }
    }

    pub fn specs(&self, split: Split) -> Vec<SequenceSpec> {
        (0..self.count(split))
            .map(|i| self.spec(split, self.seed_of(split, i)))
            .collect()
    }

    pub fn epoch_specs(&self, epoch: usize) -> Vec<SequenceSpec> {
        (0..self.train_count)
            .map(|i| self.spec(Split::Train, self.epoch_seed(epoch, i)))
            .collect()
    }
}

/// Generates and labels one sequence with the oracle network.
pub fn label_sequence(spec: &SequenceSpec, split: Split, params: &CannParams) -> Result<LabeledSequence> {
    let wrap = |e: Error| Error::Sequence {
        seed: spec.seed,
        source: Box::new(e),
    };
    if params.dims != spec.dims {
        return Err(wrap(Error::shape("cann dims", spec.dims, params.dims)));
    }
    let axes = generate_sequence(spec).map_err(wrap)?;
    let mut labels = run_cann_sequence(params, &axes).map_err(wrap)?;
    for row in &mut labels {
        normalize_label(row).map_err(wrap)?;
    }
    let inputs = (0..spec.length)
        .map(|t| axes.iter().map(|a| a[t]).collect())
        .collect();
    Ok(LabeledSequence {
        split,
        seed: spec.seed,
        inputs,
        labels,
    })
}

/// Labels a batch of sequences in order.
pub fn label_dataset(specs: &[SequenceSpec], split: Split, params: &CannParams) -> Result<Vec<LabeledSequence>> {
    specs.iter().map(|s| label_sequence(s, split, params)).collect()
}

/// Labels every requested split of a plan, train first.
pub fn build_dataset(plan: &DatasetPlan, params: &CannParams, splits: &[Split]) -> Result<Vec<LabeledSequence>> {
    plan.validate()?;
    let mut out = Vec::new();
    for &split in splits {
        out.extend(label_dataset(&plan.specs(split), split, params)?);
    }
    Ok(out)
}

/// An exact symmetry of the reference networks. The ring and the torus have
/// isotropic kernels on a regular lattice and start from the zero state, so
/// permuting axes, mirroring an axis (`θ → −θ`) or rotating it by whole neuron
/// spacings maps the labels of a sequence onto the labels of the transformed
/// sequence without running the network again.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symmetry {
    /// New axis `a` takes old axis `perm[a]`.
    pub perm: [usize; 3],
    pub mirror: [bool; 3],
    /// Rotation per axis in neuron spacings, applied after mirroring.
    pub shift: [usize; 3],
}

/// Stream of augmentation draws; the fixed splits use 0..3.
const AUGMENT_STREAM: u64 = 3;

impl Symmetry {
    pub const IDENTITY: Self = Self {
        perm: [0, 1, 2],
        mirror: [false; 3],
        shift: [0; 3],
    };

    /// Uniform over axis orders, mirrors and lattice rotations of `n` neurons.
    pub fn draw(rng: &mut SplitMix64, dims: usize, n: usize) -> Self {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut s = Self::IDENTITY;
        if dims == 3 {
            s.perm = PERMS[rng.below(6) as usize];
        }
        for a in 0..dims {
            s.mirror[a] = rng.below(2) == 1;
            s.shift[a] = rng.below(n as u64) as usize;
        }
        s
    }

    pub fn apply(&self, seq: &LabeledSequence, n: usize) -> Result<LabeledSequence> {
        let dims = seq.dims();
        if dims != 1 && dims != 3 {
            return Err(Error::shape("symmetry dims", 3, dims));
        }
        let mut out = seq.clone();
        for (src, dst) in seq.inputs.iter().zip(out.inputs.iter_mut()) {
            for a in 0..dims {
                let v = src[self.perm[a]];
                let v = if self.mirror[a] { -v } else { v };
                dst[a] = wrap_pi(v + self.shift[a] as f64 * TAU / n as f64);
            }
        }
        for (src, dst) in seq.labels.iter().zip(out.labels.iter_mut()) {
            for a in 0..dims {
                let (mut num, den) = (src[2 * self.perm[a]], src[2 * self.perm[a] + 1]);
                if self.mirror[a] {
                    num = -num;
                }
                let phi = self.shift[a] as f64 * TAU / n as f64;
                let (s, c) = (num_traits::Float::sin(phi), num_traits::Float::cos(phi));
                dst[2 * a] = num * c + den * s;
                dst[2 * a + 1] = den * c - num * s;
            }
        }
        Ok(out)
    }
}

impl DatasetPlan {
    /// The fixed training pool under one random symmetry per sequence, drawn for
    /// `epoch`. Epoch 0 returns the pool unchanged.
    pub fn augmented_epoch(&self, pool: &[LabeledSequence], epoch: usize, n: usize) -> Result<Vec<LabeledSequence>> {
        let stream = derive_seed(derive_seed(self.seed, AUGMENT_STREAM), epoch as u64);
        pool.iter()
            .enumerate()
            .map(|(i, seq)| {
                if epoch == 0 {
                    return Ok(seq.clone());
                }
                let mut rng = SplitMix64::new(derive_seed(stream, i as u64));
                Symmetry::draw(&mut rng, seq.dims(), n).apply(seq, n)
            })
            .collect()
    }
}

/// Histogram of stimulus values over the 37 encoder bins.
pub fn bin_coverage(values: &[f64], bins: usize) -> Vec<usize> {
    let mut hist = vec![0; bins];
    for &v in values {
        let c = crate::angle::wrap_tau(v) / TAU * bins as f64;
        hist[(c as usize).min(bins - 1)] += 1;
    }
    hist
}
