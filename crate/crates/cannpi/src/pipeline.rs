//! The computations behind each subcommand, free of argument parsing and paths.

use std::time::Instant;

use cannpi_core::angle::{circular_distance, wrap_pi};
use cannpi_core::cann::{reconstruct_bump, reduce_3d, run_cann_sequence_with, CannParams};
use cannpi_core::encoding::decode_row;
use cannpi_core::eval::{downsample, evaluate, fidelity, ChannelFidelity, EvalReport, TrajectorySample};
use cannpi_core::graph::ExperienceGraph;
use cannpi_core::pi::{bias_cues, integrate_stream, MotionCue, PiRun, PiSession, PoseCells};
use cannpi_core::replica::{
    forward_sequence, train, EpochLog, Regenerate, ReplicaArchitecture, ReplicaWeights, Sample, TrainOutcome,
};
use cannpi_core::trajgen::{build_dataset, label_dataset, LabeledSequence, Split};

use crate::config::{RunConfig, Sampling};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::plot::{peak_slices, Heatmap};

/// Labelled sequences of the requested splits, or of the training set regenerated
/// for `epoch` when one is given.
pub fn generate(cfg: &RunConfig, splits: &[Split], epoch: Option<usize>) -> Result<Dataset> {
    let plan = cfg.plan();
    let params = cfg.cann.params(plan.dims)?;
    let sequences = match epoch {
        Some(e) => {
            plan.validate()?;
            label_dataset(&plan.epoch_specs(e), Split::Train, &params)?
        }
        None => build_dataset(&plan, &params, splits)?,
    };
    Ok(Dataset::new(plan, params, sequences))
}

/// The fixed training pool and validation set.
pub fn simulate(cfg: &RunConfig) -> Result<Dataset> {
    generate(cfg, &[Split::Train, Split::Val], None)
}

/// A reference run with its per-frame state kept for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpDump {
    pub params: CannParams,
    /// `stimulus[t][axis]`.
    pub stimulus: Vec<Vec<f64>>,
    /// Decoded angle per frame and axis, in `(−π, π]`.
    pub decoded: Vec<Vec<f64>>,
    /// Per frame: the ring's synaptic inputs, or the torus' three axis reductions
    /// concatenated.
    pub activity: Vec<Vec<f64>>,
    /// Reconstructed volumes at `snapshots` (torus only).
    pub volumes: Vec<(usize, Vec<f64>)>,
}

/// Stimulus that holds at `start`, then ramps by `rate` per frame for `frames`
/// frames on every axis, crossing both `π` and `0 ≡ 2π`.
pub fn boundary_ramp(dims: usize, hold: usize, frames: usize, rate: f64) -> Vec<Vec<f64>> {
    let start = 2.0;
    (0..hold + frames)
        .map(|t| {
            let s = start + rate * t.saturating_sub(hold) as f64;
            (0..dims).map(|d| wrap_pi(s + 0.5 * d as f64)).collect()
        })
        .collect()
}

pub fn bump_dump(params: &CannParams, stimulus: Vec<Vec<f64>>, snapshots: &[usize]) -> Result<BumpDump> {
    let dims = params.dims;
    let axes: Vec<Vec<f64>> = (0..dims).map(|d| stimulus.iter().map(|r| r[d]).collect()).collect();
    let n = params.n_per_axis;
    let mut activity = Vec::with_capacity(stimulus.len());
    let mut volumes = Vec::new();
    let mut failure = None;
    let labels = run_cann_sequence_with(params, &axes, |t, state| {
        if dims == 1 {
            activity.push(state.u.clone());
            return;
        }
        match reduce_3d(&state.u, n) {
            Ok(red) => {
                activity.push(red.axes().concat());
                if snapshots.contains(&t) {
                    match reconstruct_bump(&red) {
                        Ok(v) => volumes.push((t, v)),
                        Err(e) => failure = Some(e),
                    }
                }
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let decoded = labels.iter().map(|l| decode_row(l)).collect::<cannpi_core::Result<Vec<_>>>()?;
    Ok(BumpDump {
        params: params.clone(),
        stimulus,
        decoded,
        activity,
        volumes,
    })
}

impl BumpDump {
    /// Largest wrapped change of the decoded angle between consecutive frames.
    pub fn max_jump(&self) -> f64 {
        self.decoded
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(&a, &b)| circular_distance(a, b)))
            .fold(0.0, f64::max)
    }

    fn axis_activity(&self, axis: usize) -> Vec<Vec<f64>> {
        let n = self.params.n_per_axis;
        self.activity
            .iter()
            .map(|a| a[axis * n..(axis + 1) * n].iter().map(|&v| v.max(0.0)).collect())
            .collect()
    }

    /// Index of the most active neuron per frame on one axis.
    pub fn peak_track(&self, axis: usize) -> Vec<usize> {
        self.axis_activity(axis)
            .iter()
            .map(|col| (0..col.len()).max_by(|&a, &b| col[a].total_cmp(&col[b]).then(b.cmp(&a))).unwrap_or(0))
            .collect()
    }

    /// Activity over time, one map per axis.
    pub fn heatmaps(&self) -> Vec<Heatmap> {
        let names = ["x", "y", "z"];
        (0..self.params.dims)
            .map(|d| Heatmap {
                title: if self.params.dims == 1 {
                    "ring activity (neuron vs frame)".into()
                } else {
                    format!("{} reduction (neuron vs frame)", names[d])
                },
                values: self.axis_activity(d),
            })
            .collect()
    }

    pub fn slice_panels(&self) -> Vec<Vec<Heatmap>> {
        self.volumes
            .iter()
            .map(|(t, v)| peak_slices(v, self.params.n_per_axis, &format!("frame {t}")))
            .collect()
    }
}

/// Trajectory of the ring bump's peak re-enters at the opposite edge: some
/// consecutive frames move from the top quarter of indices to the bottom quarter
/// or back.
pub fn reenters(track: &[usize], n: usize) -> bool {
    track.windows(2).any(|w| {
        let (a, b) = (w[0], w[1]);
        (a >= n - n / 4 && b < n / 4) || (b >= n - n / 4 && a < n / 4)
    })
}

pub fn architecture(dims: usize, hidden: usize) -> ReplicaArchitecture {
    match (dims, hidden) {
        (1, 0) => ReplicaArchitecture::hdcn(),
        (_, 0) => ReplicaArchitecture::gcn(),
        (d, h) => ReplicaArchitecture::uniform(37 * d, h, h.min(12 * d), 2 * d),
    }
}

fn samples<'a>(seqs: impl Iterator<Item = &'a LabeledSequence>) -> Result<Vec<Sample<f32>>> {
    Ok(seqs.map(Sample::from_labeled).collect::<cannpi_core::Result<Vec<_>>>()?)
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub outcome: TrainOutcome<f32>,
    /// Seconds spent in each epoch.
    pub wall_s: Vec<f64>,
}

/// Trains on the dataset's training pool and validates on its validation split.
/// Regenerated epochs after the first are labelled with the dataset's own
/// reference parameters.
pub fn train_replica(cfg: &RunConfig, data: &Dataset, mut observe: impl FnMut(&EpochLog, f64)) -> Result<TrainRun> {
    let plan = data.header.spec.clone();
    let params = data.header.cann_params.clone();
    let pool = samples(data.split(Split::Train))?;
    let val = samples(data.split(Split::Val))?;
    if pool.is_empty() {
        return Err(Error::Usage("dataset has no training sequences".into()));
    }
    let arch = architecture(plan.dims, cfg.train.hidden);
    let tc = cfg.train.train_config();
    let mut wall_s = Vec::new();
    let mut clock = Instant::now();
    let obs = |l: &EpochLog| {
        let dt = clock.elapsed().as_secs_f64();
        wall_s.push(dt);
        observe(l, dt);
        clock = Instant::now();
    };
    let to_samples = |seqs: Vec<LabeledSequence>| -> cannpi_core::Result<Vec<Sample<f32>>> {
        seqs.iter().map(Sample::from_labeled).collect()
    };
    let outcome = match cfg.train.sampling {
        Sampling::Fixed => {
            let mut pool = pool;
            train(arch, &tc, &mut pool, &val, obs)?
        }
        Sampling::Regenerate => {
            let mut first = Some(pool);
            let mut source = Regenerate::new(|e| match (e, first.take()) {
                (0, Some(p)) => Ok(p),
                _ => to_samples(label_dataset(&plan.epoch_specs(e), Split::Train, &params)?),
            });
            train(arch, &tc, &mut source, &val, obs)?
        }
        Sampling::Symmetric => {
            let seqs: Vec<LabeledSequence> = data.split(Split::Train).cloned().collect();
            let n = params.n_per_axis;
            let mut source = Regenerate::new(|e| to_samples(plan.augmented_epoch(&seqs, e, n)?));
            train(arch, &tc, &mut source, &val, obs)?
        }
    };
    Ok(TrainRun { outcome, wall_s })
}

#[derive(Debug, Clone)]
pub struct FidelityReport {
    /// Per sequence seed, per channel.
    pub sequences: Vec<(u64, Vec<ChannelFidelity>)>,
    /// All frames of all sequences pooled.
    pub overall: Vec<ChannelFidelity>,
}

/// Runs the replica over every sequence of `split` from the zero state and
/// compares its decodes with the labels.
pub fn replica_fidelity(
    weights: &ReplicaWeights<f32>,
    data: &Dataset,
    split: Split,
    tolerance: f64,
) -> Result<FidelityReport> {
    let channels = weights.arch().output_size / 2;
    if channels != data.header.spec.dims {
        return Err(cannpi_core::Error::Shape {
            what: "replica channels vs dataset dims".into(),
            expected: data.header.spec.dims,
            found: channels,
        }
        .into());
    }
    let (mut all_out, mut all_lab) = (Vec::new(), Vec::new());
    let mut sequences = Vec::new();
    for seq in data.split(split) {
        let s: Sample<f32> = Sample::from_labeled(seq)?;
        let out: Vec<f64> = forward_sequence(weights, &s.inputs)?.iter().map(|&v| v as f64).collect();
        let lab: Vec<f64> = seq.labels.concat();
        sequences.push((seq.seed, fidelity(&out, &lab, channels, tolerance)?));
        all_out.extend(out);
        all_lab.extend(lab);
    }
    if sequences.is_empty() {
        return Err(Error::Usage(format!("dataset has no {split:?} sequences").to_lowercase()));
    }
    let overall = fidelity(&all_out, &all_lab, channels, tolerance)?;
    Ok(FidelityReport { sequences, overall })
}

/// Everything a path-integration run produces.
#[derive(Debug, Clone)]
pub struct PiOutputs {
    pub run: PiRun,
    pub graph: ExperienceGraph,
    /// Graph-corrected trajectory.
    pub corrected: Vec<TrajectorySample>,
    /// Open-loop integrator trajectory.
    pub raw: Vec<TrajectorySample>,
    pub elapsed_s: f64,
}

pub fn run_pipeline<C: PoseCells>(cues: &[MotionCue], cells: C, cfg: &RunConfig) -> Result<PiOutputs> {
    if cues.len() < 2 {
        return Err(cannpi_core::Error::InputDomain("a cue stream needs at least two frames".into()).into());
    }
    let start = Instant::now();
    let mut session = PiSession::new(cells, cfg.pi.scale())?;
    session.prime(cfg.pi.warmup_frames)?;
    let mut graph = ExperienceGraph::new(cfg.graph)?;
    let mut frames = Vec::with_capacity(cues.len());
    for (i, cue) in cues.iter().enumerate() {
        let f = session.step(cue)?;
        graph.observe(i as u64, f.t, &f.joint.ring, f.odometry);
        frames.push(f);
    }
    let run = PiRun {
        frames,
        held_frames: session.held_frames().to_vec(),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    Ok(PiOutputs {
        corrected: graph.export_trajectory()?,
        raw: run.odometry(),
        run,
        graph,
        elapsed_s,
    })
}

/// The configured synthetic scenario: biased cues for the pipeline and the
/// unbiased ground truth.
pub fn scenario(cfg: &RunConfig) -> Result<(Vec<MotionCue>, Vec<TrajectorySample>)> {
    let s = cfg.scenario;
    let clean = s.square().cues();
    let gt = integrate_stream(&clean)?;
    Ok((bias_cues(&clean, s.scale_error, s.yaw_bias), gt))
}

/// First frame plus every frame whose pose differs from the previous row; on a
/// graph-exported trajectory these are the frames where the active node changes.
pub fn pose_keyframes(traj: &[TrajectorySample]) -> Vec<usize> {
    let pose = |s: &TrajectorySample| [s.x, s.y, s.z, s.yaw];
    (0..traj.len())
        .filter(|&i| i == 0 || pose(&traj[i]) != pose(&traj[i - 1]))
        .collect()
}

/// Evaluates an estimate, optionally only at the given frame indices.
pub fn evaluate_at(
    est: &[TrajectorySample],
    gt: &[TrajectorySample],
    frames: Option<&[usize]>,
    cfg: &RunConfig,
) -> Result<EvalReport> {
    let est = match frames {
        Some(f) => downsample(est, f),
        None => est.to_vec(),
    };
    Ok(evaluate(&est, gt, cfg.eval.align)?)
}

/// Distance between the first and last positions.
pub fn endpoint_gap(traj: &[TrajectorySample]) -> f64 {
    match (traj.first(), traj.last()) {
        (Some(a), Some(b)) => a.distance(b),
        _ => 0.0,
    }
}
