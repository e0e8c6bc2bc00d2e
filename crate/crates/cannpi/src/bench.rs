//! Wall-clock comparison of the reference networks and their replicas.
//!
//! Every workload advances one frame at a time on the calling thread. A frame of
//! a reference network is `settle_steps` integration steps plus a decode, the work
//! a replica frame (encode, forward, decode) replaces.

use std::hint::black_box;
use std::time::Instant;

use cannpi_core::angle::wrap_pi;
use cannpi_core::cann::{CannParams, CannRunner};
use cannpi_core::encoding::{encode_angle_into, RING_INTERVALS};
use cannpi_core::pi::{MotionCue, PiSession, ReplicaCells, RingScale, SquareLoop};
use cannpi_core::replica::{decode_output, Replica, ReplicaArchitecture, ReplicaWeights};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Workload {
    Cann1d,
    Cann3d,
    ReplicaHdcn,
    ReplicaGcn,
    PiPipeline,
}

impl Workload {
    pub const ALL: [Workload; 5] = [
        Workload::Cann1d,
        Workload::Cann3d,
        Workload::ReplicaHdcn,
        Workload::ReplicaGcn,
        Workload::PiPipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Workload::Cann1d => "cann_1d",
            Workload::Cann3d => "cann_3d",
            Workload::ReplicaHdcn => "replica_hdcn",
            Workload::ReplicaGcn => "replica_gcn",
            Workload::PiPipeline => "pi_pipeline",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|w| w.name() == s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub workload: &'static str,
    pub frames: usize,
    pub repeats: usize,
    pub median_us_per_frame: f64,
    pub min_us_per_frame: f64,
    pub max_us_per_frame: f64,
    /// Median wall time of one repeat.
    pub total_s: f64,
}

/// What the workloads run on.
#[derive(Debug, Clone)]
pub struct BenchSetup {
    pub ring: CannParams,
    pub torus: CannParams,
    pub hdcn: ReplicaWeights<f32>,
    pub gcn: ReplicaWeights<f32>,
    pub scale: RingScale,
}

impl BenchSetup {
    /// Reference networks from `ring`/`torus`; replicas seeded at random, which
    /// costs exactly what trained weights cost.
    pub fn seeded(ring: CannParams, torus: CannParams, seed: u64) -> Result<Self> {
        Ok(Self {
            ring,
            torus,
            hdcn: ReplicaWeights::init(ReplicaArchitecture::hdcn(), seed)?,
            gcn: ReplicaWeights::init(ReplicaArchitecture::gcn(), seed)?,
            scale: RingScale::default(),
        })
    }
}

/// Deterministic slow sweep: axis `d` at frame `f`.
fn sweep(f: usize, d: usize) -> f64 {
    wrap_pi(0.04 * f as f64 * (1.0 + 0.5 * d as f64) + d as f64)
}

fn pipeline_cues(frames: usize) -> Vec<MotionCue> {
    let one = SquareLoop::default().cues();
    let laps = frames.div_ceil(one.len()).max(1);
    let mut cues = SquareLoop { laps, ..SquareLoop::default() }.cues();
    cues.truncate(frames);
    cues
}

/// Times `frames` frames `repeats` times after `warmup` untimed passes. `make`
/// builds a fresh frame closure per pass, outside the timed region.
pub fn time_frames<F, M>(name: &'static str, frames: usize, repeats: usize, warmup: usize, mut make: M) -> Result<Timing>
where
    M: FnMut() -> Result<F>,
    F: FnMut(usize) -> Result<()>,
{
    if frames < 100 || repeats < 3 {
        return Err(Error::Usage("bench needs at least 100 frames and 3 repeats".into()));
    }
    for _ in 0..warmup {
        let mut frame = make()?;
        for f in 0..frames {
            frame(f)?;
        }
    }
    let mut totals = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut frame = make()?;
        let start = Instant::now();
        for f in 0..frames {
            frame(f)?;
        }
        totals.push(start.elapsed().as_secs_f64());
    }
    totals.sort_by(f64::total_cmp);
    let median = if repeats % 2 == 1 {
        totals[repeats / 2]
    } else {
        0.5 * (totals[repeats / 2 - 1] + totals[repeats / 2])
    };
    let per_frame = |s: f64| s / frames as f64 * 1e6;
    Ok(Timing {
        workload: name,
        frames,
        repeats,
        median_us_per_frame: per_frame(median),
        min_us_per_frame: per_frame(totals[0]),
        max_us_per_frame: per_frame(totals[repeats - 1]),
        total_s: median,
    })
}

pub fn bench(w: Workload, setup: &BenchSetup, frames: usize, repeats: usize, warmup: usize) -> Result<Timing> {
    let name = w.name();
    match w {
        Workload::Cann1d | Workload::Cann3d => {
            let params = if w == Workload::Cann1d { &setup.ring } else { &setup.torus };
            let dims = params.dims;
            time_frames(name, frames, repeats, warmup, || {
                let mut runner = CannRunner::new(params.clone())?;
                let mut point = vec![0.0; dims];
                Ok(move |f: usize| {
                    for (d, p) in point.iter_mut().enumerate() {
                        *p = sweep(f, d);
                    }
                    runner.advance(&point)?;
                    black_box(runner.decode_angles()?);
                    Ok(())
                })
            })
        }
        Workload::ReplicaHdcn | Workload::ReplicaGcn => {
            let weights = if w == Workload::ReplicaHdcn { &setup.hdcn } else { &setup.gcn };
            let dims = weights.arch().input_size / RING_INTERVALS;
            time_frames(name, frames, repeats, warmup, || {
                let mut net = Replica::new(weights.clone());
                let mut state = net.new_state();
                let mut x = vec![0.0f32; dims * RING_INTERVALS];
                Ok(move |f: usize| {
                    for (d, block) in x.chunks_exact_mut(RING_INTERVALS).enumerate() {
                        encode_angle_into(sweep(f, d), block)?;
                    }
                    black_box(decode_output(net.step(&mut state, &x)?)?);
                    Ok(())
                })
            })
        }
        Workload::PiPipeline => {
            let cues = pipeline_cues(frames);
            time_frames(name, frames, repeats, warmup, || {
                let cells = ReplicaCells::new(setup.hdcn.clone(), setup.gcn.clone())?;
                let mut session = PiSession::new(cells, setup.scale)?;
                let cues = &cues;
                Ok(move |f: usize| {
                    black_box(session.step(&cues[f])?);
                    Ok(())
                })
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Speedup {
    pub replica: &'static str,
    pub reference: &'static str,
    /// Reference median cost over replica median cost.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub timings: Vec<Timing>,
    pub speedups: Vec<Speedup>,
}

pub fn bench_all(workloads: &[Workload], setup: &BenchSetup, frames: usize, repeats: usize, warmup: usize) -> Result<BenchReport> {
    let timings = workloads
        .iter()
        .map(|&w| bench(w, setup, frames, repeats, warmup))
        .collect::<Result<Vec<_>>>()?;
    let find = |name: &str| timings.iter().find(|t| t.workload == name);
    let mut speedups = Vec::new();
    for (replica, reference) in [("replica_gcn", "cann_3d"), ("replica_hdcn", "cann_1d")] {
        if let (Some(r), Some(c)) = (find(replica), find(reference)) {
            speedups.push(Speedup {
                replica: r.workload,
                reference: c.workload,
                ratio: c.median_us_per_frame / r.median_us_per_frame,
            });
        }
    }
    Ok(BenchReport { timings, speedups })
}
