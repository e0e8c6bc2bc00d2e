//! Path integration: motion cues in, joint pose estimates out.
//!
//! Cues are integrated open loop into a world pose, which is mapped onto ring
//! stimuli (`2π` per `l_xy` metres in x and y, per `l_z` metres in height). Pose cells
//! turn the stimuli into decoded ring coordinates; unwrapping those against the
//! previous frame gives unbounded world coordinates:
//!
//! ```text
//! world = (wrap_counter · 2π + ring) · scale / 2π
//! ```

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::angle::{wrap_pi, PI, TAU};
use crate::cann::{CannParams, CannRunner};
use crate::encoding::{encode_angle_into, RING_INTERVALS};
use crate::eval::TrajectorySample;
use crate::replica::{decode_output, HiddenState, Replica, ReplicaWeights};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionCue {
    pub t: f64,
    pub v_trans: f64,
    pub v_height: f64,
    pub yaw_rate: f64,
}

impl MotionCue {
    pub fn still(t: f64) -> Self {
        Self {
            t,
            v_trans: 0.0,
            v_height: 0.0,
            yaw_rate: 0.0,
        }
    }
}

/// Metres per ring period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RingScale {
    pub l_xy: f64,
    pub l_z: f64,
}

impl Default for RingScale {
    fn default() -> Self {
        Self { l_xy: 10.0, l_z: 10.0 }
    }
}

impl RingScale {
    pub fn validate(&self) -> Result<()> {
        if self.l_xy > 0.0 && self.l_z > 0.0 && self.l_xy.is_finite() && self.l_z.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams("ring scales must be positive".into()))
        }
    }
}

/// World pose; `yaw` is unbounded unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.yaw]
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        Self {
            x: p[0],
            y: p[1],
            z: p[2],
            yaw: p[3],
        }
    }
}

/// Ring stimuli in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RingStimuli {
    pub yaw: f64,
    pub height: f64,
    pub x: f64,
    pub y: f64,
}

/// Open-loop dead reckoning. The first cue fixes the time origin at the zero pose;
/// later cues advance with forward Euler using the heading before the update.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrator {
    scale: RingScale,
    pose: Pose,
    t_prev: Option<f64>,
    frames: usize,
}

impl Integrator {
    pub fn new(scale: RingScale) -> Result<Self> {
        scale.validate()?;
        Ok(Self {
            scale,
            pose: Pose::default(),
            t_prev: None,
            frames: 0,
        })
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn scale(&self) -> RingScale {
        self.scale
    }

    pub fn stimuli(&self) -> RingStimuli {
        let p = self.pose;
        RingStimuli {
            yaw: wrap_pi(p.yaw),
            height: wrap_pi(p.z * TAU / self.scale.l_z),
            x: wrap_pi(p.x * TAU / self.scale.l_xy),
            y: wrap_pi(p.y * TAU / self.scale.l_xy),
        }
    }

    pub fn integrate(&mut self, cue: &MotionCue) -> Result<RingStimuli> {
        let finite = cue.t.is_finite() && cue.v_trans.is_finite() && cue.v_height.is_finite() && cue.yaw_rate.is_finite();
        if !finite {
            return Err(Error::NonFinite(alloc::format!("motion cue {}", self.frames)));
        }
        if let Some(t_prev) = self.t_prev {
            let dt = cue.t - t_prev;
            if !(dt > 0.0) {
                return Err(Error::NonIncreasingTime { frame: self.frames });
            }
            let heading = self.pose.yaw;
            self.pose.x += cue.v_trans * dt * Float::cos(heading);
            self.pose.y += cue.v_trans * dt * Float::sin(heading);
            self.pose.z += cue.v_height * dt;
            self.pose.yaw += cue.yaw_rate * dt;
        }
        self.t_prev = Some(cue.t);
        self.frames += 1;
        Ok(self.stimuli())
    }
}

/// Decoded ring coordinates in `(−π, π]`: grid cells `[x, y, z]`, head direction
/// `[yaw, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RingDecode {
    pub gc: [f64; 3],
    pub hdc: [f64; 2],
}

impl RingDecode {
    fn channels(&self) -> [f64; 5] {
        [self.gc[0], self.gc[1], self.gc[2], self.hdc[0], self.hdc[1]]
    }
}

/// Anything that turns ring stimuli into decoded ring coordinates.
pub trait PoseCells {
    fn reset(&mut self);
    fn step(&mut self, stim: &RingStimuli) -> Result<RingDecode>;
}

/// Learned replicas: one HDCN run as two channels over shared weights, plus a GCN.
#[derive(Debug, Clone)]
pub struct ReplicaCells<T = f32> {
    hdcn: Replica<T>,
    gcn: Replica<T>,
    yaw: HiddenState<T>,
    height: HiddenState<T>,
    grid: HiddenState<T>,
    x1: Vec<T>,
    x3: Vec<T>,
}

impl<T: Float> ReplicaCells<T> {
    pub fn new(hdcn: ReplicaWeights<T>, gcn: ReplicaWeights<T>) -> Result<Self> {
        if hdcn.arch().input_size != RING_INTERVALS || hdcn.arch().output_size != 2 {
            return Err(Error::shape("hdcn inputs", RING_INTERVALS, hdcn.arch().input_size));
        }
        if gcn.arch().input_size != 3 * RING_INTERVALS || gcn.arch().output_size != 6 {
            return Err(Error::shape("gcn inputs", 3 * RING_INTERVALS, gcn.arch().input_size));
        }
        let hdcn = Replica::new(hdcn);
        let gcn = Replica::new(gcn);
        Ok(Self {
            yaw: hdcn.new_state(),
            height: hdcn.new_state(),
            grid: gcn.new_state(),
            hdcn,
            gcn,
            x1: vec![T::zero(); RING_INTERVALS],
            x3: vec![T::zero(); 3 * RING_INTERVALS],
        })
    }

    /// GCN forward and decode only (the benchmarked unit).
    pub fn step_grid(&mut self, point: [f64; 3]) -> Result<[f64; 3]> {
        for (block, &p) in self.x3.chunks_exact_mut(RING_INTERVALS).zip(&point) {
            encode_angle_into(p, block)?;
        }
        let d = decode_output(self.gcn.step(&mut self.grid, &self.x3)?)?;
        Ok([d[0], d[1], d[2]])
    }
}

impl<T: Float> PoseCells for ReplicaCells<T> {
    fn reset(&mut self) {
        self.yaw.reset();
        self.height.reset();
        self.grid.reset();
    }

    fn step(&mut self, s: &RingStimuli) -> Result<RingDecode> {
        encode_angle_into(s.yaw, &mut self.x1)?;
        let yaw = decode_output(self.hdcn.step(&mut self.yaw, &self.x1)?)?[0];
        encode_angle_into(s.height, &mut self.x1)?;
        let height = decode_output(self.hdcn.step(&mut self.height, &self.x1)?)?[0];
        let gc = self.step_grid([s.x, s.y, s.height])?;
        Ok(RingDecode { gc, hdc: [yaw, height] })
    }
}

/// The reference attractor networks: two rings (yaw, height) and a 3-torus.
#[derive(Debug, Clone)]
pub struct CannCells {
    yaw: CannRunner,
    height: CannRunner,
    grid: CannRunner,
}

impl CannCells {
    pub fn new(ring: CannParams, torus: CannParams) -> Result<Self> {
        if ring.dims != 1 || torus.dims != 3 {
            return Err(Error::InvalidParams("need a ring and a 3-torus".into()));
        }
        Ok(Self {
            yaw: CannRunner::new(ring.clone())?,
            height: CannRunner::new(ring)?,
            grid: CannRunner::new(torus)?,
        })
    }
}

impl PoseCells for CannCells {
    fn reset(&mut self) {
        self.yaw.reset();
        self.height.reset();
        self.grid.reset();
    }

    fn step(&mut self, s: &RingStimuli) -> Result<RingDecode> {
        self.yaw.advance(&[s.yaw])?;
        self.height.advance(&[s.height])?;
        self.grid.advance(&[s.x, s.y, s.height])?;
        let g = self.grid.decode_angles()?;
        Ok(RingDecode {
            gc: [g[0], g[1], g[2]],
            hdc: [self.yaw.decode_angles()?[0], self.height.decode_angles()?[0]],
        })
    }
}

/// Cells that report their stimulus exactly; the noise-free limit of the pipeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealCells;

impl PoseCells for IdealCells {
    fn reset(&mut self) {}

    fn step(&mut self, s: &RingStimuli) -> Result<RingDecode> {
        Ok(RingDecode {
            gc: [s.x, s.y, s.height],
            hdc: [s.yaw, s.height],
        })
    }
}

/// Pose read out of the cells. Channels of `ring`/`wrap_counters` are
/// `[gc x, gc y, gc z, yaw, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// In `(−π, π]`.
    pub yaw: f64,
    pub ring: RingDecode,
    pub wrap_counters: [i64; 5],
    /// The cells failed to decode this frame and the previous pose was held.
    pub held: bool,
}

impl JointPose {
    pub fn channel(&self, k: usize) -> f64 {
        self.ring.channels()[k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiFrame {
    pub t: f64,
    pub stimuli: RingStimuli,
    /// Open-loop integrator pose (the dead-reckoning input).
    pub odometry: Pose,
    pub joint: JointPose,
}

/// Sequential path-integration state machine over some pose cells.
#[derive(Debug, Clone)]
pub struct PiSession<C> {
    cells: C,
    integrator: Integrator,
    last: JointPose,
    frames: usize,
    held_frames: Vec<usize>,
}

impl<C: PoseCells> PiSession<C> {
    pub fn new(mut cells: C, scale: RingScale) -> Result<Self> {
        cells.reset();
        Ok(Self {
            cells,
            integrator: Integrator::new(scale)?,
            last: JointPose::default(),
            frames: 0,
            held_frames: Vec::new(),
        })
    }

    pub fn cells(&self) -> &C {
        &self.cells
    }

    /// Runs the cells `frames` times on the current stimuli without emitting a
    /// frame or moving the pose, so the first decode comes from settled cells.
    pub fn prime(&mut self, frames: usize) -> Result<()> {
        let stimuli = self.integrator.stimuli();
        for _ in 0..frames {
            match self.cells.step(&stimuli) {
                Ok(_) | Err(Error::ZeroActivity) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    /// Frames on which decoding failed and the previous pose was held.
    pub fn held_frames(&self) -> &[usize] {
        &self.held_frames
    }

    pub fn step(&mut self, cue: &MotionCue) -> Result<PiFrame> {
        let stimuli = self.integrator.integrate(cue)?;
        let frame = self.frames;
        self.frames += 1;
        let decoded = match self.cells.step(&stimuli) {
            Ok(d) => d,
            Err(Error::ZeroActivity) => {
                self.held_frames.push(frame);
                let mut held = self.last;
                held.held = true;
                return Ok(PiFrame {
                    t: cue.t,
                    stimuli,
                    odometry: self.integrator.pose(),
                    joint: held,
                });
            }
            Err(e) => return Err(e),
        };
        let prev = self.last.ring.channels();
        let now = decoded.channels();
        let mut counters = self.last.wrap_counters;
        for k in 0..5 {
            let jump = now[k] - prev[k];
            if jump > PI {
                counters[k] -= 1;
            } else if jump < -PI {
                counters[k] += 1;
            }
        }
        let unwrap = |k: usize, scale: f64| (counters[k] as f64 * TAU + now[k]) * scale / TAU;
        let s = self.integrator.scale();
        let joint = JointPose {
            x: unwrap(0, s.l_xy),
            y: unwrap(1, s.l_xy),
            z: unwrap(2, s.l_z),
            yaw: now[3],
            ring: decoded,
            wrap_counters: counters,
            held: false,
        };
        self.last = joint;
        Ok(PiFrame {
            t: cue.t,
            stimuli,
            odometry: self.integrator.pose(),
            joint,
        })
    }
}

/// Functional form of one session step.
pub fn pi_step<C: PoseCells>(session: &mut PiSession<C>, cue: &MotionCue) -> Result<JointPose> {
    session.step(cue).map(|f| f.joint)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiRun {
    pub frames: Vec<PiFrame>,
    pub held_frames: Vec<usize>,
}

impl PiRun {
    pub fn trajectory(&self) -> Vec<TrajectorySample> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| TrajectorySample {
                frame: i as u64,
                t: f.t,
                x: f.joint.x,
                y: f.joint.y,
                z: f.joint.z,
                yaw: f.joint.yaw,
            })
            .collect()
    }

    /// The open-loop integrator trajectory, yaw wrapped to `(−π, π]`.
    pub fn odometry(&self) -> Vec<TrajectorySample> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| TrajectorySample {
                frame: i as u64,
                t: f.t,
                x: f.odometry.x,
                y: f.odometry.y,
                z: f.odometry.z,
                yaw: wrap_pi(f.odometry.yaw),
            })
            .collect()
    }
}

/// Runs a whole cue stream from the zero state.
pub fn run_pi<C: PoseCells>(cues: &[MotionCue], cells: C, scale: RingScale) -> Result<PiRun> {
    if cues.len() < 2 {
        return Err(Error::InputDomain(String::from("a cue stream needs at least two frames")));
    }
    let mut session = PiSession::new(cells, scale)?;
    let frames = cues.iter().map(|c| session.step(c)).collect::<Result<Vec<_>>>()?;
    Ok(PiRun {
        frames,
        held_frames: session.held_frames,
    })
}

/// Ground-truth poses of a cue stream (integrator output), yaw wrapped.
pub fn integrate_stream(cues: &[MotionCue]) -> Result<Vec<TrajectorySample>> {
    let mut integ = Integrator::new(RingScale::default())?;
    cues.iter()
        .enumerate()
        .map(|(i, c)| {
            integ.integrate(c)?;
            let p = integ.pose();
            Ok(TrajectorySample {
                frame: i as u64,
                t: c.t,
                x: p.x,
                y: p.y,
                z: p.z,
                yaw: wrap_pi(p.yaw),
            })
        })
        .collect()
}

/// A closed square walked counter-clockwise from the origin: straight legs at
/// `speed`, in-place turns of `π/2` at `turn_rate`, ending at heading zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SquareLoop {
    pub side: f64,
    pub speed: f64,
    pub rate_hz: f64,
    pub turn_rate: f64,
    pub laps: usize,
}

impl Default for SquareLoop {
    fn default() -> Self {
        Self {
            side: 10.0,
            speed: 1.0,
            rate_hz: 30.0,
            turn_rate: PI / 4.0,
            laps: 1,
        }
    }
}

impl SquareLoop {
    pub fn cues(&self) -> Vec<MotionCue> {
        let dt = 1.0 / self.rate_hz;
        let leg = Float::round(self.side / self.speed * self.rate_hz) as usize;
        let turn = Float::round(PI / 2.0 / self.turn_rate * self.rate_hz) as usize;
        // Adjust speeds so legs and turns are exact despite frame rounding.
        let v = self.side / (leg as f64 * dt);
        let w = PI / 2.0 / (turn as f64 * dt);
        let mut cues = vec![MotionCue::still(0.0)];
        let push = |v_trans: f64, yaw_rate: f64, n: usize, cues: &mut Vec<MotionCue>| {
            for _ in 0..n {
                let t = cues.len() as f64 * dt;
                cues.push(MotionCue {
                    t,
                    v_trans,
                    v_height: 0.0,
                    yaw_rate,
                });
            }
        };
        for _ in 0..self.laps {
            for _ in 0..4 {
                push(v, 0.0, leg, &mut cues);
                push(0.0, w, turn, &mut cues);
            }
        }
        cues
    }
}

/// Odometry corruption: multiplicative speed error and additive yaw-rate bias.
pub fn bias_cues(cues: &[MotionCue], scale_error: f64, yaw_bias: f64) -> Vec<MotionCue> {
    cues.iter()
        .map(|c| MotionCue {
            v_trans: c.v_trans * (1.0 + scale_error),
            v_height: c.v_height * (1.0 + scale_error),
            yaw_rate: c.yaw_rate + yaw_bias,
            ..*c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::circular_distance;
    use proptest::prelude::*;

    fn cue(t: f64, v: f64, vh: f64, w: f64) -> MotionCue {
        MotionCue {
            t,
            v_trans: v,
            v_height: vh,
            yaw_rate: w,
        }
    }

    #[test]
    fn integrator_examples() {
        let mut it = Integrator::new(RingScale::default()).unwrap();
        assert_eq!(it.integrate(&cue(0.0, 0.0, 0.0, 0.0)).unwrap(), RingStimuli::default());
        assert_eq!(it.integrate(&cue(1.0, 0.0, 0.0, 0.0)).unwrap(), RingStimuli::default());
        let s = it.integrate(&cue(2.0, 0.0, 0.0, PI / 2.0)).unwrap();
        assert!((s.yaw - PI / 2.0).abs() < 1e-15);

        let s = it.integrate(&cue(3.0, 1.0, 0.0, 0.0)).unwrap();
        assert!((s.y - TAU / 10.0).abs() < 1e-12);
        assert!((s.y - 0.6283).abs() < 1e-4);
        assert!(s.x.abs() < 1e-12);

        assert_eq!(it.integrate(&cue(3.0, 0.0, 0.0, 0.0)), Err(Error::NonIncreasingTime { frame: 4 }));
        assert!(it.integrate(&cue(4.0, f64::NAN, 0.0, 0.0)).is_err());
        assert!(Integrator::new(RingScale { l_xy: 0.0, l_z: 1.0 }).is_err());
    }

    #[test]
    fn height_maps_through_l_z() {
        let mut it = Integrator::new(RingScale { l_xy: 10.0, l_z: 4.0 }).unwrap();
        it.integrate(&cue(0.0, 0.0, 0.0, 0.0)).unwrap();
        let s = it.integrate(&cue(1.0, 0.0, 1.0, 0.0)).unwrap();
        assert!((s.height - PI / 2.0).abs() < 1e-15);
        assert_eq!(it.pose().z, 1.0);
    }

    #[test]
    fn straight_run_wraps_once() {
        let cues: Vec<_> = (0..=300).map(|i| cue(i as f64 / 30.0, 1.0, 0.0, 0.0)).collect();
        let run = run_pi(&cues, IdealCells, RingScale::default()).unwrap();
        let end = run.frames.last().unwrap().joint;
        assert!((end.x - 10.0).abs() < 1e-9);
        assert_eq!(end.wrap_counters[0], 1);
        assert!(end.y.abs() < 1e-12);
    }

    #[test]
    fn stream_preconditions() {
        assert!(run_pi(&[], IdealCells, RingScale::default()).is_err());
        assert!(run_pi(&[MotionCue::still(0.0)], IdealCells, RingScale::default()).is_err());
        let zero: Vec<_> = (0..50).map(|i| MotionCue::still(i as f64)).collect();
        let run = run_pi(&zero, IdealCells, RingScale::default()).unwrap();
        assert!(run.trajectory().iter().all(|s| s.x == 0.0 && s.y == 0.0 && s.z == 0.0 && s.yaw == 0.0));
    }

    struct Flaky(usize);

    impl PoseCells for Flaky {
        fn reset(&mut self) {}
        fn step(&mut self, s: &RingStimuli) -> Result<RingDecode> {
            self.0 += 1;
            if self.0 == 3 {
                return Err(Error::ZeroActivity);
            }
            IdealCells.step(s)
        }
    }

    #[test]
    fn decode_failure_holds_pose() {
        let cues: Vec<_> = (0..6).map(|i| cue(i as f64, 1.0, 0.0, 0.0)).collect();
        let run = run_pi(&cues, Flaky(0), RingScale::default()).unwrap();
        assert_eq!(run.held_frames, vec![2]);
        assert!(run.frames[2].joint.held);
        assert_eq!(run.frames[2].joint.x, run.frames[1].joint.x);
        assert!((run.frames[3].joint.x - 3.0).abs() < 1e-12);
    }

    /// Reports how many steps it has taken on its yaw channel.
    struct Counting(usize);

    impl PoseCells for Counting {
        fn reset(&mut self) {
            self.0 = 0;
        }

        fn step(&mut self, s: &RingStimuli) -> Result<RingDecode> {
            assert_eq!(*s, RingStimuli::default());
            self.0 += 1;
            Ok(RingDecode { hdc: [0.01 * self.0 as f64, 0.0], ..RingDecode::default() })
        }
    }

    #[test]
    fn priming_settles_cells_without_moving() {
        let mut session = PiSession::new(Counting(7), RingScale::default()).unwrap();
        session.prime(4).unwrap();
        assert_eq!(session.cells().0, 4);
        let f = session.step(&MotionCue::still(0.0)).unwrap();
        assert!((f.joint.yaw - 0.05).abs() < 1e-15);
        assert_eq!(f.odometry, Pose::default());
        assert!(session.held_frames().is_empty());
    }

    #[test]
    fn cann_cells_track_a_turn() {
        let ring = CannParams::ring(37);
        let mut torus = CannParams::torus(9);
        torus.settle_steps = 10;
        let cues: Vec<_> = (0..=60).map(|i| cue(i as f64 / 30.0, 0.0, 0.0, 1.0)).collect();
        let run = run_pi(&cues, CannCells::new(ring, torus).unwrap(), RingScale::default()).unwrap();
        let end = run.frames.last().unwrap().joint;
        assert!(circular_distance(end.yaw, 2.0) < 0.1, "{}", end.yaw);
        assert!(CannCells::new(CannParams::torus(5), CannParams::ring(5)).is_err());
    }

    #[test]
    fn square_loop_closes() {
        let cues = SquareLoop::default().cues();
        assert_eq!(cues.len(), 1 + 4 * (300 + 60));
        let gt = integrate_stream(&cues).unwrap();
        let end = gt.last().unwrap();
        assert!(end.x.abs() < 1e-9 && end.y.abs() < 1e-9 && end.yaw.abs() < 1e-9);
        let corner = &gt[300];
        assert!((corner.x - 10.0).abs() < 1e-9 && corner.y.abs() < 1e-9);

        let biased = integrate_stream(&bias_cues(&cues, 0.01, 0.002)).unwrap();
        let gap = biased.last().unwrap().x.hypot(biased.last().unwrap().y);
        assert!(gap > 0.3 && gap < 2.0, "{gap}");
    }

    proptest! {
        #[test]
        fn unwrap_matches_integrator(seed in any::<u64>()) {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let mut t = 0.0;
            let cues: Vec<_> = (0..400).map(|_| {
                t += rng.uniform(0.01, 0.05);
                cue(t, rng.uniform(0.0, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0))
            }).collect();
            let run = run_pi(&cues, IdealCells, RingScale::default()).unwrap();
            for f in &run.frames {
                prop_assert!((f.joint.x - f.odometry.x).abs() < 1e-9);
                prop_assert!((f.joint.y - f.odometry.y).abs() < 1e-9);
                prop_assert!((f.joint.z - f.odometry.z).abs() < 1e-9);
                prop_assert!(circular_distance(f.joint.yaw, f.odometry.yaw) < 1e-9);
            }
            let traj = run.trajectory();
            for w in traj.windows(2) {
                prop_assert!((w[1].x - w[0].x).abs() < 0.5 * 10.0);
            }
        }
    }
}
