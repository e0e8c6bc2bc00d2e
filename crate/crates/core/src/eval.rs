//! Trajectory association, alignment, error metrics and replica fidelity.

use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::angle::{circular_distance, wrap_pi, PI};
use crate::encoding::decode_label;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub frame: u64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

impl TrajectorySample {
    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let d = [self.x - other.x, self.y - other.y, self.z - other.z];
        Float::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    }
}

/// Checks that frames and timestamps strictly increase.
pub fn check_monotone(traj: &[TrajectorySample]) -> Result<()> {
    for (i, w) in traj.windows(2).enumerate() {
        if w[1].frame <= w[0].frame || !(w[1].t > w[0].t) {
            return Err(Error::NonIncreasingTime { frame: i + 1 });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub est: TrajectorySample,
    pub gt: TrajectorySample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub pairs: Vec<Pair>,
    /// Ground-truth samples with no estimate close enough in time.
    pub dropped: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Pairs every ground-truth sample with the estimate nearest in time, if that
/// estimate is within half the median ground-truth period.
pub fn associate(est: &[TrajectorySample], gt: &[TrajectorySample]) -> Result<Association> {
    if est.is_empty() || gt.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    check_monotone(est)?;
    check_monotone(gt)?;
    let max_gap = 0.5 * median(gt.windows(2).map(|w| w[1].t - w[0].t).collect());
    let mut pairs = Vec::with_capacity(gt.len());
    for g in gt {
        let i = est.partition_point(|e| e.t < g.t);
        let best = [i.checked_sub(1), (i < est.len()).then_some(i)]
            .into_iter()
            .flatten()
            .min_by(|&a, &b| (est[a].t - g.t).abs().total_cmp(&(est[b].t - g.t).abs()));
        if let Some(j) = best {
            if (est[j].t - g.t).abs() <= max_gap {
                pairs.push(Pair { est: est[j], gt: *g });
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let dropped = gt.len() - pairs.len();
    Ok(Association { pairs, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMode {
    /// No transform.
    None,
    /// Translate and rotate about z so the first estimate matches the first
    /// ground-truth position and heading.
    #[default]
    FirstPose,
    /// Least-squares rotation about z plus translation.
    RigidLsq,
}

/// Rotation about z followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub yaw: f64,
    pub t: [f64; 3],
}

impl Transform {
    pub const IDENTITY: Self = Self { yaw: 0.0, t: [0.0; 3] };

    pub fn apply(&self, s: &TrajectorySample) -> TrajectorySample {
        let (sn, cs) = Float::sin_cos(self.yaw);
        TrajectorySample {
            x: cs * s.x - sn * s.y + self.t[0],
            y: sn * s.x + cs * s.y + self.t[1],
            z: s.z + self.t[2],
            yaw: wrap_pi(s.yaw + self.yaw),
            ..*s
        }
    }
}

/// Estimates a transform for the estimate side of `pairs`.
pub fn fit_transform(pairs: &[Pair], mode: AlignMode) -> Result<Transform> {
    match mode {
        AlignMode::None => Ok(Transform::IDENTITY),
        AlignMode::FirstPose => {
            let p = pairs.first().ok_or(Error::EmptyOverlap)?;
            let yaw = wrap_pi(p.gt.yaw - p.est.yaw);
            let r = Transform { yaw, t: [0.0; 3] }.apply(&p.est);
            Ok(Transform {
                yaw,
                t: [p.gt.x - r.x, p.gt.y - r.y, p.gt.z - r.z],
            })
        }
        AlignMode::RigidLsq => {
            if pairs.len() < 3 {
                return Err(Error::Degenerate("rigid alignment needs at least three pairs".into()));
            }
            let n = pairs.len() as f64;
            let mut ce = [0.0; 3];
            let mut cg = [0.0; 3];
            for p in pairs {
                for (k, (e, g)) in p.est.position().iter().zip(p.gt.position()).enumerate() {
                    ce[k] += e / n;
                    cg[k] += g / n;
                }
            }
            // Maximizes Σ gᵀ R e over centred xy points: tan θ = Σ(e×g) / Σ(e·g).
            let (mut cross, mut dot, mut spread) = (0.0, 0.0, 0.0);
            for p in pairs {
                let (ex, ey) = (p.est.x - ce[0], p.est.y - ce[1]);
                let (gx, gy) = (p.gt.x - cg[0], p.gt.y - cg[1]);
                cross += ex * gy - ey * gx;
                dot += ex * gx + ey * gy;
                spread += ex * ex + ey * ey;
            }
            if spread <= 1e-18 || Float::hypot(cross, dot) <= 1e-18 {
                return Err(Error::Degenerate("estimated positions do not span the plane".into()));
            }
            let yaw = Float::atan2(cross, dot);
            let (sn, cs) = Float::sin_cos(yaw);
            Ok(Transform {
                yaw,
                t: [
                    cg[0] - (cs * ce[0] - sn * ce[1]),
                    cg[1] - (sn * ce[0] + cs * ce[1]),
                    cg[2] - ce[2],
                ],
            })
        }
    }
}

/// Pairs with the estimate side transformed into the ground-truth frame.
pub fn align(pairs: &[Pair], mode: AlignMode) -> Result<Vec<Pair>> {
    let tf = fit_transform(pairs, mode)?;
    Ok(pairs
        .iter()
        .map(|p| Pair {
            est: tf.apply(&p.est),
            gt: p.gt,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mae_m: f64,
    pub rmse_m: f64,
    pub mte_m: f64,
    pub traveled_distance_m: f64,
    pub mean_yaw_error_rad: f64,
    pub errors: Vec<f64>,
    pub alignment: AlignMode,
    pub pairs: usize,
    pub dropped: usize,
}

/// Translational error statistics of aligned pairs.
pub fn metrics(pairs: &[Pair]) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let errors: Vec<f64> = pairs.iter().map(|p| p.est.distance(&p.gt)).collect();
    let n = errors.len() as f64;
    let mae = errors.iter().sum::<f64>() / n;
    let rmse = Float::sqrt(errors.iter().map(|e| e * e).sum::<f64>() / n);
    let mte = errors.iter().copied().fold(0.0, f64::max);
    let traveled = pairs.windows(2).map(|w| w[1].gt.distance(&w[0].gt)).sum();
    let yaw = pairs.iter().map(|p| circular_distance(p.est.yaw, p.gt.yaw)).sum::<f64>() / n;
    Ok(EvalReport {
        // The mean can exceed the RMS by rounding alone; clamp to keep the ordering.
        mae_m: mae.min(rmse),
        rmse_m: rmse.min(mte),
        mte_m: mte,
        traveled_distance_m: traveled,
        mean_yaw_error_rad: yaw,
        errors,
        alignment: AlignMode::None,
        pairs: pairs.len(),
        dropped: 0,
    })
}

/// Associate, align and measure in one go.
pub fn evaluate(est: &[TrajectorySample], gt: &[TrajectorySample], mode: AlignMode) -> Result<EvalReport> {
    let assoc = associate(est, gt)?;
    let aligned = align(&assoc.pairs, mode)?;
    let mut report = metrics(&aligned)?;
    report.alignment = mode;
    report.dropped = assoc.dropped;
    Ok(report)
}

/// Samples at the given frame indices, in order.
pub fn downsample(traj: &[TrajectorySample], frames: &[usize]) -> Vec<TrajectorySample> {
    frames.iter().filter_map(|&i| traj.get(i).copied()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelFidelity {
    pub mean: f64,
    pub max: f64,
    /// Fraction of frames with error at most `tolerance`.
    pub within: f64,
    pub tolerance: f64,
}

/// Default tolerance: one encoder half-interval.
pub const FIDELITY_TOLERANCE: f64 = PI / 37.0;

/// Per-channel wrapped angular error between replica outputs and oracle labels,
/// both given as flat `(num, den)` rows of `2 · channels` values per frame.
pub fn fidelity(replica: &[f64], oracle: &[f64], channels: usize, tolerance: f64) -> Result<Vec<ChannelFidelity>> {
    if replica.len() != oracle.len() {
        return Err(Error::shape("fidelity frames", oracle.len(), replica.len()));
    }
    let width = 2 * channels;
    if channels == 0 || replica.is_empty() || replica.len() % width != 0 {
        return Err(Error::shape("fidelity row width", width, replica.len()));
    }
    let frames = replica.len() / width;
    let mut out = Vec::with_capacity(channels);
    for c in 0..channels {
        let (mut sum, mut max, mut hits) = (0.0, 0.0f64, 0usize);
        for f in 0..frames {
            let k = f * width + 2 * c;
            let a = decode_label(replica[k], replica[k + 1])?;
            let b = decode_label(oracle[k], oracle[k + 1])?;
            let e = circular_distance(a, b);
            sum += e;
            max = max.max(e);
            if e <= tolerance {
                hits += 1;
            }
        }
        out.push(ChannelFidelity {
            mean: sum / frames as f64,
            max,
            within: hits as f64 / frames as f64,
            tolerance,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn sample(i: u64, t: f64, x: f64, y: f64, z: f64, yaw: f64) -> TrajectorySample {
        TrajectorySample { frame: i, t, x, y, z, yaw }
    }

    fn line(n: usize, dt: f64) -> Vec<TrajectorySample> {
        (0..n).map(|i| sample(i as u64, i as f64 * dt, i as f64, 0.5 * i as f64, 0.0, 0.1)).collect()
    }

    fn pairs_with_errors(errs: &[f64]) -> Vec<Pair> {
        errs.iter()
            .enumerate()
            .map(|(i, &e)| Pair {
                est: sample(i as u64, i as f64, e, 0.0, 0.0, 0.0),
                gt: sample(i as u64, i as f64, 0.0, 0.0, 0.0, 0.0),
            })
            .collect()
    }

    #[test]
    fn metric_examples() {
        let zero = metrics(&pairs_with_errors(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!((zero.mae_m, zero.rmse_m, zero.mte_m), (0.0, 0.0, 0.0));
        let one = metrics(&pairs_with_errors(&[1.0; 5])).unwrap();
        assert_eq!((one.mae_m, one.rmse_m, one.mte_m), (1.0, 1.0, 1.0));
        let r = metrics(&pairs_with_errors(&[0.0, 3.0, 4.0])).unwrap();
        assert!((r.mae_m - 7.0 / 3.0).abs() < 1e-15);
        assert!((r.rmse_m - (25.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(r.mte_m, 4.0);
        assert!(metrics(&[]).is_err());
    }

    #[test]
    fn association_examples() {
        let gt = line(20, 0.1);
        let same = associate(&gt, &gt).unwrap();
        assert_eq!((same.pairs.len(), same.dropped), (20, 0));

        let fast: Vec<_> = (0..40).map(|i| sample(i, i as f64 * 0.05 + 0.001, 0.0, 0.0, 0.0, 0.0)).collect();
        let a = associate(&fast, &gt).unwrap();
        assert_eq!(a.pairs.len(), 20);
        for p in &a.pairs {
            assert!((p.est.t - p.gt.t).abs() < 0.025);
        }

        let later: Vec<_> = (0..5).map(|i| sample(i, 100.0 + i as f64, 0.0, 0.0, 0.0, 0.0)).collect();
        assert_eq!(associate(&later, &gt).unwrap_err(), Error::EmptyOverlap);
        let mut bad = gt.clone();
        bad[3].t = bad[2].t;
        assert!(associate(&bad, &gt).is_err());
    }

    #[test]
    fn rigid_alignment_recovers_rotation() {
        let gt: Vec<_> = (0..30)
            .map(|i| {
                let t = i as f64 * 0.2;
                sample(i, t, 3.0 * t.cos() + t, 2.0 * t.sin(), 0.1 * t, 0.0)
            })
            .collect();
        let est: Vec<_> = gt
            .iter()
            .map(|s| TrajectorySample {
                x: -s.y + 1.0,
                y: s.x - 2.0,
                z: s.z + 0.5,
                yaw: wrap_pi(s.yaw + PI / 2.0),
                ..*s
            })
            .collect();
        let pairs = associate(&est, &gt).unwrap().pairs;
        let tf = fit_transform(&pairs, AlignMode::RigidLsq).unwrap();
        assert!((tf.yaw + PI / 2.0).abs() < 1e-12);
        let r = metrics(&align(&pairs, AlignMode::RigidLsq).unwrap()).unwrap();
        assert!(r.mte_m < 1e-9);

        let id = fit_transform(&associate(&gt, &gt).unwrap().pairs, AlignMode::RigidLsq).unwrap();
        assert!(id.yaw.abs() < 1e-12 && id.t.iter().all(|v| v.abs() < 1e-12));
        assert!(fit_transform(&pairs[..1], AlignMode::RigidLsq).is_err());
        let still: Vec<_> = pairs.iter().map(|p| Pair { est: sample(0, 0.0, 1.0, 1.0, 0.0, 0.0), gt: p.gt }).collect();
        assert!(matches!(fit_transform(&still, AlignMode::RigidLsq), Err(Error::Degenerate(_))));
    }

    #[test]
    fn first_pose_alignment() {
        let gt = line(10, 1.0);
        let est: Vec<_> = gt
            .iter()
            .map(|s| TrajectorySample { x: s.y + 5.0, y: -s.x, yaw: wrap_pi(s.yaw - PI / 2.0), ..*s })
            .collect();
        let r = evaluate(&est, &gt, AlignMode::FirstPose).unwrap();
        assert!(r.mte_m < 1e-12, "{}", r.mte_m);
        assert_eq!(r.alignment, AlignMode::FirstPose);
        let same = evaluate(&gt, &gt, AlignMode::FirstPose).unwrap();
        assert_eq!(same.mte_m, 0.0);
        assert!((same.traveled_distance_m - 9.0 * 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let labels: Vec<f64> = (0..50).flat_map(|i| {
            let a = i as f64 * 0.2 - 5.0;
            [a.sin(), a.cos()]
        }).collect();
        let same = fidelity(&labels, &labels, 1, FIDELITY_TOLERANCE).unwrap();
        assert_eq!((same[0].mean, same[0].max, same[0].within), (0.0, 0.0, 1.0));

        let off = PI / 74.0;
        let shifted: Vec<f64> = (0..50).flat_map(|i| {
            let a = i as f64 * 0.2 - 5.0 + off;
            [3.0 * a.sin(), 3.0 * a.cos()]
        }).collect();
        let f = fidelity(&shifted, &labels, 1, FIDELITY_TOLERANCE).unwrap();
        assert!((f[0].mean - off).abs() < 1e-12 && (f[0].max - off).abs() < 1e-12);
        assert_eq!(f[0].within, 1.0);
        assert!(fidelity(&labels[2..], &labels, 1, 0.1).is_err());
    }

    fn arb_traj() -> impl Strategy<Value = Vec<(f64, f64, f64, f64, f64, f64)>> {
        prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -1.0f64..1.0, -5.0f64..5.0, -5.0f64..5.0, -1.0f64..1.0), 3..40)
    }

    fn build(v: &[(f64, f64, f64, f64, f64, f64)]) -> Vec<Pair> {
        v.iter()
            .enumerate()
            .map(|(i, &(a, b, c, d, e, f))| Pair {
                est: sample(i as u64, i as f64, a, b, c, 0.0),
                gt: sample(i as u64, i as f64, d, e, f, 0.0),
            })
            .collect()
    }

    proptest! {
        #[test]
        fn metric_ordering(v in arb_traj()) {
            let r = metrics(&build(&v)).unwrap();
            prop_assert!(r.mae_m <= r.rmse_m && r.rmse_m <= r.mte_m);
        }

        #[test]
        fn rigid_never_worse(v in arb_traj()) {
            let pairs = build(&v);
            let before = metrics(&pairs).unwrap().rmse_m;
            if let Ok(aligned) = align(&pairs, AlignMode::RigidLsq) {
                prop_assert!(metrics(&aligned).unwrap().rmse_m <= before + 1e-9);
            }
        }

        #[test]
        fn fidelity_scale_invariant(angles in prop::collection::vec(-3.0f64..3.0, 1..30), s in 0.01f64..50.0) {
            let oracle: Vec<f64> = angles.iter().flat_map(|a| [a.sin(), a.cos()]).collect();
            let rep: Vec<f64> = angles.iter().flat_map(|a| [(a + 0.05).sin(), (a + 0.05).cos()]).collect();
            let scaled: Vec<f64> = rep.iter().map(|v| v * s).collect();
            let a = fidelity(&rep, &oracle, 1, 0.1).unwrap()[0];
            let b = fidelity(&scaled, &oracle, 1, 0.1).unwrap()[0];
            prop_assert!((a.mean - b.mean).abs() < 1e-12 && (a.max - b.max).abs() < 1e-12);
        }
    }

    #[test]
    fn downsampling_keeps_order() {
        let t = line(10, 1.0);
        let d = downsample(&t, &[0, 3, 9, 42]);
        assert_eq!(d.iter().map(|s| s.frame).collect::<Vec<_>>(), vec![0, 3, 9]);
    }
}
