use super::*;
use crate::angle::{circular_distance, wrap_pi, PI, TAU};
use crate::rng::SplitMix64;
use alloc::vec::Vec;
use proptest::prelude::*;

fn ring() -> CannParams {
    CannParams::ring(37)
}

#[test]
fn drive_examples() {
    let mut p = ring();
    p.a_ext = 10.0;
    p.b_ext = 1.0;
    let h = p.spacing();
    let i = external_input(&p, &[5.0 * h]).unwrap();
    assert!((i[5] - 10.0).abs() < 1e-12);
    let max = i.iter().cloned().fold(f64::MIN, f64::max);
    assert_eq!(max, i[5]);

    // One neuron sits exactly 1 rad and one π away from these stimuli.
    let one = external_input(&p, &[1.0]).unwrap();
    assert!((one[0] - 10.0 * (-1.0f64).exp()).abs() < 1e-12);
    assert!((one[0] - 3.6788).abs() < 1e-4);
    let far = CannParams::ring(2 * 18 + 2);
    let mut far = far;
    far.a_ext = 10.0;
    far.b_ext = 1.0;
    let v = external_input(&far, &[PI]).unwrap();
    assert!((v[0] - 10.0 * (-PI * PI).exp()).abs() < 1e-15);
    assert!((v[0] - 5.17e-4).abs() < 1e-6);

    assert!(matches!(
        external_input(&p, &[f64::NAN]),
        Err(Error::InputDomain(_))
    ));
    assert!(external_input(&p, &[0.0, 0.0]).is_err());
}

#[test]
fn drive_on_torus_uses_euclidean_circular_distance() {
    let p = CannParams::torus(9);
    let ext = [0.3, 6.0, 3.0];
    let i = external_input(&p, &ext).unwrap();
    let state = BumpState::zeros(&p);
    for (idx, v) in i.iter().enumerate() {
        let pref = state.prefs_of(idx);
        let d2: f64 = (0..3)
            .map(|a| circular_distance(ext[a], pref[a]).powi(2))
            .sum();
        assert!((v - p.a_ext * (-p.b_ext * d2).exp()).abs() < 1e-12);
    }
}

#[test]
fn rate_examples() {
    let p = ring();
    assert!(firing_rates(&p, &[0.0; 37]).iter().all(|&r| r == 0.0));
    assert!(firing_rates(&p, &[-1.0; 37]).iter().all(|&r| r == 0.0));
    let mut q = ring();
    q.k = 0.5;
    q.rho = 1.0;
    let r = firing_rates(&q, &[2.0, 0.0, -3.0]);
    assert!((r[0] - 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(&r[1..], &[0.0, 0.0]);
}

proptest! {
    #[test]
    fn rates_bounded(u in proptest::collection::vec(-50.0f64..50.0, 37)) {
        let p = ring();
        let r = firing_rates(&p, &u);
        prop_assert!(r.iter().all(|&v| v >= 0.0));
        let total: f64 = r.iter().sum();
        prop_assert!(total <= 1.0 / (p.k * p.rho) * (1.0 + 1e-12));
    }
}

#[test]
fn decoupled_fixed_point() {
    let mut p = ring();
    p.j0 = 0.0;
    let mut cann = Cann::new_unchecked(p.clone());
    let mut s = cann.zero_state();
    let drive = vec![2.5; 37];
    cann.settle(&mut s, &drive, 2000).unwrap();
    assert!(s.u.iter().all(|&u| (u - 2.5).abs() < 1e-9));
}

#[test]
fn zero_stays_zero() {
    for p in [ring(), CannParams::torus(7)] {
        let mut cann = Cann::new(p.clone()).unwrap();
        let mut s = cann.zero_state();
        let zero = vec![0.0; p.neuron_count()];
        cann.settle(&mut s, &zero, 5).unwrap();
        assert!(s.u.iter().chain(&s.r).all(|&v| v == 0.0));
    }
}

/// Straight-line Euler step with the pairwise weight matrix.
fn dense_euler(p: &CannParams, s: &BumpState, drive: &[f64]) -> Vec<f64> {
    let count = p.neuron_count();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let pi = s.prefs_of(i);
        let mut rec = 0.0;
        for j in 0..count {
            let pj = s.prefs_of(j);
            let delta: Vec<f64> = (0..p.dims).map(|a| pi[a] - pj[a]).collect();
            rec += kernel_value(p, &delta) * s.r[j];
        }
        out.push(s.u[i] + p.dt / p.tau * (-s.u[i] + p.rho * rec + drive[i]));
    }
    out
}

#[test]
fn one_step_matches_dense_euler() {
    for p in [CannParams::ring(9), CannParams::torus(5)] {
        let mut rng = SplitMix64::new(3);
        let count = p.neuron_count();
        let mut s = BumpState::zeros(&p);
        s.u = (0..count).map(|_| rng.uniform(-0.1, 0.5)).collect();
        s.r = firing_rates(&p, &s.u);
        let drive: Vec<f64> = (0..count).map(|_| rng.uniform(0.0, 1.0)).collect();
        let expect = dense_euler(&p, &s, &drive);
        let next = step(&p, &s, &drive).unwrap();
        for (a, b) in next.u.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        assert_eq!(next.r, firing_rates(&p, &next.u));
    }
}

#[test]
fn step_rejects_bad_geometry() {
    let mut cann = Cann::new(ring()).unwrap();
    let mut s = cann.zero_state();
    assert!(matches!(
        cann.step(&mut s, &[0.0; 36]),
        Err(Error::Shape { .. })
    ));
    let mut small = BumpState::zeros(&CannParams::ring(9));
    assert!(cann.step(&mut small, &[0.0; 37]).is_err());
}

#[test]
fn decode_1d_examples() {
    let mut u = vec![0.0; 37];
    u[5] = 1.0;
    let d = decode_1d(&u, 37).unwrap();
    assert!((d.theta - TAU * 5.0 / 37.0).abs() < 1e-12);
    assert!((d.y - 5.0).abs() < 1e-12);

    assert_eq!(decode_1d(&[1.0; 37], 37), Err(Error::ZeroActivity));
    assert_eq!(decode_1d(&[0.0; 37], 37), Err(Error::ZeroActivity));

    let mut u = vec![0.0; 37];
    u[10] = 0.7;
    u[11] = 0.7;
    assert!((decode_1d(&u, 37).unwrap().y - 10.5).abs() < 1e-12);

    // Past the half-way index the angle is negative but y stays in [0, n).
    let mut u = vec![0.0; 37];
    u[30] = 1.0;
    let d = decode_1d(&u, 37).unwrap();
    assert!(d.theta < 0.0);
    assert!((d.y - 30.0).abs() < 1e-12);
}

#[test]
fn reduce_examples() {
    let n = 5;
    let mut u = vec![0.0; n * n * n];
    u[(3 * n + 2) * n + 1] = 1.0; // x=1, y=2, z=3
    let r = reduce_3d(&u, n).unwrap();
    assert_eq!(r.sx, [0.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(r.sy, [0.0, 0.0, 1.0, 0.0, 0.0]);
    assert_eq!(r.sz, [0.0, 0.0, 0.0, 1.0, 0.0]);

    let r = reduce_3d(&[1.0; 27], 3).unwrap();
    assert_eq!(r.sx, [9.0; 3]);
    assert_eq!(r.sy, [9.0; 3]);
    assert_eq!(r.sz, [9.0; 3]);
    assert!(reduce_3d(&[1.0; 26], 3).is_err());
}

fn separable(n: usize, f: &[f64], g: &[f64], h: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; n * n * n];
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                u[(z * n + y) * n + x] = f[x] * g[y] * h[z];
            }
        }
    }
    u
}

#[test]
fn separable_reduction_is_proportional() {
    let n = 9;
    let mut rng = SplitMix64::new(11);
    let f: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let g: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let h: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let u = separable(n, &f, &g, &h);
    let r = reduce_3d(&u, n).unwrap();
    // Brute-force sums over the other two axes.
    let gs: f64 = g.iter().sum();
    let hs: f64 = h.iter().sum();
    for x in 0..n {
        let mut brute = 0.0;
        for z in 0..n {
            for y in 0..n {
                brute += u[(z * n + y) * n + x];
            }
        }
        assert!((r.sx[x] - brute).abs() < 1e-12);
        assert!((r.sx[x] - f[x] * gs * hs).abs() < 1e-12);
    }
    let total: f64 = u.iter().sum();
    for axis in r.axes() {
        assert!((axis.iter().sum::<f64>() - total).abs() < 1e-10);
    }
}

fn periodic_gaussian(n: usize, centre: f64, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            (-3..=3)
                .map(|k| {
                    let d = i as f64 - centre + (k * n as i32) as f64;
                    (-d * d / (2.0 * sigma * sigma)).exp()
                })
                .sum()
        })
        .collect()
}

#[test]
fn decode_3d_examples() {
    let n = 37;
    let mut u = vec![0.0; n * n * n];
    u[(7 * n + 6) * n + 5] = 1.0;
    let d = decode_3d(&u, n).unwrap();
    for (got, want) in d.coords().iter().zip([5.0, 6.0, 7.0]) {
        assert!((got - want).abs() < 1e-9);
    }
    assert_eq!(decode_3d(&vec![1.0; n * n * n], n), Err(Error::ZeroActivity));

    let centre = [10.5, 2.0, 30.25];
    let u = separable(
        n,
        &periodic_gaussian(n, centre[0], 2.0),
        &periodic_gaussian(n, centre[1], 2.0),
        &periodic_gaussian(n, centre[2], 2.0),
    );
    let d = decode_3d(&u, n).unwrap();
    for (got, want) in d.coords().iter().zip(centre) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    let c = d.components();
    assert_eq!(c[0], d.axes[0].num);
    assert_eq!(c[5], d.axes[2].den);
}

#[test]
fn reconstruction_examples() {
    let n = 9;
    let onehot = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 2.0;
        v
    };
    let red = AxisReduction {
        sx: onehot(1),
        sy: onehot(4),
        sz: onehot(8),
    };
    let vol = reconstruct_bump(&red).unwrap();
    for (i, v) in vol.iter().enumerate() {
        let expect = if i == (8 * n + 4) * n + 1 { 2.0 } else { 0.0 };
        assert!((v - expect).abs() < 1e-15);
    }

    let mut rng = SplitMix64::new(5);
    let f: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let g: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let h: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let u = separable(n, &f, &g, &h);
    let rec = reconstruct_bump(&reduce_3d(&u, n).unwrap()).unwrap();
    for (a, b) in rec.iter().zip(&u) {
        assert!((a - b).abs() < 1e-12);
    }

    let uniform = AxisReduction {
        sx: vec![3.0; n],
        sy: vec![3.0; n],
        sz: vec![3.0; n],
    };
    let vol = reconstruct_bump(&uniform).unwrap();
    assert!(vol.iter().all(|&v| (v - vol[0]).abs() < 1e-15));
    assert!((vol.iter().sum::<f64>() - 27.0).abs() < 1e-9);

    let zero = AxisReduction {
        sx: vec![0.0; n],
        sy: vec![0.0; n],
        sz: vec![0.0; n],
    };
    assert_eq!(reconstruct_bump(&zero), Err(Error::ZeroActivity));
}

#[test]
fn empty_sequence_gives_no_labels() {
    assert!(run_cann_sequence(&ring(), &[Vec::new()]).unwrap().is_empty());
    assert!(run_cann_sequence(&ring(), &[]).is_err());
}

fn label_angle(l: &[f64]) -> f64 {
    crate::angle::atan2_pi(l[0], l[1])
}

#[test]
fn constant_stimulus_settles_on_target() {
    let p = ring();
    for &s in &[-3.0, -1.234, 0.0, 0.77, 3.1] {
        let labels = run_cann_sequence(&p, &[vec![s; 1000]]).unwrap();
        let last = label_angle(labels.last().unwrap());
        assert!(circular_distance(last, s) < PI / 37.0);
    }
}

#[test]
fn bump_tracks_within_thousand_steps() {
    let p = ring();
    let mut rng = SplitMix64::new(8);
    for _ in 0..10 {
        let s = rng.uniform(-PI, PI);
        let mut cann = Cann::new(p.clone()).unwrap();
        let mut state = cann.zero_state();
        let drive = external_input(&p, &[crate::angle::wrap_tau(s)]).unwrap();
        let bound = 1.0 / (p.k * p.rho);
        for _ in 0..1000 {
            cann.step(&mut state, &drive).unwrap();
            assert!(state.r.iter().sum::<f64>() <= bound);
        }
        let theta = decode_1d(&state.u, 37).unwrap().theta;
        assert!(circular_distance(theta, s) < PI / 37.0);
    }
}

#[test]
fn slow_ramp_is_monotone() {
    let p = ring();
    let ramp: Vec<f64> = (0..600).map(|t| -2.5 + 0.008 * t as f64).collect();
    let labels = run_cann_sequence(&p, &[ramp]).unwrap();
    let mut prev = label_angle(&labels[0]);
    for l in &labels[1..] {
        let a = label_angle(l);
        assert!(wrap_pi(a - prev) >= 0.0);
        prev = a;
    }
}

#[test]
fn wraparound_has_no_jumps() {
    let p = ring();
    // Crosses the 0/2π seam of the neuron preferences and the ±π seam of the decode.
    let ramp: Vec<f64> = (0..400).map(|t| -0.8 + 0.02 * t as f64).collect();
    let mut prev: Option<f64> = None;
    run_cann_sequence_with(&p, &[ramp], |_, s| {
        let a = decode_1d(&s.u, 37).unwrap().theta;
        if let Some(b) = prev {
            assert!(circular_distance(a, b) < 0.2);
        }
        prev = Some(a);
    })
    .unwrap();
}

#[test]
fn rotation_equivariance() {
    let p = ring();
    let h = p.spacing();
    let s0 = 0.4;
    let base = run_cann_sequence_with(&p, &[vec![s0; 30]], |_, _| {});
    let mut a = Vec::new();
    let mut b = Vec::new();
    base.unwrap();
    run_cann_sequence_with(&p, &[vec![s0; 30]], |t, s| {
        if t == 29 {
            a = s.u.clone();
        }
    })
    .unwrap();
    run_cann_sequence_with(&p, &[vec![s0 + h; 30]], |t, s| {
        if t == 29 {
            b = s.u.clone();
        }
    })
    .unwrap();
    for i in 0..37 {
        let shifted = b[(i + 1) % 37];
        assert!((a[i] - shifted).abs() < 1e-9 * a[i].abs().max(1.0));
    }
}

#[test]
fn torus_tracks_and_labels_have_six_components() {
    let p = CannParams::torus(9);
    let target = [1.0, -2.0, 3.0];
    let axes: Vec<Vec<f64>> = target.iter().map(|&v| vec![v; 100]).collect();
    let labels = run_cann_sequence(&p, &axes).unwrap();
    assert!(labels.iter().all(|l| l.len() == 6));
    let last = labels.last().unwrap();
    for (a, &t) in target.iter().enumerate() {
        let got = crate::angle::atan2_pi(last[2 * a], last[2 * a + 1]);
        assert!(circular_distance(got, t) < PI / 9.0, "axis {a}: {got} vs {t}");
    }
}

#[test]
fn linear_kernel_mode_runs() {
    let mut p = CannParams::torus(5);
    p.kernel_exponent = KernelExponent::Linear;
    let labels = run_cann_sequence(&p, &[vec![0.5; 5], vec![1.0; 5], vec![2.0; 5]]).unwrap();
    assert_eq!(labels.len(), 5);
}
