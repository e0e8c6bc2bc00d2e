use cannpi_core::angle::circular_distance;
use cannpi_core::cann::CannParams;
use cannpi_core::encoding::{decode_label, encode_angle};
use cannpi_core::eval::{evaluate, AlignMode};
use cannpi_core::graph::{ExperienceGraph, GraphParams};
use cannpi_core::pi::{bias_cues, integrate_stream, IdealCells, PiSession, RingScale, SquareLoop};
use cannpi_core::replica::{forward_sequence, ReplicaArchitecture, ReplicaWeights};
use cannpi_core::trajgen::{build_dataset, DatasetPlan, Split, Symmetry};
use proptest::prelude::*;

#[test]
fn ideal_loop_closes_through_the_graph() {
    let clean = SquareLoop::default().cues();
    let gt = integrate_stream(&clean).unwrap();
    let cues = bias_cues(&clean, 0.01, 0.002);
    let mut session = PiSession::new(IdealCells, RingScale { l_xy: 40.0, l_z: 10.0 }).unwrap();
    let mut graph = ExperienceGraph::new(GraphParams::default()).unwrap();
    let mut raw = Vec::new();
    for (i, c) in cues.iter().enumerate() {
        let f = session.step(c).unwrap();
        graph.observe(i as u64, f.t, &f.joint.ring, f.odometry);
        raw.push(f.odometry);
    }
    let corrected = graph.export_trajectory().unwrap();
    let end = raw.last().unwrap();
    let raw_gap = end.x.hypot(end.y);
    let gap = corrected[0].distance(corrected.last().unwrap());
    assert!(gap <= 0.5 * raw_gap, "{gap} vs {raw_gap}");
    assert!(graph.links.len() == graph.nodes.len(), "one closing link");
    let r = evaluate(&corrected, &gt, AlignMode::RigidLsq).unwrap();
    assert!(r.mae_m <= r.rmse_m && r.rmse_m <= r.mte_m);
}

#[test]
fn dataset_labels_follow_their_stimuli() {
    let plan = DatasetPlan { train_count: 4, val_count: 1, test_count: 0, train_length: 120, ..DatasetPlan::default() };
    let data = build_dataset(&plan, &CannParams::ring(37), &[Split::Train, Split::Val]).unwrap();
    assert_eq!(data.len(), 5);
    for seq in &data {
        let worst = seq
            .inputs
            .iter()
            .zip(&seq.labels)
            .map(|(x, l)| circular_distance(x[0], decode_label(l[0], l[1]).unwrap()))
            .fold(0.0, f64::max);
        assert!(worst < 0.3, "seed {}: {worst}", seq.seed);
        let moved = Symmetry { mirror: [true, false, false], shift: [9, 0, 0], ..Symmetry::IDENTITY }.apply(seq, 37).unwrap();
        assert_eq!(moved.len(), seq.len());
    }
}

#[test]
fn untrained_replica_runs_on_encoded_input() {
    let w = ReplicaWeights::<f32>::init(ReplicaArchitecture::hdcn(), 1).unwrap();
    let xs: Vec<f32> = (0..10).flat_map(|i| encode_angle(0.3 * i as f64, 37).unwrap().v).map(|v| v as f32).collect();
    let ys = forward_sequence(&w, &xs).unwrap();
    assert_eq!(ys.len(), 20);
    assert!(ys.iter().all(|v| v.is_finite()));
}

proptest! {
    #[test]
    fn encoding_is_periodic(theta in -10.0f64..10.0) {
        let a = encode_angle(theta, 37).unwrap().v;
        let b = encode_angle(theta + std::f64::consts::TAU, 37).unwrap().v;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
