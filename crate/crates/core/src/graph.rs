//! Spatial-experience graph with iterative relaxation.
//!
//! Each observation scores every node against the current decoded ring coordinates
//!
//! ```text
//! S_i = μ_gc · Σ_k d(P_gc,k, P_gc,i,k) + μ_hdc · Σ_k d(P_hdc,k, P_hdc,i,k),   d(a, b) = min(|a − b|, 2π − |a − b|)
//! ```
//!
//! and activates the best node if its score is under the threshold. Otherwise a node
//! is created at the active node's pose plus the integrator displacement since that
//! node became active, linked from it. Re-entering a different existing node that
//! has no link to the active one adds a loop-closure link carrying the integrator
//! displacement.
//!
//! Relaxation moves every node simultaneously. For each link touching node `i`,
//! with `P_o` the other endpoint and `δ` the stored increment oriented from `i`
//! toward `o`:
//!
//! ```text
//! ΔP_i = α · Σ_links (P_o − P_i − δ)
//! ```
//!
//! Yaw residuals and yaw results are wrapped to `(−π, π]`.

use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::angle::{circular_distance, wrap_pi, wrap_tau};
use crate::eval::TrajectorySample;
use crate::pi::{Pose, RingDecode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphParams {
    pub mu_gc: f64,
    pub mu_hdc: f64,
    pub score_threshold: f64,
    pub alpha: f64,
    pub relax_iterations: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            mu_gc: 0.5,
            mu_hdc: 0.5,
            score_threshold: 0.25,
            alpha: 0.5,
            relax_iterations: 20,
        }
    }
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        let weights_ok = self.mu_gc >= 0.0 && self.mu_hdc >= 0.0 && self.mu_gc + self.mu_hdc > 0.0;
        if !weights_ok || !(self.alpha > 0.0 && self.alpha <= 1.0) || !(self.score_threshold >= 0.0) {
            return Err(Error::InvalidParams("graph weights, threshold or correction rate out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperienceNode {
    pub id: usize,
    /// Grid-cell ring coordinates in `[0, 2π)`.
    pub p_gc: [f64; 3],
    /// Head-direction ring coordinates (yaw, height) in `[0, 2π)`.
    pub p_hdc: [f64; 2],
    /// World pose `[x, y, z, yaw]`.
    pub p_exp: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionLink {
    pub from: usize,
    pub to: usize,
    pub delta: [f64; 4],
    pub delta_d: f64,
}

impl TransitionLink {
    fn new(from: usize, to: usize, delta: [f64; 4]) -> Self {
        let delta_d = Float::sqrt(delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2]);
        Self { from, to, delta, delta_d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub frame: u64,
    pub t: f64,
    pub node: usize,
}

/// Metric score between decoded ring coordinates and a node.
pub fn match_score(decode: &RingDecode, node: &ExperienceNode, params: &GraphParams) -> f64 {
    let gc: f64 = decode.gc.iter().zip(&node.p_gc).map(|(&a, &b)| circular_distance(a, b)).sum();
    let hdc: f64 = decode.hdc.iter().zip(&node.p_hdc).map(|(&a, &b)| circular_distance(a, b)).sum();
    params.mu_gc * gc + params.mu_hdc * hdc
}

fn pose_delta(from: Pose, to: Pose) -> [f64; 4] {
    [to.x - from.x, to.y - from.y, to.z - from.z, wrap_pi(to.yaw - from.yaw)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperienceGraph {
    pub params: GraphParams,
    pub nodes: Vec<ExperienceNode>,
    pub links: Vec<TransitionLink>,
    pub activation_log: Vec<Activation>,
    active: Option<usize>,
    /// Integrator pose when the active node became active.
    anchor: Pose,
}

impl ExperienceGraph {
    pub fn new(params: GraphParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            nodes: Vec::new(),
            links: Vec::new(),
            activation_log: Vec::new(),
            active: None,
            anchor: Pose::default(),
        })
    }

    pub fn active(&self) -> Option<usize> {
        self.active
    }

    fn linked(&self, a: usize, b: usize) -> bool {
        self.links.iter().any(|l| (l.from == a && l.to == b) || (l.from == b && l.to == a))
    }

    fn push_node(&mut self, decode: &RingDecode, p_exp: [f64; 4]) -> usize {
        let id = self.nodes.len();
        self.nodes.push(ExperienceNode {
            id,
            p_gc: decode.gc.map(wrap_tau),
            p_hdc: decode.hdc.map(wrap_tau),
            p_exp,
        });
        id
    }

    /// Best-scoring node and its score.
    pub fn best_match(&self, decode: &RingDecode) -> Option<(usize, f64)> {
        self.nodes
            .iter()
            .map(|n| (n.id, match_score(decode, n, &self.params)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Feeds one frame and returns the active node.
    pub fn observe(&mut self, frame: u64, t: f64, decode: &RingDecode, odometry: Pose) -> usize {
        let node = match self.active {
            None => {
                self.anchor = odometry;
                self.push_node(decode, odometry.as_array())
            }
            Some(current) => {
                let best = self.best_match(decode);
                match best {
                    Some((id, score)) if score < self.params.score_threshold => {
                        if id != current {
                            if !self.linked(current, id) {
                                let delta = pose_delta(self.anchor, odometry);
                                self.links.push(TransitionLink::new(current, id, delta));
                                self.relax();
                            }
                            self.anchor = odometry;
                        }
                        id
                    }
                    _ => {
                        let delta = pose_delta(self.anchor, odometry);
                        let base = self.nodes[current].p_exp;
                        let p_exp = [
                            base[0] + delta[0],
                            base[1] + delta[1],
                            base[2] + delta[2],
                            wrap_pi(base[3] + delta[3]),
                        ];
                        let id = self.push_node(decode, p_exp);
                        self.links.push(TransitionLink::new(current, id, delta));
                        self.anchor = odometry;
                        self.relax();
                        id
                    }
                }
            }
        };
        self.active = Some(node);
        self.activation_log.push(Activation { frame, t, node });
        node
    }

    /// One Jacobi round; returns the largest correction norm. Each node's summed
    /// residual is divided by its link count, so the round is a contraction for
    /// any `α ≤ 1` whatever the node degrees.
    pub fn relax_round(&mut self) -> f64 {
        let alpha = self.params.alpha;
        let mut corr = alloc::vec![[0.0f64; 4]; self.nodes.len()];
        let mut degree = alloc::vec![0usize; self.nodes.len()];
        for l in &self.links {
            degree[l.from] += 1;
            degree[l.to] += 1;
        }
        for l in &self.links {
            let (a, b) = (self.nodes[l.from].p_exp, self.nodes[l.to].p_exp);
            let mut r = [0.0; 4];
            for k in 0..3 {
                r[k] = b[k] - a[k] - l.delta[k];
            }
            r[3] = wrap_pi(b[3] - a[3] - l.delta[3]);
            for k in 0..4 {
                corr[l.from][k] += alpha * r[k];
                corr[l.to][k] -= alpha * r[k];
            }
        }
        let mut max = 0.0f64;
        for ((n, c), &d) in self.nodes.iter_mut().zip(&mut corr).zip(&degree) {
            if d > 1 {
                c.iter_mut().for_each(|v| *v /= d as f64);
            }
            for k in 0..3 {
                n.p_exp[k] += c[k];
            }
            n.p_exp[3] = wrap_pi(n.p_exp[3] + c[3]);
            max = max.max(Float::sqrt(c.iter().map(|v| v * v).sum::<f64>()));
        }
        max
    }

    /// `relax_iterations` rounds; returns the final round's largest correction.
    pub fn relax(&mut self) -> f64 {
        let mut max = 0.0;
        for _ in 0..self.params.relax_iterations {
            max = self.relax_round();
        }
        max
    }

    /// Signed residual `P_to − P_from − δ` of a link.
    pub fn link_residual(&self, link: usize) -> [f64; 4] {
        let l = &self.links[link];
        let (a, b) = (self.nodes[l.from].p_exp, self.nodes[l.to].p_exp);
        [
            b[0] - a[0] - l.delta[0],
            b[1] - a[1] - l.delta[1],
            b[2] - a[2] - l.delta[2],
            wrap_pi(b[3] - a[3] - l.delta[3]),
        ]
    }

    /// Per-frame pose of the node active at that frame, using current node poses.
    pub fn export_trajectory(&self) -> Result<Vec<TrajectorySample>> {
        if self.activation_log.is_empty() {
            return Err(Error::InputDomain("activation log is empty".into()));
        }
        Ok(self.activation_log.iter().map(|a| self.sample(a)).collect())
    }

    /// Frames at which the active node changed, starting with the first frame.
    pub fn keyframes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut last = None;
        for (i, a) in self.activation_log.iter().enumerate() {
            if last != Some(a.node) {
                out.push(i);
                last = Some(a.node);
            }
        }
        out
    }

    fn sample(&self, a: &Activation) -> TrajectorySample {
        let p = self.nodes[a.node].p_exp;
        TrajectorySample {
            frame: a.frame,
            t: a.t,
            x: p[0],
            y: p[1],
            z: p[2],
            yaw: p[3],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::{PI, TAU};
    use alloc::vec;
    use proptest::prelude::*;

    fn decode(gc: [f64; 3], hdc: [f64; 2]) -> RingDecode {
        RingDecode { gc, hdc }
    }

    fn node(p_gc: [f64; 3], p_hdc: [f64; 2]) -> ExperienceNode {
        ExperienceNode {
            id: 0,
            p_gc,
            p_hdc,
            p_exp: [0.0; 4],
        }
    }

    #[test]
    fn score_examples() {
        let p = GraphParams::default();
        let d = decode([0.1, 0.2, 0.3], [1.0, 2.0]);
        assert_eq!(match_score(&d, &node([0.1, 0.2, 0.3], [1.0, 2.0]), &p), 0.0);

        let gc_only = GraphParams { mu_gc: 1.0, mu_hdc: 0.0, ..p };
        let s = match_score(&decode([0.1, 0.0, 0.0], [0.0; 2]), &node([0.0, 0.1, 0.0], [3.0, 3.0]), &gc_only);
        assert!((s - 0.2).abs() < 1e-15);

        let s = match_score(&decode([0.1, 0.1, 0.0], [0.2, 0.2]), &node([0.0; 3], [0.0; 2]), &p);
        assert!((s - 0.3).abs() < 1e-15);

        // Wrapped differences: 0.05 and 2π − 0.05 are 0.1 apart.
        let s = match_score(&decode([0.05, 0.0, 0.0], [0.0; 2]), &node([TAU - 0.05, 0.0, 0.0], [0.0; 2]), &gc_only);
        assert!((s - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ExperienceGraph::new(GraphParams { mu_gc: 0.0, mu_hdc: 0.0, ..Default::default() }).is_err());
        assert!(ExperienceGraph::new(GraphParams { alpha: 0.0, ..Default::default() }).is_err());
        assert!(ExperienceGraph::new(GraphParams { alpha: 1.5, ..Default::default() }).is_err());
    }

    #[test]
    fn observation_examples() {
        let mut g = ExperienceGraph::new(GraphParams::default()).unwrap();
        let origin = decode([0.0; 3], [0.0; 2]);
        assert_eq!(g.observe(0, 0.0, &origin, Pose::default()), 0);
        assert!(g.links.is_empty());
        assert_eq!(g.observe(1, 0.1, &origin, Pose::default()), 0);
        assert_eq!(g.nodes.len(), 1);

        let far = decode([1.0, 0.0, 0.0], [0.0; 2]);
        let vo = Pose { x: 1.5, y: -0.5, z: 0.25, yaw: 0.1 };
        assert_eq!(g.observe(2, 0.2, &far, vo), 1);
        assert_eq!(g.nodes[1].p_exp, [1.5, -0.5, 0.25, 0.1]);
        assert_eq!(g.links.len(), 1);
        assert!((g.links[0].delta_d - (1.5f64 * 1.5 + 0.25 + 0.0625).sqrt()).abs() < 1e-15);
        assert_eq!(g.keyframes(), vec![0, 2]);

        let traj = g.export_trajectory().unwrap();
        assert_eq!(traj.len(), 3);
        assert_eq!((traj[1].x, traj[2].x), (0.0, 1.5));
        assert!(ExperienceGraph::new(GraphParams::default()).unwrap().export_trajectory().is_err());
    }

    #[test]
    fn single_node_trajectory_is_constant() {
        let mut g = ExperienceGraph::new(GraphParams::default()).unwrap();
        for i in 0..10 {
            g.observe(i, i as f64, &decode([0.01; 3], [0.0; 2]), Pose { x: 0.001 * i as f64, ..Pose::default() });
        }
        let t = g.export_trajectory().unwrap();
        assert!(t.iter().all(|s| s.x == t[0].x && s.y == t[0].y));
    }

    #[test]
    fn chain_visits_in_order() {
        let mut g = ExperienceGraph::new(GraphParams::default()).unwrap();
        for i in 0..6 {
            let x = i as f64;
            g.observe(i, x, &decode([x, 0.0, 0.0], [0.0; 2]), Pose { x, ..Pose::default() });
        }
        let t = g.export_trajectory().unwrap();
        assert_eq!(t.iter().map(|s| s.x).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    fn two_nodes(alpha: f64, mismatch: [f64; 4]) -> ExperienceGraph {
        let params = GraphParams { alpha, relax_iterations: 0, ..Default::default() };
        let mut g = ExperienceGraph::new(params).unwrap();
        g.nodes.push(node([0.0; 3], [0.0; 2]));
        g.nodes.push(ExperienceNode { id: 1, p_exp: [1.0, 2.0, 3.0, 0.5], ..node([0.0; 3], [0.0; 2]) });
        let delta = [1.0 - mismatch[0], 2.0 - mismatch[1], 3.0 - mismatch[2], 0.5 - mismatch[3]];
        g.links.push(TransitionLink::new(0, 1, delta));
        g
    }

    #[test]
    fn two_node_round() {
        let m = [0.4, -0.2, 0.1, 0.3];
        let mut g = two_nodes(0.5, m);
        let before = (g.nodes[0].p_exp, g.nodes[1].p_exp);
        g.relax_round();
        for k in 0..4 {
            assert!((g.nodes[0].p_exp[k] - before.0[k] - 0.5 * m[k]).abs() < 1e-15);
            assert!((g.nodes[1].p_exp[k] - before.1[k] + 0.5 * m[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn two_node_contraction() {
        for alpha in [0.25, 0.5, 0.1, 0.9] {
            let mut g = two_nodes(alpha, [0.4, -0.2, 0.1, 0.3]);
            let mut prev = g.link_residual(0);
            for _ in 0..5 {
                g.relax_round();
                let r = g.link_residual(0);
                for k in 0..4 {
                    assert!((r[k] - (1.0 - 2.0 * alpha) * prev[k]).abs() < 1e-12);
                }
                prev = r;
            }
        }
    }

    #[test]
    fn square_loop_residual_shrinks() {
        // Eight nodes around a square, closing link off by 0.8 m.
        for alpha in [0.25, 0.5] {
            square_loop_at(alpha);
        }
    }

    fn square_loop_at(alpha: f64) {
        let params = GraphParams { alpha, relax_iterations: 0, ..Default::default() };
        let mut g = ExperienceGraph::new(params).unwrap();
        let corners = [[0.0, 0.0], [5.0, 0.0], [10.0, 0.0], [10.0, 5.0], [10.0, 10.0], [5.0, 10.0], [0.0, 10.0], [0.0, 5.0]];
        for (i, c) in corners.iter().enumerate() {
            g.nodes.push(ExperienceNode { id: i, p_exp: [c[0], c[1], 0.0, 0.0], ..node([0.0; 3], [0.0; 2]) });
        }
        for i in 0..7 {
            let d = [corners[i + 1][0] - corners[i][0], corners[i + 1][1] - corners[i][1], 0.0, 0.0];
            g.links.push(TransitionLink::new(i, i + 1, d));
        }
        g.links.push(TransitionLink::new(7, 0, [0.0, -5.8, 0.0, 0.0]));
        let norm = |r: [f64; 4]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut prev = norm(g.link_residual(7));
        for _ in 0..30 {
            g.relax_round();
            let now = norm(g.link_residual(7));
            assert!(now < prev);
            prev = now;
        }
    }

    #[test]
    fn yaw_corrections_wrap() {
        let mut g = two_nodes(0.5, [0.0; 4]);
        g.nodes[1].p_exp[3] = PI - 0.05;
        g.links[0].delta[3] = -PI + 0.05;
        // The residual across the ±π seam is −0.1, not 2π − 0.1.
        assert!((g.link_residual(0)[3] + 0.1).abs() < 1e-12);
        g.relax_round();
        assert!((g.nodes[0].p_exp[3] + 0.05).abs() < 1e-12);
        assert!(g.nodes.iter().all(|n| n.p_exp[3] > -PI && n.p_exp[3] <= PI));
    }

    #[test]
    fn loop_closure_adds_link() {
        let params = GraphParams::default();
        let mut g = ExperienceGraph::new(params).unwrap();
        let at = |x: f64| decode([x, 0.0, 0.0], [0.0; 2]);
        g.observe(0, 0.0, &at(0.0), Pose::default());
        g.observe(1, 1.0, &at(1.0), Pose { x: 1.0, ..Pose::default() });
        g.observe(2, 2.0, &at(2.0), Pose { x: 2.0, ..Pose::default() });
        // Back at the start with 0.3 m of odometry drift.
        let node = g.observe(3, 3.0, &at(0.01), Pose { x: 0.3, ..Pose::default() });
        assert_eq!(node, 0);
        assert_eq!(g.links.len(), 3);
        assert_eq!((g.links[2].from, g.links[2].to), (2, 0));
        assert!((g.links[2].delta[0] + 1.7).abs() < 1e-12);
    }

    fn chain(n: usize, seed: u64) -> ExperienceGraph {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let mut g = ExperienceGraph::new(GraphParams::default()).unwrap();
        let mut p = [0.0; 4];
        for i in 0..n {
            g.nodes.push(ExperienceNode { id: i, p_exp: p, ..node([0.0; 3], [0.0; 2]) });
            let d = [rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-0.5, 0.5), rng.uniform(-1.0, 1.0)];
            if i + 1 < n {
                g.links.push(TransitionLink::new(i, i + 1, d));
            }
            p = [p[0] + d[0], p[1] + d[1], p[2] + d[2], wrap_pi(p[3] + d[3])];
        }
        g
    }

    proptest! {
        #[test]
        fn consistent_graphs_are_fixed_points(n in 1usize..20, seed in any::<u64>()) {
            let mut g = chain(n, seed);
            // Consistent chords give some nodes three or more links.
            for i in (0..n.saturating_sub(3)).step_by(2) {
                let (a, b) = (g.nodes[i].p_exp, g.nodes[i + 3].p_exp);
                let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2], wrap_pi(b[3] - a[3])];
                g.links.push(TransitionLink::new(i, i + 3, d));
            }
            let before: Vec<_> = g.nodes.iter().map(|n| n.p_exp).collect();
            prop_assert!(g.relax() < 1e-12);
            for (a, b) in before.iter().zip(&g.nodes) {
                for k in 0..4 {
                    prop_assert!((a[k] - b.p_exp[k]).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn score_is_symmetric(a in prop::array::uniform5(-10.0f64..10.0), b in prop::array::uniform5(-10.0f64..10.0)) {
            let p = GraphParams::default();
            let da = decode([a[0], a[1], a[2]], [a[3], a[4]]);
            let db = decode([b[0], b[1], b[2]], [b[3], b[4]]);
            let na = node(da.gc, da.hdc);
            let nb = node(db.gc, db.hdc);
            prop_assert!((match_score(&da, &nb, &p) - match_score(&db, &na, &p)).abs() < 1e-12);
        }
    }
}
