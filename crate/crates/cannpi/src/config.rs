//! Run configuration: one TOML tree holding every parameter, with `key=value`
//! overrides applied on top and the resolved tree written next to each run's outputs.

use std::path::Path;

use cannpi_core::cann::{CannParams, KernelExponent, DEFAULT_K_RATIO};
use cannpi_core::eval::AlignMode;
use cannpi_core::graph::GraphParams;
use cannpi_core::pi::{RingScale, SquareLoop};
use cannpi_core::replica::{AdamConfig, TrainConfig};
use cannpi_core::trajgen::DatasetPlan;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed of every generated dataset.
    pub seed: u64,
    pub cann: CannConfig,
    pub data: DataConfig,
    pub train: TrainSection,
    pub pi: PiConfig,
    pub graph: GraphParams,
    pub scenario: ScenarioConfig,
    pub eval: EvalConfig,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            cann: CannConfig::default(),
            data: DataConfig::default(),
            train: TrainSection::default(),
            pi: PiConfig::default(),
            graph: GraphParams::default(),
            scenario: ScenarioConfig::default(),
            eval: EvalConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

/// Network constants shared by the ring and the torus; `rho` and `k` follow from
/// `n_per_axis` and `k_ratio`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CannConfig {
    pub n_per_axis: usize,
    pub tau: f64,
    pub j0: f64,
    pub a: f64,
    pub k_ratio: f64,
    pub a_ext: f64,
    pub b_ext: f64,
    pub dt: f64,
    pub kernel_exponent: KernelExponent,
    pub settle_steps: usize,
}

impl Default for CannConfig {
    fn default() -> Self {
        let p = CannParams::ring(37);
        Self {
            n_per_axis: p.n_per_axis,
            tau: p.tau,
            j0: p.j0,
            a: p.a,
            k_ratio: DEFAULT_K_RATIO,
            a_ext: p.a_ext,
            b_ext: p.b_ext,
            dt: p.dt,
            kernel_exponent: p.kernel_exponent,
            settle_steps: p.settle_steps,
        }
    }
}

impl CannConfig {
    pub fn params(&self, dims: usize) -> Result<CannParams> {
        let base = CannParams {
            tau: self.tau,
            j0: self.j0,
            a: self.a,
            a_ext: self.a_ext,
            b_ext: self.b_ext,
            dt: self.dt,
            kernel_exponent: self.kernel_exponent,
            settle_steps: self.settle_steps,
            ..CannParams::new(dims, self.n_per_axis)
        };
        let p = base.with_k_ratio(self.k_ratio);
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub dims: usize,
    pub train_count: usize,
    pub val_count: usize,
    pub test_count: usize,
    pub train_length: usize,
    pub test_length: usize,
    pub segment_count_range: [usize; 2],
    pub test_segment_count_range: [usize; 2],
}

impl Default for DataConfig {
    fn default() -> Self {
        let p = DatasetPlan::default();
        Self {
            dims: p.dims,
            train_count: p.train_count,
            val_count: p.val_count,
            test_count: p.test_count,
            train_length: p.train_length,
            test_length: p.test_length,
            segment_count_range: p.segment_count_range,
            test_segment_count_range: p.test_segment_count_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub init_seed: u64,
    pub truncation: usize,
    pub sampling: Sampling,
    /// Hidden width of the smoke-sized architecture; `0` selects the full network.
    pub hidden: usize,
    pub adam: AdamConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            init_seed: t.init_seed,
            truncation: t.truncation,
            sampling: Sampling::Regenerate,
            hidden: 0,
            adam: t.adam,
        }
    }
}

/// Where each epoch's training sequences come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Fresh sequences every epoch, labelled by the reference network.
    Regenerate,
    /// The dataset's training pool every epoch.
    Fixed,
    /// The training pool under a random exact symmetry of the reference network
    /// (axis order, mirror, lattice rotation) per sequence and epoch.
    Symmetric,
}

impl TrainSection {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            init_seed: self.init_seed,
            truncation: self.truncation,
            adam: self.adam,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Trained HDCN and GCN replicas.
    Replica,
    /// The reference attractor networks.
    Cann,
    /// Cells that echo their stimulus.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiConfig {
    pub l_xy: f64,
    pub l_z: f64,
    pub backend: Backend,
    /// Frames the cells run on the initial stimuli before the first output.
    pub warmup_frames: usize,
}

impl Default for PiConfig {
    fn default() -> Self {
        let s = RingScale::default();
        Self {
            l_xy: s.l_xy,
            l_z: s.l_z,
            backend: Backend::Replica,
            warmup_frames: 30,
        }
    }
}

impl PiConfig {
    pub fn scale(&self) -> RingScale {
        RingScale {
            l_xy: self.l_xy,
            l_z: self.l_z,
        }
    }
}

/// The synthetic cue stream used when no cue file is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub side: f64,
    pub speed: f64,
    pub rate_hz: f64,
    pub turn_rate: f64,
    pub laps: usize,
    /// Relative error applied to the translational speeds.
    pub scale_error: f64,
    /// Additive yaw-rate bias in rad/s.
    pub yaw_bias: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let s = SquareLoop::default();
        Self {
            side: s.side,
            speed: s.speed,
            rate_hz: s.rate_hz,
            turn_rate: s.turn_rate,
            laps: s.laps,
            scale_error: 0.01,
            yaw_bias: 0.002,
        }
    }
}

impl ScenarioConfig {
    pub fn square(&self) -> SquareLoop {
        SquareLoop {
            side: self.side,
            speed: self.speed,
            rate_hz: self.rate_hz,
            turn_rate: self.turn_rate,
            laps: self.laps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub align: AlignMode,
    /// Score only the frames on which the estimate's active experience node changes.
    pub keyframes_only: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            align: AlignMode::RigidLsq,
            keyframes_only: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub frames: usize,
    pub repeats: usize,
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            frames: 200,
            repeats: 5,
            warmup: 1,
        }
    }
}

impl RunConfig {
    pub fn plan(&self) -> DatasetPlan {
        let d = &self.data;
        DatasetPlan {
            seed: self.seed,
            dims: d.dims,
            train_count: d.train_count,
            val_count: d.val_count,
            test_count: d.test_count,
            train_length: d.train_length,
            test_length: d.test_length,
            segment_count_range: d.segment_count_range,
            test_segment_count_range: d.test_segment_count_range,
        }
    }

    /// Parses TOML text, applies `key.path=value` overrides, and validates.
    pub fn resolve(text: &str, overrides: &[String]) -> Result<Self> {
        let mut tree: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut tree, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(tree)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        Self::resolve(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !matches!(self.data.dims, 1 | 3) {
            return bad("data.dims must be 1 or 3");
        }
        self.cann.params(self.data.dims).map_err(|e| Error::Config(format!("cann: {e}")))?;
        self.plan().validate().map_err(|e| Error::Config(format!("data: {e}")))?;
        self.train.adam.validate().map_err(|e| Error::Config(format!("train.adam: {e}")))?;
        self.pi.scale().validate().map_err(|e| Error::Config(format!("pi: {e}")))?;
        self.graph.validate().map_err(|e| Error::Config(format!("graph: {e}")))?;
        if self.bench.frames < 100 || self.bench.repeats < 3 {
            return bad("bench needs at least 100 frames and 3 repeats");
        }
        let s = &self.scenario;
        if !(s.side > 0.0 && s.speed > 0.0 && s.rate_hz > 0.0 && s.turn_rate > 0.0) {
            return bad("scenario side, speed, rate_hz and turn_rate must be positive");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn write_resolved(&self, dir: &Path) -> Result<()> {
        let path = dir.join(RESOLVED_CONFIG);
        std::fs::write(&path, self.to_toml()).map_err(|e| Error::io(&path, e))
    }
}

/// `a.b.c=value`; the value is parsed as TOML and taken as a bare string if that fails.
fn apply_override(tree: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("override `{assignment}` is not key=value")))?;
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields one part");
    let mut table = tree;
    for p in parents {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{p}` in `{key}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::resolve("", &[]).unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::resolve(&c.to_toml(), &[]).unwrap(), c);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let c = RunConfig::resolve(
            "seed = 1\n[train]\nepochs = 3\n",
            &["train.adam.lr=0.01".into(), "seed=9".into(), "pi.backend=ideal".into()],
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.train.epochs, 3);
        assert_eq!(c.train.adam.lr, 0.01);
        assert_eq!(c.pi.backend, Backend::Ideal);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::resolve("sed = 1", &[]).is_err());
        assert!(RunConfig::resolve("[graph]\nalpah = 0.3", &[]).is_err());
        assert!(RunConfig::resolve("", &["train.adam.learning_rate=1".into()]).is_err());
        assert!(RunConfig::resolve("", &["novalue".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::resolve("", &["graph.alpha=0".into()]).is_err());
        assert!(RunConfig::resolve("", &["bench.frames=50".into()]).is_err());
        assert!(RunConfig::resolve("", &["data.dims=2".into()]).is_err());
    }

    #[test]
    fn cann_params_match_core_defaults() {
        let c = CannConfig::default();
        assert_eq!(c.params(1).unwrap(), CannParams::ring(37));
        assert_eq!(c.params(3).unwrap(), CannParams::torus(37));
    }
}
