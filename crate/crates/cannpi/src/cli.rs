//! Argument parsing and the file side of every subcommand.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use cannpi_core::eval::{EvalReport, FIDELITY_TOLERANCE};
use cannpi_core::pi::{CannCells, IdealCells, ReplicaCells};
use cannpi_core::replica::ReplicaArchitecture;
use cannpi_core::trajgen::Split;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{bench_all, BenchSetup, Workload};
use crate::config::{Backend, RunConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{self, PiOutputs};
use crate::plot;
use crate::tables::{read_cues, read_trajectory, write_cues, write_table, write_trajectory};
use crate::weights::{load_weights_as, save_weights};

#[derive(Debug, Parser)]
#[command(name = "cannpi", version, about = "Attractor-network path integration toolkit")]
pub struct Cli {
    /// TOML run configuration; every key is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set train.epochs=5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Top-down overlay of trajectory files.
    Xy,
    /// Ring activity over a stimulus ramp across the boundary.
    Bump1d,
    /// Torus axis reductions over a ramp, plus reconstructed slices.
    Bump3d,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label the fixed training pool and validation set, or dump a reference run.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// Dump the activity of a ring (1) or torus (3) over a boundary-crossing ramp instead.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        bump: Option<u8>,
    },
    /// Label chosen splits, or the training set regenerated for one epoch.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, num_args = 1.., default_values_t = [SplitArg::Test])]
        split: Vec<SplitArg>,
        #[arg(long, conflicts_with = "split")]
        epoch: Option<usize>,
    },
    /// Train a replica on a dataset file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a trained replica with the reference labels of a dataset.
    EvalFidelity {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitArg::Test)]
        split: SplitArg,
        #[arg(long, default_value_t = FIDELITY_TOLERANCE)]
        tolerance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Path integration plus the experience graph over a cue stream.
    RunPi {
        /// Cue CSV; without it the configured square-loop scenario is used.
        #[arg(long)]
        cues: Option<PathBuf>,
        #[arg(long)]
        hdcn: Option<PathBuf>,
        #[arg(long)]
        gcn: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score estimated trajectories against ground truth.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        /// `NAME=FILE`; repeat for several methods.
        #[arg(long, required = true)]
        est: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time reference networks against replicas.
    Bench {
        #[arg(long)]
        out: PathBuf,
        /// Subset of cann_1d, cann_3d, replica_hdcn, replica_gcn, pi_pipeline.
        #[arg(long)]
        workload: Vec<String>,
        #[arg(long)]
        hdcn: Option<PathBuf>,
        #[arg(long)]
        gcn: Option<PathBuf>,
    },
    /// Write SVG figures.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// `NAME=FILE` trajectories for `--kind xy`.
        #[arg(long)]
        traj: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses and runs; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn named_path(spec: &str) -> Result<(String, PathBuf)> {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(Error::Usage(format!("expected NAME=FILE, got `{spec}`"))),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Simulate { out, bump } => simulate(&cfg, &out, bump),
        Command::GenData { out, split, epoch } => gen_data(&cfg, &out, &split, epoch),
        Command::Train { data, out } => train(&cfg, &data, &out),
        Command::EvalFidelity {
            weights,
            data,
            split,
            tolerance,
            out,
        } => eval_fidelity(&cfg, &weights, &data, split.into(), tolerance, &out),
        Command::RunPi { cues, hdcn, gcn, out } => run_pi(&cfg, cues.as_deref(), hdcn.as_deref(), gcn.as_deref(), &out),
        Command::Eval { gt, est, out } => eval(&cfg, &gt, &est, &out),
        Command::Bench {
            out,
            workload,
            hdcn,
            gcn,
        } => bench(&cfg, &out, &workload, hdcn.as_deref(), gcn.as_deref()),
        Command::Plot { kind, traj, out } => plot_cmd(&cfg, kind, &traj, &out),
    }
}

fn simulate(cfg: &RunConfig, out: &Path, bump: Option<u8>) -> Result<()> {
    out_dir(out)?;
    match bump {
        None => {
            let data = pipeline::simulate(cfg)?;
            data.write(&out.join("dataset.jsonl"))?;
            eprintln!("wrote {} sequences", data.sequences.len());
        }
        Some(dims @ (1 | 3)) => {
            let dims = dims as usize;
            let params = cfg.cann.params(dims)?;
            let dump = pipeline::bump_dump(&params, pipeline::boundary_ramp(dims, 40, 160, 0.05), &[])?;
            let n = params.n_per_axis;
            let mut header: Vec<String> = vec!["frame".into()];
            header.extend((0..dims).map(|d| format!("stimulus_{d}")));
            header.extend((0..dims).map(|d| format!("decoded_{d}")));
            let axes = ["x", "y", "z"];
            for d in 0..dims {
                header.extend((0..n).map(|i| if dims == 1 { format!("u_{i}") } else { format!("s{}_{i}", axes[d]) }));
            }
            let rows: Vec<Vec<String>> = (0..dump.stimulus.len())
                .map(|t| {
                    let mut row = vec![t.to_string()];
                    row.extend(dump.stimulus[t].iter().map(f64::to_string));
                    row.extend(dump.decoded[t].iter().map(f64::to_string));
                    row.extend(dump.activity[t].iter().map(f64::to_string));
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            write_table(&out.join(format!("bump_{dims}d.csv")), &header, &rows)?;
        }
        Some(d) => return Err(Error::Usage(format!("--bump takes 1 or 3, not {d}"))),
    }
    cfg.write_resolved(out)
}

fn gen_data(cfg: &RunConfig, out: &Path, splits: &[SplitArg], epoch: Option<usize>) -> Result<()> {
    out_dir(out)?;
    let splits: Vec<Split> = splits.iter().map(|&s| s.into()).collect();
    let data = pipeline::generate(cfg, &splits, epoch)?;
    let name = match epoch {
        Some(e) => format!("dataset_epoch{e}.jsonl"),
        None => {
            let tags: Vec<&str> = splits
                .iter()
                .map(|s| match s {
                    Split::Train => "train",
                    Split::Val => "val",
                    Split::Test => "test",
                })
                .collect();
            format!("dataset_{}.jsonl", tags.join("_"))
        }
    };
    data.write(&out.join(name))?;
    cfg.write_resolved(out)
}

fn train(cfg: &RunConfig, data: &Path, out: &Path) -> Result<()> {
    let data = Dataset::read(data)?;
    out_dir(out)?;
    let run = pipeline::train_replica(cfg, &data, |l, dt| {
        eprintln!("epoch {:4}  train {:.4e}  val {:.4e}  {:.2}s", l.epoch + 1, l.train_loss, l.val_loss, dt);
    })?;
    save_weights(&run.outcome.best, &out.join("weights.crpw"))?;
    let rows: Vec<Vec<String>> = run
        .outcome
        .log
        .epochs
        .iter()
        .zip(&run.wall_s)
        .map(|(l, dt)| {
            vec![
                (l.epoch + 1).to_string(),
                l.train_loss.to_string(),
                l.val_loss.to_string(),
                format!("{dt:.3}"),
            ]
        })
        .collect();
    write_table(&out.join("train_log.csv"), &["epoch", "train_loss", "val_loss", "wall_s"], &rows)?;
    eprintln!(
        "best epoch {} (val loss {:.4e})",
        run.outcome.log.best_epoch + 1,
        run.outcome.log.best_val_loss
    );
    cfg.write_resolved(out)
}

fn eval_fidelity(cfg: &RunConfig, weights: &Path, data: &Path, split: Split, tol: f64, out: &Path) -> Result<()> {
    let data = Dataset::read(data)?;
    let arch = pipeline::architecture(data.header.spec.dims, cfg.train.hidden);
    let w = load_weights_as(weights, &arch)?;
    out_dir(out)?;
    let report = pipeline::replica_fidelity(&w, &data, split, tol)?;
    let mut rows = Vec::new();
    let mut push = |seq: String, ch: &[cannpi_core::eval::ChannelFidelity]| {
        for (c, f) in ch.iter().enumerate() {
            rows.push(vec![
                seq.clone(),
                c.to_string(),
                f.mean.to_string(),
                f.max.to_string(),
                f.within.to_string(),
                f.tolerance.to_string(),
            ]);
        }
    };
    for (seed, ch) in &report.sequences {
        push(seed.to_string(), ch);
    }
    push("all".into(), &report.overall);
    write_table(
        &out.join("fidelity.csv"),
        &["sequence", "channel", "mean_rad", "max_rad", "within", "tolerance_rad"],
        &rows,
    )?;
    for (c, f) in report.overall.iter().enumerate() {
        eprintln!("channel {c}: mean {:.4} rad, max {:.4} rad, {:.1}% within {:.4}", f.mean, f.max, 100.0 * f.within, f.tolerance);
    }
    cfg.write_resolved(out)
}

fn pi_with_backend(
    cfg: &RunConfig,
    cues: &[cannpi_core::pi::MotionCue],
    hdcn: Option<&Path>,
    gcn: Option<&Path>,
) -> Result<PiOutputs> {
    match cfg.pi.backend {
        Backend::Replica => {
            let (Some(h), Some(g)) = (hdcn, gcn) else {
                return Err(Error::Usage("the replica backend needs --hdcn and --gcn weight files".into()));
            };
            let cells = ReplicaCells::new(
                load_weights_as(h, &ReplicaArchitecture::hdcn())?,
                load_weights_as(g, &ReplicaArchitecture::gcn())?,
            )?;
            pipeline::run_pipeline(cues, cells, cfg)
        }
        Backend::Cann => {
            let cells = CannCells::new(cfg.cann.params(1)?, cfg.cann.params(3)?)?;
            pipeline::run_pipeline(cues, cells, cfg)
        }
        Backend::Ideal => pipeline::run_pipeline(cues, IdealCells, cfg),
    }
}

#[derive(Serialize)]
struct Timing {
    frames: usize,
    time_cost_s: f64,
}

fn run_pi(cfg: &RunConfig, cues: Option<&Path>, hdcn: Option<&Path>, gcn: Option<&Path>, out: &Path) -> Result<()> {
    let cues = match cues {
        Some(p) => read_cues(p)?,
        None => {
            out_dir(out)?;
            let (cues, gt) = pipeline::scenario(cfg)?;
            write_cues(&out.join("cues.csv"), &cues)?;
            write_trajectory(&out.join("ground_truth.csv"), &gt)?;
            cues
        }
    };
    let result = pi_with_backend(cfg, &cues, hdcn, gcn)?;
    out_dir(out)?;
    write_trajectory(&out.join("trajectory.csv"), &result.corrected)?;
    write_trajectory(&out.join("odometry.csv"), &result.raw)?;
    write_trajectory(&out.join("cells.csv"), &result.run.trajectory())?;
    write_json(&out.join("graph.json"), &result.graph)?;
    write_json(
        &out.join("timing.json"),
        &Timing {
            frames: cues.len(),
            time_cost_s: result.elapsed_s,
        },
    )?;
    eprintln!(
        "{} frames, {} nodes, {} links, {} held frames",
        cues.len(),
        result.graph.nodes.len(),
        result.graph.links.len(),
        result.run.held_frames.len()
    );
    cfg.write_resolved(out)
}

#[derive(Serialize)]
struct NamedReport<'a> {
    method: &'a str,
    #[serde(flatten)]
    report: &'a EvalReport,
}

fn eval(cfg: &RunConfig, gt: &Path, est: &[String], out: &Path) -> Result<()> {
    let gt_traj = read_trajectory(gt)?;
    let named = est.iter().map(|s| named_path(s)).collect::<Result<Vec<_>>>()?;
    let mut loaded = Vec::new();
    for (name, path) in &named {
        loaded.push((name.as_str(), path.as_path(), read_trajectory(path)?));
    }
    let keyframes = cfg.eval.keyframes_only.then(|| pipeline::pose_keyframes(&loaded[0].2));
    out_dir(out)?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (name, path, traj) in &loaded {
        let report = pipeline::evaluate_at(traj, &gt_traj, keyframes.as_deref(), cfg)?;
        let timing = path.parent().map(|d| d.join("timing.json"));
        let time_cost = timing
            .and_then(|p| std::fs::read_to_string(p).ok())
            .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
            .and_then(|v| v.get("time_cost_s").and_then(serde_json::Value::as_f64))
            .map_or(String::new(), |t| format!("{t:.6}"));
        rows.push(vec![
            name.to_string(),
            report.pairs.to_string(),
            time_cost,
            format!("{:.6}", report.mae_m),
            format!("{:.6}", report.rmse_m),
            format!("{:.6}", report.mte_m),
        ]);
        eprintln!("{name}: MAE {:.3} m, RMSE {:.3} m, MTE {:.3} m over {} pairs", report.mae_m, report.rmse_m, report.mte_m, report.pairs);
        reports.push(report);
    }
    write_table(
        &out.join("table1.csv"),
        &["method", "frames", "time_cost_s", "mae_m", "rmse_m", "mte_m"],
        &rows,
    )?;
    let named_reports: Vec<NamedReport> = loaded
        .iter()
        .zip(&reports)
        .map(|((name, _, _), report)| NamedReport { method: name, report })
        .collect();
    write_json(&out.join("report.json"), &named_reports)?;
    cfg.write_resolved(out)
}

fn bench(cfg: &RunConfig, out: &Path, workloads: &[String], hdcn: Option<&Path>, gcn: Option<&Path>) -> Result<()> {
    let workloads: Vec<Workload> = if workloads.is_empty() {
        Workload::ALL.to_vec()
    } else {
        workloads
            .iter()
            .map(|w| Workload::parse(w).ok_or_else(|| Error::Usage(format!("unknown workload `{w}`"))))
            .collect::<Result<_>>()?
    };
    let mut setup = BenchSetup::seeded(cfg.cann.params(1)?, cfg.cann.params(3)?, cfg.train.init_seed)?;
    setup.scale = cfg.pi.scale();
    if let Some(h) = hdcn {
        setup.hdcn = load_weights_as(h, &ReplicaArchitecture::hdcn())?;
    }
    if let Some(g) = gcn {
        setup.gcn = load_weights_as(g, &ReplicaArchitecture::gcn())?;
    }
    let b = cfg.bench;
    let report = bench_all(&workloads, &setup, b.frames, b.repeats, b.warmup)?;
    out_dir(out)?;
    let rows: Vec<Vec<String>> = report
        .timings
        .iter()
        .map(|t| {
            vec![
                t.workload.to_string(),
                t.frames.to_string(),
                t.repeats.to_string(),
                format!("{:.3}", t.median_us_per_frame),
                format!("{:.3}", t.min_us_per_frame),
                format!("{:.3}", t.max_us_per_frame),
                format!("{:.6}", t.total_s),
            ]
        })
        .collect();
    write_table(
        &out.join("bench.csv"),
        &["workload", "frames", "repeats", "median_us_per_frame", "min_us_per_frame", "max_us_per_frame", "total_s"],
        &rows,
    )?;
    write_json(&out.join("bench.json"), &report)?;
    for t in &report.timings {
        eprintln!("{:13} {:12.1} us/frame (median of {})", t.workload, t.median_us_per_frame, t.repeats);
    }
    for s in &report.speedups {
        eprintln!("speedup {} vs {}: {:.2}x", s.replica, s.reference, s.ratio);
    }
    cfg.write_resolved(out)
}

fn plot_cmd(cfg: &RunConfig, kind: PlotKind, traj: &[String], out: &Path) -> Result<()> {
    match kind {
        PlotKind::Xy => {
            let named = traj.iter().map(|s| named_path(s)).collect::<Result<Vec<_>>>()?;
            let mut loaded = Vec::new();
            for (name, path) in &named {
                loaded.push((name.as_str(), read_trajectory(path)?));
            }
            let series: Vec<(&str, &[_])> = loaded.iter().map(|(n, t)| (*n, t.as_slice())).collect();
            let svg = plot::xy_overlay("Top-down trajectories", &series)?;
            out_dir(out)?;
            write_text(&out.join("xy.svg"), &svg)?;
        }
        PlotKind::Bump1d => {
            let params = cfg.cann.params(1)?;
            let dump = pipeline::bump_dump(&params, pipeline::boundary_ramp(1, 40, 160, 0.05), &[])?;
            out_dir(out)?;
            write_text(&out.join("bump_1d.svg"), &plot::heatmap(&dump.heatmaps()[0])?)?;
        }
        PlotKind::Bump3d => {
            let params = cfg.cann.params(3)?;
            let dump = pipeline::bump_dump(&params, pipeline::boundary_ramp(3, 20, 100, 0.08), &[20, 60, 100, 119])?;
            out_dir(out)?;
            write_text(
                &out.join("bump_3d_axes.svg"),
                &plot::heatmap_grid("Torus axis reductions over a boundary-crossing ramp", &[dump.heatmaps()])?,
            )?;
            write_text(
                &out.join("bump_3d_slices.svg"),
                &plot::heatmap_grid("Reconstructed bump, slices through the peak", &dump.slice_panels())?,
            )?;
        }
    }
    cfg.write_resolved(out)
}
