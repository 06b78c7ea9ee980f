// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `cluster`, `eval`, `gen` and `bench`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 internal
//! invariant violation.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cluster::{cluster_scan, InstanceLabeling, PointCloud};
use crate::config::{ClassConfig, ThresholdMode};
use crate::error::Error;
use crate::io::{read_labels, read_scan, write_labels, write_scan, write_text_scene};
use crate::metrics::{bins_from_edges, format_report_kv, format_report_table, BinnedAccumulator, PanopticAccumulator};
use crate::synth::{generate_scene, SceneParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(Error::Invariant(_)) => EXIT_INTERNAL,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "alpine", version, about = "Training-free LiDAR panoptic instance clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster semantic predictions into instances and write panoptic label files.
    Cluster(ClusterArgs),
    /// Evaluate panoptic predictions against ground truth.
    Eval(EvalArgs),
    /// Generate synthetic scans with ground-truth labels.
    Gen(GenArgs),
    /// Measure clustering throughput.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Constant,
    RangeProportional,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Class table and parameters; the builtin SemanticKITTI table if unset.
    #[arg(long, env = "ALPINE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Neighbors per point in the kNN graph.
    #[arg(long)]
    pub k: Option<usize>,
    /// Box-splitting margin, as a fraction of the reference box.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Precision floor of the box-splitting dichotomy, meters.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub threshold_mode: Option<ModeArg>,
    /// Coefficient of the range-proportional threshold.
    #[arg(long)]
    pub range_coefficient: Option<f64>,
}

impl ConfigArgs {
    pub fn load(&self) -> CliResult<ClassConfig> {
        let mut config = match &self.config {
            Some(path) => ClassConfig::from_file(path)?,
            None => ClassConfig::semantickitti(),
        };
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(m) = self.margin {
            config.margin = m;
        }
        if let Some(e) = self.epsilon {
            config.epsilon = e;
        }
        let coefficient = self.range_coefficient.or(match config.threshold_mode {
            ThresholdMode::RangeProportional { coefficient } => Some(coefficient),
            ThresholdMode::Constant => None,
        });
        match self.threshold_mode {
            Some(ModeArg::Constant) => config.threshold_mode = ThresholdMode::Constant,
            Some(ModeArg::RangeProportional) => {
                let coefficient = coefficient.ok_or_else(|| {
                    CliError::Usage("--threshold-mode range-proportional needs --range-coefficient".into())
                })?;
                config.threshold_mode = ThresholdMode::RangeProportional { coefficient };
            }
            None => {
                if let (Some(c), ThresholdMode::RangeProportional { .. }) =
                    (self.range_coefficient, config.threshold_mode)
                {
                    config.threshold_mode = ThresholdMode::RangeProportional { coefficient: c };
                }
            }
        }
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Directory of `<stem>.bin` scans.
    #[arg(long)]
    pub scans: PathBuf,
    /// Directory of `<stem>.label` semantic predictions.
    #[arg(long)]
    pub preds: PathBuf,
    /// Output directory for `<stem>.label` panoptic predictions.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Disable box splitting.
    #[arg(long)]
    pub no_split: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    /// Evaluate the given panoptic predictions.
    Plain,
    /// Cluster the ground-truth semantics and evaluate the result.
    SemanticOracle,
    /// Split the predicted semantics along ground-truth instance boundaries.
    InstanceOracle,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of `<stem>.label` ground-truth files.
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory of `<stem>.label` predictions (plain and instance-oracle modes).
    #[arg(long)]
    pub preds: Option<PathBuf>,
    /// Directory of `<stem>.bin` scans (semantic-oracle mode and distance bins).
    #[arg(long)]
    pub scans: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EvalMode::Plain)]
    pub mode: EvalMode,
    /// Inner edges of distance bins in meters, e.g. `15,30`.
    #[arg(long, value_delimiter = ',')]
    pub bins: Option<Vec<f64>>,
    /// Directory for `report.txt` and `report.kv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Disable box splitting in semantic-oracle mode.
    #[arg(long)]
    pub no_split: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of scans.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Objects per class as `class:count` pairs, e.g. `1:12,6:4`.
    #[arg(long, value_delimiter = ',')]
    pub objects: Option<Vec<String>>,
    /// Object size range relative to the reference box, e.g. `0.85,1.1`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub size_scale: Option<Vec<f64>>,
    /// Minimum clearance between objects, meters.
    #[arg(long)]
    pub min_gap: Option<f64>,
    /// Add two cars parked side by side with this gap, meters.
    #[arg(long)]
    pub pair_gap: Option<f64>,
    /// Place objects so that none touches or occludes another.
    #[arg(long)]
    pub separable: bool,
    #[arg(long)]
    pub beams: Option<usize>,
    #[arg(long)]
    pub azimuth_steps: Option<usize>,
    #[arg(long, env = "ALPINE_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Number of generated scans.
    #[arg(long, default_value_t = 10)]
    pub scans: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Benchmark real data instead: directory of `<stem>.bin` scans.
    #[arg(long, requires = "preds")]
    pub scan_dir: Option<PathBuf>,
    /// Semantic predictions matching `--scan-dir`.
    #[arg(long)]
    pub preds: Option<PathBuf>,
    /// Enable box splitting (off by default).
    #[arg(long)]
    pub split: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Cluster(a) => cmd_cluster(&a).map(|summary| print!("{}", summary.format())),
        Command::Eval(a) => cmd_eval(&a).map(|text| print!("{text}")),
        Command::Gen(a) => cmd_gen(&a).map(|stems| println!("generated {} scans in {}", stems.len(), a.out.display())),
        Command::Bench(a) => cmd_bench(&a).map(|summary| print!("{}", summary.format())),
    }
}

fn stems_with_extension(dir: &Path, ext: &str) -> CliResult<BTreeSet<String>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut stems = BTreeSet::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.insert(stem.to_string());
            }
        }
    }
    Ok(stems)
}

/// Stems present in `primary`, after checking that `secondary` has exactly
/// the same ones. All mismatches are reported at once.
fn paired_stems(primary: (&Path, &str), secondary: (&Path, &str)) -> CliResult<Vec<String>> {
    let a = stems_with_extension(primary.0, primary.1)?;
    let b = stems_with_extension(secondary.0, secondary.1)?;
    let mut missing: Vec<String> = a
        .difference(&b)
        .map(|s| secondary.0.join(format!("{s}.{}", secondary.1)).display().to_string())
        .collect();
    missing.extend(
        b.difference(&a)
            .map(|s| primary.0.join(format!("{s}.{}", primary.1)).display().to_string()),
    );
    if !missing.is_empty() {
        return Err(CliError::Data(Error::contract(format!(
            "unpaired files, nothing processed:\n  {}",
            missing.join("\n  ")
        ))));
    }
    Ok(a.into_iter().collect())
}

fn load_cloud(scan: &Path, labels: &Path, config: &ClassConfig) -> CliResult<(PointCloud, Vec<u32>, Vec<u32>)> {
    let scan_data = read_scan(scan)?;
    let (raw_semantic, instance) = read_labels(labels)?;
    if raw_semantic.len() != scan_data.len() {
        return Err(Error::CountMismatch {
            left: scan.display().to_string(),
            left_len: scan_data.len(),
            right: labels.display().to_string(),
            right_len: raw_semantic.len(),
        }
        .into());
    }
    let cloud = scan_data.to_cloud(config.map_labels(&raw_semantic))?;
    Ok((cloud, raw_semantic, instance))
}

#[derive(Debug, Clone, Default)]
pub struct TimingSummary {
    pub per_scan: Vec<(String, Duration)>,
}

impl TimingSummary {
    pub fn total(&self) -> Duration {
        self.per_scan.iter().map(|(_, d)| *d).sum()
    }

    /// Scans per second of clustering time.
    pub fn hz(&self) -> f64 {
        self.per_scan.len() as f64 / self.total().as_secs_f64()
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        for (stem, d) in &self.per_scan {
            s += &format!("{stem}: {:.2} ms\n", d.as_secs_f64() * 1e3);
        }
        if !self.per_scan.is_empty() {
            s += &format!(
                "{} scans, mean {:.2} ms per scan, {:.1} Hz (clustering only)\n",
                self.per_scan.len(),
                self.total().as_secs_f64() * 1e3 / self.per_scan.len() as f64,
                self.hz()
            );
        }
        s
    }
}

fn cluster_one(
    stem: &str,
    args: &ClusterArgs,
    config: &ClassConfig,
) -> CliResult<Duration> {
    let (cloud, raw_semantic, _) = load_cloud(
        &args.scans.join(format!("{stem}.bin")),
        &args.preds.join(format!("{stem}.label")),
        config,
    )?;
    let start = Instant::now();
    let labels = cluster_scan(&cloud, config, !args.no_split)?;
    let elapsed = start.elapsed();
    write_labels(args.out.join(format!("{stem}.label")), &raw_semantic, &labels.instance)?;
    Ok(elapsed)
}

pub fn cmd_cluster(args: &ClusterArgs) -> CliResult<TimingSummary> {
    let config = args.config.load()?;
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let stems = paired_stems((&args.scans, "bin"), (&args.preds, "label"))?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;

    let mut per_scan = Vec::with_capacity(stems.len());
    if args.jobs == 1 {
        for stem in &stems {
            per_scan.push((stem.clone(), cluster_one(stem, args, &config)?));
        }
    } else {
        let chunk = stems.len().div_ceil(args.jobs).max(1);
        let results: Vec<CliResult<Vec<(String, Duration)>>> = std::thread::scope(|s| {
            let handles: Vec<_> = stems
                .chunks(chunk)
                .map(|part| {
                    let config = &config;
                    s.spawn(move || {
                        part.iter()
                            .map(|stem| Ok((stem.clone(), cluster_one(stem, args, config)?)))
                            .collect()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for r in results {
            per_scan.extend(r?);
        }
    }
    Ok(TimingSummary { per_scan })
}

/// Instances of the instance oracle: predicted thing points are grouped by
/// (predicted class, ground-truth class, ground-truth instance).
pub fn instance_oracle(pred_semantic: &[u32], gt: &InstanceLabeling, config: &ClassConfig) -> InstanceLabeling {
    let mut map = std::collections::HashMap::new();
    let instance = pred_semantic
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if !config.is_thing(c) {
                return 0;
            }
            let next = map.len() as u32 + 1;
            *map.entry((c, gt.semantic[i], gt.instance[i])).or_insert(next)
        })
        .collect();
    InstanceLabeling {
        semantic: pred_semantic.to_vec(),
        instance,
    }
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<String> {
    let config = args.config.load()?;
    let need = |p: &Option<PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| CliError::Usage(format!("--{flag} is required for this evaluation mode")))
    };
    if !args.gt.is_dir() {
        return Err(CliError::Data(Error::contract(format!(
            "ground-truth directory {} does not exist",
            args.gt.display()
        ))));
    }
    let preds = match args.mode {
        EvalMode::Plain | EvalMode::InstanceOracle => Some(need(&args.preds, "preds")?),
        EvalMode::SemanticOracle => None,
    };
    let scans = match (args.mode, &args.bins) {
        (EvalMode::SemanticOracle, _) | (_, Some(_)) => Some(need(&args.scans, "scans")?),
        _ => args.scans.clone(),
    };
    let stems = match (&preds, &scans) {
        (Some(p), _) => paired_stems((&args.gt, "label"), (p, "label"))?,
        (None, Some(s)) => paired_stems((&args.gt, "label"), (s, "bin"))?,
        (None, None) => unreachable!("semantic oracle requires scans"),
    };
    if let (Some(s), Some(_)) = (&scans, &preds) {
        paired_stems((&args.gt, "label"), (s, "bin"))?;
    }

    let mut acc = PanopticAccumulator::new();
    let mut binned = match &args.bins {
        Some(edges) => Some(BinnedAccumulator::new(
            bins_from_edges(edges).map_err(|e| CliError::Usage(e.to_string()))?,
        )?),
        None => None,
    };
    for stem in &stems {
        let gt_path = args.gt.join(format!("{stem}.label"));
        let (gt_raw, gt_instance) = read_labels(&gt_path)?;
        let gt = InstanceLabeling::new(config.map_labels(&gt_raw), gt_instance)?;
        let cloud = match &scans {
            Some(dir) => {
                let scan = read_scan(dir.join(format!("{stem}.bin")))?;
                Some(scan.to_cloud(gt.semantic.clone())?)
            }
            None => None,
        };
        let pred = match args.mode {
            EvalMode::Plain | EvalMode::InstanceOracle => {
                let path = preds.as_ref().unwrap().join(format!("{stem}.label"));
                let (raw, instance) = read_labels(&path)?;
                let semantic = config.map_labels(&raw);
                if args.mode == EvalMode::Plain {
                    InstanceLabeling::new(semantic, instance)?
                } else {
                    instance_oracle(&semantic, &gt, &config)
                }
            }
            EvalMode::SemanticOracle => cluster_scan(cloud.as_ref().unwrap(), &config, !args.no_split)?,
        };
        if pred.len() != gt.len() {
            return Err(Error::CountMismatch {
                left: "prediction".into(),
                left_len: pred.len(),
                right: gt_path.display().to_string(),
                right_len: gt.len(),
            }
            .into());
        }
        acc.add(&pred, &gt, &config)?;
        if let Some(b) = binned.as_mut() {
            b.add(&pred, &gt, cloud.as_ref().unwrap(), &config)?;
        }
    }

    let report = acc.report(&config);
    let mut text = format_report_table(&report);
    let mut kv = format_report_kv(&report, "");
    if let Some(b) = &binned {
        for (bin, r) in b.reports(&config) {
            text += &format!("\n== range {} ==\n", bin.label());
            text += &format_report_table(&r);
            kv += &format_report_kv(&r, &format!("bin.{}.", bin.label()));
        }
    }
    if let Some(out) = &args.out {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let txt = out.join("report.txt");
        fs::write(&txt, &text).map_err(|e| Error::io(&txt, e))?;
        let kvp = out.join("report.kv");
        fs::write(&kvp, &kv).map_err(|e| Error::io(&kvp, e))?;
    }
    Ok(text)
}

fn parse_objects(spec: &[String]) -> CliResult<Vec<(u32, usize)>> {
    spec.iter()
        .map(|s| {
            let (c, n) = s
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("expected `class:count`, got `{s}`")))?;
            let c = c.trim().parse().map_err(|_| CliError::Usage(format!("bad class id in `{s}`")))?;
            let n = n.trim().parse().map_err(|_| CliError::Usage(format!("bad count in `{s}`")))?;
            Ok((c, n))
        })
        .collect()
}

/// Label written for a class id: the smallest raw label mapping to it when
/// the table has a remap section.
fn raw_label_writer(config: &ClassConfig) -> impl Fn(u32) -> u32 + '_ {
    move |id| match config.remap() {
        Some(map) => map
            .iter()
            .find(|&(_, &v)| v == id)
            .map_or(config.ignore_label, |(&raw, _)| raw),
        None => id,
    }
}

/// Writes `velodyne/<stem>.bin`, `labels/<stem>.label` and `text/<stem>.txt`.
pub fn cmd_gen(args: &GenArgs) -> CliResult<Vec<String>> {
    let config = match &args.config {
        Some(p) => ClassConfig::from_file(p)?,
        None => ClassConfig::semantickitti(),
    };
    let mut params = if args.separable {
        SceneParams::separable(args.seed)
    } else {
        SceneParams {
            seed: args.seed,
            ..Default::default()
        }
    };
    if let Some(o) = &args.objects {
        params.objects = parse_objects(o)?;
    }
    if let Some(s) = &args.size_scale {
        params.size_scale = (s[0], s[1]);
    }
    if let Some(g) = args.min_gap {
        params.min_gap = g;
    }
    params.pair_gap = args.pair_gap;
    if let Some(b) = args.beams {
        params.beams = b;
    }
    if let Some(a) = args.azimuth_steps {
        params.azimuth_steps = a;
    }

    let dirs = ["velodyne", "labels", "text"].map(|d| args.out.join(d));
    for d in &dirs {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let to_raw = raw_label_writer(&config);
    let mut stems = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let stem = format!("{i:06}");
        let p = SceneParams {
            seed: params.seed.wrapping_add(i as u64),
            ..params.clone()
        };
        let scene = generate_scene(&p, &config).map_err(|e| match e {
            Error::Contract(m) => CliError::Usage(m),
            other => CliError::Data(other),
        })?;
        let records: Vec<[f32; 4]> = scene
            .cloud
            .xyz
            .iter()
            .map(|&[x, y, z]| [x, y, z, 0.0])
            .collect();
        write_scan(dirs[0].join(format!("{stem}.bin")), &records)?;
        let raw: Vec<u32> = scene.gt.semantic.iter().map(|&s| to_raw(s)).collect();
        write_labels(dirs[1].join(format!("{stem}.label")), &raw, &scene.gt.instance)?;
        let text_cloud = PointCloud {
            xyz: scene.cloud.xyz,
            semantic: raw,
        };
        write_text_scene(dirs[2].join(format!("{stem}.txt")), &text_cloud, Some(&scene.gt.instance))?;
        stems.push(stem);
    }
    Ok(stems)
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<TimingSummary> {
    let config = args.config.load()?;
    let mut per_scan = Vec::new();
    let mut time = |stem: String, cloud: &PointCloud| -> CliResult<()> {
        let start = Instant::now();
        let labels = cluster_scan(cloud, &config, args.split)?;
        let elapsed = start.elapsed();
        std::hint::black_box(labels);
        per_scan.push((stem, elapsed));
        Ok(())
    };
    match (&args.scan_dir, &args.preds) {
        (Some(scans), Some(preds)) => {
            for stem in paired_stems((scans, "bin"), (preds, "label"))? {
                let (cloud, _, _) = load_cloud(
                    &scans.join(format!("{stem}.bin")),
                    &preds.join(format!("{stem}.label")),
                    &config,
                )?;
                time(stem, &cloud)?;
            }
        }
        _ => {
            let base = ClassConfig::semantickitti();
            for i in 0..args.scans {
                let p = SceneParams {
                    seed: args.seed.wrapping_add(i as u64),
                    ..Default::default()
                };
                let scene = generate_scene(&p, &base)?;
                time(format!("synthetic-{i:03} ({} points)", scene.cloud.len()), &scene.cloud)?;
            }
        }
    }
    Ok(TimingSummary { per_scan })
}
