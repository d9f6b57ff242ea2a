use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fwlink::curves::within_cluster_ss;
use fwlink::linkage::distance_matrix;
use fwlink::metrics::{ari, sim};
use fwlink::simgen::{
    generate_eeg_clusters, generate_model, Ar2Source, ArtifactKind, EegSettings, ExperimentConfig, OutlierModel,
    MIXTURE_WEIGHTS,
};
use fwlink::{agglomerate, cut_history, CurveSet, Grid, LinkageKind, Partition};
use serde::Serialize;

use crate::io::{self, MergeRecord};
use crate::pipeline::{mean_scores, Experiment, Method};
use crate::report::{sig4, two_decimals, RateRow, ReproduceReport};

#[derive(Debug, Parser)]
#[command(name = "fwlink", version, about = "Robust functional Ward's linkages for clustering curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one replicate of an experiment and write it to disk.
    Simulate(SimulateArgs),
    /// Cluster curves from a data directory.
    Cluster(ClusterArgs),
    /// Score predicted labels against the ground truth.
    Evaluate(EvaluateArgs),
    /// Run the simulate, cluster and evaluate loop over many replicates.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArtifactArg {
    Blink,
    Movement,
}

impl From<ArtifactArg> for ArtifactKind {
    fn from(a: ArtifactArg) -> Self {
        match a {
            ArtifactArg::Blink => ArtifactKind::EyeBlink,
            ArtifactArg::Movement => ArtifactKind::EyeMovement,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("kind").required(true).args(["model", "artifact"])))]
pub struct SimulateArgs {
    /// Outlier model of the curve experiment.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub model: Option<u8>,
    /// Artifact of the EEG experiment.
    #[arg(long, value_enum)]
    pub artifact: Option<ArtifactArg>,
    /// Per-curve contamination probability.
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long, default_value_t = 30)]
    pub curves_per_cluster: usize,
    #[arg(long, default_value_t = 4)]
    pub p_true: usize,
    /// Grid size of the curve experiment.
    #[arg(long, default_value_t = 200)]
    pub t_points: usize,
    /// Series length of the EEG experiment.
    #[arg(long, default_value_t = 1000)]
    pub n_t: usize,
    #[arg(long, env = "FWLINK_OUT", default_value = "fwlink-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Directory written by `simulate`, or any directory with curves.csv and grid.json.
    #[arg(long)]
    pub data: PathBuf,
    /// Cluster the smoothed log-periodograms (spectral.csv) instead of curves.csv.
    #[arg(long)]
    pub spectral: bool,
    /// Start from one initial cluster per curve instead of the cluster column.
    #[arg(long)]
    pub singletons: bool,
    /// One of ward, fward, ms, bd.
    #[arg(long, default_value = "ms")]
    pub linkage: String,
    #[arg(long, default_value_t = LinkageKind::DEFAULT_TAU)]
    pub tau: f64,
    /// Number of clusters to stop at.
    #[arg(long, required_unless_present = "scree")]
    pub p: Option<usize>,
    /// Write total within-cluster sum of squares for 1..=pmax clusters.
    #[arg(long)]
    pub scree: bool,
    #[arg(long, default_value_t = 12)]
    pub pmax: usize,
    /// Write the initial distance matrix.
    #[arg(long)]
    pub matrix: bool,
    #[arg(long, env = "FWLINK_OUT", default_value = "fwlink-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["truth", "batch"])))]
pub struct EvaluateArgs {
    /// CSV with id and label columns.
    #[arg(long, requires = "pred")]
    pub truth: Option<PathBuf>,
    #[arg(long, requires = "truth")]
    pub pred: Option<PathBuf>,
    /// Directory with one subdirectory per replicate, each holding truth.csv and labels.csv.
    #[arg(long, conflicts_with_all = ["truth", "pred"])]
    pub batch: Option<PathBuf>,
    #[arg(long, env = "FWLINK_OUT", default_value = "fwlink-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// exp1-model1, exp1-model2, exp1-model3, exp2-blink or exp2-movement.
    #[arg(long)]
    pub experiment: Experiment,
    /// Contamination rates.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.15, 0.2])]
    pub c: Vec<f64>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    /// Seed of the first replicate; replicate r uses seed + r.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = LinkageKind::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long, env = "FWLINK_OUT", default_value = "fwlink-out")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Cluster(args) => cluster(&args),
        Command::Evaluate(args) => evaluate(&args),
        Command::Reproduce(args) => reproduce(&args).map(|_| ()),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Debug, Serialize)]
struct SimulationConfig {
    experiment: String,
    c: f64,
    seed: u64,
    m: usize,
    curves_per_cluster: usize,
    p_true: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampling_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_frequency: Option<f64>,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        m: args.m,
        curves_per_cluster: args.curves_per_cluster,
        p_true: args.p_true,
        c: args.c,
        t_points: args.t_points,
        seed: args.seed,
    };
    cfg.validate()?;
    let out = &args.out;
    create_dir(out)?;

    let mut meta = SimulationConfig {
        experiment: String::new(),
        c: cfg.c,
        seed: cfg.seed,
        m: cfg.m,
        curves_per_cluster: cfg.curves_per_cluster,
        p_true: cfg.p_true,
        t_points: None,
        n_t: None,
        sampling_rate: None,
        max_frequency: None,
    };
    let (curves, spectral, initial, labels, contaminated) = match (args.model, args.artifact) {
        (Some(number), _) => {
            let model = OutlierModel::from_number(number)?;
            let sim = generate_model(model, &cfg)?;
            meta.experiment = Experiment::Model(model).name().into();
            meta.t_points = Some(cfg.t_points);
            let spectral = if model == OutlierModel::Covariance { Some(sim.spectral()?) } else { None };
            (sim.curves, spectral, sim.initial, sim.labels, sim.contaminated)
        }
        (None, Some(artifact)) => {
            let kind = ArtifactKind::from(artifact);
            let settings = EegSettings {
                n_t: args.n_t,
                ..EegSettings::new(kind)
            };
            let sim = generate_eeg_clusters(&cfg, &settings, &Ar2Source::eeg_sources(), &MIXTURE_WEIGHTS)?;
            meta.experiment = Experiment::Eeg(kind).name().into();
            meta.n_t = Some(settings.n_t);
            meta.sampling_rate = Some(settings.sampling_rate);
            meta.max_frequency = Some(settings.max_frequency);
            let spectral = sim.spectral()?;
            let n = settings.n_t;
            let span = (n - 1) as f64 / settings.sampling_rate;
            let grid = Arc::new(Grid::uniform(0.0, span, n)?);
            let rows = sim.series.iter().map(|s| s.values().to_vec()).collect();
            let curves = CurveSet::from_rows(grid, 0, rows)?;
            (curves, Some(spectral), sim.initial, sim.labels, sim.contaminated)
        }
        (None, None) => bail!("one of --model or --artifact is required"),
    };

    io::write_json(&out.join("config.json"), &meta)?;
    io::write_grid(&out.join("grid.json"), curves.grid())?;
    io::write_curves(&out.join("curves.csv"), &curves, &initial)?;
    if let Some(spectral) = &spectral {
        io::write_grid(&out.join("spectral_grid.json"), spectral.grid())?;
        io::write_curves(&out.join("spectral.csv"), spectral, &initial)?;
    }
    io::write_truth(&out.join("truth.csv"), &curves.ids(), &initial, &labels, &contaminated)?;
    let units: Vec<(usize, usize)> = (0..cfg.m).map(|i| (i, cfg.label_of_initial(i))).collect();
    io::write_labels(&out.join("units.csv"), ["id", "label"], &units)?;
    println!(
        "{}: {} curves in {} initial clusters, {} contaminated -> {}",
        meta.experiment,
        curves.len(),
        cfg.m,
        contaminated.iter().filter(|c| **c).count(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ResultBundle {
    linkage: String,
    tau: Option<f64>,
    p: Option<usize>,
    spectral: bool,
    singletons: bool,
    initial_clusters: Vec<usize>,
    merges: Vec<MergeRecord>,
    /// Label of each initial cluster, in `initial_clusters` order.
    labels: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    scree: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<Metrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data_config: Option<serde_json::Value>,
}

#[derive(Debug, Serialize)]
struct Metrics {
    ari: f64,
    sim: f64,
}

/// Curves of each flat cluster of `partition`.
fn flat_clusters(sets: &[CurveSet], partition: &Partition) -> Result<Vec<CurveSet>> {
    let mut groups: Vec<Option<CurveSet>> = vec![None; partition.num_clusters()];
    for (set, &label) in sets.iter().zip(partition.labels()) {
        let slot = &mut groups[label - 1];
        *slot = Some(match slot.take() {
            Some(acc) => acc.union(set)?,
            None => set.clone(),
        });
    }
    Ok(groups.into_iter().map(|g| g.expect("labels are 1..=p")).collect())
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    let kind = LinkageKind::from_name(&args.linkage, args.tau)?;
    let (curves_file, grid_file) = if args.spectral {
        ("spectral.csv", "spectral_grid.json")
    } else {
        ("curves.csv", "grid.json")
    };
    let grid = io::read_grid(&args.data.join(grid_file))?;
    let table = io::read_curves(&args.data.join(curves_file), grid)?;
    let (ids, sets) = if args.singletons { table.singletons() } else { table.initial_clusters() };
    let m = sets.len();
    if let Some(p) = args.p {
        ensure!((1..=m).contains(&p), "--p {p} is outside 1..={m}");
    }
    create_dir(&args.out)?;

    let (history, partition, scree) = if args.scree {
        let (history, root) = agglomerate(&sets, kind, None)?;
        let mut rows = Vec::new();
        for p in 1..=args.pmax.min(m) {
            let part = cut_history(&history, p)?;
            rows.push((p, within_cluster_ss(&flat_clusters(&sets, &part)?)?));
        }
        io::write_scree(&args.out.join("scree.csv"), &rows)?;
        let partition = match args.p {
            Some(p) => cut_history(&history, p)?,
            None => root,
        };
        (history, partition, rows)
    } else {
        let (history, partition) = agglomerate(&sets, kind, args.p)?;
        (history, partition, Vec::new())
    };
    let merges = io::merge_records(&history, &ids);
    io::write_json(&args.out.join("merges.json"), &merges)?;

    // Per-curve labels in file order.
    let mut curve_labels = Vec::with_capacity(table.set.len());
    for (set, &label) in sets.iter().zip(partition.labels()) {
        curve_labels.extend(set.ids().into_iter().map(|id| (id, label)));
    }
    let position: std::collections::HashMap<usize, usize> =
        table.set.ids().into_iter().enumerate().map(|(i, id)| (id, i)).collect();
    curve_labels.sort_by_key(|(id, _)| position[id]);
    io::write_labels(&args.out.join("labels.csv"), ["id", "label"], &curve_labels)?;

    if args.matrix {
        io::write_matrix(&args.out.join("distance.csv"), &ids, &distance_matrix(&sets, kind)?)?;
    }

    let truth_path = args.data.join("truth.csv");
    let metrics = if truth_path.exists() {
        let (g, a) = io::align(&io::read_labels(&truth_path)?, &curve_labels)?;
        Some(Metrics {
            ari: ari(&g, &a)?,
            sim: sim(&g, &a)?,
        })
    } else {
        None
    };
    let config_path = args.data.join("config.json");
    let data_config = if config_path.exists() { Some(io::read_json(&config_path)?) } else { None };

    let bundle = ResultBundle {
        linkage: kind.name().into(),
        tau: kind.tau(),
        p: args.p,
        spectral: args.spectral,
        singletons: args.singletons,
        initial_clusters: ids,
        merges,
        labels: partition.labels().to_vec(),
        scree,
        metrics,
        data_config,
    };
    io::write_json(&args.out.join("bundle.json"), &bundle)?;
    print!("{kind}: {} initial clusters -> {}", m, partition.num_clusters());
    if let Some(m) = &bundle.metrics {
        print!(" (ARI {}, SIM {})", two_decimals(m.ari), two_decimals(m.sim));
    }
    println!();
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    let mut score = |name: String, truth: &Path, pred: &Path| -> Result<()> {
        let (g, a) = io::align(&io::read_labels(truth)?, &io::read_labels(pred)?)
            .with_context(|| format!("aligning {} with {}", truth.display(), pred.display()))?;
        rows.push((name, ari(&g, &a)?, sim(&g, &a)?));
        Ok(())
    };
    match (&args.batch, &args.truth, &args.pred) {
        (Some(dir), _, _) => {
            let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            subdirs.retain(|p| p.join("truth.csv").exists() && p.join("labels.csv").exists());
            subdirs.sort();
            ensure!(!subdirs.is_empty(), "no replicate directories with truth.csv and labels.csv in {}", dir.display());
            for sub in subdirs {
                let name = sub.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                score(name, &sub.join("truth.csv"), &sub.join("labels.csv"))?;
            }
        }
        (None, Some(truth), Some(pred)) => score("1".into(), truth, pred)?,
        _ => bail!("give --truth and --pred, or --batch"),
    }

    let n = rows.len() as f64;
    let mean_ari = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let mean_sim = rows.iter().map(|r| r.2).sum::<f64>() / n;
    create_dir(&args.out)?;
    let mut csv = String::from("replicate,ari,sim\n");
    for (name, a, s) in &rows {
        csv.push_str(&format!("{name},{},{}\n", sig4(*a), sig4(*s)));
    }
    csv.push_str(&format!("mean,{},{}\n", sig4(mean_ari), sig4(mean_sim)));
    let path = args.out.join("metrics.csv");
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;

    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("replicate".len());
    println!("{:width$}  ARI   SIM", "replicate");
    for (name, a, s) in &rows {
        println!("{name:width$}  {}  {}", two_decimals(*a), two_decimals(*s));
    }
    println!("{:width$}  {}  {}", "mean", two_decimals(mean_ari), two_decimals(mean_sim));
    Ok(())
}

/// Runs the replicates and writes report.md and report.csv.
pub fn reproduce(args: &ReproduceArgs) -> Result<ReproduceReport> {
    for &c in &args.c {
        ensure!((0.0..1.0).contains(&c), "contamination rate {c} outside [0, 1)");
    }
    LinkageKind::ms(args.tau)?;
    let methods = Method::standard(args.tau).to_vec();
    let reps = args.reps as usize;
    let rows = args
        .c
        .iter()
        .map(|&c| {
            Ok(RateRow {
                c,
                scores: mean_scores(args.experiment, c, reps, args.seed, &methods)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = ReproduceReport {
        experiment: args.experiment,
        reps,
        seed: args.seed,
        tau: args.tau,
        methods,
        rows,
    };
    create_dir(&args.out)?;
    let text = report.render();
    fs::write(args.out.join("report.md"), &text)?;
    fs::write(args.out.join("report.csv"), report.csv())?;
    print!("{text}");
    Ok(report)
}
