//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use coherent_graphs::benchmarks::{
    quadruple_gyre_graph, random_block_digraph, rotating_double_well, three_ring_graph,
    well_positions, BlockConfig, DoubleWellConfig, GyreConfig,
};
use coherent_graphs::clustering::{
    cluster_directed, cluster_temporal, cluster_undirected, suggest_k, Approach, ClusterAssignment,
    ClusterMethod, ClusterOptions,
};
use coherent_graphs::estimation::{convergence_study, Regularization};
use coherent_graphs::io::{
    infer_day_boundaries, load_contact_data, load_edge_list, load_matrix_market_with, load_temporal_dir,
    write_edge_list, write_temporal_dir, WeightMode,
};
use coherent_graphs::metrics::{coherence_ratio, forward_mass};
use coherent_graphs::operators::{forward_backward_matrix, snapshot_transitions, temporal_transition_matrix};
use coherent_graphs::{TemporalGraph, WeightedGraph};

use crate::manifest::{ManifestBuilder, RunManifest};
use crate::CliError;

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Mm,
    Edgelist,
    TemporalDir,
    Contacts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Undirected,
    Directed,
    TemporalA,
    TemporalB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Kmeans,
    Seba,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weights {
    AsIs,
    Absolute,
    Pattern,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    /// Graph file, snapshot directory or contact log.
    pub input: PathBuf,
    /// Input format; inferred from the path when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Number of clusters; the largest eigengap decides when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "kmeans")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "directed")]
    pub mode: Mode,
    /// Self-loop weight added to every vertex before normalization.
    #[arg(long = "self-loops", default_value_t = 1.0)]
    pub self_loops: f64,
    /// Tikhonov regularization for the data-driven estimate.
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    /// Number of random walks (temporal-a).
    #[arg(long)]
    pub walks: Option<usize>,
    /// Steps per random walk (temporal-a).
    #[arg(long = "walk-length")]
    pub walk_length: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Teleportation probability mixed into every transition matrix.
    #[arg(long)]
    pub teleport: Option<f64>,
    /// How Matrix Market values become edge weights.
    #[arg(long, value_enum, default_value = "as-is")]
    pub weights: Weights,
    /// Silence (seconds) separating days in a contact log.
    #[arg(long = "day-gap", default_value_t = 28_800)]
    pub day_gap: i64,
    /// Eigenvalues inspected for the eigengap suggestion.
    #[arg(long = "max-k", default_value_t = 20)]
    pub max_k: usize,
    /// Fraction of the column maximum needed for a SEBA assignment.
    #[arg(long = "seba-threshold", default_value_t = 0.5)]
    pub seba_threshold: f64,
    /// Output JSON path; eigenvalues go to the same stem with
    /// `.eigenvalues.csv`. Prints the JSON when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Input {
    Static(WeightedGraph),
    Temporal(TemporalGraph, Option<Vec<u64>>),
}

fn infer_format(path: &Path) -> Format {
    if path.is_dir() {
        Format::TemporalDir
    } else if path.extension().is_some_and(|e| e == "mtx") {
        Format::Mm
    } else {
        Format::Edgelist
    }
}

fn load_input(args: &ClusterArgs) -> CliResult<Input> {
    let format = args.format.unwrap_or_else(|| infer_format(&args.input));
    let directed = args.mode != Mode::Undirected;
    Ok(match format {
        Format::Mm => {
            let mode = match args.weights {
                Weights::AsIs => WeightMode::AsIs,
                Weights::Absolute => WeightMode::Absolute,
                Weights::Pattern => WeightMode::Pattern,
            };
            Input::Static(load_matrix_market_with(&args.input, mode)?)
        }
        Format::Edgelist => Input::Static(load_edge_list(&args.input, directed)?),
        Format::TemporalDir => Input::Temporal(load_temporal_dir(&args.input)?, None),
        Format::Contacts => {
            let days = infer_day_boundaries(&args.input, args.day_gap)?;
            let data = load_contact_data(&args.input, &days)?;
            Input::Temporal(data.graph, Some(data.ids))
        }
    })
}

fn check_cluster_args(args: &ClusterArgs) -> CliResult {
    if args.k == Some(0) {
        return Err(CliError::Usage("--k must be positive".into()));
    }
    if !(args.self_loops >= 0.0) {
        return Err(CliError::Usage("--self-loops must be nonnegative".into()));
    }
    if args.mode == Mode::TemporalA {
        if args.walks.is_none() {
            return Err(CliError::Usage("--mode temporal-a requires --walks".into()));
        }
        if args.walk_length.is_none() {
            return Err(CliError::Usage("--mode temporal-a requires --walk-length".into()));
        }
        if !(args.epsilon > 0.0) {
            return Err(CliError::Usage("--epsilon must be positive".into()));
        }
    }
    if !(0.0..=1.0).contains(&args.seba_threshold) {
        return Err(CliError::Usage("--seba-threshold must lie in [0, 1]".into()));
    }
    Ok(())
}

fn run_pipeline(args: &ClusterArgs, input: &Input, k: usize, opts: &ClusterOptions) -> CliResult<ClusterAssignment> {
    let assignment = match (args.mode, input) {
        (Mode::Undirected, Input::Static(g)) => {
            if g.is_directed() {
                return Err(CliError::Usage(
                    "--mode undirected needs a symmetric graph; use --mode directed".into(),
                ));
            }
            cluster_undirected(&g.add_self_loops(args.self_loops)?, k, opts)?
        }
        (Mode::Directed, Input::Static(g)) => cluster_directed(g, k, args.self_loops, opts)?,
        (Mode::Undirected | Mode::Directed, Input::Temporal(..)) => {
            return Err(CliError::Usage(
                "temporal input needs --mode temporal-a or --mode temporal-b".into(),
            ))
        }
        (Mode::TemporalA | Mode::TemporalB, input) => {
            let single;
            let tg = match input {
                Input::Temporal(tg, _) => tg,
                Input::Static(g) => {
                    single = TemporalGraph::new(vec![g.clone()])?;
                    &single
                }
            };
            let approach = if args.mode == Mode::TemporalA {
                Approach::RandomWalks {
                    walks: args.walks.expect("checked"),
                    length: args.walk_length.expect("checked"),
                    epsilon: args.epsilon,
                    seed: args.seed,
                }
            } else {
                Approach::TransitionProduct
            };
            cluster_temporal(tg, k, approach, args.self_loops, opts)?
        }
    };
    Ok(assignment)
}

fn vertex_count(input: &Input) -> usize {
    match input {
        Input::Static(g) => g.n(),
        Input::Temporal(tg, _) => tg.n(),
    }
}

fn write_text(path: &Path, contents: &str) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn to_pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n"
}

fn with_manifest(mut record: serde_json::Value, manifest: RunManifest) -> serde_json::Value {
    record["manifest"] = serde_json::to_value(manifest).expect("manifest serializes");
    record
}

pub fn cluster(args: &ClusterArgs) -> CliResult {
    check_cluster_args(args)?;
    let mut manifest = ManifestBuilder::new("cluster", args, Some(args.seed));
    manifest.input(&args.input)?;
    let input = load_input(args)?;
    let n = vertex_count(&input);

    let mut opts = ClusterOptions {
        method: match args.method {
            Method::Kmeans => ClusterMethod::KMeans,
            Method::Seba => ClusterMethod::Seba,
        },
        seed: args.seed,
        teleport: args.teleport,
        ..Default::default()
    };
    opts.seba.threshold = args.seba_threshold;
    opts.eigen.seed = args.seed;

    let k = match args.k {
        Some(k) => {
            if k > n {
                return Err(CliError::Usage(format!("--k {k} exceeds the vertex count {n}")));
            }
            k
        }
        None => {
            let probe_k = args.max_k.clamp(2, n.max(2)).min(n);
            if probe_k < 2 {
                return Err(CliError::Usage("graph too small to suggest k; pass --k".into()));
            }
            let probe = ClusterOptions {
                method: ClusterMethod::KMeans,
                ..opts.clone()
            };
            let spectrum = run_pipeline(args, &input, probe_k, &probe)?;
            let k = suggest_k(spectrum.eigenvalues())?;
            eprintln!("suggested k = {k} (largest gap among the top {probe_k} eigenvalues)");
            k
        }
    };

    let assignment = run_pipeline(args, &input, k, &opts)?;
    let mut record: serde_json::Value = serde_json::from_str(&assignment.to_json()?)
        .map_err(coherent_graphs::Error::from)?;
    if let Input::Temporal(_, Some(ids)) = &input {
        record["vertex_ids"] = json!(ids);
    }
    let record = with_manifest(record, manifest.finish());

    match &args.out {
        Some(out) => {
            write_text(out, &to_pretty(&record))?;
            let mut csv = String::from("index,eigenvalue\n");
            for (i, l) in assignment.eigenvalues().iter().enumerate() {
                csv += &format!("{},{:?}\n", i + 1, l);
            }
            write_text(&out.with_extension("eigenvalues.csv"), &csv)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(to_pretty(&record).as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkName {
    ThreeRing,
    Blocks,
    DoubleWell,
    Gyre,
}

#[derive(Debug, Args, Serialize)]
pub struct DoubleWellFlags {
    #[arg(long = "ring-size", default_value_t = 12)]
    pub ring_size: usize,
    #[arg(long = "well-width", default_value_t = 6)]
    pub well_width: usize,
    #[arg(long = "well-offset", default_value_t = 2)]
    pub well_offset: usize,
    #[arg(long = "rotation-period", default_value_t = 10)]
    pub rotation_period: usize,
    #[arg(long = "rotation-step", default_value_t = 1)]
    pub rotation_step: usize,
    #[arg(long = "total-steps", default_value_t = 100)]
    pub total_steps: usize,
}

impl DoubleWellFlags {
    fn config(&self) -> DoubleWellConfig {
        DoubleWellConfig {
            ring_size: self.ring_size,
            well_width: self.well_width,
            well_offset: self.well_offset,
            rotation_period: self.rotation_period,
            rotation_step: self.rotation_step,
            total_steps: self.total_steps,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkArgs {
    #[arg(value_enum)]
    pub name: BenchmarkName,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the random block graph.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 10)]
    pub blocks: usize,
    #[arg(long = "block-size", default_value_t = 10)]
    pub block_size: usize,
    #[arg(long = "intra-density", default_value_t = 0.5)]
    pub intra_density: f64,
    #[arg(long = "inter-edges", default_value_t = 2)]
    pub inter_edges: usize,

    #[command(flatten)]
    pub double_well: DoubleWellFlags,

    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    pub omega: f64,
    #[arg(long = "boxes-per-axis", default_value_t = 10)]
    pub boxes_per_axis: usize,
    #[arg(long = "points-per-box", default_value_t = 16)]
    pub points_per_box: usize,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub substeps: usize,
    /// Use `g(t, x, y)` for the y-velocity instead of `g(t, y, x)`; the field is then degenerate.
    #[arg(long)]
    pub literal_field: bool,
}

fn write_ground_truth(dir: &Path, labels: &[Option<usize>]) -> CliResult {
    write_text(&dir.join("ground_truth.json"), &to_pretty(&json!({ "labels": labels })))
}

pub fn benchmark(args: &BenchmarkArgs) -> CliResult {
    let manifest = ManifestBuilder::new("benchmark", args, Some(args.seed));
    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match args.name {
        BenchmarkName::ThreeRing => {
            write_edge_list(&three_ring_graph(), out.join("graph.tsv"))?;
            let labels: Vec<Option<usize>> = (0..12).map(|i| Some(i / 4)).collect();
            write_ground_truth(out, &labels)?;
        }
        BenchmarkName::Blocks => {
            let cfg = BlockConfig {
                blocks: args.blocks,
                block_size: args.block_size,
                intra_density: args.intra_density,
                inter_edges_per_block: args.inter_edges,
            };
            let (g, labels) = random_block_digraph(&cfg, args.seed)?;
            write_edge_list(&g, out.join("graph.tsv"))?;
            write_ground_truth(out, &labels.into_iter().map(Some).collect::<Vec<_>>())?;
        }
        BenchmarkName::DoubleWell => {
            let cfg = args.double_well.config();
            let tg = rotating_double_well(&cfg)?;
            write_temporal_dir(&tg, out)?;
            let wells = well_positions(&cfg, 0);
            let half = cfg.ring_size / 2;
            let first = cfg.well_offset % cfg.ring_size;
            let labels: Vec<Option<usize>> = (0..cfg.n())
                .map(|v| {
                    let p = v / 2;
                    wells.contains(&p).then(|| usize::from((p + cfg.ring_size - first) % cfg.ring_size >= half))
                })
                .collect();
            write_ground_truth(out, &labels)?;
        }
        BenchmarkName::Gyre => {
            let cfg = GyreConfig {
                delta: args.delta,
                omega: args.omega,
                boxes_per_axis: args.boxes_per_axis,
                points_per_box: args.points_per_box,
                tau: args.tau,
                steps: args.steps,
                substeps: args.substeps,
                literal_field: args.literal_field,
            };
            let (tg, centers) = quadruple_gyre_graph(&cfg)?;
            write_temporal_dir(&tg, out)?;
            let mut csv = String::from("box,x,y\n");
            for (i, (x, y)) in centers.iter().enumerate() {
                csv += &format!("{i},{x:?},{y:?}\n");
            }
            write_text(&out.join("box_centers.csv"), &csv)?;
            let labels: Vec<Option<usize>> = centers
                .iter()
                .map(|&(x, y)| Some(usize::from(x >= 1.0) + 2 * usize::from(y >= 1.0)))
                .collect();
            write_ground_truth(out, &labels)?;
        }
    }
    write_text(
        &out.join("manifest.json"),
        &to_pretty(&serde_json::to_value(manifest.finish()).expect("manifest serializes")),
    )
}

#[derive(Debug, Args, Serialize)]
pub struct LeakageArgs {
    /// Snapshot directory.
    pub input: PathBuf,
    /// Cluster assignment JSON written by `cluster`.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long = "self-loops", default_value_t = 1.0)]
    pub self_loops: f64,
    /// Output directory for `leakage.json` and `forward_mass.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn leakage(args: &LeakageArgs) -> CliResult {
    let mut manifest = ManifestBuilder::new("leakage", args, None);
    manifest.input(&args.input)?;
    manifest.input(&args.labels)?;
    let tg = load_temporal_dir(&args.input)?;
    let text = fs::read_to_string(&args.labels).map_err(|e| CliError::io(&args.labels, e))?;
    let assignment = ClusterAssignment::from_json(&text)?;
    if assignment.n() != tg.n() {
        return Err(CliError::Usage(format!(
            "{} has {} labels for {} vertices",
            args.labels.display(),
            assignment.n(),
            tg.n()
        )));
    }

    let q = forward_backward_matrix(&temporal_transition_matrix(&tg, args.self_loops, None)?)?;
    let report = coherence_ratio(&q, &assignment)?;
    let mass = forward_mass(&tg, &assignment, args.self_loops)?;
    let k = assignment.num_clusters();

    let retained: Vec<Vec<f64>> = (0..=mass.steps()).map(|t| mass.retained(t)).collect();
    let last = mass.cluster_mass(mass.steps());
    let final_mass: Vec<Vec<f64>> = (0..k).map(|c| (0..k).map(|d| last[(c, d)]).collect()).collect();
    let record = json!({
        "coherence": report,
        "retained": retained,
        "final_cluster_mass": final_mass,
    });
    let out = &args.out;
    write_text(&out.join("leakage.json"), &to_pretty(&with_manifest(record, manifest.finish())))?;

    let mut csv = String::from("t,cluster");
    for d in 0..k {
        csv += &format!(",to_{d}");
    }
    csv += ",to_unassigned\n";
    for t in 0..=mass.steps() {
        let m = mass.cluster_mass(t);
        for c in 0..k {
            let assigned: f64 = (0..k).map(|d| m[(c, d)]).sum();
            csv += &format!("{t},{c}");
            for d in 0..k {
                csv += &format!(",{:?}", m[(c, d)]);
            }
            csv += &format!(",{:?}\n", (1.0 - assigned).max(0.0));
        }
    }
    write_text(&out.join("forward_mass.csv"), &csv)
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergenceArgs {
    /// Comma-separated, strictly ascending walker counts.
    #[arg(long = "m-grid", value_delimiter = ',', required = true, num_args = 1..)]
    pub m_grid: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Steps per walk; defaults to the schedule length.
    #[arg(long = "walk-length")]
    pub walk_length: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "self-loops", default_value_t = 1.0)]
    pub self_loops: f64,
    #[command(flatten)]
    pub double_well: DoubleWellFlags,
    /// Output CSV; the manifest and reference value go to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn convergence(args: &ConvergenceArgs) -> CliResult {
    if args.m_grid.is_empty() {
        return Err(CliError::Usage("--m-grid must list at least one walker count".into()));
    }
    if args.m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("--m-grid must be strictly ascending".into()));
    }
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    if !(args.epsilon > 0.0) {
        return Err(CliError::Usage("--epsilon must be positive".into()));
    }
    let manifest = ManifestBuilder::new("convergence", args, Some(args.seed));
    let cfg = args.double_well.config();
    let tg = rotating_double_well(&cfg)?;
    let schedule = snapshot_transitions(&tg, args.self_loops, None)?;
    let length = args.walk_length.unwrap_or(cfg.total_steps);
    let study = convergence_study(
        &schedule,
        &args.m_grid,
        length,
        args.trials,
        args.seed,
        Regularization::Tikhonov(args.epsilon),
    )?;

    let mut csv = String::from("m,mean_error,std_error\n");
    for r in &study.rows {
        csv += &format!("{},{:?},{:?}\n", r.m, r.mean_error, r.std_error);
    }
    write_text(&args.out, &csv)?;
    let record = json!({ "reference": study.reference, "rows": study.rows });
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".json");
    write_text(Path::new(&sidecar), &to_pretty(&with_manifest(record, manifest.finish())))
}
