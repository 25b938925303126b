//! `cwlk` — one binary exposing the whole pipeline: relabeling dumps,
//! synthetic corpus generation, kernel matrices, train/evaluate runs, and
//! scaling benchmarks. Every subcommand is deterministic given its flags and
//! seeds (bench durations excepted).
//!
//! Exit codes are a stable contract: 0 success, 1 parse error, 2 validation
//! error (also clap usage errors), 3 single-class training set, 4 anything
//! else (I/O, bad bench or generator config).

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cwlk_core::bench::{feature_growth, run_scaling, write_growth_csv, BenchError};
use cwlk_core::classifier::{TrainError, LAMBDA_GRID};
use cwlk_core::graph::{DatasetManifest, LoadError, LoadOptions, Prg};
use cwlk_core::kernel::{featurize_corpus, kernel_matrix, write_feature_vectors};
use cwlk_core::pipeline::{self, LoadOptionsCopy, PipelineConfig, PipelineError};
use cwlk_core::synth::{generate_corpus, write_corpus, SynthConfig, SynthError};
use cwlk_core::{Mode, Relabeler, VOCAB_FORMAT_VERSION};

fn version_string() -> String {
    format!("{} (vocab-format {})", env!("CARGO_PKG_VERSION"), VOCAB_FORMAT_VERSION)
}

#[derive(Parser)]
#[command(name = "cwlk", version = version_string(), about = "Contextual Weisfeiler-Lehman graph kernel pipeline")]
struct Cli {
    /// JSON config file; command-line flags win over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Base seed for models and generators [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Kernel height (number of relabeling iterations, 0..=5) [default: 2]
    #[arg(long = "h", global = true, value_parser = clap::value_parser!(u8).range(0..=5))]
    h: Option<u8>,
    /// Label mode: wl or contextual [default: contextual]
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Output directory [default: out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for featurization and matrix fill [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Inject the sentinel context "default" into nodes without contexts.
    #[arg(long, global = true)]
    inject_default_context: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the per-iteration raw-label dump of one graph.
    Relabel {
        /// Graph-JSON file.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a planted-context synthetic corpus plus its manifest.
    Synth {
        /// Full generator config as JSON (flags still win).
        #[arg(long)]
        synth_config: Option<PathBuf>,
        /// Graphs per class.
        #[arg(long)]
        n_per_class: Option<u32>,
        /// Node count range, e.g. 50,150.
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<u32>>,
        /// Edges per node.
        #[arg(long)]
        edge_factor: Option<f64>,
        /// Context flip probability for background nodes.
        #[arg(long)]
        noise: Option<f64>,
        /// Corpus name written into the manifest.
        #[arg(long)]
        name: Option<String>,
        /// Use call-graph scale node counts (558-2554) instead of desk scale.
        #[arg(long)]
        paper_scale: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the corpus kernel matrix (CSV, header row of graph ids).
    Kernel {
        /// Dataset manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Also write the sparse feature-vector text file.
        #[arg(long)]
        emit_features: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Split, featurize, cross-validate, train, and evaluate.
    Pipeline {
        /// Dataset manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Average results over this many seeded re-splits [default: 1]
        #[arg(long)]
        repeat: Option<u32>,
        /// Fixed regularization strength; skips the cross-validation grid.
        #[arg(long)]
        lambda: Option<f64>,
        /// Training epochs [default: 20]
        #[arg(long)]
        epochs: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Measure relabeling runtime scaling and/or vocabulary growth.
    Bench {
        /// Edge counts for the scaling run, e.g. 1000,2000,4000.
        #[arg(long, value_delimiter = ',')]
        edges: Option<Vec<u64>>,
        /// Seeds cycled across scaling graphs [default: the global seed]
        #[arg(long, value_delimiter = ',')]
        bench_seeds: Option<Vec<u64>>,
        /// Manifest whose corpus feeds the feature-growth table.
        #[arg(long)]
        growth_manifest: Option<PathBuf>,
        /// Maximum height for feature growth [default: the global --h]
        #[arg(long)]
        h_max: Option<u8>,
        #[command(flatten)]
        common: Common,
    },
}

/// Flat key set accepted from `--config`; each key backs the flag of the
/// same name.
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    h: Option<u8>,
    mode: Option<Mode>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    inject_default_context: Option<bool>,
    graph: Option<PathBuf>,
    manifest: Option<PathBuf>,
    synth_config: Option<PathBuf>,
    n_per_class: Option<u32>,
    nodes: Option<Vec<u32>>,
    edge_factor: Option<f64>,
    noise: Option<f64>,
    name: Option<String>,
    paper_scale: Option<bool>,
    repeat: Option<u32>,
    lambda: Option<f64>,
    epochs: Option<u32>,
    edges: Option<Vec<u64>>,
    bench_seeds: Option<Vec<u64>>,
    growth_manifest: Option<PathBuf>,
    h_max: Option<u8>,
    emit_features: Option<bool>,
}

#[derive(Debug)]
enum CliError {
    Parse(String),
    Validation(String),
    SingleClass,
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Validation(_) => 2,
            CliError::SingleClass => 3,
            CliError::Other(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Validation(m) | CliError::Other(m) => write!(f, "{m}"),
            CliError::SingleClass => write!(f, "training set contains a single class"),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Parse(p) => CliError::Parse(p.to_string()),
            LoadError::Validation(v) => CliError::Validation(v.to_string()),
            LoadError::Io(io) => CliError::Other(io.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Load(l) => l.into(),
            PipelineError::Train(TrainError::SingleClassTraining) => CliError::SingleClass,
            PipelineError::Train(t) => CliError::Validation(t.to_string()),
            PipelineError::Eval(v) => CliError::Validation(v.to_string()),
            PipelineError::Kernel(k) => CliError::Other(k.to_string()),
            PipelineError::Io(io) => CliError::Other(io.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Flag value, else config-file value, else default.
fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

struct Resolved {
    seed: u64,
    h: usize,
    mode: Mode,
    out: PathBuf,
    load: LoadOptions,
}

fn resolve_common(common: &Common, file: &FileConfig) -> Result<Resolved, CliError> {
    if let Some(threads) = common.threads.or(file.threads) {
        // Later subcommand work shares the global pool; ignore re-init.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(Resolved {
        seed: pick(common.seed, file.seed, 42),
        h: pick(common.h, file.h, 2) as usize,
        mode: pick(common.mode, file.mode, Mode::Contextual),
        out: pick(common.out.clone(), file.out.clone(), PathBuf::from("out")),
        load: LoadOptions {
            inject_default_context: common.inject_default_context
                || file.inject_default_context.unwrap_or(false),
        },
    })
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Other(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Parse(format!("config {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>, CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(std::fs::File::create(path)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_file_config(cli.config.as_deref())?;
    match cli.command {
        Command::Relabel { graph, common } => {
            let rc = resolve_common(&common, &file)?;
            let graph_path = graph
                .or(file.graph.clone())
                .ok_or_else(|| CliError::Validation("relabel needs --graph".into()))?;
            cmd_relabel(&graph_path, &rc)
        }
        Command::Synth {
            synth_config,
            n_per_class,
            nodes,
            edge_factor,
            noise,
            name,
            paper_scale,
            common,
        } => {
            let rc = resolve_common(&common, &file)?;
            let mut cfg = match synth_config.or(file.synth_config.clone()) {
                Some(path) => {
                    let bytes = std::fs::read(&path).map_err(|e| {
                        CliError::Other(format!("cannot read {}: {e}", path.display()))
                    })?;
                    serde_json::from_slice::<SynthConfig>(&bytes)
                        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
                }
                None => SynthConfig::default(),
            };
            cfg.seed = pick(common.seed, file.seed, cfg.seed);
            if let Some(n) = n_per_class.or(file.n_per_class) {
                cfg.n_per_class = n;
            }
            if let Some(range) = nodes.or(file.nodes.clone()) {
                let [min, max]: [u32; 2] = range
                    .try_into()
                    .map_err(|_| CliError::Validation("--nodes takes exactly min,max".into()))?;
                cfg.node_count_range = [min, max];
            }
            if let Some(f) = edge_factor.or(file.edge_factor) {
                cfg.edge_factor = f;
            }
            if let Some(p) = noise.or(file.noise) {
                cfg.noise_context_flip_prob = p;
            }
            if let Some(n) = name.or(file.name.clone()) {
                cfg.name = n;
            }
            if paper_scale || file.paper_scale.unwrap_or(false) {
                cfg = cfg.paper_scale();
            }
            cmd_synth(&cfg, &rc)
        }
        Command::Kernel { manifest, emit_features, common } => {
            let rc = resolve_common(&common, &file)?;
            let manifest_path = manifest
                .or(file.manifest.clone())
                .ok_or_else(|| CliError::Validation("kernel needs --manifest".into()))?;
            cmd_kernel(&manifest_path, emit_features || file.emit_features.unwrap_or(false), &rc)
        }
        Command::Pipeline { manifest, repeat, lambda, epochs, common } => {
            let rc = resolve_common(&common, &file)?;
            let manifest_path = manifest
                .or(file.manifest.clone())
                .ok_or_else(|| CliError::Validation("pipeline needs --manifest".into()))?;
            let cfg = PipelineConfig {
                h: rc.h,
                mode: rc.mode,
                repeats: pick(repeat, file.repeat, 1).max(1),
                seed: rc.seed,
                epochs: pick(epochs, file.epochs, 20),
                lambda_grid: match lambda.or(file.lambda) {
                    Some(l) => vec![l],
                    None => LAMBDA_GRID.to_vec(),
                },
                folds: 5,
                load: LoadOptionsCopy { inject_default_context: rc.load.inject_default_context },
            };
            cmd_pipeline(&manifest_path, &cfg, &rc)
        }
        Command::Bench { edges, bench_seeds, growth_manifest, h_max, common } => {
            let rc = resolve_common(&common, &file)?;
            let edges = edges.or(file.edges.clone());
            let growth = growth_manifest.or(file.growth_manifest.clone());
            let seeds = bench_seeds.or(file.bench_seeds.clone()).unwrap_or(vec![rc.seed]);
            let h_max = pick(h_max, file.h_max, rc.h as u8) as usize;
            cmd_bench(edges.as_deref(), &seeds, growth.as_deref(), h_max, &rc)
        }
    }
}

fn cmd_relabel(graph_path: &Path, rc: &Resolved) -> Result<(), CliError> {
    let g = Prg::load_path(graph_path, &rc.load)?;
    let mut relabeler = Relabeler::new();
    let stem = graph_path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
    let seq = match rc.mode {
        Mode::Wl => relabeler.wl_relabel(&g, stem, rc.h),
        Mode::Contextual => relabeler.contextual_relabel(&g, stem, rc.h),
    };
    let dump_path = rc.out.join(format!("{stem}.relabel.txt"));
    let mut sink = create(&dump_path)?;
    relabeler.write_dump(&seq, &g, rc.mode, &mut sink)?;
    sink.flush()?;
    println!("{}", dump_path.display());
    Ok(())
}

fn cmd_synth(cfg: &SynthConfig, rc: &Resolved) -> Result<(), CliError> {
    let (corpus, manifest) = generate_corpus(cfg)?;
    let manifest_path = write_corpus(&rc.out, &corpus, &manifest)?;
    println!("{} graphs + {}", corpus.len(), manifest_path.display());
    Ok(())
}

fn load_manifest_corpus(
    manifest_path: &Path,
    load: &LoadOptions,
) -> Result<(DatasetManifest, Vec<Prg>, Vec<String>), CliError> {
    let manifest = DatasetManifest::load_path(manifest_path)?;
    let base_dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let corpus = pipeline::load_corpus(&manifest, base_dir, load).map_err(CliError::from)?;
    let ids = manifest.entries.iter().map(|e| e.path.clone()).collect();
    Ok((manifest, corpus, ids))
}

fn cmd_kernel(manifest_path: &Path, emit_features: bool, rc: &Resolved) -> Result<(), CliError> {
    let (_, corpus, ids) = load_manifest_corpus(manifest_path, &rc.load)?;
    let matrix = kernel_matrix(&corpus, Some(&ids), rc.h, rc.mode);
    let csv_path = rc.out.join(format!("kernel_{}_h{}.csv", rc.mode, rc.h));
    let mut sink = create(&csv_path)?;
    matrix.write_csv(&mut sink)?;
    sink.flush()?;
    println!("{}", csv_path.display());
    if emit_features {
        let (_, _, vectors) = featurize_corpus(&corpus, Some(&ids), rc.h, rc.mode);
        let feat_path = rc.out.join(format!("features_{}_h{}.txt", rc.mode, rc.h));
        let mut sink = create(&feat_path)?;
        write_feature_vectors(&vectors, &mut sink)?;
        sink.flush()?;
        println!("{}", feat_path.display());
    }
    Ok(())
}

fn cmd_pipeline(manifest_path: &Path, cfg: &PipelineConfig, rc: &Resolved) -> Result<(), CliError> {
    let outcome = pipeline::run_from_manifest_path(manifest_path, cfg)?;
    let (model_path, report_path) = outcome.write_artifacts(&rc.out)?;
    println!(
        "mode={} h={} repeats={} mean P={:.4} R={:.4} F={:.4}",
        outcome.mode,
        outcome.h,
        outcome.repeats.len(),
        outcome.mean_precision,
        outcome.mean_recall,
        outcome.mean_f_measure
    );
    println!("{}", model_path.display());
    println!("{}", report_path.display());
    Ok(())
}

fn cmd_bench(
    edges: Option<&[u64]>,
    seeds: &[u64],
    growth_manifest: Option<&Path>,
    h_max: usize,
    rc: &Resolved,
) -> Result<(), CliError> {
    if edges.is_none() && growth_manifest.is_none() {
        return Err(CliError::Other(
            "bench needs --edges (scaling) and/or --growth-manifest (feature growth)".into(),
        ));
    }
    if let Some(edges) = edges {
        let report = run_scaling(seeds, edges, rc.h)?;
        let csv_path = rc.out.join(format!("scaling_h{}.csv", rc.h));
        report.write_csv(&mut create(&csv_path)?)?;
        let json_path = rc.out.join(format!("scaling_h{}.json", rc.h));
        report.write_json(&mut create(&json_path)?)?;
        let dat_path = rc.out.join(format!("scaling_h{}.dat", rc.h));
        report.write_gnuplot(&mut create(&dat_path)?)?;
        println!("{}", csv_path.display());
        if let Some(slope) = report.loglog_slope {
            println!("loglog_slope={slope:.3}");
        }
    }
    if let Some(manifest_path) = growth_manifest {
        let (_, corpus, _) = load_manifest_corpus(manifest_path, &rc.load)?;
        let rows = feature_growth(&corpus, h_max);
        let growth_path = rc.out.join(format!("growth_h{h_max}.csv"));
        write_growth_csv(&rows, &mut create(&growth_path)?)?;
        println!("{}", growth_path.display());
    }
    Ok(())
}
