//! `spectral-gnn`: train GCN or SIGN on a Cora-format corpus, or dump a
//! graph Laplacian spectrum.
//!
//! Failures print `{"error":{"kind":…,"message":…}}` on stderr and exit
//! nonzero (2 for usage errors, 1 otherwise).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use spectral_gnn::data::{load_cora, prepare, save_dataset_cache, SplitSpec};
use spectral_gnn::graph::{laplacian, read_edge_list};
use spectral_gnn::harness::{repeat_runs, write_results, ExportFormat, ModelKind};
use spectral_gnn::nn::TrainConfig;
use spectral_gnn::spectral::eigendecompose;
use spectral_gnn::LaplacianKind;

#[derive(Parser)]
#[command(name = "spectral-gnn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model over several seeds and export per-epoch results.
    Train(TrainArgs),
    /// Write the eigenvalues of a graph Laplacian as CSV.
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Gcn,
    Sign,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Cora,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Comb,
    Sym,
    Renorm,
}

#[derive(clap::Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "cora")]
    dataset: DatasetArg,
    /// Paper table: `id<TAB>features…<TAB>label` per line.
    #[arg(long)]
    content: PathBuf,
    /// Citation list: `cited<TAB>citing` per line.
    #[arg(long)]
    cites: PathBuf,
    /// JSON object of training options; missing keys keep the model defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// First seed; runs use `seed, seed + 1, …`. Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Also save the preprocessed dataset in the checkpoint container.
    #[arg(long)]
    write_cache: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SpectrumArgs {
    /// Whitespace-separated `u v [w]` lines.
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, value_enum, default_value = "comb")]
    kind: KindArg,
    /// Only the smallest `dim` eigenvalues.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Overlays the JSON object at `path` on the model's default configuration.
/// Unknown keys and wrongly typed values are errors.
fn load_config(kind: ModelKind, path: Option<&Path>) -> anyhow::Result<TrainConfig> {
    let defaults = kind.default_config();
    let Some(path) = path else {
        return Ok(defaults);
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let overrides: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(overrides) = overrides else {
        bail!("config {} must be a JSON object", path.display());
    };
    let mut merged = serde_json::to_value(&defaults)?;
    let target = merged.as_object_mut().expect("config serializes to an object");
    for (key, value) in overrides {
        target.insert(key, value);
    }
    let cfg: TrainConfig =
        serde_json::from_value(merged).with_context(|| format!("invalid config {}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let kind = match args.model {
        ModelArg::Gcn => ModelKind::Gcn,
        ModelArg::Sign => ModelKind::Sign,
    };
    let mut cfg = load_config(kind, args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let raw = match args.dataset {
        DatasetArg::Cora => load_cora(&args.content, &args.cites)?,
    };
    let ds = prepare(raw, SplitSpec::default())?;
    if let Some(path) = &args.write_cache {
        save_dataset_cache(&ds, path)?;
    }
    log::info!(
        "{} vertices, {} edges, {} features, {} classes",
        ds.n_vertices(),
        ds.graph.n_edges(),
        ds.n_features(),
        ds.n_classes()
    );
    let summary = repeat_runs(kind, &ds, &cfg, args.runs, cfg.seed)?;
    let format = match args.format {
        FormatArg::Json => ExportFormat::Json,
        FormatArg::Csv => ExportFormat::Csv,
    };
    write_results(&summary, output(args.out.as_deref())?, format)?;
    if args.out.is_some() {
        println!(
            "test accuracy {:.4} ± {:.4} over {} runs; train time {:.3} s ± {:.3} s",
            summary.mean_acc,
            summary.ci95_acc,
            summary.per_seed.len(),
            summary.mean_time_s,
            summary.ci95_time_s
        );
    }
    Ok(())
}

fn spectrum(args: SpectrumArgs) -> anyhow::Result<()> {
    let g = read_edge_list(&args.edges)?;
    let kind = match args.kind {
        KindArg::Comb => LaplacianKind::Combinatorial,
        KindArg::Sym => LaplacianKind::SymmetricNormalized,
        KindArg::Renorm => LaplacianKind::Renormalized,
    };
    let basis = eigendecompose(&laplacian(&g, kind)?, args.dim)?;
    let mut w = output(args.out.as_deref())?;
    writeln!(w, "index,eigenvalue")?;
    for (i, lambda) in basis.eigenvalues().iter().enumerate() {
        writeln!(w, "{i},{lambda:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<spectral_gnn::Error>() {
        return e.kind();
    }
    if err.downcast_ref::<serde_json::Error>().is_some() {
        return "config";
    }
    if err.downcast_ref::<io::Error>().is_some() {
        return "io";
    }
    "invalid_argument"
}

fn report(kind: &str, message: String) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            report("usage", e.to_string().trim_end().to_string());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Train(args) => train(args),
        Command::Spectrum(args) => spectrum(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(error_kind(&e), format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
