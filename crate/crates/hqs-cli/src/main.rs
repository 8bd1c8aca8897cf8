//! Command-line front end for the hierarchy evaluation library.
//!
//! Exit codes: 0 success, 2 input or validation failure (bad flags,
//! unreadable files, malformed or inconsistent inputs), 3 internal
//! numeric failure (a non-finite value surfaced during scoring).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hqs::analysis::{deepest_optimal_depth, depth_maximizing_growth, AnalysisParams};
use hqs::corpus::{build_average_link_hierarchy, load_catalogue, Catalogue};
use hqs::guidance::{SimilarityKind, TemperatureSchedule};
use hqs::hierarchy::Hierarchy;
use hqs::metrics::{evaluate, hai, report_to_csv, report_to_json, EvalOptions};
use hqs::pomdp::PomdpConfig;
use hqs::EvalError;

#[derive(Parser)]
#[command(
    name = "hqs",
    version,
    about = "Score hierarchical clusterings by simulating a guided searcher"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a hierarchy against an item catalogue and report per-item
    /// search traces.
    Evaluate(EvaluateArgs),
    /// Pairwise-distance agreement between two hierarchies over the
    /// same items.
    Hai(HaiArgs),
    /// Build an average-link agglomerative hierarchy from a catalogue.
    BuildAc(BuildAcArgs),
    /// Closed-form value model: optimal search depth for a belief decay
    /// and reward growth rate, plus the sampled value curve as CSV.
    AnalyzeReward(AnalyzeRewardArgs),
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Hierarchy JSON file.
    #[arg(long)]
    hierarchy: PathBuf,
    /// Item catalogue: JSONL of {"id", "text"} or {"id", "vector"} records.
    #[arg(long)]
    items: PathBuf,
    /// Similarity driving the searcher's guidance.
    #[arg(long, value_enum, default_value_t = SimilarityArg::AvgCosine)]
    similarity: SimilarityArg,
    /// Softmax temperature at the root.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Per-level temperature multiplier.
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// Fraction of items to score, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    sample_frac: f64,
    /// Sampling seed; only meaningful with --sample-frac below 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write the full report here; without it only the summary line is
    /// produced.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format for --out.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Drop per-item traces from the report.
    #[arg(long)]
    summary_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    /// Mean cosine to the cluster's members, excluding the item itself.
    AvgCosine,
    /// Inverse squared Euclidean distance to the cluster centroid.
    InvSqEuclid,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct HaiArgs {
    /// First hierarchy JSON file.
    hierarchy_a: PathBuf,
    /// Second hierarchy JSON file.
    hierarchy_b: PathBuf,
}

#[derive(clap::Args)]
struct BuildAcArgs {
    /// Item catalogue to cluster.
    #[arg(long)]
    items: PathBuf,
    /// Where to write the hierarchy JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct AnalyzeRewardArgs {
    /// Per-level belief retention, in (0, 1).
    #[arg(long)]
    gamma: f64,
    /// Reward growth rate relative to the belief decay.
    #[arg(long, conflicts_with = "optimal_g")]
    g: Option<f64>,
    /// Use the growth rate that maximizes the optimal depth.
    #[arg(long)]
    optimal_g: bool,
    /// Depth range of the emitted value curve.
    #[arg(long, default_value_t = 5.0)]
    ell_max: f64,
    /// Number of curve intervals (rows minus one).
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Write the curve CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError {
            code: if e.is_numeric() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Hai(args) => cmd_hai(args),
        Command::BuildAc(args) => cmd_build_ac(args),
        Command::AnalyzeReward(args) => cmd_analyze_reward(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn load_hierarchy(path: &Path) -> Result<Hierarchy, CliError> {
    let text = read_file(path)?;
    let (hierarchy, warnings) = Hierarchy::parse_with_warnings(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(hierarchy)
}

fn load_items(path: &Path) -> Result<Catalogue, CliError> {
    let text = read_file(path)?;
    load_catalogue(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let hierarchy = load_hierarchy(&args.hierarchy)?;
    let catalogue = load_items(&args.items)?;
    let schedule = TemperatureSchedule::new(args.delta, args.nu)?;
    let similarity = match args.similarity {
        SimilarityArg::AvgCosine => SimilarityKind::AverageCosineExcludingSelf,
        SimilarityArg::InvSqEuclid => SimilarityKind::InverseSquaredEuclideanToCentroid,
    };
    let config = PomdpConfig {
        schedule,
        similarity,
    };
    let options = EvalOptions {
        fraction: args.sample_frac,
        seed: args.seed,
        workers: args.workers,
    };
    let mut report = evaluate(&hierarchy, &catalogue, &config, &options)?;
    eprintln!(
        "timing: scored {} items in {:.1} ms",
        report.n_items_evaluated,
        report.wall_time.as_secs_f64() * 1e3
    );
    if args.summary_only {
        report.per_item.clear();
    }
    if let Some(out) = &args.out {
        let rendered = match args.format {
            FormatArg::Json => report_to_json(&report),
            FormatArg::Csv => report_to_csv(&report),
        };
        write_file(out, &rendered)?;
    }
    println!(
        "HQS={:.6} over {}/{} items",
        report.hqs, report.n_items_evaluated, report.n_items_total
    );
    Ok(())
}

fn cmd_hai(args: HaiArgs) -> Result<(), CliError> {
    let a = load_hierarchy(&args.hierarchy_a)?;
    let b = load_hierarchy(&args.hierarchy_b)?;
    let score = hai(&a, &b)?;
    println!("HAI={score:.6}");
    Ok(())
}

fn cmd_build_ac(args: BuildAcArgs) -> Result<(), CliError> {
    let catalogue = load_items(&args.items)?;
    let hierarchy = build_average_link_hierarchy(&catalogue)
        .map_err(|e| CliError::input(e.to_string()))?;
    write_file(&args.out, &hierarchy.to_json())?;
    println!(
        "wrote {} nodes over {} items to {}",
        hierarchy.node_count(),
        hierarchy.n_items(),
        args.out.display()
    );
    Ok(())
}

fn cmd_analyze_reward(args: AnalyzeRewardArgs) -> Result<(), CliError> {
    let growth = match (args.g, args.optimal_g) {
        (Some(g), false) => g,
        (None, true) => depth_maximizing_growth(),
        (None, false) => {
            return Err(CliError::input(
                "provide a growth rate with --g or ask for --optimal-g",
            ))
        }
        (Some(_), true) => unreachable!("clap rejects --g with --optimal-g"),
    };
    let params = AnalysisParams::new(args.gamma, growth)?;
    let mut summary = String::new();
    writeln!(summary, "g={growth:.6}").unwrap();
    match params.optimal_depth()? {
        Some(l) => {
            writeln!(summary, "ell_opt={l:.6}").unwrap();
            writeln!(summary, "value_at_opt={:.6}", params.value_at(l)).unwrap();
            if args.optimal_g {
                // Numerically identical to ell_opt; printed as its own
                // line because it comes from the simplified formula.
                writeln!(summary, "deepest={:.6}", deepest_optimal_depth(args.gamma)?).unwrap();
            }
        }
        None => writeln!(summary, "ell_opt=none").unwrap(),
    }
    let csv = params.value_curve_csv(args.ell_max, args.steps);
    match &args.out {
        Some(out) => {
            write_file(out, &csv)?;
            print!("{summary}");
        }
        None => {
            // The curve owns stdout so it can be piped; the summary
            // stays visible on stderr.
            eprint!("{summary}");
            print!("{csv}");
        }
    }
    Ok(())
}
