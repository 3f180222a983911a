use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use content_defect::corpus::LoadOptions;
use content_defect::textfeat::TermWeighting;
use content_defect::topicfeat::LdaConfig;

use content_defect_cli::config::{self, ExperimentSpec, ReleaseInput};
use content_defect_cli::error::{CliError, CliResult};
use content_defect_cli::experiment::cmd_experiment;
use content_defect_cli::explain::{explain, ExplainOptions};
use content_defect_cli::extract::{extract, ExtractOptions};
use content_defect_cli::report::load_summary;

#[derive(Parser)]
#[command(name = "cdp", version, about = "Defect prediction from source-code content")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract term, type and package features for one release.
    Extract(ExtractArgs),
    /// Run the cross-validated configuration matrix.
    Experiment(ExperimentArgs),
    /// Case-study report for one extracted release.
    Explain(ExplainArgs),
    /// Re-aggregate the reports of a finished experiment.
    Report(ReportArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Root of the release's Java source tree.
    #[arg(long)]
    source: PathBuf,
    /// Defect dataset CSV.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    project: Option<String>,
    #[arg(long)]
    version: Option<String>,
    /// Only count types used in code, not merely imported.
    #[arg(long)]
    no_import_types: bool,
    #[arg(long, default_value = "tfidf")]
    weighting: TermWeighting,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, requires = "dataset")]
    source: Option<PathBuf>,
    #[arg(long, requires = "source")]
    dataset: Option<PathBuf>,
    /// Extraction directory; may be repeated.
    #[arg(long)]
    artifacts: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated: spearman, pearson, mi, none.
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,
    /// Selected term and type counts, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n_features: Vec<usize>,
    /// Topic counts, comma-separated.
    #[arg(long, value_delimiter = ',')]
    topics: Vec<usize>,
    #[arg(long, conflicts_with = "no_pca")]
    pca_threshold: Option<f64>,
    #[arg(long)]
    no_pca: bool,
    /// Comma-separated: term, topic, type, package, baseline, combined.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    #[arg(long)]
    clamp_negative: bool,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    lda_iterations: Option<usize>,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    artifacts: PathBuf,
    /// Also write the report files here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    topics: usize,
    #[arg(long, default_value_t = 10)]
    top_files: usize,
    #[arg(long, default_value_t = 10)]
    top_words: usize,
    #[arg(long, default_value_t = 20)]
    top_features: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    lda_iterations: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory of an experiment run.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn run_extract(args: ExtractArgs) -> CliResult<()> {
    let manifest = extract(&ExtractOptions {
        source: args.source,
        dataset: args.dataset,
        out: args.out.clone(),
        load: LoadOptions {
            project: args.project,
            version: args.version,
            ..LoadOptions::default()
        },
        count_imports: !args.no_import_types,
        weighting: args.weighting,
    })?;
    println!(
        "{}: {} files ({} defective), {} terms, {} types, {} packages -> {}",
        manifest.label(),
        manifest.files,
        manifest.defective_files,
        manifest.terms,
        manifest.types,
        manifest.packages,
        args.out.display()
    );
    Ok(())
}

fn experiment_spec(args: &ExperimentArgs) -> CliResult<(ExperimentSpec, Vec<ReleaseInput>)> {
    let (mut spec, mut releases) = match &args.config {
        Some(path) => config::load_spec_file(path)?,
        None => (ExperimentSpec::default(), Vec::new()),
    };
    if let (Some(source), Some(dataset)) = (&args.source, &args.dataset) {
        releases.push(ReleaseInput::Raw {
            source: source.clone(),
            dataset: dataset.clone(),
        });
    }
    releases.extend(args.artifacts.iter().cloned().map(ReleaseInput::Artifacts));
    if let Some(seed) = args.seed {
        spec.cv.seed = seed;
    }
    if !args.method.is_empty() {
        spec.methods = config::parse_methods(&args.method)?;
    }
    if !args.n_features.is_empty() {
        spec.n_terms = args.n_features.clone();
        spec.n_types = args.n_features.clone();
    }
    if !args.topics.is_empty() {
        spec.topics = args.topics.clone();
    }
    if let Some(t) = args.pca_threshold {
        spec.pca_threshold = Some(t);
    }
    if args.no_pca {
        spec.pca_threshold = None;
    }
    if let Some(kinds) = &args.kinds {
        spec.kinds = config::parse_kinds(kinds)?;
    }
    if args.clamp_negative {
        spec.clamp_negative = true;
    }
    if let Some(r) = args.repetitions {
        spec.cv.repetitions = r;
    }
    if let Some(i) = args.lda_iterations {
        spec.lda.iterations = i;
    }
    Ok((spec, releases))
}

fn run_experiment(args: ExperimentArgs) -> CliResult<()> {
    let (spec, releases) = experiment_spec(&args)?;
    let outcome = cmd_experiment(&spec, &releases, &args.out)?;
    outcome
        .summary
        .write_table(std::io::stdout().lock())
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run_explain(args: ExplainArgs) -> CliResult<()> {
    let mut lda = LdaConfig::default();
    if let Some(i) = args.lda_iterations {
        lda.iterations = i;
    }
    let text = explain(&ExplainOptions {
        artifacts: args.artifacts,
        out: args.out,
        topics: args.topics,
        top_files: args.top_files,
        top_words: args.top_words,
        top_features: args.top_features,
        seed: args.seed,
        lda,
    })?;
    print!("{text}");
    Ok(())
}

fn run_report(args: ReportArgs) -> CliResult<()> {
    let summary = load_summary(&args.input)?;
    let out = std::io::stdout().lock();
    match args.format {
        Format::Text => summary.write_table(out),
        Format::Csv => summary.write_csv(out),
    }
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap reports usage errors with status 2, which is reserved for invalid releases
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Extract(a) => run_extract(a),
        Command::Experiment(a) => run_experiment(a),
        Command::Explain(a) => run_explain(a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
