use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use stepusage::pipeline::{self, course_name, RunOptions, RunOutput};
use stepusage::{AnalysisConfig, Fraction, GeneratorParams};

/// Resource usage analysis for MOOC step-activity logs.
#[derive(Parser, Debug)]
#[command(name = "stepusage", version)]
struct Cli {
    /// Worker threads for per-learner computation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-resource feature table.
    Analyze(AnalysisArgs),
    /// Alignment-based dropout and order table.
    Align(AnalysisArgs),
    /// Both analyses and a comparison report.
    Compare(AnalysisArgs),
    /// Generate a synthetic log with ground truth.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct AnalysisArgs {
    /// Step-activity CSV export.
    log: PathBuf,
    /// `resource,type` sidecar fixing the curriculum order.
    #[arg(long)]
    curriculum: Option<PathBuf>,
    /// `key=value` parameter file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seconds a visit must exceed to count as done.
    #[arg(long)]
    min_seconds: Option<i64>,
    /// Dropout fraction, as `a/b` or a decimal (default 1/3).
    #[arg(long)]
    dropout_fraction: Option<Fraction>,
    /// Later resources needed (strictly more than) to call a revisit.
    #[arg(long)]
    back_threshold: Option<usize>,
    /// Out-of-order resources needed to call early or late.
    #[arg(long)]
    order_k: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Output file prefix (default: log file stem).
    #[arg(long)]
    course: Option<String>,
    /// Also render one SVG chart per feature.
    #[arg(long)]
    charts: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Generator parameters (JSON).
    #[arg(long)]
    params: PathBuf,
    /// Overrides the seed in the parameter file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output log path; sidecars are written next to it.
    #[arg(long)]
    out: PathBuf,
}

impl AnalysisArgs {
    fn options(&self) -> anyhow::Result<RunOptions> {
        let mut config = AnalysisConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            config.apply_config_text(&text)?;
        }
        if let Some(v) = self.min_seconds {
            config.min_done_seconds = v;
        }
        if let Some(v) = self.dropout_fraction {
            config.dropout_fraction = v;
        }
        if let Some(v) = self.back_threshold {
            config.back_threshold = v;
        }
        if let Some(v) = self.order_k {
            config.order_k = v;
        }
        config.validate()?;
        Ok(RunOptions {
            config,
            curriculum: self.curriculum.clone(),
            out_dir: self.out.clone(),
            course: self.course.clone().unwrap_or_else(|| course_name(&self.log)),
            charts: self.charts,
        })
    }
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<RunOutput> {
    let text = std::fs::read_to_string(&args.params).with_context(|| format!("reading {}", args.params.display()))?;
    let mut params: GeneratorParams =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.params.display()))?;
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    Ok(pipeline::run_simulate(&params, &args.out)?)
}

fn execute(command: &Command) -> anyhow::Result<RunOutput> {
    type Runner = fn(&RunOptions, &Path) -> stepusage::Result<RunOutput>;
    let (args, runner): (&AnalysisArgs, Runner) = match command {
        Command::Analyze(a) => (a, pipeline::run_analyze),
        Command::Align(a) => (a, pipeline::run_align),
        Command::Compare(a) => (a, pipeline::run_compare),
        Command::Simulate(s) => return simulate(s),
    };
    let opts = args.options()?;
    Ok(runner(&opts, &args.log)?)
}

fn run(cli: Cli) -> anyhow::Result<RunOutput> {
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(|| execute(&cli.command)),
        None => execute(&cli.command),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(output) => {
            for err in &output.row_errors {
                eprintln!("warning: {err}");
            }
            if let Some(stats) = &output.stats {
                if stats.empty {
                    eprintln!("warning: no learner has a done resource");
                }
                eprintln!(
                    "{} learners, {} resources, done density {:.4}",
                    stats.learners, stats.resources, stats.done_density
                );
            }
            // A closed stdout (e.g. piped into `head`) is not an error.
            let mut stdout = std::io::stdout().lock();
            for file in &output.files {
                if writeln!(stdout, "{}", file.display()).is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
