use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use botlens::report::{
    run_evaluate, run_ingest, run_rank, run_sensitivity, run_subsample, run_threshold, CommandReport, ExperimentConfig,
    OutputFormat, ReportError,
};
use botlens::Execution;

#[derive(Parser)]
#[command(
    name = "botlens",
    version,
    about = "Bot-detection feature extraction and classifier benchmarking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count accounts per label at minimum-post thresholds 0..400.
    Ingest {
        /// Account files (JSON lines). Taken from the config when omitted.
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate every training set × feature set × algorithm.
    Evaluate(Common),
    /// Compare the CAP* threshold rule with learners trained on CAP*.
    Threshold(Common),
    /// Rank features by information gain.
    Rank(Common),
    /// ROC-AUC as the minimum number of posts varies.
    Sensitivity(Common),
    /// Under-sample the majority class of each training set.
    Subsample(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    min_posts: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// File listing official client names, one per line.
    #[arg(long)]
    clients: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abort on the first malformed input line.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, ReportError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| ReportError::Validation("--config is required".into()))?;
        let mut config = ExperimentConfig::load(path)?;
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.k {
            config.k = v;
        }
        if let Some(v) = self.min_posts {
            config.min_posts = v;
        }
        if let Some(v) = self.window {
            config.window = v;
        }
        if let Some(v) = &self.clients {
            config.clients = Some(v.clone());
        }
        if let Some(v) = &self.out {
            config.out = v.clone();
        }
        config.strict |= self.strict;
        Ok(config)
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

fn run(command: Command) -> Result<CommandReport, ReportError> {
    match command {
        Command::Ingest { files, common } => {
            if files.is_empty() {
                let config = common.load()?;
                let paths: Vec<PathBuf> = config
                    .training_sets
                    .iter()
                    .flat_map(|t| [t.bots.clone(), t.humans.clone()])
                    .collect();
                run_ingest(&paths, config.strict, common.format)
            } else {
                run_ingest(&files, common.strict, common.format)
            }
        }
        Command::Evaluate(c) => run_evaluate(&c.load()?, c.format, c.exec()),
        Command::Threshold(c) => run_threshold(&c.load()?, c.format, c.exec()),
        Command::Rank(c) => run_rank(&c.load()?, c.format),
        Command::Sensitivity(c) => run_sensitivity(&c.load()?, c.format, c.exec()),
        Command::Subsample(c) => run_subsample(&c.load()?, c.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.stdout);
            if let Some(e) = &report.failure {
                eprintln!("error: {e}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
