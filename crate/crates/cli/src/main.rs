mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use config::{Backend, RunConfig};

/// Synthesizes tool-learning corpora and evaluates model outputs against them.
#[derive(Debug, Parser)]
#[command(name = "gentool", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML file with run settings; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Retrieved tools per toolset (the toolset also holds generate_response).
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    split_ratio: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    relatedness_threshold: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a deterministic synthetic seed corpus (seeds.jsonl).
    MockSeeds {
        #[arg(long, default_value_t = 24)]
        count: usize,
    },
    /// Expand seeds into query-tool clusters (clusters.jsonl, quality.jsonl).
    Synthesize {
        #[arg(long)]
        seeds: PathBuf,
    },
    /// Embed every cluster tool (tool_index.json).
    Index {
        #[arg(long)]
        clusters: PathBuf,
    },
    /// Partition clusters into train and test (split_plan.json).
    Split {
        #[arg(long)]
        clusters: PathBuf,
    },
    /// Build train.jsonl and one test_<scenario>.jsonl per evaluation bucket.
    Compile {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Saved tool index; built from the clusters when omitted.
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Render instances as prompt/gold text pairs.
    Render {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write the gold answer of every instance as a prediction.
    PredictGold {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score predictions against instances (report.json).
    Evaluate {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Rank consistency of predictions, plus relatedness to training data.
    Analyze {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, requires = "index")]
        train: Option<PathBuf>,
        #[arg(long, requires = "train")]
        index: Option<PathBuf>,
    },
    /// Tool count, instance count and mean prompt/answer lengths.
    Stats {
        #[arg(long, required = true, num_args = 1..)]
        instances: Vec<PathBuf>,
    },
}

impl GlobalArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.backend {
            cfg.backend = v;
        }
        if let Some(v) = &self.cache_dir {
            cfg.cache_dir = Some(v.clone());
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.split_ratio {
            cfg.split_ratio = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.jobs {
            cfg.jobs = v;
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.relatedness_threshold {
            cfg.relatedness_threshold = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = cli.global.resolve()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    match cli.command {
        Command::MockSeeds { count } => commands::mock_seeds(&cfg, count),
        Command::Synthesize { seeds } => commands::synthesize(&cfg, &seeds),
        Command::Index { clusters } => commands::index(&cfg, &clusters),
        Command::Split { clusters } => commands::split(&cfg, &clusters),
        Command::Compile { clusters, plan, index } => commands::compile(&cfg, &clusters, &plan, index.as_deref()),
        Command::Render { instances, output } => commands::render(&instances, &output),
        Command::PredictGold { instances, output } => commands::predict_gold(&instances, &output),
        Command::Evaluate { instances, predictions } => commands::evaluate(&cfg, &instances, &predictions),
        Command::Analyze {
            instances,
            predictions,
            train,
            index,
        } => commands::analyze(&cfg, &instances, &predictions, train.as_deref().zip(index.as_deref())),
        Command::Stats { instances } => commands::stats(&instances),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("GENTOOL_LOG").unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
