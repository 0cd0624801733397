//! Command-line front end for the auditing pipeline.

use clap::{Parser, Subcommand};
use geoaudit::config::ExperimentConfig;
use geoaudit::pipeline::{ingest_check, run_pipeline, Stage};

#[derive(Parser)]
#[command(name = "geoaudit", version, about = "Shortcut auditing, pruning, capacity sweeps and counterfactual stress tests for tabular classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: String,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<String>,
    /// Restrict to a comma-separated stage list
    /// (ingest-check,audit,sweep,stress,baselines).
    #[arg(long)]
    stage: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and encode the configured data source, then print a summary.
    IngestCheck(CommonArgs),
    /// Train the linear probe and write audit.json.
    Audit(CommonArgs),
    /// Run the capacity sweep and write capacity.csv/json.
    Sweep(CommonArgs),
    /// Run the counterfactual stress suite and write stress.csv/json.
    Stress(CommonArgs),
    /// Run the L1/two-phase baselines and write comparison.json.
    Baselines(CommonArgs),
    /// Run the full pipeline and write the manifest.
    Run(CommonArgs),
}

fn load_config(args: &CommonArgs) -> geoaudit::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn stages_for(default: &[Stage], args: &CommonArgs) -> geoaudit::Result<Vec<Stage>> {
    match &args.stage {
        None => Ok(default.to_vec()),
        Some(list) => list.split(',').map(|s| s.trim().parse()).collect(),
    }
}

fn execute(command: &Command) -> geoaudit::Result<()> {
    let (args, default_stages): (&CommonArgs, &[Stage]) = match command {
        Command::IngestCheck(a) => (a, &[Stage::IngestCheck]),
        Command::Audit(a) => (a, &[Stage::Audit]),
        Command::Sweep(a) => (a, &[Stage::Sweep]),
        Command::Stress(a) => (a, &[Stage::Stress]),
        Command::Baselines(a) => (a, &[Stage::Baselines]),
        Command::Run(a) => (a, &Stage::ALL),
    };
    let cfg = load_config(args)?;
    if matches!(command, Command::IngestCheck(_)) && args.stage.is_none() {
        print!("{}", ingest_check(&cfg)?);
        return Ok(());
    }
    let stages = stages_for(default_stages, args)?;
    let output = run_pipeline(&cfg, &stages)?;
    for stage in &output.manifest.stages {
        eprintln!("stage {:<12} ok ({:.2}s)", stage.name, stage.seconds);
    }
    for artifact in &output.manifest.artifacts {
        println!("{artifact}");
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(&cli.command) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
