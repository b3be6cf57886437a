use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use kickback::experiment::{emit, run, Algorithm, Builtin, ExperimentConfig, OutputFormat};
use kickback::Error;

/// Run seeded batches of phase, amplitude, overlap and expectation estimation trials.
#[derive(Parser, Debug)]
#[command(name = "kickback", version)]
struct Cli {
    /// TOML config with [experiment], [instance] and [tail] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,
    /// Built-in instance; overrides the config's [instance] section.
    #[arg(long, value_enum)]
    instance: Option<Builtin>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Series order for expectation estimation (1 selects the single-overlap stage).
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated precisions, e.g. "0.2,0.1,0.05".
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    /// Record file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    workers: Option<usize>,
    /// Sample count for the sampling baselines.
    #[arg(long)]
    samples: Option<usize>,
    /// Fill the wall_ms column (makes output run-dependent).
    #[arg(long)]
    wall_time: bool,
}

fn build_config(cli: &Cli) -> kickback::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path, cli.algorithm)?,
        None => ExperimentConfig {
            algorithm: cli
                .algorithm
                .ok_or_else(|| Error::Config("either --config or --algorithm is required".into()))?,
            ..Default::default()
        },
    };
    if let Some(a) = cli.algorithm {
        config.algorithm = a;
    }
    if let Some(b) = cli.instance {
        config.instance = kickback::experiment::InstanceSpec {
            builtin: Some(b),
            ..Default::default()
        };
    }
    macro_rules! override_with {
        ($($field:ident),*) => {$(
            if let Some(v) = cli.$field.clone() {
                config.$field = v;
            }
        )*};
    }
    override_with!(p, c, trials, seed, workers);
    if cli.k.is_some() {
        config.k = cli.k;
    }
    if cli.sweep.is_some() {
        config.sweep = cli.sweep.clone();
    }
    if cli.samples.is_some() {
        config.samples = cli.samples;
    }
    config.wall_time = cli.wall_time;
    config.validate()?;
    Ok(config)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::InvalidOperand(_) => 2,
        Error::Infeasible { .. } | Error::ResourceLimit(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|config| {
        let (records, summary) = run(&config)?;
        emit(&records, cli.format, cli.out.as_deref())?;
        let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Internal(e.to_string()))?;
        if cli.out.is_some() {
            writeln!(std::io::stdout(), "{text}")?;
        } else {
            writeln!(std::io::stderr(), "{text}")?;
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed downstream pipe (e.g. `| head`) is not a failure
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
