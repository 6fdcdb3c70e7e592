use std::path::PathBuf;

use clap::{Parser, Subcommand};

use g2r_cli::{commands, env_overrides, load_config, parse_set, CliError};

/// Simulator-to-real pipeline driver.
#[derive(Parser)]
#[command(name = "g2r", version, about)]
struct Cli {
    /// YAML configuration file; omitted means documented defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config value, e.g. --set pipeline.skip=3 (repeatable).
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    set: Vec<String>,
    /// Emit errors as one JSON object on stderr.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress the applied-defaults log on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drive the engine and enhance frames.
    Run {
        /// Write one feature vector per enhanced frame to this container.
        #[arg(long, value_name = "FILE")]
        features: Option<PathBuf>,
        /// Profile the enhancer inputs into a color statistics JSON file,
        /// usable as enhancer.stats_path.
        #[arg(long, value_name = "FILE")]
        emit_color_stats: Option<PathBuf>,
        /// Print run statistics as JSON on stdout.
        #[arg(long)]
        emit_stats: bool,
    },
    /// Run and write the configured dataset products.
    Capture {
        /// Enhanced frames to produce (default: pipeline.ticks).
        #[arg(long)]
        ticks: Option<u64>,
    },
    /// Play a scripted scene and report its trigger outcomes.
    Scenario {
        /// Scenario file (default: scenario_path from the config).
        #[arg(long, value_name = "FILE")]
        scenario: Option<PathBuf>,
        /// Also write the configured dataset products while playing.
        #[arg(long)]
        capture: bool,
        /// Enhanced frames to produce (default: the scenario duration).
        #[arg(long)]
        ticks: Option<u64>,
    },
    /// Measure throughput and latency across precision x skip cells.
    Bench {
        /// Cells to run, e.g. "f32:0,f16_emulated:3"; the distinct
        /// precisions and skips listed form the benchmark axes.
        #[arg(long)]
        matrix: Option<String>,
        /// Write the full report as JSON.
        #[arg(long, value_name = "FILE")]
        out_json: Option<PathBuf>,
        /// Write the per-cell table as CSV.
        #[arg(long, value_name = "FILE")]
        out_csv: Option<PathBuf>,
    },
    /// Intersection-over-union between two class maps (files or directories).
    EvalIou { pred: PathBuf, gt: PathBuf },
    /// Mean pairwise cosine similarity between two feature containers.
    EvalCosine { a: PathBuf, b: PathBuf },
    /// Log every wire message of a short scripted session.
    ProtocolDump {
        /// Simulation ticks to request.
        #[arg(long, default_value_t = 2)]
        ticks: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => {}
        Err(err) => {
            if cli.json {
                eprintln!("{}", err.to_json());
            } else {
                eprintln!("error: {err}");
            }
            std::process::exit(err.exit_code());
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut overrides = env_overrides();
    for arg in &cli.set {
        overrides.push(parse_set(arg)?);
    }
    let loaded = load_config(cli.config.as_deref(), &overrides)?;
    if !cli.quiet {
        for line in &loaded.defaults {
            eprintln!("default: {line}");
        }
    }
    let cfg = &loaded.config;
    match &cli.command {
        Command::Run {
            features,
            emit_color_stats,
            emit_stats,
        } => commands::run(
            cfg,
            features.as_deref(),
            emit_color_stats.as_deref(),
            *emit_stats,
        ),
        Command::Capture { ticks } => commands::capture(cfg, *ticks),
        Command::Scenario {
            scenario,
            capture,
            ticks,
        } => commands::scenario(cfg, scenario.as_deref(), *capture, *ticks),
        Command::Bench {
            matrix,
            out_json,
            out_csv,
        } => commands::bench(cfg, matrix.as_deref(), out_json.as_deref(), out_csv.as_deref()),
        Command::EvalIou { pred, gt } => commands::eval_iou(pred, gt),
        Command::EvalCosine { a, b } => commands::eval_cosine(a, b),
        Command::ProtocolDump { ticks } => commands::protocol_dump(cfg, *ticks),
    }
}
