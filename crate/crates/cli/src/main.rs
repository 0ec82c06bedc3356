use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optrack_cli::config::{self, ConfigDocument};
use optrack_cli::metrics::{self, RunData};
use optrack_cli::postprocess::{self, PlaneChoice, DEFAULT_MIN_DISTANCE, RESULTS_FILE};
use optrack_cli::simulate::{self, SimulateOptions, DEFAULT_OUT_ROOT, MEASUREMENTS_FILE, OUT_ROOT_ENV, TELEMETRY_FILE};
use optrack_cli::CliError;

/// Drone-tracking gas measurement simulator.
#[derive(Parser)]
#[command(name = "optrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios and write one log directory per run.
    Simulate(SimulateArgs),
    /// Turn telemetry and measurement logs into path-average concentrations.
    Postprocess(PostprocessArgs),
    /// Summarize a run directory.
    Metrics(MetricsArgs),
    /// Print a complete config document, defaults included.
    ShowConfig {
        /// Config file or `builtin:<name>`.
        #[arg(long)]
        config: String,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Config file, `builtin:<name>`, or `builtin:all`; repeatable.
    #[arg(long, required = true)]
    config: Vec<String>,
    /// Output root; each run gets `<name>-seed<seed>` below it.
    #[arg(long, env = OUT_ROOT_ENV, default_value = DEFAULT_OUT_ROOT)]
    out: PathBuf,
    /// Overrides the seed of every config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overwrite existing run directories.
    #[arg(long)]
    force: bool,
    /// Run the scenarios in parallel.
    #[arg(long)]
    batch: bool,
}

#[derive(Args)]
struct PostprocessArgs {
    /// Run directory; supplies default input and output paths.
    #[arg(long)]
    run: Option<PathBuf>,
    /// Drone position log (telemetry or truth schema).
    #[arg(long, required_unless_present = "run")]
    telemetry: Option<PathBuf>,
    #[arg(long, required_unless_present = "run")]
    measurements: Option<PathBuf>,
    /// Results CSV; rejects go next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `auto`, `none`, or `east,north,up,normal_east,normal_north`.
    #[arg(long, default_value = "auto")]
    plane: PlaneChoice,
    /// Shortest accepted laser-to-drone distance, meters.
    #[arg(long, default_value_t = DEFAULT_MIN_DISTANCE)]
    min_distance: f64,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    run: PathBuf,
    /// Width of the distance bins, meters.
    #[arg(long, default_value_t = 1.0)]
    bin_width: f64,
    #[arg(long)]
    force: bool,
}

fn run_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut docs = Vec::new();
    for c in &a.config {
        docs.extend(config::load(c)?);
    }
    let opts = SimulateOptions { out_root: a.out, seed: a.seed, force: a.force };
    let mut first_err = None;
    for (doc, res) in docs.iter().zip(simulate::simulate_batch(&docs, &opts, a.batch)) {
        match res {
            Ok(dir) => println!("{}: {}", doc.scenario.name, dir.display()),
            Err(e) => {
                eprintln!("{}: {e}", doc.scenario.name);
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn run_postprocess(a: PostprocessArgs) -> Result<(), CliError> {
    let from_run = |name: &str| a.run.as_ref().map(|d| d.join(name));
    let missing = |what: &str| CliError::Config(format!("--{what} is required without --run"));
    let telemetry = a.telemetry.clone().or_else(|| from_run(TELEMETRY_FILE)).ok_or_else(|| missing("telemetry"))?;
    let measurements = a.measurements.clone().or_else(|| from_run(MEASUREMENTS_FILE)).ok_or_else(|| missing("measurements"))?;
    let out = a.out.clone().or_else(|| from_run(RESULTS_FILE)).unwrap_or_else(|| PathBuf::from(RESULTS_FILE));

    let positions = postprocess::read_positions(&telemetry)?;
    let records = postprocess::read_measurements(&measurements)?;
    let result = postprocess::postprocess(&positions, &records, a.plane, a.min_distance)?;
    postprocess::write_output(&out, &result, a.force)?;
    println!(
        "{}: {} results, {} rejected ({})",
        out.display(),
        result.results.len(),
        result.rejects.len(),
        postprocess::rejects_path(&out).display()
    );
    Ok(())
}

fn run_metrics(a: MetricsArgs) -> Result<(), CliError> {
    let data = RunData::load(&a.run)?;
    let report = metrics::compute(&data, a.bin_width)?;
    metrics::write_report(&a.run, &report, a.force)?;
    print!("{}", metrics::render_text(&report));
    Ok(())
}

fn show_config(arg: &str) -> Result<(), CliError> {
    for doc in config::load(arg)? {
        print!("{}", ConfigDocument::to_toml(&doc));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Postprocess(a) => run_postprocess(a),
        Command::Metrics(a) => run_metrics(a),
        Command::ShowConfig { config } => show_config(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
