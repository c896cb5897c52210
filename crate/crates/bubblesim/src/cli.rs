//! Command-line front end.
//!
//! Exit codes: 0 success, 1 run/IO error, 2 usage error.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::agents::RiskModel;
use crate::config;
use crate::metrics::MetricsConfig;
use crate::output::{
    build_summary, build_sweep_summary, series_csv, summary_json, trades_csv, write_text_file,
};
use crate::presets;
use crate::sim::{run_batch, ParamSpec, ScenarioConfig, SimulationResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bubblesim",
    version,
    about = "Double-auction market simulator with risk-driven trading agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario (optionally over several seeds)
    Run(RunArgs),
    /// Run a parameter sweep over values x seeds
    Sweep(SweepArgs),
    /// Print a preset as a canonical scenario file
    PrintConfig(PrintConfigArgs),
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Named preset (see `print-config --list`)
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario file path
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Seed override for a single run
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed list: `7`, `1..20` (inclusive) or `1,4,9`
    #[arg(long)]
    seeds: Option<String>,
    /// Round-count override
    #[arg(long)]
    rounds: Option<u32>,
    /// Write the per-round series CSV here (multi-seed runs get -seedN suffixes)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the trade ledger CSV here (multi-seed runs get -seedN suffixes)
    #[arg(long)]
    trades: Option<PathBuf>,
    /// Write the JSON summary here
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Parameter to sweep: alpha, risk_threshold, value_weight, slope_weight,
    /// fundamental or sigmoid_scale
    #[arg(long)]
    param: String,
    /// Comma-separated values, e.g. `1.0,1.05,1.1,1.2`
    #[arg(long)]
    values: String,
    /// Seed list applied to every value (default: the scenario's own seed)
    #[arg(long)]
    seeds: Option<String>,
    /// Round-count override
    #[arg(long)]
    rounds: Option<u32>,
    /// Write the JSON summary here
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PrintConfigArgs {
    /// Preset to expand
    #[arg(long, required_unless_present = "list")]
    preset: Option<String>,
    /// List available presets instead
    #[arg(long)]
    list: bool,
}

enum CliError {
    Usage(String),
    Run(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(_) => EXIT_RUN_ERROR,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Run(m) => m,
        }
    }
}

/// Parse `7`, `1..20` (inclusive) or `1,4,9` into a seed list.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>, String> {
    const MAX_SEEDS: u64 = 100_000;
    let text = text.trim();
    if text.is_empty() {
        return Err("empty seed list".into());
    }
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad seed range start {lo:?}"))?;
        let hi: u64 = hi
            .trim()
            .parse()
            .map_err(|_| format!("bad seed range end {hi:?}"))?;
        if hi < lo {
            return Err(format!("seed range {lo}..{hi} is empty"));
        }
        // span = count - 1; written this way so u64::MAX ranges cannot overflow
        let span = hi - lo;
        if span >= MAX_SEEDS {
            return Err(format!(
                "seed range holds {} seeds; at most {MAX_SEEDS} supported",
                (span as u128) + 1
            ));
        }
        return Ok((lo..=hi).collect());
    }
    let seeds: Result<Vec<u64>, String> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad seed {:?}", part.trim()))
        })
        .collect();
    let seeds = seeds?;
    if seeds.len() as u64 > MAX_SEEDS {
        return Err(format!("at most {MAX_SEEDS} seeds supported"));
    }
    Ok(seeds)
}

/// Parse a comma-separated list of finite floats.
pub fn parse_value_list(text: &str) -> Result<Vec<f64>, String> {
    let values: Result<Vec<f64>, String> = text
        .split(',')
        .map(|part| {
            let part = part.trim();
            let v: f64 = part.parse().map_err(|_| format!("bad value {part:?}"))?;
            if !v.is_finite() {
                return Err(format!("value {part:?} is not finite"));
            }
            Ok(v)
        })
        .collect();
    let values = values?;
    if values.is_empty() {
        return Err("empty value list".into());
    }
    Ok(values)
}

/// Set one swept parameter on a configuration.
pub fn apply_sweep_value(
    config: &mut ScenarioConfig,
    param: &str,
    value: f64,
) -> Result<(), String> {
    match param {
        "alpha" | "fool_factor" => config.params.fool_factor = ParamSpec::Fixed(value),
        "risk_threshold" => config.params.risk_threshold = ParamSpec::Fixed(value),
        "value_weight" => config.params.value_weight = ParamSpec::Fixed(value),
        "slope_weight" => config.params.slope_weight = ParamSpec::Fixed(value),
        "fundamental" => config.params.fundamental = ParamSpec::Fixed(value),
        "sigmoid_scale" => match config.model {
            RiskModel::Endogenous {
                ref mut sigmoid_scale,
                ..
            } => *sigmoid_scale = value,
            _ => return Err("sigmoid_scale only applies to the endogenous model".into()),
        },
        _ => {
            return Err(format!(
                "unknown sweep parameter {param:?}; expected alpha, risk_threshold, \
                 value_weight, slope_weight, fundamental or sigmoid_scale"
            ))
        }
    }
    Ok(())
}

fn load_scenario(source: &SourceArgs) -> Result<ScenarioConfig, CliError> {
    match (&source.preset, &source.config) {
        (Some(name), None) => presets::expand(name).ok_or_else(|| {
            let names: Vec<&str> = presets::PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Usage(format!(
                "unknown preset {name:?}; available: {}",
                names.join(", ")
            ))
        }),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            config::parse_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
        (None, None) => Err(CliError::Usage(
            "one of --preset or --config is required".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
    }
}

/// `series.csv` -> `series-seed7.csv` when several seeds run at once.
fn seed_suffixed(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str());
    let name = match ext {
        Some(ext) => format!("{stem}-seed{seed}.{ext}"),
        None => format!("{stem}-seed{seed}"),
    };
    path.with_file_name(name)
}

fn write_output(path: &Path, contents: &str, what: &str) -> Result<(), CliError> {
    write_text_file(path, contents)
        .map_err(|e| CliError::Run(format!("writing {what} {}: {e}", path.display())))
}

fn print_run_digest(result: &SimulationResult) {
    let record = crate::output::run_record(result, &MetricsConfig::default(), None);
    println!(
        "seed {}: final price {:.3}, peak {:.3} @ round {}, drawdown {:.1}%, \
         mean |p-F|/F {:.4}, trades {}",
        record.seed,
        record.final_price,
        record.stats.peak_price,
        record.stats.peak_round,
        record.stats.max_drawdown * 100.0,
        record.stats.mean_abs_rel_dev,
        record.total_trades,
    );
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let mut base = load_scenario(&args.source)?;
    if let Some(rounds) = args.rounds {
        base.rounds = rounds;
    }
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    let seeds = match &args.seeds {
        Some(spec) => parse_seed_list(spec).map_err(CliError::Usage)?,
        None => vec![base.seed],
    };
    base.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let results =
        run_batch(&base, &seeds).map_err(|e| CliError::Run(format!("simulation failed: {e}")))?;

    let multi = results.len() > 1;
    for result in &results {
        if let Some(out) = &args.out {
            let path = if multi {
                seed_suffixed(out, result.config.seed)
            } else {
                out.clone()
            };
            write_output(&path, &series_csv(result), "series CSV")?;
        }
        if let Some(trades) = &args.trades {
            let path = if multi {
                seed_suffixed(trades, result.config.seed)
            } else {
                trades.clone()
            };
            write_output(&path, &trades_csv(result), "trade ledger")?;
        }
    }
    if let Some(summary_path) = &args.summary {
        let summary = build_summary(&base, &results, &MetricsConfig::default());
        write_output(summary_path, &summary_json(&summary), "summary")?;
    }
    if args.out.is_none() && args.summary.is_none() && args.trades.is_none() {
        for result in &results {
            print_run_digest(result);
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut base = load_scenario(&args.source)?;
    if let Some(rounds) = args.rounds {
        base.rounds = rounds;
    }
    let values = parse_value_list(&args.values).map_err(CliError::Usage)?;
    let seeds = match &args.seeds {
        Some(spec) => parse_seed_list(spec).map_err(CliError::Usage)?,
        None => vec![base.seed],
    };

    let mut groups: Vec<(f64, Vec<SimulationResult>)> = Vec::with_capacity(values.len());
    for &value in &values {
        let mut config = base.clone();
        apply_sweep_value(&mut config, &args.param, value).map_err(CliError::Usage)?;
        config
            .validate()
            .map_err(|e| CliError::Usage(format!("{} = {value}: {e}", args.param)))?;
        let results = run_batch(&config, &seeds)
            .map_err(|e| CliError::Run(format!("simulation failed: {e}")))?;
        groups.push((value, results));
    }

    let summary = build_sweep_summary(&base, &args.param, &groups, &MetricsConfig::default());
    match &args.summary {
        Some(path) => write_output(path, &summary_json(&summary), "summary")?,
        None => {
            for group in &summary.sweep.as_ref().expect("sweep summary").groups {
                println!(
                    "{} = {}: mean osc_std {:.4}, mean peak {:.3}, crash fraction {:.2}",
                    args.param,
                    group.value,
                    group.aggregate.osc_std_mean,
                    group.aggregate.peak_price_mean,
                    group.aggregate.crash_fraction,
                );
            }
        }
    }
    Ok(())
}

fn cmd_print_config(args: &PrintConfigArgs) -> Result<(), CliError> {
    if args.list {
        for (name, blurb) in presets::PRESETS {
            println!("{name:<22} {blurb}");
        }
        return Ok(());
    }
    let name = args.preset.as_deref().expect("clap enforces one of the two");
    let config = presets::expand(name).ok_or_else(|| {
        let names: Vec<&str> = presets::PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::Usage(format!(
            "unknown preset {name:?}; available: {}",
            names.join(", ")
        ))
    })?;
    print!("{}", config::to_config_string(&config));
    Ok(())
}

/// Entry point used by `main`; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            // clap formats its own message (help/version go to stdout).
            let _ = err.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::PrintConfig(args) => cmd_print_config(args),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
