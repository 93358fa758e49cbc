//! `maslov-lab`: index computations and identity checks from a TOML config.

mod commands;
mod config;
mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use maslov_lab::corpus::DEFAULT_SEED;

use config::RunConfig;
use report::{Report, SCHEMA};

#[derive(Parser, Debug)]
#[command(name = "maslov-lab", version, about = "Maslov-type indices of brake-symmetric symplectic paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file describing the system(s) and scheme.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Corpus seed for `selftest`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest truncation level.
    #[arg(long, global = true)]
    m_max: Option<usize>,
    /// No summary line on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Include wall-clock timings in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Caps the worker threads.
    #[arg(long, env = "MASLOV_LAB_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// L-indices by every applicable route, twisted indices, a periodic
    /// ω-scan and the splitting profile.
    Indices,
    /// Direct indices of the iterates `k = 1..k_max`.
    Iterate,
    /// Iteration formulas, doubling identities and the closed form.
    BottCheck,
    /// Search for common index jumps.
    Jump,
    /// Orbit index tables and the multiplicity report for an ellipsoid.
    Ellipsoid {
        /// Radii, overriding the config.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Invariants on a seeded random corpus.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Indices => "indices",
            Command::Iterate => "iterate",
            Command::BottCheck => "bott-check",
            Command::Jump => "jump",
            Command::Ellipsoid { .. } => "ellipsoid",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Configuration problems exit with 1.
struct ConfigError(anyhow::Error);

fn run(cli: &Cli) -> std::result::Result<Report, ConfigError> {
    let (cfg, text) = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(ConfigError)?,
        None => (RunConfig::default(), String::new()),
    };
    let scheme = cfg.scheme(cli.m_max);
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Indices => commands::indices(&cfg, &scheme),
        Command::Iterate => commands::iterate(&cfg, &scheme),
        Command::BottCheck => commands::bott_check(&cfg, &scheme),
        Command::Jump => commands::jump(&cfg, &scheme),
        Command::Ellipsoid { radii } => commands::ellipsoid(&cfg, radii.clone(), &scheme),
        Command::Selftest => commands::selftest(&cfg, seed, &scheme),
    }
    .map_err(ConfigError)?;
    let timing_ms = cli.timing.then(|| BTreeMap::from([("total".to_string(), start.elapsed().as_secs_f64() * 1e3)]));
    let report = Report {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        config_sha256: cli.config.as_ref().map(|_| report::sha256_hex(&text)),
        seed: matches!(cli.command, Command::Selftest).then_some(seed),
        outcome: report::status(outcome.violations, outcome.unstabilized),
        results: outcome.results,
        timing_ms,
    };
    emit(cli, &report, &outcome.table).map_err(ConfigError)?;
    Ok(report)
}

fn emit(cli: &Cli, report: &Report, table: &report::Table) -> Result<()> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    match cli.format {
        Format::Json => report::write_json(report, &mut out),
        Format::Csv => report::write_csv(table, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match run(&cli) {
        Ok(report) => {
            if !cli.quiet {
                eprintln!(
                    "{}: {} ({} violations, {} unstabilized)",
                    report.command, report.outcome.status, report.outcome.violations, report.outcome.unstabilized
                );
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(ConfigError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
