//! `gxesim`: QC, covariate and phenotype simulation, association scans and
//! power summaries driven by one TOML configuration.
//!
//! Exit codes: 0 on success, 1 for invalid configuration or arguments, 2 for
//! runtime or data errors.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gxesim_core::pipeline::Method;

use crate::config::{RegionWidth, RunConfig};

/// An error caused by the configuration or command-line arguments.
#[derive(Debug)]
pub struct Validation(pub String);

impl std::fmt::Display for Validation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Validation {}

#[derive(Parser, Debug)]
#[command(
    name = "gxesim",
    version,
    about = "Gene-environment GWAS power simulation pipeline"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "gxesim.toml")]
    config: PathBuf,

    /// Master seed; overrides `seed` in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic structured genotype set to `paths.genotype`.
    Synth,
    /// Filter SNPs on MAF and HWE, then compute principal components.
    QcPca,
    /// Simulate covariates and the H0/H1 phenotype replicates.
    Simulate,
    /// Scan replicates; completed outputs are skipped on rerun.
    Scan {
        /// Methods to run (repeatable); defaults to `power.methods`.
        #[arg(long = "method")]
        methods: Vec<Method>,
        /// `all`, `h0`, `h1` or comma-separated labels such as `H1_0,H1_3`.
        #[arg(long, default_value = "all")]
        replicates: String,
    },
    /// AUC table, ROC curves and Manhattan plots from completed scans.
    Power {
        /// Region widths (repeatable); defaults to `power.regions`.
        #[arg(long = "region")]
        regions: Vec<RegionWidth>,
        /// Methods to summarise (repeatable); defaults to `power.methods`.
        #[arg(long = "method")]
        methods: Vec<Method>,
    },
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            let line = serde_json::json!({
                "level": record.level().as_str().to_ascii_lowercase(),
                "target": record.target(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        })
        .init();
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Validation>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<gxesim_core::Error>() {
            return if e.is_validation() { 1 } else { 2 };
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Validation("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    match cli.command {
        Command::Synth => commands::synth(&config),
        Command::QcPca => commands::qc_pca(&config),
        Command::Simulate => commands::simulate(&config),
        Command::Scan {
            methods,
            replicates,
        } => commands::scan(&config, &methods, &replicates),
        Command::Power { regions, methods } => commands::power(&config, &regions, &methods),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    init_logging();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
