use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use arms_bench::{emit_csv, load_config, run_experiment, run_single, write_csv, BenchError, ExperimentConfig};
use arms_core::{Procedure, SamplerKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bench", about = "Seeded experiments for adaptive rejection Metropolis samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sampler x procedure matrix and write the results table.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<String>,
        #[arg(long = "n")]
        n: Option<String>,
        /// Comma-separated, e.g. `arms,ia2rms`.
        #[arg(long)]
        samplers: Option<String>,
        /// Comma-separated, e.g. `p1,p3`.
        #[arg(long)]
        procedures: Option<String>,
        #[arg(long)]
        workers: Option<String>,
    },
    /// Write the proposal pieces of one run after a given number of iterations.
    DumpProposal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sampler: String,
        #[arg(long)]
        procedure: String,
        #[arg(long)]
        at_iteration: usize,
        /// Run index within the cell (selects the seed).
        #[arg(long, default_value_t = 0)]
        run: u64,
    },
}

fn base_config(common: &Common) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode, BenchError> {
    match cli.command {
        Command::Run {
            common,
            runs,
            n,
            samplers,
            procedures,
            workers,
        } => {
            let mut cfg = base_config(&common)?;
            for (key, value) in [
                ("runs", runs),
                ("N", n),
                ("samplers", samplers),
                ("procedures", procedures),
                ("workers", workers),
            ] {
                if let Some(v) = value {
                    cfg.set(key, &v, 0)?;
                }
            }
            cfg.validate()?;
            let rows = run_experiment(&cfg)?;
            match &cfg.output {
                Some(path) => emit_csv(&rows, path)?,
                None => write_csv(&rows, io::stdout().lock()).map_err(|source| BenchError::Io {
                    path: "<stdout>".into(),
                    source,
                })?,
            }
            let mut failed = false;
            for row in &rows {
                if !row.failures.is_empty() {
                    eprintln!(
                        "{}/{}: {} of {} runs failed; first: run {}: {}",
                        row.sampler,
                        row.procedure.code(),
                        row.failures.len(),
                        row.runs + row.failures.len(),
                        row.failures[0].run_index,
                        row.failures[0].error
                    );
                }
                failed |= row.failed();
            }
            Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::DumpProposal {
            common,
            sampler,
            procedure,
            at_iteration,
            run,
        } => {
            let cfg = base_config(&common)?;
            let kind: SamplerKind = sampler
                .parse()
                .map_err(|e: arms_core::Error| config_err("sampler", e))?;
            let procedure: Procedure = procedure
                .parse()
                .map_err(|e: arms_core::Error| config_err("procedure", e))?;
            if at_iteration == 0 {
                return Err(config_err("at-iteration", "must be at least 1"));
            }
            let (_, state) = run_single(&cfg, kind, procedure, run, at_iteration)?;
            let mut buf = Vec::new();
            let io_err = |path: PathBuf| move |source| BenchError::Io { path, source };
            state
                .proposal()
                .write_csv(&mut buf)
                .map_err(io_err("<buffer>".into()))?;
            match &cfg.output {
                Some(path) => std::fs::write(path, buf).map_err(io_err(path.clone()))?,
                None => io::stdout()
                    .lock()
                    .write_all(&buf)
                    .map_err(io_err("<stdout>".into()))?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn config_err(field: &str, e: impl ToString) -> BenchError {
    BenchError::Parse {
        field: field.into(),
        line: 0,
        message: e.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bench: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
