use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heda_cli::{bench, cmd_bench_blocks, cmd_keygen, cmd_run, effective_seed, CliError, KeyKind, RunSpec};
use heda_core::protocols::Protocol;

#[derive(Parser)]
#[command(name = "heda", version, about = "Multi-party model training over partially homomorphic encryption (simulated)")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one protocol in the simulator and write metrics.
    Run(RunArgs),
    /// Time every building block on 5-dimensional vectors.
    BenchBlocks {
        #[arg(long, default_value_t = 1024)]
        key_bits: u64,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a key file and print its key id.
    Keygen {
        #[arg(long)]
        kind: KeyKind,
        #[arg(long, default_value_t = 2048)]
        bits: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        public_only: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    protocol: Protocol,
    #[arg(long)]
    dataset: PathBuf,
    /// Defaults to schema.json next to the dataset.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    owners: u32,
    #[arg(long, default_value_t = 2048)]
    key_bits: u64,
    #[arg(long, default_value_t = heda_cli::run::DEFAULT_ITERS)]
    iters: u32,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = heda_cli::run::DEFAULT_LATENCY_MS)]
    latency_ms: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = heda_cli::run::DEFAULT_TEST_FRACTION)]
    test_fraction: f64,
    /// Run the plaintext quantized oracle alongside and diff the traces.
    #[arg(long)]
    quantized_oracle: bool,
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Run(a) => {
            let spec = RunSpec {
                protocol: a.protocol,
                dataset: a.dataset,
                schema: a.schema,
                owners: a.owners,
                key_bits: a.key_bits,
                iters: a.iters,
                lambda: a.lambda,
                alpha: a.alpha,
                latency_ms: a.latency_ms,
                seed: effective_seed(a.seed)?,
                out: a.out,
                test_fraction: a.test_fraction,
                quantized_oracle: a.quantized_oracle,
            };
            let out = cmd_run(&spec)?;
            let m = &out.metrics;
            println!("accuracy={:.4} interactions={} bytes={}", m.accuracy, m.interactions, m.bytes);
            if let Some(o) = &m.oracle {
                let div = o.first_divergence.map(|i| i.to_string()).unwrap_or_else(|| "none".into());
                println!("oracle_accuracy={:.4} trace_identical={} first_divergence={div}", o.accuracy, o.trace_identical);
            }
        }
        Cmd::BenchBlocks { key_bits, trials, seed, out } => {
            let rows = cmd_bench_blocks(key_bits, trials, seed, out.as_deref())?;
            print!("{}", bench::to_csv(&rows));
        }
        Cmd::Keygen { kind, bits, out, public_only, seed } => {
            let seed = match seed {
                Some(s) => Some(effective_seed(s)?),
                None => std::env::var(heda_cli::SEED_ENV).ok().map(|_| effective_seed(0)).transpose()?,
            };
            let file = cmd_keygen(kind, bits, &out, public_only, seed)?;
            println!("{}", file.key_id().as_str());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
