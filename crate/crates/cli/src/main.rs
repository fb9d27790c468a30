use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::Parser;
use hardedge_cli::{run, Command, ExperimentSpec};

/// Hard-edge statistics of conditionally thinned Laguerre-type ensembles.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment JSON; an empty object `{}` runs the defaults.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "HARDEDGE_THREADS")]
    threads: Option<usize>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = (|| {
        if let Some(t) = args.threads {
            rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
        }
        let mut spec = ExperimentSpec::load(&args.config)?;
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        let out = args
            .out
            .clone()
            .or_else(|| spec.out.clone())
            .ok_or_else(|| anyhow!("no output directory: pass --out or set \"out\""))?;
        run(args.command, &spec, &out).with_context(|| format!("{} failed", args.command.name()))
    })();
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("hardedge: tolerance check failed, see the report");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("hardedge: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
