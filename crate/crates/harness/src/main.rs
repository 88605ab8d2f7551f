use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kramers_harness::commands;
use kramers_harness::error::{EXIT_IO, EXIT_PASS};
use kramers_harness::output::{RunDir, Verdict};
use kramers_harness::verify::{self, Scale};
use kramers_harness::{HarnessError, Result, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "kramers", version, about = "Strong-pulse ionisation simulator and bound checker")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output.dir` from the config, then `runs/<command>`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and FFTs.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Problem sizes used by `verify`.
    #[arg(long, global = true, value_enum, default_value_t = Scale::Desk)]
    scale: Scale,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the hypotheses, pulse assumptions and initial-state decay.
    Validate,
    /// Evolve one trajectory and record observables, bounds and snapshots.
    Evolve,
    /// Evaluate the analytic bounds only.
    Bounds,
    /// Run one trajectory per value of the `[sweep]` ladder.
    Sweep,
    /// Run the acceptance criteria.
    Verify {
        /// Comma-separated criterion numbers; all ten by default.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

fn out_dir(cli: &Cli, cfg: Option<&RunConfig>, name: &str) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| Path::new("runs").join(name))
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| HarnessError::Config("--config PATH is required for this command".into()))?;
    RunConfig::load(path)
}

fn report(v: &Verdict, dir: &Path) {
    for c in &v.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!(
        "{} {} -> {}",
        v.command,
        if v.passed { "passed" } else { "failed" },
        dir.display()
    );
}

fn run(cli: &Cli) -> Result<i32> {
    let workers = cli.workers.unwrap_or(1).max(1);
    // the global pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    let name = match cli.command {
        Command::Validate => "validate",
        Command::Evolve => "evolve",
        Command::Bounds => "bounds",
        Command::Sweep => "sweep",
        Command::Verify { .. } => "verify",
    };
    let verdict = if let Command::Verify { criteria } = &cli.command {
        let ids: Vec<u8> = if criteria.is_empty() { (1..=10).collect() } else { criteria.clone() };
        let path = out_dir(cli, None, name);
        let dir = RunDir::create(&path)?;
        let (v, results) = verify::verify(&ids, cli.scale, &dir)?;
        for r in &results {
            println!("{r}");
        }
        println!("verify {} -> {}", if v.passed { "passed" } else { "failed" }, path.display());
        v
    } else {
        let cfg = load(cli)?;
        let path = out_dir(cli, Some(&cfg), name);
        let dir = RunDir::create(&path)?;
        let v = match cli.command {
            Command::Validate => commands::validate(&cfg, &dir)?,
            Command::Evolve => commands::evolve(&cfg, &dir)?.0,
            Command::Bounds => commands::bounds(&cfg, &dir)?.0,
            _ => commands::sweep(&cfg, &dir, workers)?.0,
        };
        report(&v, &path);
        v
    };
    Ok(verdict.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("kramers: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
