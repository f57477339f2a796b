use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use stickygeom_cli::{load, render, run, Command, Format};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Mean,
    Derivs,
    Classify,
    Perturb,
    Wasserstein,
    Divergence,
    SampleSim,
    Modulation,
    Clt,
    Prismatic,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Mean => Command::Mean,
            Cmd::Derivs => Command::Derivs,
            Cmd::Classify => Command::Classify,
            Cmd::Perturb => Command::Perturb,
            Cmd::Wasserstein => Command::Wasserstein,
            Cmd::Divergence => Command::Divergence,
            Cmd::SampleSim => Command::SampleSim,
            Cmd::Modulation => Command::Modulation,
            Cmd::Clt => Command::Clt,
            Cmd::Prismatic => Command::Prismatic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

/// Fréchet means and stickiness diagnostics on cones and open books.
#[derive(Debug, Parser)]
#[command(name = "stickygeom", version)]
struct Args {
    command: Cmd,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
    /// Overrides parameters.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo trials.
    #[arg(long, env = "STICKYGEOM_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot set up {k} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut cfg = match load(&args.config) {
        Ok(c) => c,
        Err(errs) => {
            for e in &errs {
                eprintln!("error: {e}");
            }
            return ExitCode::from(2);
        }
    };
    cfg.command = Some(args.command.into());
    if let Some(s) = args.seed {
        cfg.parameters.seed = Some(s);
    }
    if let Some(f) = args.format {
        cfg.output.format = match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        };
    }
    if args.out.is_some() {
        cfg.output.path = args.out;
    }

    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    };
    let text = render(&report, cfg.output.format);
    match &cfg.output.path {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!("{}", report.summary);
        }
        None => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(2);
            }
            eprintln!("{}", report.summary);
        }
    }
    ExitCode::SUCCESS
}
