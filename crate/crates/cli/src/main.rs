mod args;
mod presets;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rcd_core::csv::write_trace;
use rcd_core::manifold::flops::FLOP_TABLE;
use rcd_core::optim::{default_grid, grid_search};

use crate::args::{RunArgs, UsageError};

#[derive(Parser)]
#[command(name = "rcd-bench", version, about = "Riemannian coordinate descent benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace as CSV.
    Run(RunArgs),
    /// Tune the stepsize over a grid of powers of two and print the best settings as JSON.
    Grid {
        #[command(flatten)]
        args: RunArgs,
        /// Comma-separated stepsizes; defaults to 2^-10 .. 2^3.
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
    },
    /// Check the library invariants.
    Verify,
    /// Print the per-coordinate flop table.
    Flops,
    /// List the experiment presets, or print one as a config file.
    Preset { name: Option<String> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe))
}

fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<UsageError>()
            || matches!(
                c.downcast_ref::<rcd_core::Error>(),
                Some(rcd_core::Error::InvalidConfig(_) | rcd_core::Error::InvalidArgument(_))
            )
    })
}

/// `MANIFOLD_CD_THREADS` sizes the global thread pool.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("MANIFOLD_CD_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| UsageError(format!("MANIFOLD_CD_THREADS must be a positive integer, got `{value}`")))?;
    if threads == 0 {
        return Err(UsageError("MANIFOLD_CD_THREADS must be positive".into()).into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run(args) => run(args)?,
        Command::Grid { args, etas } => grid(args, etas)?,
        Command::Verify => {
            return Ok(if verify::run_all() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Flops => flops()?,
        Command::Preset { name } => preset(name.as_deref())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let r = args.resolve()?;
    let out = r.instance.run(&r.cfg)?;
    match &r.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_trace(&mut w, &out.trace)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout().lock();
            let mut w = BufWriter::new(stdout);
            write_trace(&mut w, &out.trace)?;
            w.flush()?;
        }
    }
    let f = out.final_value();
    let mut summary = format!("f = {f:.6e}");
    if let Some(gap) = r.instance.gap(f) {
        let kind = if gap.absolute { "absolute" } else { "relative" };
        summary += &format!(", {kind} gap = {:.3e}", gap.value);
    }
    summary += &format!(", flops = {}", out.stats.total_flops());
    if out.stats.halvings > 0 {
        summary += &format!(", stepsize halved {} times", out.stats.halvings);
    }
    eprintln!("{summary}");
    Ok(())
}

fn grid(args: RunArgs, etas: Option<Vec<f64>>) -> anyhow::Result<()> {
    let merged = args.merged()?;
    let r = merged.clone().resolve()?;
    let etas = etas.unwrap_or_else(default_grid);
    if etas.is_empty() || etas.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(UsageError("--etas must be positive finite stepsizes".into()).into());
    }
    let scheme = r.instance.scheme(r.cfg.algorithm)?;
    let result = grid_search(scheme.as_ref(), r.instance.objective.as_ref(), &r.instance.x0, &r.cfg, &etas);
    for p in &result.points {
        match &p.error {
            Some(e) => eprintln!("eta = {:<12} failed: {e}", p.eta),
            None => eprintln!("eta = {:<12} f = {:.6e}", p.eta, p.score),
        }
    }
    if !result.points[result.best].score.is_finite() {
        anyhow::bail!("every stepsize failed");
    }
    let best = RunArgs {
        eta: Some(result.best_eta()),
        ..merged
    };
    println!("{}", serde_json::to_string_pretty(&best)?);
    Ok(())
}

fn flops() -> anyhow::Result<()> {
    let mut w = io::stdout().lock();
    writeln!(w, "{:<18} {:<24} {:>10} {:>10} {:>7}  class", "family", "index", "derivative", "update", "scalar")?;
    for row in FLOP_TABLE {
        writeln!(
            w,
            "{:<18} {:<24} {:>10} {:>10} {:>7}  {}",
            row.family, row.index, row.derivative, row.update, row.scalar, row.class
        )?;
    }
    Ok(())
}

fn preset(name: Option<&str>) -> anyhow::Result<()> {
    match name {
        None => {
            for p in presets::PRESETS {
                println!("{:<20} {}", p.name, p.about);
            }
        }
        Some(name) => {
            let p = presets::find(name).ok_or_else(|| UsageError(format!("unknown preset `{name}`")))?;
            println!("{}", serde_json::to_string_pretty(&(p.args)())?);
        }
    }
    Ok(())
}
