use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stagnation_lab::run::{RunDir, Stage};
use stagnation_lab::{plot, LabConfig, LabError, Mode};

#[derive(Parser)]
#[command(name = "stagnation-lab", version, about = "Prescribe, realize and track stagnation-point patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; `demo` falls back to the built-in profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Re-run the requested stage even if it already passed.
    #[arg(long, global = true)]
    force: bool,
    /// Fixed δ for the Navier–Stokes run.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true, default_value = "runs")]
    runs: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Frame field and Cauchy data along the link.
    Synthesize,
    /// Conditions (A) to (C) on the synthesized data.
    Verify,
    /// Global caloric fit of the local jet.
    Fit,
    Simulate,
    /// Critical points per slice, continued into trajectories.
    Track,
    /// Realized pattern against the prescribed one.
    Compare,
    /// CSV tables for plotting.
    Plotdata,
    /// Every stage on the demo profile, then plot data.
    Demo,
}

fn load(cli: &Cli) -> Result<LabConfig, LabError> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(p), _) => LabConfig::load(p)?,
        (None, Command::Demo) => LabConfig::demo(),
        (None, _) => return Err(LabError::Config("`--config` is required".into())),
    };
    if let Some(m) = cli.mode {
        cfg.fit.mode = m;
    }
    if let Some(d) = cli.delta {
        cfg.sim.delta = Some(d);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), LabError> {
    let cfg = load(cli)?;
    let mut run = RunDir::open(&cli.runs, cfg)?;
    println!("run directory {}", run.root.display());
    let stage = match cli.command {
        Command::Synthesize => Stage::Synthesize,
        Command::Verify => Stage::Verify,
        Command::Fit => Stage::Fit,
        Command::Simulate => Stage::Simulate,
        Command::Track => Stage::Track,
        Command::Compare => Stage::Compare,
        Command::Plotdata => {
            for f in plot::plotdata(&run)? {
                println!("wrote {}", f.display());
            }
            return Ok(());
        }
        Command::Demo => {
            for o in run.run_all(cli.force)? {
                report(&o);
            }
            for f in plot::plotdata(&run)? {
                println!("wrote {}", f.display());
            }
            print!("{}", std::fs::read_to_string(run.artifact(Stage::Compare, "pattern.txt")).unwrap_or_default());
            return Ok(());
        }
    };
    let o = run.run(stage, cli.force)?;
    report(&o);
    Ok(())
}

fn report(o: &stagnation_lab::run::StageOutcome) {
    let r = &o.record;
    if o.cached {
        println!("{}: cached", r.stage);
    } else {
        println!("{}: {:?} in {:.2} s", r.stage, r.status, r.seconds);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
