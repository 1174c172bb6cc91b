//! `nsv4`: batch driver for the Voigt solver and its verification suites.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
//! 4 invariant violation.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsv4_core::ForcingSpec;

use crate::commands::{Extras, Outcome};
use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{Report, RunDir, Status};

#[derive(Parser, Debug)]
#[command(
    name = "nsv4",
    version,
    about = "Limiting Navier-Stokes-Voigt system on the 4-torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Integrate one trajectory and log its energy balance.
    Simulate,
    /// Unforced run against the exact decay of the enstrophy.
    DecayTest,
    /// Convergence to the steady shear from rest.
    SteadyTest,
    /// Nearby trajectories against their Gronwall bound.
    ContractionTest,
    /// Time-averaged n-traces q(n) along a forced trajectory.
    Trace,
    /// L2 norm of rho for random orthonormal frames.
    RhoCheck,
    /// Negative-eigenvalue counts against the CLR bound.
    ClrCheck,
    /// Attractor dimension bound for given forcing and viscosity.
    Bound,
    /// Quick run of every invariant suite.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::DecayTest => "decay-test",
            Command::SteadyTest => "steady-test",
            Command::ContractionTest => "contraction-test",
            Command::Trace => "trace",
            Command::RhoCheck => "rho-check",
            Command::ClrCheck => "clr-check",
            Command::Bound => "bound",
            Command::Selftest => "selftest",
        }
    }
}

/// Overrides applied on top of the configuration file.
#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root of the per-run output directories.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Modes per axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    box_length: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// Final time (the averaging window for `trace`).
    #[arg(long = "t", global = true, allow_negative_numbers = true)]
    t_final: Option<f64>,
    #[arg(long, global = true)]
    save_every: Option<usize>,
    /// `||g||_{H^-1}`; rescales random forcing and feeds `bound`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    g_norm: Option<f64>,
    /// `||grad u0||` of the random initial condition.
    #[arg(long, global = true, allow_negative_numbers = true)]
    u0_norm: Option<f64>,
    #[arg(long, global = true)]
    n_min: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    spin_up: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    perturbation: Option<f64>,
    /// Shear amplitude of `steady-test`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    amplitude: Option<f64>,
    /// CLR constant used by the bounds.
    #[arg(long, global = true, allow_negative_numbers = true)]
    l_const: Option<f64>,
    #[arg(long, global = true)]
    checkpoint_every: Option<u64>,
    /// Continue `simulate` from a checkpoint.
    #[arg(long, global = true)]
    resume: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long, global = true)]
    print: bool,
}

impl Flags {
    fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($flag:ident => $($target:tt)+) => {
                if let Some(v) = self.$flag.clone() {
                    cfg.$($target)+ = v;
                }
            };
        }
        set!(out => output.dir);
        set!(format => output.format);
        set!(seed => seed);
        set!(grid => grid.n);
        set!(box_length => grid.box_length);
        set!(nu => solver.nu);
        set!(dt => solver.dt);
        set!(save_every => solver.save_every);
        set!(u0_norm => initial.h1_norm);
        set!(n_min => trace.n_min);
        set!(n_max => trace.n_max);
        set!(trials => checks.trials);
        set!(perturbation => checks.perturbation);
        set!(amplitude => checks.shear_amplitude);
        set!(l_const => bound.l_const);
        if let Some(t) = self.t_final {
            cfg.solver.t_final = Some(t);
        }
        if let Some(s) = self.spin_up {
            cfg.trace.spin_up = Some(s);
        }
        if let Some(c) = self.checkpoint_every {
            cfg.output.checkpoint_every = Some(c);
        }
        if let Some(g) = self.g_norm {
            cfg.bound.g_norm = Some(g);
            if let ForcingSpec::RandomLowMode { hminus1_norm, .. } = &mut cfg.solver.forcing {
                *hminus1_norm = g;
            }
        }
    }
}

fn dispatch(command: Command, cfg: &RunConfig, extras: &Extras, dir: &RunDir) -> Result<Outcome, CliError> {
    match command {
        Command::Simulate => commands::simulate(cfg, extras, dir),
        Command::DecayTest => commands::decay_test(cfg, dir),
        Command::SteadyTest => commands::steady_test(cfg, dir),
        Command::ContractionTest => commands::contraction_test(cfg, dir),
        Command::Trace => commands::trace(cfg, dir),
        Command::RhoCheck => commands::rho_check(cfg, dir),
        Command::ClrCheck => commands::clr_check(cfg, dir),
        Command::Bound => commands::bound(cfg),
        Command::Selftest => commands::selftest(cfg, dir),
    }
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let mut cfg = match &cli.flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.flags.apply(&mut cfg);
    cfg.validate()?;
    if cli.flags.resume.is_some() && !matches!(cli.command, Command::Simulate) {
        return Err(CliError::Config("--resume only applies to simulate".into()));
    }

    let name = cli.command.name();
    let hash = cfg.hash(name);
    let dir = RunDir::create(&cfg.output.dir, name, &hash)?;
    dir.write_metadata(&cfg.output)?;
    let extras = Extras {
        resume: cli.flags.resume.clone(),
    };
    let outcome = dispatch(cli.command, &cfg, &extras, &dir)?;

    let report = Report {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        seed: cfg.seed,
        status: outcome.status,
        config: &cfg,
        result: outcome.result,
    };
    dir.write_json("report.json", &report)?;
    let summary = format!(
        "{name} [{}] seed {} config {}\n{}",
        match outcome.status {
            Status::Ok => "ok",
            Status::Pass => "pass",
            Status::Fail => "fail",
        },
        cfg.seed,
        &hash[..16],
        outcome.summary
    );
    dir.write_text("summary.txt", &summary)?;
    if cli.flags.print {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{summary}");
        println!("report: {}", dir.file("report.json").display());
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Fail) => ExitCode::from(4),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
