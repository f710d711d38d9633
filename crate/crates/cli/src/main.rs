//! `qbm`: standard quantum limits, Wigner-function simulations and
//! detection statistics for a test mass under momentum diffusion.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::{CliError, Settings};

#[derive(Parser, Debug)]
#[command(name = "qbm", version, about = "Quantum Brownian motion, decoherence and standard quantum limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Plain-text `key = value` file; flags override its values.
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, value_name = "DIR", default_value = ".", global = true)]
    out: PathBuf,
}

macro_rules! keyed_args {
    ($name:ident { $($field:ident = $key:literal : $help:literal),* $(,)? }) => {
        #[derive(Args, Debug)]
        struct $name {
            $(
                #[arg(long = $key, value_name = "VALUE", help = $help, allow_hyphen_values = true)]
                $field: Option<String>,
            )*
        }

        impl $name {
            fn overrides(&self) -> Vec<(&'static str, Option<&str>)> {
                vec![$(($key, self.$field.as_deref())),*]
            }
        }
    };
}

keyed_args!(UnitArgs {
    m = "m": "Mass",
    t = "T": "Duration of the experiment",
    hbar = "hbar": "Reduced Planck constant",
    l = "L": "Branch separation",
    f = "F": "Uniform force",
    d = "D": "Momentum diffusion coefficient",
});

keyed_args!(SimulateArgs {
    mode = "mode": "analytic | grid",
    state = "state": "gaussian | cat",
    sigma_x = "sigma_x": "Prepared position width (default sqrt(hbar T/m))",
    r = "r": "Position-momentum correlation of the packet(s)",
    x0 = "x0": "Centre of a Gaussian packet",
    p0 = "p0": "Mean momentum",
    nx = "nx": "Grid cells in x",
    np = "np": "Grid cells in p",
    xmin = "xmin": "Window bound",
    xmax = "xmax": "Window bound",
    pmin = "pmin": "Window bound",
    pmax = "pmax": "Window bound",
    steps = "steps": "Splitting steps in grid mode",
    scenario = "scenario": "Free-form label",
});

keyed_args!(DetectArgs {
    family = "family": "noncontractive | contractive | cat",
    f_alt = "F_alt": "Force under the alternative hypothesis",
    d_alt = "D_alt": "Diffusion under the alternative hypothesis",
    sigma_x = "sigma_x": "Branch width of the cat",
});

keyed_args!(FirstOrderArgs {
    dp = "dP": "Probe dimension",
    de = "dE": "Environment dimension",
    seed = "seed": "Seed of the random Hamiltonians",
    eps = "eps": "Comma-separated coupling strengths",
    t = "t": "Evolution time",
    coupling = "coupling": "random | commuting",
});

keyed_args!(ScaleArgs {
    kappa = "kappa": "Comma-separated factors multiplying hbar",
});

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the standard quantum limits and derived widths.
    Sql {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        units: UnitArgs,
    },
    /// Evolve a Gaussian or cat state and export grids and marginals.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        units: UnitArgs,
        #[command(flatten)]
        args: SimulateArgs,
    },
    /// Chernoff exponents for discriminating two force/diffusion hypotheses.
    Detect {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        units: UnitArgs,
        #[command(flatten)]
        args: DetectArgs,
    },
    /// Purity-deficit scaling of a weakly coupled bipartite system.
    FirstOrder {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: FirstOrderArgs,
    },
    /// Check invariance of the decoherence factor as hbar shrinks.
    ScaleHbar {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        units: UnitArgs,
        #[command(flatten)]
        args: ScaleArgs,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let load = |common: &Common, overrides: Vec<(&'static str, Option<&str>)>| Settings::load(common.config.as_deref(), &overrides);
    let report = match &cli.command {
        Command::Sql { common, units } => commands::sql(&load(common, units.overrides())?)?,
        Command::Simulate { common, units, args } => {
            commands::simulate(&load(common, [units.overrides(), args.overrides()].concat())?, &common.out)?
        }
        Command::Detect { common, units, args } => {
            commands::detect(&load(common, [units.overrides(), args.overrides()].concat())?, &common.out)?
        }
        Command::FirstOrder { common, args } => commands::first_order(&load(common, args.overrides())?, &common.out)?,
        Command::ScaleHbar { common, units, args } => {
            commands::scale_hbar(&load(common, [units.overrides(), args.overrides()].concat())?, &common.out)?
        }
    };
    Ok(report.render())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_owned();
            println!("{}", CliError::new("usage", None, first).line());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", e.line());
            ExitCode::FAILURE
        }
    }
}
