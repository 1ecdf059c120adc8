//! `selfnorm` command-line front end.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Options;
use selfnorm::Error;

#[derive(Parser)]
#[command(name = "selfnorm", version, about = "Block self-normalized sums: exact oracles and Monte Carlo checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical P(W >= x) against the normal tail on an x grid
    TailRatio(Options),
    /// Empirical Kolmogorov distance of W from the standard normal
    BerryEsseen(Options),
    /// a_n^2 ln P(a_n W in B) along a grid of sample sizes
    Mdp(Options),
    /// Coverage of the block-t confidence interval for the mean
    CiCoverage(Options),
    /// Exact dependence quantities for a finite-state or i.i.d. model
    Conditions(Options),
    /// Exact tail probabilities by full enumeration
    Enumerate(Options),
    /// Block length from a regime rule
    Advise(Options),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    let (name, opts) = match command {
        Command::TailRatio(o) => ("tail-ratio", o),
        Command::BerryEsseen(o) => ("berry-esseen", o),
        Command::Mdp(o) => ("mdp", o),
        Command::CiCoverage(o) => ("ci-coverage", o),
        Command::Conditions(o) => ("conditions", o),
        Command::Enumerate(o) => ("enumerate", o),
        Command::Advise(o) => ("advise", o),
    };
    let opts = opts.resolve()?;
    opts.format()?;
    let outcome = match name {
        "tail-ratio" => commands::tail_ratio(&opts),
        "berry-esseen" => commands::berry_esseen(&opts),
        "mdp" => commands::mdp(&opts),
        "ci-coverage" => commands::ci(&opts),
        "conditions" => commands::conditions(&opts),
        "enumerate" => commands::enumerate(&opts),
        _ => commands::advise(&opts),
    }?;
    match &opts.out {
        Some(path) => output::write_atomic(path, &outcome.artifact)?,
        None => print!("{}", outcome.artifact),
    }
    println!("{}", outcome.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}
