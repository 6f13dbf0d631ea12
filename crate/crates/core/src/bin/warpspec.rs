use std::process::ExitCode;

use clap::Parser;
use warpspec::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
