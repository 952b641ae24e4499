use std::process::ExitCode;

use clap::Parser;
use spectral_embed::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
