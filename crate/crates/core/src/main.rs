use clap::Parser;

use relsr::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
