use clap::Parser;

use entrygame::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
