use clap::Parser;

use nlos_cli::args::Cli;
use nlos_cli::{run, ERROR_PREFIX};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{ERROR_PREFIX} {e}");
        std::process::exit(e.exit_code());
    }
}
