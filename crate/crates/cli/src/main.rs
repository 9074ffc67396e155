use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help
    let cli = kepler_geom_cli::Cli::parse();
    ExitCode::from(kepler_geom_cli::run(cli))
}
