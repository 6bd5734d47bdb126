use clap::Parser;
use thermolab_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = thermolab_cli::run(cli) {
        eprintln!("thermolab: {e}");
        std::process::exit(e.exit_code());
    }
}
