use clap::Parser;
use geoinar_cli::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = geoinar_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
