use clap::Parser;
use mlfrac_cli::run::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("mlfrac: {e}");
        std::process::exit(e.exit_code());
    }
}
