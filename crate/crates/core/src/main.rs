use clap::Parser;
use irdeco::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("irdeco: {e}");
        std::process::exit(match e {
            irdeco::Error::Config(_) => 2,
            irdeco::Error::Io(_) => 3,
            _ => 1,
        });
    }
}
