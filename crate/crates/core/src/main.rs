use clap::Parser;

use nnsig::cli::{self, Cli};

fn main() {
    let args = Cli::parse();
    match cli::run(args) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("nnsig: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
