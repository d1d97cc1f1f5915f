use clap::Parser;

use proxyopt::cli::{run, Cli};

fn main() {
    // clap handles usage errors itself with exit code 2.
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
