use clap::Parser;

fn main() {
    let cli = gspa_cli::Cli::parse();
    if let Err(e) = gspa_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
