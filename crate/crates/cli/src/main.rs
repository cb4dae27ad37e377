use clap::Parser;

fn main() {
    let cli = qgrow_cli::Cli::parse();
    if let Err(e) = qgrow_cli::dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
