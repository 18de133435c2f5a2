use clap::Parser;

fn main() {
    let cli = mcsf_cli::Cli::parse();
    if let Err(err) = mcsf_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(mcsf_cli::exit_code(&err));
    }
}
