use clap::Parser;

fn main() -> std::process::ExitCode {
    v2x_chain::cli::run(v2x_chain::cli::Cli::parse())
}
