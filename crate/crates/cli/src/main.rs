use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = botlint::Cli::parse();
    ExitCode::from(botlint::run(&cli))
}
