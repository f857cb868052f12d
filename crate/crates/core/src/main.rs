use apexmr::cli::{run, Cli};
use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("APEXMR_LOG")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
