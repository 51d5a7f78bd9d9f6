use clap::Parser;

fn main() {
    std::process::exit(rbmlab_cli::run(rbmlab_cli::Cli::parse()));
}
