use clap::Parser;

fn main() {
    std::process::exit(fsilab::cli::run(fsilab::cli::Cli::parse()));
}
