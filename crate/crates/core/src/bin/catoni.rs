use clap::Parser;

fn main() {
    let cli = catoni::cli::Cli::parse();
    std::process::exit(catoni::cli::run(&cli));
}
