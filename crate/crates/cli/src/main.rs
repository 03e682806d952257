use clap::Parser;

fn main() {
    let cli = bicontact_cli::Cli::parse();
    std::process::exit(bicontact_cli::execute(cli));
}
