use clap::Parser;

fn main() {
    let cli = kdvb_cli::Cli::parse();
    std::process::exit(kdvb_cli::run(&cli));
}
