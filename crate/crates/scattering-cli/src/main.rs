use clap::Parser;

fn main() {
    let cli = scattering_cli::Cli::parse();
    let outcome = scattering_cli::execute(cli);
    print!("{}", outcome.output);
    std::process::exit(outcome.exit_code);
}
