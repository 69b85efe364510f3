use clap::Parser;

fn main() {
    let cli = evlog_cli::Cli::parse();
    let code = evlog_cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
