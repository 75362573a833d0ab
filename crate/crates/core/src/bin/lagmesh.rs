use clap::Parser;
use lagmesh::cli::{execute, Cli, EXIT_USER};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_USER } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = execute(&cli.command, &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
