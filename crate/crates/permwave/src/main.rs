use clap::error::ErrorKind;
use clap::Parser;
use permwave::args::Cli;
use permwave::run::{exit_code, run};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            std::process::exit(code);
        }
    };
    let result = run(cli);
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
    }
    std::process::exit(exit_code(&result));
}
