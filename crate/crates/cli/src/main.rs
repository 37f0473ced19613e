use clap::Parser;

use hemicirc_cli::{config_from, emit, run, Cli};

fn main() {
    let cli = Cli::parse();
    let out_dir = cli.out.clone();
    let code = match config_from(&cli).and_then(run) {
        Ok(outcome) => match emit(&outcome, &out_dir) {
            Ok(_) => {
                for n in &outcome.report.notes {
                    eprintln!("note: {n}");
                }
                outcome.report.status.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
