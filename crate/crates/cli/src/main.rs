use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

mod cli;
mod commands;
mod error;
mod parse;
mod render;

use cli::Cli;
use error::{CliError, EXIT_USAGE};
use render::Format;

fn main() {
    std::process::exit(run(std::env::args_os().collect()));
}

/// `--format json` has to be known before clap has parsed anything, so
/// that flag errors can be reported as JSON too.
fn wants_json(args: &[OsString]) -> bool {
    args.windows(2).any(|w| w[0] == "--format" && w[1] == "json") || args.iter().any(|a| a == "--format=json")
}

fn report_error(e: &CliError, json: bool) {
    if json {
        eprintln!("{}", render::round_json(e.to_json()));
    } else {
        eprintln!("error: {}", e.message());
    }
}

fn run(args: Vec<OsString>) -> i32 {
    let json = wants_json(&args);
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            emit(&e.to_string());
            return 0;
        }
        Err(e) => {
            if json {
                report_error(&CliError::Usage(e.to_string().trim_end().to_string()), true);
            } else {
                eprint!("{e}");
            }
            return EXIT_USAGE;
        }
    };
    let report = match commands::execute(&cli.command, &cli.global) {
        Ok(r) => r,
        Err(e) => {
            report_error(&e, cli.global.format == Format::Json);
            return e.exit_code();
        }
    };
    if let Some(dir) = &cli.global.output {
        if let Err(e) = report.write_files(dir) {
            report_error(&e, cli.global.format == Format::Json);
            return e.exit_code();
        }
    }
    emit(&report.render(cli.global.format));
    0
}

/// A closed pipe (e.g. `ipd ... | head`) is not an error worth a panic.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}
