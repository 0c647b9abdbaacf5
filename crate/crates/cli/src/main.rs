mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, SampleModel, TheoryModel};
use error::CliError;
use output::OutDir;

fn out_path(cmd: &Command) -> &std::path::Path {
    match cmd {
        Command::Theory(
            TheoryModel::Poisson { common, .. }
            | TheoryModel::Config { common, .. }
            | TheoryModel::Maxent { common, .. }
            | TheoryModel::Gfp { common, .. },
        ) => &common.out,
        Command::Sample(
            SampleModel::Poisson { common, .. } | SampleModel::Config { common, .. } | SampleModel::Maxent { common, .. },
        ) => &common.out,
        Command::Analyze(a) => &a.common.out,
        Command::Compare(c) => &c.common.out,
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    commands::check_out(out_path(&cli.command))?;
    let mut out: Option<OutDir> = None;
    let name = match &cli.command {
        Command::Theory(model) => commands::theory(model, &mut out)?,
        Command::Sample(model) => commands::sample(model, &mut out)?,
        Command::Analyze(args) => commands::analyze_cmd(args, &mut out)?,
        Command::Compare(args) => commands::compare_cmd(args, &mut out)?,
    };
    let params = serde_json::to_value(&cli.command).expect("arguments serialize");
    out.expect("every command opens its output directory").finish(name, &params)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
