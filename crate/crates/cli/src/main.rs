use std::process::ExitCode;

use clap::Parser;
use oimac_cli::{run, Args, CliError, ScenarioConfig};

fn main() -> ExitCode {
    let args = Args::parse();
    let scenario = args.scenario.name();
    let result = ScenarioConfig::from_args(args).and_then(|cfg| run(&cfg, &mut std::io::stdout().lock()).map(|_| ()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match &e {
                CliError::Usage(_) => "usage",
                CliError::Numeric(_) => "numerical",
                CliError::Io(_) | CliError::Json(_) => "output",
            };
            let record = serde_json::json!({ "scenario": scenario, "error": kind, "message": e.to_string() });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
