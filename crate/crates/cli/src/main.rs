use std::process::ExitCode;

use clap::Parser;
use gatewave::output::{params_json, write_json, write_table};
use gatewave::{error_record, execute, init_threads, plan, sidecar, Cli};
use serde_json::Value;

/// Configuration and IO problems.
const EXIT_CONFIG: u8 = 1;
/// A sweep point failed.
const EXIT_RUN: u8 = 2;

fn fail(code: u8, record: Value, dir: Option<(&std::path::Path, &str)>) -> ExitCode {
    eprintln!("{record}");
    if let Some((dir, name)) = dir {
        let _ = write_json(&dir.join(format!("{name}.error.json")), &record);
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        return fail(EXIT_CONFIG, error_record("config", &format!("{e:#}"), Value::Null), None);
    }
    let plan = match plan(&cli) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_CONFIG, error_record("config", &format!("{e:#}"), Value::Null), None),
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        return fail(EXIT_CONFIG, error_record("io", &format!("{}: {e}", cli.out.display()), Value::Null), None);
    }
    let dir = Some((cli.out.as_path(), plan.name.as_str()));
    let report = match execute(&plan) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => return fail(EXIT_RUN, error_record(e.kind(), &format!("{:#}", e.error), params_json(&e.params)), dir),
        Err(e) => return fail(EXIT_CONFIG, error_record("config", &format!("{e:#}"), Value::Null), dir),
    };
    let written = write_table(&cli.out, &plan.name, &report.table, cli.format).and_then(|path| {
        let meta = sidecar(&plan, &report, cli.format)?;
        write_json(&cli.out.join(format!("{}.meta.json", plan.name)), &meta)?;
        Ok(path)
    });
    match written {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_CONFIG, error_record("io", &format!("{e:#}"), Value::Null), None),
    }
}
