mod args;
mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::args::{Cli, Format};
use crate::report::{write_csv, write_json, Report, Timing};

const EXIT_VERDICT: u8 = 5;

fn emit(report: &Report, rows: &[report::Row], format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => write_json(report, out),
        Format::Csv => write_csv(rows, out).map_err(io::Error::other),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let clock = Instant::now();
    let (request, outcome) = commands::run(&cli.command);
    let args = commands::case_args(&cli.command);

    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let body = serde_json::json!({
                "error": { "code": e.code(), "kind": e.kind(), "message": e.to_string() },
                "request": request,
            });
            eprintln!("{body}");
            return ExitCode::from(e.code());
        }
    };
    let failed = outcome.any_failed();
    let verdicts = outcome.judged.then(|| outcome.rows.clone());
    let report = Report {
        request,
        results: outcome.results,
        verdicts,
        timing: args.timing.then(|| Timing { elapsed_ms: clock.elapsed().as_secs_f64() * 1e3 }),
    };

    let written = match &args.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            emit(&report, &outcome.rows, args.format, &mut w)?;
            w.flush()
        }),
        None => emit(&report, &outcome.rows, args.format, &mut io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("{}", serde_json::json!({ "error": { "code": 1, "kind": "io", "message": e.to_string() } }));
        return ExitCode::from(1);
    }
    if failed {
        for r in outcome.rows.iter().filter(|r| r.failed()) {
            log::error!("verdict failed: {} {}", r.case, r.quantity);
        }
        return ExitCode::from(EXIT_VERDICT);
    }
    ExitCode::SUCCESS
}
