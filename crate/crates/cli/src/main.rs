//! `sads-udw`: sweeps of detector transition rates on Schwarzschild-AdS.
//!
//! Exit codes: 0 success, 1 output I/O error, 2 configuration error,
//! 3 some points failed, 4 every point failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod config;
mod output;
mod tasks;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use cache::DiskCache;
use config::{Cli, Plan};
use output::{write_table, Manifest};

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn exit_code(points: usize, failed: usize) -> u8 {
    match failed {
        0 => 0,
        f if f >= points => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return usage_error(e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let plan = match config::validate(cli) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    match run(&plan) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(plan: &Plan) -> std::io::Result<u8> {
    let start = Instant::now();
    let cli = &plan.cli;
    std::fs::create_dir_all(&cli.out)?;
    let cache = DiskCache::new(cli.cache_dir.as_deref(), plan.method, plan.settings.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(std::io::Error::other)?;
    let outcomes = pool.install(|| tasks::run(plan, &cache));

    let echo = config::echo(cli);
    let mut files = Vec::new();
    let mut reports = Vec::new();
    let (mut points, mut failed) = (0, 0);
    for o in outcomes {
        for t in &o.tables {
            files.push(write_table(&cli.out, t, &echo)?);
        }
        points += o.report.points;
        failed += o.report.failed;
        reports.push(o.report);
    }
    let code = exit_code(points, failed);
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config: cli,
        exit_code: code as i32,
        seconds: start.elapsed().as_secs_f64(),
        tasks: reports,
        cache: cache.stats(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    std::fs::write(cli.out.join("manifest.json"), text + "\n")?;
    if failed > 0 {
        eprintln!("warning: {failed} of {points} points failed; see *.failures.csv");
    }
    Ok(code)
}
