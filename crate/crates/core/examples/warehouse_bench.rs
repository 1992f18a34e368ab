//! Runs the warehouse batch and prints the summary tables.
//!
//! `cargo run --release --example warehouse_bench -- [n_instances] [seed]`

use std::time::Instant;

use timed_nav::bench::{emit_report, run_benchmark, BenchConfig, ReportFormat};

fn main() -> timed_nav::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_instances = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let config = BenchConfig { n_instances, seed, ..BenchConfig::default() };
    let started = Instant::now();
    let report = run_benchmark(&config)?;
    print!("{}", emit_report(&report, ReportFormat::Table)?);
    print!("{}", emit_report(&report, ReportFormat::Grid)?);
    println!("elapsed: {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}
