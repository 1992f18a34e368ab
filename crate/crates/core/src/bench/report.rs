use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{BenchReport, BenchRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// One line per row plus a header.
    Csv,
    /// Aligned columns with a summary footer.
    Table,
    /// `a_max` down, δ across, `success / cost` in each cell.
    Grid,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "table" => Ok(ReportFormat::Table),
            "grid" => Ok(ReportFormat::Grid),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Renders `report`; rows are ordered by `a_max`, then δ.
pub fn emit_report(report: &BenchReport, format: ReportFormat) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut rows = report.rows.clone();
    rows.sort_by(|a, b| a.a_max.total_cmp(&b.a_max).then(a.inflation.total_cmp(&b.inflation)));
    Ok(match format {
        ReportFormat::Csv => csv(&rows),
        ReportFormat::Table => table(report, &rows),
        ReportFormat::Grid => grid(&rows),
    })
}

fn csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("a_max,inflation,success_rate,rmse1,rmse2,normalized_cost,runs,static_contact_runs\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.4},{:.6},{:.6},{:.6},{},{}",
            r.a_max, r.inflation, r.success_rate, r.rmse1, r.rmse2, r.normalized_cost, r.runs, r.static_contact_runs
        );
    }
    out
}

fn table(report: &BenchReport, rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:>6} {:>6} {:>8} {:>9} {:>9} {:>8} {:>5} {:>7}\n",
        "a_max", "delta", "success", "rmse1", "rmse2", "cost", "runs", "static"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6} {:>6} {:>7.1}% {:>9.5} {:>9.5} {:>7.2}% {:>5} {:>7}",
            r.a_max,
            r.inflation,
            100.0 * r.success_rate,
            r.rmse1,
            r.rmse2,
            100.0 * r.normalized_cost,
            r.runs,
            r.static_contact_runs
        );
    }
    let _ = writeln!(
        out,
        "instances: {} requested, {} evaluated, {} without plan, {} not generated, {} aborted runs",
        report.requested,
        report.evaluated,
        report.no_plan.len(),
        report.generation_failures.len(),
        report.aborted
    );
    out
}

fn grid(rows: &[BenchRow]) -> String {
    let mut deltas: Vec<f64> = rows.iter().map(|r| r.inflation).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut a_values: Vec<f64> = rows.iter().map(|r| r.a_max).collect();
    a_values.dedup();

    let mut out = format!("{:>6}", "a_max");
    for d in &deltas {
        let _ = write!(out, " | {:>17}", format!("delta={d}"));
    }
    out.push('\n');
    for a in a_values {
        let _ = write!(out, "{a:>6}");
        for d in &deltas {
            let cell = rows
                .iter()
                .find(|r| r.a_max == a && r.inflation == *d)
                .map(|r| format!("{:.1}% / {:.1}%", 100.0 * r.success_rate, 100.0 * r.normalized_cost))
                .unwrap_or_else(|| "-".into());
            let _ = write!(out, " | {cell:>17}");
        }
        out.push('\n');
    }
    out
}
