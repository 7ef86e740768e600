//! Comma-separated output with the effective configuration echoed as `#`
//! comment lines.

use std::io::Write;

use crate::sweep::ConfigRun;
use crate::HarnessError;

pub const REPLICATE_COLUMNS: [&str; 15] = [
    "config_id",
    "replicate_id",
    "method",
    "p_value",
    "ci_lo",
    "ci_hi",
    "ci_length",
    "reject",
    "cover",
    "delta_true",
    "z_lo",
    "z_hi",
    "skipped",
    "skip_reason",
    "wall_ms",
];

pub const AGGREGATE_COLUMNS: [&str; 10] = [
    "method",
    "n_effective",
    "reject_rate",
    "reject_se",
    "coverage_rate",
    "coverage_se",
    "ci_length_median",
    "ci_length_q90",
    "n_skipped",
    "n_total",
];

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_header_lines(out: &mut impl Write, header: &[String]) -> Result<(), HarnessError> {
    for line in header {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_replicates(out: &mut impl Write, header: &[String], runs: &[ConfigRun]) -> Result<(), HarnessError> {
    write_header_lines(out, header)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPLICATE_COLUMNS)?;
    for run in runs {
        for rec in &run.records {
            for row in &rec.rows {
                w.write_record([
                    rec.config_id.to_string(),
                    rec.replicate_id.to_string(),
                    row.method.name().to_string(),
                    row.p_value.to_string(),
                    row.ci_lo.to_string(),
                    row.ci_hi.to_string(),
                    row.ci_length().to_string(),
                    flag(row.reject).to_string(),
                    row.cover.map_or(String::new(), |c| flag(c).to_string()),
                    row.delta_true.to_string(),
                    row.z_lo.to_string(),
                    row.z_hi.to_string(),
                    flag(row.is_skipped()).to_string(),
                    row.skip_reason.clone().unwrap_or_default(),
                    rec.wall_ms.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregates(
    out: &mut impl Write,
    header: &[String],
    axis_keys: &[String],
    runs: &[ConfigRun],
) -> Result<(), HarnessError> {
    write_header_lines(out, header)?;
    let mut w = csv::Writer::from_writer(out);
    let columns: Vec<&str> = std::iter::once("config_id")
        .chain(axis_keys.iter().map(String::as_str))
        .chain(AGGREGATE_COLUMNS)
        .collect();
    w.write_record(&columns)?;
    for run in runs {
        for agg in &run.aggregates {
            let mut record = vec![run.point.id.to_string()];
            record.extend(axis_keys.iter().map(|k| {
                run.point
                    .axes
                    .iter()
                    .find(|(key, _)| key == k)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_default()
            }));
            record.extend([
                agg.method.name().to_string(),
                agg.n_effective.to_string(),
                agg.reject_rate.to_string(),
                agg.reject_se.to_string(),
                agg.coverage_rate.to_string(),
                agg.coverage_se.to_string(),
                agg.ci_length_median.to_string(),
                agg.ci_length_q90.to_string(),
                agg.n_skipped.to_string(),
                run.records.len().to_string(),
            ]);
            w.write_record(&record)?;
        }
    }
    w.flush()?;
    Ok(())
}
