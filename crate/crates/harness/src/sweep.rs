//! Parallel replicate execution and per-method aggregation.

use postadc_core::selective::Method;
use rayon::prelude::*;

use crate::config::{ConfigGrid, GridPoint};
use crate::replicate::{run_replicate, Prepared, ReplicateRecord};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub n_effective: usize,
    pub n_skipped: usize,
    pub reject_rate: f64,
    pub reject_se: f64,
    pub coverage_rate: f64,
    pub coverage_se: f64,
    pub ci_length_median: f64,
    pub ci_length_q90: f64,
}

#[derive(Debug, Clone)]
pub struct ConfigRun {
    pub point: GridPoint,
    pub records: Vec<ReplicateRecord>,
    pub aggregates: Vec<AggregateRow>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))
}

/// Replicates `0..config.replicates` in replicate order for any worker count.
pub fn run_replicates(
    prepared: &Prepared,
    config_id: usize,
    workers: usize,
) -> Result<Vec<ReplicateRecord>, HarnessError> {
    let n = prepared.config.replicates as u64;
    Ok(pool(workers)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|id| run_replicate(prepared, config_id, id))
            .collect()
    }))
}

pub fn run_sweep(grid: &ConfigGrid, workers: usize) -> Result<Vec<ConfigRun>, HarnessError> {
    if grid.points.is_empty() {
        return Err(HarnessError::Config("empty configuration grid".into()));
    }
    let prepared = grid
        .points
        .iter()
        .map(|p| Prepared::new(p.config.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let pool = pool(workers)?;
    Ok(grid
        .points
        .iter()
        .zip(&prepared)
        .map(|(point, prep)| {
            let n = prep.config.replicates as u64;
            let records: Vec<ReplicateRecord> = pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .map(|id| run_replicate(prep, point.id, id))
                    .collect()
            });
            let aggregates = aggregate(&records, &prep.methods);
            ConfigRun {
                point: point.clone(),
                records,
                aggregates,
            }
        })
        .collect())
}

/// Nearest-rank quantile of an ascending slice.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn binomial(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

pub fn aggregate(records: &[ReplicateRecord], methods: &[Method]) -> Vec<AggregateRow> {
    methods
        .iter()
        .map(|&method| {
            let rows: Vec<_> = records
                .iter()
                .flat_map(|r| r.rows.iter().filter(move |row| row.method == method))
                .collect();
            let ok: Vec<_> = rows.iter().filter(|r| !r.is_skipped()).collect();
            let (reject_rate, reject_se) = binomial(ok.iter().filter(|r| r.reject).count(), ok.len());
            let covers: Vec<bool> = ok.iter().filter_map(|r| r.cover).collect();
            let (coverage_rate, coverage_se) = binomial(covers.iter().filter(|&&c| c).count(), covers.len());
            let mut lengths: Vec<f64> = ok.iter().map(|r| r.ci_length()).collect();
            lengths.sort_by(f64::total_cmp);
            AggregateRow {
                method,
                n_effective: ok.len(),
                n_skipped: rows.len() - ok.len(),
                reject_rate,
                reject_se,
                coverage_rate,
                coverage_se,
                ci_length_median: nearest_rank(&lengths, 0.5),
                ci_length_q90: nearest_rank(&lengths, 0.9),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(nearest_rank(&v, 0.5), 5.0);
        assert_eq!(nearest_rank(&v, 0.9), 9.0);
        assert_eq!(nearest_rank(&v[..1], 0.9), 1.0);
        assert!(nearest_rank(&[], 0.5).is_nan());
    }

    #[test]
    fn binomial_standard_error() {
        let (p, se) = binomial(5, 100);
        assert_eq!(p, 0.05);
        assert!((se - (0.05f64 * 0.95 / 100.0).sqrt()).abs() < 1e-15);
    }
}
