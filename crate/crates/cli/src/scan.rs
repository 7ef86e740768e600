//! Brute-force verification of computed truncation sets against full replay.

use std::io::Write;

use postadc_core::geometry::{collect_constraints, scan_oracle, solve_constraints, ConstraintMask, Sense};
use postadc_harness::{collect_data, ConfigGrid, Prepared, ReplicateDraw};

use crate::CliError;

pub const MAX_CANDIDATES: usize = 64;
pub const MAX_BUDGET: usize = 20;
const ENDPOINT_EXCLUSION: f64 = 1e-9;
const SCAN_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanReport {
    pub instances: usize,
    pub skipped: usize,
    pub points_checked: usize,
    pub mismatches: usize,
    /// Instance and mask of every instance with at least one mismatch.
    pub failures: Vec<String>,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

const MASKS: [ConstraintMask; 3] = [
    ConstraintMask::Full,
    ConstraintMask::WithoutEta,
    ConstraintMask::WithoutTrajectory,
];

/// Tightens the constraint that sets the finite endpoint of the solution
/// nearest to the observed statistic, moving that endpoint inwards.
fn corrupt(constraints: &mut [postadc_core::LinearConstraint], t_obs: f64, sd: f64) -> bool {
    let Ok(z) = solve_constraints(constraints, t_obs) else {
        return false;
    };
    let ends: Vec<f64> = z.endpoints().into_iter().filter(|e| e.is_finite()).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in constraints.iter().enumerate() {
        if c.d.abs() <= postadc_core::geometry::SLOPE_TOL {
            continue;
        }
        let root = -c.c / c.d;
        if ends.iter().any(|e| (e - root).abs() <= 1e-12 * (1.0 + e.abs())) {
            let gap = (root - t_obs).abs();
            if gap > 0.0 && best.is_none_or(|(_, g)| gap < g) {
                best = Some((i, gap));
            }
        }
    }
    let Some((i, gap)) = best else {
        return false;
    };
    let shift = (0.5 * sd).min(0.5 * gap);
    let c = &mut constraints[i];
    let sign = match c.sense {
        Sense::Le | Sense::Lt => 1.0,
        Sense::Ge | Sense::Gt => -1.0,
    };
    c.c += sign * c.d.abs() * shift;
    true
}

/// Compares truncation-set membership with replay of the whole pipeline on
/// `scan_points` values spanning `t_obs ± 8√v`, for `instances` replicates
/// of every grid point and all three constraint masks. With
/// `corrupt_constraint`, one binding constraint per instance is perturbed
/// first, which must produce mismatches.
pub fn cmd_scan_verify(
    grid: &ConfigGrid,
    corrupt_constraint: bool,
    out: &mut impl Write,
) -> Result<ScanReport, CliError> {
    let mut report = ScanReport::default();
    for point in &grid.points {
        let prepared = Prepared::new(point.config.clone())?;
        if prepared.candidates.len() > MAX_CANDIDATES || prepared.budget() > MAX_BUDGET {
            return Err(CliError::Config(format!(
                "scan-verify needs at most {MAX_CANDIDATES} candidates and a budget of at most {MAX_BUDGET}"
            )));
        }
        let cfg = &prepared.config;
        if cfg.scan_points < 2 {
            return Err(CliError::Config("scan_points must be at least 2".into()));
        }
        let problem = prepared.problem();
        for k in 0..cfg.instances {
            report.instances += 1;
            let draw = ReplicateDraw::new(&prepared, k as u64);
            let data = collect_data(&prepared, &draw, false)?;
            let event = match problem.observe(data) {
                Ok(e) => e,
                Err(postadc_core::Error::DegenerateSelection(_)) => {
                    report.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let (t, sd) = (event.line.t_obs, event.line.v.sqrt());
            let n = cfg.scan_points;
            let z_grid: Vec<f64> = (0..n)
                .map(|i| t - SCAN_HALF_WIDTH * sd + 2.0 * SCAN_HALF_WIDTH * sd * i as f64 / (n - 1) as f64)
                .collect();
            for mask in MASKS {
                let mut constraints = collect_constraints(
                    &problem.algorithm,
                    &prepared.candidates,
                    &event.data,
                    &event.target,
                    &event.line,
                    mask,
                )?;
                if corrupt_constraint && !corrupt(&mut constraints, t, sd) {
                    continue;
                }
                let z = solve_constraints(&constraints, t)?;
                let member = scan_oracle(
                    &problem.algorithm,
                    &prepared.candidates,
                    &event.data,
                    &event.target,
                    &event.line,
                    mask,
                    &z_grid,
                )?;
                let ends = z.endpoints();
                let mut bad = 0;
                for (&zk, inside) in z_grid.iter().zip(member) {
                    if ends.iter().any(|e| (e - zk).abs() <= ENDPOINT_EXCLUSION) {
                        continue;
                    }
                    report.points_checked += 1;
                    if z.contains(zk) != inside {
                        bad += 1;
                    }
                }
                if bad > 0 {
                    report.mismatches += bad;
                    report.failures.push(format!(
                        "config {} instance {k} mask {mask:?}: {bad} mismatches, Z = {z}",
                        point.id
                    ));
                }
            }
        }
    }
    writeln!(
        out,
        "scan-verify: {} instances ({} skipped), {} points checked, {} mismatches: {}",
        report.instances,
        report.skipped,
        report.points_checked,
        report.mismatches,
        if report.passed() { "PASS" } else { "FAIL" }
    )?;
    for f in &report.failures {
        writeln!(out, "  {f}")?;
    }
    Ok(report)
}
