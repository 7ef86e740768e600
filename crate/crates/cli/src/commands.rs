use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use postadc_core::geometry::{collect_constraints, write_constraints, ConstraintMask, Family};
use postadc_core::pipeline::randomized_pipeline;
use postadc_core::selective::Method;
use postadc_core::SelectiveResult;
use postadc_harness::output::{write_aggregates, write_header_lines, write_replicates};
use postadc_harness::{collect_data, run_sweep, ConfigGrid, ConfigRun, Prepared, ReplicateDraw};

use crate::CliError;

fn single(grid: &ConfigGrid, command: &str) -> Result<Prepared, CliError> {
    match grid.points.as_slice() {
        [point] => Ok(Prepared::new(point.config.clone())?),
        _ => Err(CliError::Config(format!(
            "{command} takes a single configuration, got a grid of {}",
            grid.points.len()
        ))),
    }
}

fn fmt_list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Runs one end-to-end pipeline (replicate 0 of the configuration) and
/// writes one result row per requested method.
pub fn cmd_infer(grid: &ConfigGrid, out: &mut impl Write) -> Result<(), CliError> {
    let prepared = single(grid, "infer")?;
    let cfg = &prepared.config;
    let problem = prepared.problem();
    let draw = ReplicateDraw::new(&prepared, 0);

    let mut results: Vec<(SelectiveResult, f64)> = Vec::new();
    let mut diagnostics = vec!["# diagnostics".to_string()];
    let standard: Vec<Method> = prepared
        .methods
        .iter()
        .copied()
        .filter(|&m| m != Method::Randomized)
        .collect();
    if !standard.is_empty() {
        let event = problem.observe(collect_data(&prepared, &draw, false)?)?;
        let delta = prepared.delta_true(&event.target.eta, &event.data.indices);
        diagnostics.push(format!("# trajectory = {}", fmt_list(&event.data.indices)));
        diagnostics.push(format!("# selection = {:?}", event.target.selection));
        diagnostics.push(format!("# t_obs = {}", event.line.t_obs));
        diagnostics.push(format!("# v = {}", event.line.v));
        let constraints = collect_constraints(
            &problem.algorithm,
            &prepared.candidates,
            &event.data,
            &event.target,
            &event.line,
            ConstraintMask::Full,
        )?;
        let count = |f: Family| constraints.iter().filter(|c| c.family == f).count();
        diagnostics.push(format!(
            "# constraints trajectory = {}, target = {}",
            count(Family::Trajectory),
            count(Family::Target)
        ));
        for mask in [
            ConstraintMask::Full,
            ConstraintMask::WithoutEta,
            ConstraintMask::WithoutTrajectory,
        ] {
            diagnostics.push(format!("# z {mask:?} = {}", problem.truncation(&event, mask)?));
        }
        for method in standard {
            results.push((problem.infer(&event, method, cfg.ci_alpha)?, delta));
        }
    }
    if prepared.methods.contains(&Method::Randomized) {
        let data = collect_data(&prepared, &draw, true)?;
        let outcome = randomized_pipeline(&problem, &data, &draw.omega, cfg.tau2, cfg.ci_alpha)?;
        let delta = prepared.delta_true(&outcome.target.eta, &data.indices);
        diagnostics.push(format!("# randomized trajectory = {}", fmt_list(&data.indices)));
        diagnostics.push(format!("# randomized z = {}", outcome.z_tilde));
        results.push((outcome.result, delta));
    }

    write_header_lines(out, &grid.header_lines())?;
    write_header_lines(out, &diagnostics)?;
    writeln!(
        out,
        "method,p_value,p_two_sided,ci_lo,ci_hi,ci_lower,t_obs,v,reject,delta_true"
    )?;
    for method in &prepared.methods {
        let Some((r, delta)) = results.iter().find(|(r, _)| r.method == *method) else {
            continue;
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method.name(),
            r.p_one_sided,
            r.p_two_sided,
            r.ci.lo,
            r.ci.hi,
            r.ci_lower,
            r.t_obs,
            r.v,
            u8::from(r.p_one_sided <= cfg.alpha),
            delta
        )?;
    }
    Ok(())
}

/// Runs every grid point and writes `replicates.csv` and `aggregate.csv`
/// into `dir`.
pub fn cmd_sweep(grid: &ConfigGrid, dir: &Path) -> Result<Vec<ConfigRun>, CliError> {
    let workers = grid.points.first().map_or(0, |p| p.config.workers);
    let runs = run_sweep(grid, workers)?;
    std::fs::create_dir_all(dir)?;
    let header = grid.header_lines();
    let mut rep = BufWriter::new(File::create(dir.join("replicates.csv"))?);
    write_replicates(&mut rep, &header, &runs)?;
    rep.flush()?;
    let mut agg = BufWriter::new(File::create(dir.join("aggregate.csv"))?);
    write_aggregates(&mut agg, &header, &grid.axis_keys, &runs)?;
    agg.flush()?;
    Ok(runs)
}

/// Writes the constraints of replicate 0, one per line.
pub fn cmd_dump_constraints(grid: &ConfigGrid, out: &mut impl Write) -> Result<usize, CliError> {
    let prepared = single(grid, "dump-constraints")?;
    let problem = prepared.problem();
    let draw = ReplicateDraw::new(&prepared, 0);
    let event = problem.observe(collect_data(&prepared, &draw, false)?)?;
    let constraints = collect_constraints(
        &problem.algorithm,
        &prepared.candidates,
        &event.data,
        &event.target,
        &event.line,
        ConstraintMask::Full,
    )?;
    write_header_lines(out, &grid.header_lines())?;
    writeln!(out, "# t_obs = {}", event.line.t_obs)?;
    writeln!(out, "# z = {}", problem.truncation(&event, ConstraintMask::Full)?)?;
    write_constraints(out, &constraints)?;
    Ok(constraints.len())
}
