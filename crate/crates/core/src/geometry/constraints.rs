//! Linear constraints in the line parameter `z` that pin down the observed
//! selection event, and their solution set.

use std::fmt;
use std::io::Write;

use crate::adc::{
    tpe_densities, tpe_partition, Algorithm, CollectedData, GpStep, GpUcbConfig, ThresholdRule, TpeConfig,
};
use crate::candidates::{enumerate_windows, CandidateSet};
use crate::error::{Error, Result};
use crate::scalar::{dot, from_usize, lit, Real};
use crate::target::{Selection, TargetDescriptor, TargetRule};

use super::interval::{Interval, IntervalSet};
use super::line::LineSlice;

/// Slopes at or below this magnitude are treated as constants.
pub const SLOPE_TOL: f64 = 1e-12;
/// Allowed violation of any constraint at the observed statistic.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Lt => "<",
            Sense::Ge => ">=",
            Sense::Gt => ">",
        }
    }

    fn sign<T: Real>(self) -> T {
        match self {
            Sense::Le | Sense::Lt => T::one(),
            Sense::Ge | Sense::Gt => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Trajectory,
    Target,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Trajectory => "trajectory",
            Family::Target => "target",
        }
    }
}

/// `c + d·z (sense) 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T> {
    pub c: T,
    pub d: T,
    pub sense: Sense,
    pub family: Family,
    pub tag: String,
}

impl<T: Real> LinearConstraint<T> {
    pub fn value(&self, z: T) -> T {
        self.c + self.d * z
    }

    /// Whether the constraint holds at `z` up to `tol`.
    pub fn holds(&self, z: T, tol: T) -> bool {
        self.sense.sign::<T>() * self.value(z) <= tol
    }
}

impl<T: Real> fmt::Display for LinearConstraint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.family.name(),
            self.tag,
            self.c,
            self.d,
            self.sense.symbol()
        )
    }
}

/// Which constraint families enter the truncation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMask {
    Full,
    /// Trajectory constraints only.
    WithoutEta,
    /// Target constraints only.
    WithoutTrajectory,
}

impl ConstraintMask {
    pub fn keeps(self, family: Family) -> bool {
        match self {
            ConstraintMask::Full => true,
            ConstraintMask::WithoutEta => family == Family::Trajectory,
            ConstraintMask::WithoutTrajectory => family == Family::Target,
        }
    }
}

fn affine<T: Real>(w: &[T], line: &LineSlice<T>) -> (T, T) {
    let n = w.len();
    (dot(w, &line.a[..n]), dot(w, &line.b[..n]))
}

/// One constraint per acquisition step and competing candidate:
/// `UCB(x) − UCB(x_{n+1}) ≤ 0` along the line.
pub fn gpucb_constraints<T: Real>(
    candidates: &CandidateSet<T>,
    data: &CollectedData<T>,
    cfg: &GpUcbConfig<T>,
    line: &LineSlice<T>,
) -> Result<Vec<LinearConstraint<T>>> {
    let points = data.points(candidates);
    let mut out = Vec::new();
    for n in data.n_init..data.len() {
        let gp = GpStep::fit(points[..n].to_vec(), cfg, n)?;
        let chosen = data.indices[n];
        let best = gp.predict(candidates.point(chosen))?;
        let (ca, cb) = affine(&best.weights, line);
        let c_best = ca + cfg.kappa * best.sd();
        for (x, p) in candidates.iter().enumerate() {
            if x == chosen {
                continue;
            }
            let pred = gp.predict(p)?;
            let (xa, xb) = affine(&pred.weights, line);
            out.push(LinearConstraint {
                c: xa + cfg.kappa * pred.sd() - c_best,
                d: xb - cb,
                sense: if x < chosen { Sense::Lt } else { Sense::Le },
                family: Family::Trajectory,
                tag: format!("step={n}:cand={x}:chosen={chosen}"),
            });
        }
    }
    Ok(out)
}

/// Partition constraints `y_i(z) ≥ y_j(z)` for every top/rest pair of every
/// step. The score comparisons implied by a fixed partition do not involve
/// `z`; they are verified here and an error is returned if the recorded
/// choice is not the maximizer.
pub fn tpe_constraints<T: Real>(
    candidates: &CandidateSet<T>,
    data: &CollectedData<T>,
    cfg: &TpeConfig<T>,
    line: &LineSlice<T>,
) -> Result<Vec<LinearConstraint<T>>> {
    let points = data.points(candidates);
    let y = &data.responses;
    let slack = lit::<T>(1e-10);
    let mut out = Vec::new();
    for n in data.n_init..data.len() {
        let (high, low) = tpe_partition(&y[..n], cfg.gamma)?;
        for &i in &high {
            for &j in &low {
                out.push(LinearConstraint {
                    c: line.a[i] - line.a[j],
                    d: line.b[i] - line.b[j],
                    sense: Sense::Ge,
                    family: Family::Trajectory,
                    tag: format!("step={n}:high={i}:low={j}"),
                });
            }
        }
        let chosen = data.indices[n];
        let (g_best, l_best) = tpe_densities(&points[..n], &high, &low, candidates.point(chosen), cfg.bandwidth);
        for (x, p) in candidates.iter().enumerate() {
            let (g, l) = tpe_densities(&points[..n], &high, &low, p, cfg.bandwidth);
            if g * l_best > g_best * l * (T::one() + slack) {
                return Err(Error::Inconsistent(format!(
                    "TPE score of candidate {x} exceeds that of the chosen {chosen} at step {n}"
                )));
            }
        }
    }
    Ok(out)
}

pub fn threshold_constraints<T: Real>(
    data: &CollectedData<T>,
    rule: &ThresholdRule<T>,
    line: &LineSlice<T>,
) -> Result<Vec<LinearConstraint<T>>> {
    let mut out = Vec::new();
    if rule.below == rule.at_or_above {
        return Ok(out);
    }
    for n in data.n_init..data.len() {
        let chosen = data.indices[n];
        let sense = if chosen == rule.below {
            Sense::Lt
        } else if chosen == rule.at_or_above {
            Sense::Ge
        } else {
            return Err(Error::Inconsistent(format!("step {n} queried neither branch")));
        };
        out.push(LinearConstraint {
            c: line.a[n - 1] - rule.threshold,
            d: line.b[n - 1],
            sense,
            family: Family::Trajectory,
            tag: format!("step={n}:threshold"),
        });
    }
    Ok(out)
}

pub fn trajectory_constraints<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    data: &CollectedData<T>,
    line: &LineSlice<T>,
) -> Result<Vec<LinearConstraint<T>>> {
    match algorithm {
        Algorithm::GpUcb(cfg) => gpucb_constraints(candidates, data, cfg, line),
        Algorithm::Tpe(cfg) => tpe_constraints(candidates, data, cfg, line),
        Algorithm::Threshold(rule) => threshold_constraints(data, rule, line),
    }
}

fn mean_coef<T: Real>(set: &[usize], v: &[T]) -> T {
    set.iter().map(|&i| v[i]).sum::<T>() / from_usize(set.len())
}

fn order_constraint<T: Real>(line: &LineSlice<T>, i: usize, j: usize, tag: String) -> LinearConstraint<T> {
    LinearConstraint {
        c: line.a[i] - line.a[j],
        d: line.b[i] - line.b[j],
        sense: Sense::Ge,
        family: Family::Target,
        tag,
    }
}

/// Constraints that keep the selected sets of `target` fixed along the line,
/// given the queried points.
pub fn target_constraints<T: Real>(
    target: &TargetDescriptor<T>,
    points: &[Vec<T>],
    line: &LineSlice<T>,
) -> Result<Vec<LinearConstraint<T>>> {
    let n = line.len();
    let mut out = Vec::new();
    match (&target.rule, &target.selection) {
        (TargetRule::HighLow { side }, Selection::HighLow { high, low }) => {
            let windows = enumerate_windows(points, *side)?;
            let pos = |set: &Vec<usize>| windows.iter().position(|w| &w.member_steps == set);
            let (hi, lo) = match (pos(high), pos(low)) {
                (Some(h), Some(l)) => (h, l),
                _ => return Err(Error::Inconsistent("selected window not in the window family".into())),
            };
            let coef = |k: usize| {
                let m = &windows[k].member_steps;
                (mean_coef(m, &line.a), mean_coef(m, &line.b))
            };
            let (ha, hb) = coef(hi);
            let (la, lb) = coef(lo);
            for k in 0..windows.len() {
                if k == hi {
                    continue;
                }
                let (ca, cb) = coef(k);
                out.push(LinearConstraint {
                    c: ha - ca,
                    d: hb - cb,
                    sense: if k < hi { Sense::Gt } else { Sense::Ge },
                    family: Family::Target,
                    tag: format!("high={hi}:window={k}"),
                });
            }
            for k in 0..windows.len() {
                if k == lo || k == hi {
                    continue;
                }
                let (ca, cb) = coef(k);
                out.push(LinearConstraint {
                    c: ca - la,
                    d: cb - lb,
                    sense: if k < lo { Sense::Gt } else { Sense::Ge },
                    family: Family::Target,
                    tag: format!("low={lo}:window={k}"),
                });
            }
        }
        (TargetRule::TopN { .. }, Selection::TopN { selected }) => {
            let mut inside = vec![false; n];
            for &i in selected {
                inside[i] = true;
            }
            for &i in selected {
                for j in (0..n).filter(|&j| !inside[j]) {
                    out.push(order_constraint(line, i, j, format!("top={i}:rest={j}")));
                }
            }
        }
        (TargetRule::WinnerRunnerUp, Selection::WinnerRunnerUp { winner, runner_up }) => {
            for j in (0..n).filter(|&j| j != *winner) {
                out.push(order_constraint(line, *winner, j, format!("winner={winner}:other={j}")));
            }
            for k in (0..n).filter(|&k| k != *winner && k != *runner_up) {
                out.push(order_constraint(
                    line,
                    *runner_up,
                    k,
                    format!("runner_up={runner_up}:other={k}"),
                ));
            }
        }
        (TargetRule::FixedRegion { .. }, Selection::Region { .. }) | (TargetRule::GpMean { .. }, Selection::GpMean) => {
        }
        _ => return Err(Error::invalid("target rule and selection do not match")),
    }
    Ok(out)
}

/// All constraints of the observed event, filtered by `mask`.
pub fn collect_constraints<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    data: &CollectedData<T>,
    target: &TargetDescriptor<T>,
    line: &LineSlice<T>,
    mask: ConstraintMask,
) -> Result<Vec<LinearConstraint<T>>> {
    let mut out = Vec::new();
    if mask.keeps(Family::Trajectory) {
        out.extend(trajectory_constraints(algorithm, candidates, data, line)?);
    }
    if mask.keeps(Family::Target) {
        let points: Vec<Vec<T>> = candidates.gather(&data.indices);
        out.extend(target_constraints(target, &points, line)?);
    }
    Ok(out)
}

/// Intersects the half-lines defined by `constraints`. Strict and non-strict
/// senses both yield closed bounds.
pub fn solve_constraints<T: Real>(constraints: &[LinearConstraint<T>], t_obs: T) -> Result<IntervalSet<T>> {
    let slope_tol: T = lit(SLOPE_TOL);
    let tol: T = lit(CONSISTENCY_TOL);
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for con in constraints {
        let s = con.sense.sign::<T>();
        let (c, d) = (s * con.c, s * con.d);
        if !c.is_finite() || !d.is_finite() {
            return Err(Error::Numerical(format!("non-finite constraint {}", con.tag)));
        }
        if c + d * t_obs > tol {
            return Err(Error::Inconsistent(format!(
                "constraint {} violated at the observed statistic by {}",
                con.tag,
                c + d * t_obs
            )));
        }
        if d.abs() <= slope_tol {
            continue;
        }
        let root = -c / d;
        if d > T::zero() {
            hi = hi.min(root);
        } else {
            lo = lo.max(root);
        }
    }
    if !(lo < hi) {
        return Err(Error::Inconsistent(format!("empty truncation set [{lo}, {hi}]")));
    }
    let slack = lit::<T>(1e-9) * (T::one() + t_obs.abs());
    if t_obs < lo - slack || t_obs > hi + slack {
        return Err(Error::Inconsistent(format!(
            "observed statistic {t_obs} outside [{lo}, {hi}]"
        )));
    }
    Ok(IntervalSet::single(Interval::closed(lo, hi)))
}

/// Truncation set of the observed event on `line`.
pub fn truncation_set<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    data: &CollectedData<T>,
    target: &TargetDescriptor<T>,
    line: &LineSlice<T>,
    mask: ConstraintMask,
) -> Result<IntervalSet<T>> {
    let constraints = collect_constraints(algorithm, candidates, data, target, line, mask)?;
    solve_constraints(&constraints, line.t_obs)
}

/// Writes one `family,tag,c,d,sense` line per constraint.
pub fn write_constraints<T: Real>(out: &mut impl Write, constraints: &[LinearConstraint<T>]) -> std::io::Result<()> {
    writeln!(out, "family,tag,c,d,sense")?;
    for c in constraints {
        writeln!(out, "{c}")?;
    }
    Ok(())
}
