//! Data-dependent inferential targets `Δ = ηᵀμ`.

use crate::adc::{GpStep, GpUcbConfig};
use crate::candidates::{enumerate_windows, WindowIndexSet};
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Largest `|η_i|` below which `η` counts as zero.
pub const ZERO_ETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TargetRule<T> {
    /// Highest-mean minus lowest-mean sliding window of side `side`.
    HighLow {
        side: T,
    },
    TopN {
        n: usize,
    },
    WinnerRunnerUp,
    /// Average over the queried points inside the box `[lower, upper]`.
    FixedRegion {
        lower: Vec<T>,
        upper: Vec<T>,
    },
    GpMean {
        point: Vec<T>,
        gp: GpUcbConfig<T>,
    },
}

impl<T: Real> TargetRule<T> {
    pub fn name(&self) -> &'static str {
        match self {
            TargetRule::HighLow { .. } => "high_low",
            TargetRule::TopN { .. } => "top_n",
            TargetRule::WinnerRunnerUp => "winner_runner_up",
            TargetRule::FixedRegion { .. } => "fixed_region",
            TargetRule::GpMean { .. } => "gp_mean",
        }
    }

    pub fn is_two_sample(&self) -> bool {
        matches!(self, TargetRule::HighLow { .. } | TargetRule::WinnerRunnerUp)
    }
}

/// Step indices picked out by a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    HighLow { high: Vec<usize>, low: Vec<usize> },
    TopN { selected: Vec<usize> },
    WinnerRunnerUp { winner: usize, runner_up: usize },
    Region { members: Vec<usize> },
    GpMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetDescriptor<T> {
    pub rule: TargetRule<T>,
    pub selection: Selection,
    pub eta: Vec<T>,
}

fn check_eta<T: Real>(eta: &[T]) -> Result<()> {
    let max = eta.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if !(max >= lit(ZERO_ETA_TOL)) {
        return Err(Error::DegenerateSelection("weight vector is numerically zero".into()));
    }
    Ok(())
}

fn indicator_mean<T: Real>(n: usize, set: &[usize]) -> Vec<T> {
    let mut eta = vec![T::zero(); n];
    let w = from_usize::<T>(set.len()).recip();
    for &i in set {
        eta[i] = w;
    }
    eta
}

pub fn window_mean<T: Real>(members: &[usize], y: &[T]) -> T {
    members.iter().map(|&i| y[i]).sum::<T>() / from_usize(members.len())
}

/// Indices of the windows with the largest and smallest mean; ties go to the
/// earlier window, i.e. the lexicographically smaller member set.
pub fn extreme_windows<T: Real>(windows: &[WindowIndexSet<T>], y: &[T]) -> (usize, usize) {
    let means: Vec<T> = windows.iter().map(|w| window_mean(&w.member_steps, y)).collect();
    let mut hi = 0;
    let mut lo = 0;
    for (k, &m) in means.iter().enumerate().skip(1) {
        if m > means[hi] {
            hi = k;
        }
        if m < means[lo] {
            lo = k;
        }
    }
    (hi, lo)
}

pub fn select_high_low<T: Real>(points: &[Vec<T>], y: &[T], side: T) -> Result<TargetDescriptor<T>> {
    if points.len() != y.len() {
        return Err(Error::invalid("points and responses differ in length"));
    }
    let windows = enumerate_windows(points, side)?;
    if windows.len() < 2 {
        return Err(Error::DegenerateSelection("fewer than two distinct windows".into()));
    }
    let (hi, lo) = extreme_windows(&windows, y);
    if hi == lo {
        return Err(Error::DegenerateSelection("high and low windows coincide".into()));
    }
    let high = windows[hi].member_steps.clone();
    let low = windows[lo].member_steps.clone();
    let mut eta = indicator_mean::<T>(y.len(), &high);
    let w = from_usize::<T>(low.len()).recip();
    for &j in &low {
        eta[j] = eta[j] - w;
    }
    check_eta(&eta)?;
    Ok(TargetDescriptor {
        rule: TargetRule::HighLow { side },
        selection: Selection::HighLow { high, low },
        eta,
    })
}

/// Indices ordered by decreasing response, equal responses by index.
fn descending<T: Real>(y: &[T]) -> Result<Vec<usize>> {
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical("NaN response".into()));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&i, &j| y[j].partial_cmp(&y[i]).unwrap().then(i.cmp(&j)));
    Ok(order)
}

pub fn select_top_n<T: Real>(y: &[T], n: usize) -> Result<TargetDescriptor<T>> {
    if n == 0 || n > y.len() {
        return Err(Error::invalid(format!("top-n size {n} outside 1..={}", y.len())));
    }
    let mut selected = descending(y)?[..n].to_vec();
    selected.sort_unstable();
    let eta = indicator_mean(y.len(), &selected);
    Ok(TargetDescriptor {
        rule: TargetRule::TopN { n },
        selection: Selection::TopN { selected },
        eta,
    })
}

pub fn select_winner_runner_up<T: Real>(y: &[T]) -> Result<TargetDescriptor<T>> {
    if y.len() < 2 {
        return Err(Error::invalid("winner vs runner-up needs at least two responses"));
    }
    let order = descending(y)?;
    let (winner, runner_up) = (order[0], order[1]);
    let mut eta = vec![T::zero(); y.len()];
    eta[winner] = T::one();
    eta[runner_up] = -T::one();
    Ok(TargetDescriptor {
        rule: TargetRule::WinnerRunnerUp,
        selection: Selection::WinnerRunnerUp { winner, runner_up },
        eta,
    })
}

pub fn fixed_region_eta<T: Real>(points: &[Vec<T>], lower: &[T], upper: &[T]) -> Result<TargetDescriptor<T>> {
    if points.iter().any(|p| p.len() != lower.len() || p.len() != upper.len()) {
        return Err(Error::invalid("region and points differ in dimension"));
    }
    let members: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            p.iter()
                .zip(lower.iter().zip(upper))
                .all(|(&x, (&l, &u))| l <= x && x <= u)
        })
        .map(|(t, _)| t)
        .collect();
    if members.is_empty() {
        return Err(Error::DegenerateSelection("no queried point lies in the region".into()));
    }
    let eta = indicator_mean(points.len(), &members);
    Ok(TargetDescriptor {
        rule: TargetRule::FixedRegion {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        },
        selection: Selection::Region { members },
        eta,
    })
}

pub fn gp_mean_eta<T: Real>(points: &[Vec<T>], point: &[T], gp: &GpUcbConfig<T>) -> Result<TargetDescriptor<T>> {
    gp.validate()?;
    let refs: Vec<&[T]> = points.iter().map(|p| p.as_slice()).collect();
    let step = GpStep::fit(refs, gp, points.len())?;
    let eta = step.predict(point)?.weights;
    check_eta(&eta)?;
    Ok(TargetDescriptor {
        rule: TargetRule::GpMean {
            point: point.to_vec(),
            gp: *gp,
        },
        selection: Selection::GpMean,
        eta,
    })
}

/// Applies `rule` to the queried points and responses.
pub fn select_target<T: Real>(rule: &TargetRule<T>, points: &[Vec<T>], y: &[T]) -> Result<TargetDescriptor<T>> {
    match rule {
        TargetRule::HighLow { side } => select_high_low(points, y, *side),
        TargetRule::TopN { n } => select_top_n(y, *n),
        TargetRule::WinnerRunnerUp => select_winner_runner_up(y),
        TargetRule::FixedRegion { lower, upper } => fixed_region_eta(points, lower, upper),
        TargetRule::GpMean { point, gp } => gp_mean_eta(points, point, gp),
    }
}
