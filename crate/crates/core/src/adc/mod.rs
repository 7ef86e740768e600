//! Sequential acquisition over a finite candidate set.
//!
//! Every algorithm is a deterministic map from the history to the next
//! candidate index, so a run can be replayed from its initial design and
//! response vector alone.

mod gp;
mod tpe;

pub use gp::{gp_posterior, gpucb_score, rbf_kernel, GpPrediction, GpStep, GpUcbConfig};
pub use tpe::{tpe_densities, tpe_kernel, tpe_partition, tpe_score, tpe_top_count, TpeConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::candidates::CandidateSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two-branch rule: query `below` when the latest response is under
/// `threshold`, otherwise `at_or_above`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule<T> {
    pub threshold: T,
    pub below: usize,
    pub at_or_above: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm<T> {
    GpUcb(GpUcbConfig<T>),
    Tpe(TpeConfig<T>),
    Threshold(ThresholdRule<T>),
}

impl<T: Real> Algorithm<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::GpUcb(_) => "gpucb",
            Algorithm::Tpe(_) => "tpe",
            Algorithm::Threshold(_) => "threshold",
        }
    }

    pub fn validate(&self, candidates: &CandidateSet<T>) -> Result<()> {
        match self {
            Algorithm::GpUcb(c) => c.validate(),
            Algorithm::Tpe(c) => c.validate(),
            Algorithm::Threshold(r) => {
                if r.below >= candidates.len() || r.at_or_above >= candidates.len() {
                    return Err(Error::invalid("threshold rule targets a missing candidate"));
                }
                if !r.threshold.is_finite() {
                    return Err(Error::invalid("threshold must be finite"));
                }
                Ok(())
            }
        }
    }
}

/// Queried indices and responses in query order; the first `n_init` come
/// from the initial design.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectedData<T> {
    pub n_init: usize,
    pub indices: Vec<usize>,
    pub responses: Vec<T>,
}

impl<T: Real> CollectedData<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn points<'a>(&self, candidates: &'a CandidateSet<T>) -> Vec<&'a [T]> {
        self.indices.iter().map(|&i| candidates.point(i)).collect()
    }
}

/// One acquisition decision made after `observed` responses.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEvent {
    pub observed: usize,
    pub chosen: usize,
    /// Top set of the TPE split used for this decision.
    pub high: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub indices: Vec<usize>,
    pub events: Vec<StepEvent>,
}

pub trait ResponseSource<T> {
    fn respond(&mut self, step: usize, candidate: usize) -> Result<T>;
}

impl<T, F: FnMut(usize, usize) -> Result<T>> ResponseSource<T> for F {
    fn respond(&mut self, step: usize, candidate: usize) -> Result<T> {
        self(step, candidate)
    }
}

fn argmax<T: Real>(scores: impl Iterator<Item = Result<T>>) -> Result<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, s) in scores.enumerate() {
        let s = s?;
        if s.is_nan() {
            return Err(Error::Numerical(format!("NaN acquisition score at candidate {i}")));
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::invalid("empty candidate set"))
}

/// Next query given the history; ties go to the smallest candidate index.
pub fn next_point<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    indices: &[usize],
    y: &[T],
) -> Result<StepEvent> {
    if indices.is_empty() || indices.len() != y.len() {
        return Err(Error::invalid("history must be nonempty with one response per query"));
    }
    let points: Vec<&[T]> = indices.iter().map(|&i| candidates.point(i)).collect();
    let observed = indices.len();
    match algorithm {
        Algorithm::GpUcb(cfg) => {
            let gp = GpStep::fit(points, cfg, observed)?;
            let chosen = argmax(candidates.iter().map(|x| gp.ucb(x, y).map(|(s, _)| s)))?;
            Ok(StepEvent {
                observed,
                chosen,
                high: None,
            })
        }
        Algorithm::Tpe(cfg) => {
            let (high, low) = tpe_partition(y, cfg.gamma)?;
            let chosen = argmax(candidates.iter().map(|x| {
                let (g, l) = tpe_densities(&points, &high, &low, x, cfg.bandwidth);
                Ok(g / l)
            }))?;
            Ok(StepEvent {
                observed,
                chosen,
                high: Some(high),
            })
        }
        Algorithm::Threshold(rule) => {
            let last = y[observed - 1];
            let chosen = if last < rule.threshold {
                rule.below
            } else {
                rule.at_or_above
            };
            Ok(StepEvent {
                observed,
                chosen,
                high: None,
            })
        }
    }
}

fn drive<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    initial: &[usize],
    total: usize,
    source: &mut impl ResponseSource<T>,
) -> Result<(CollectedData<T>, Vec<StepEvent>)> {
    algorithm.validate(candidates)?;
    if initial.is_empty() {
        return Err(Error::invalid("initial design must be nonempty"));
    }
    if initial.iter().any(|&i| i >= candidates.len()) {
        return Err(Error::invalid("initial design index out of range"));
    }
    if total < initial.len() {
        return Err(Error::invalid("budget smaller than the initial design"));
    }
    let mut indices = Vec::with_capacity(total);
    let mut responses = Vec::with_capacity(total);
    for (step, &i) in initial.iter().enumerate() {
        indices.push(i);
        responses.push(source.respond(step, i)?);
    }
    let mut events = Vec::with_capacity(total - initial.len());
    while indices.len() < total {
        let ev = next_point(algorithm, candidates, &indices, &responses)?;
        let step = indices.len();
        indices.push(ev.chosen);
        responses.push(source.respond(step, ev.chosen)?);
        events.push(ev);
    }
    Ok((
        CollectedData {
            n_init: initial.len(),
            indices,
            responses,
        },
        events,
    ))
}

/// `n_init` distinct candidate indices drawn uniformly from a generator
/// seeded with `seed`.
pub fn initial_design(candidate_count: usize, n_init: usize, seed: u64) -> Result<Vec<usize>> {
    if n_init == 0 || n_init > candidate_count {
        return Err(Error::invalid(format!(
            "cannot draw {n_init} distinct initial points from {candidate_count} candidates"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, candidate_count, n_init).into_vec())
}

/// Seeded initial design followed by `n_steps` acquisition steps.
pub fn run_adc<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    source: &mut impl ResponseSource<T>,
    n_init: usize,
    n_steps: usize,
    seed: u64,
) -> Result<CollectedData<T>> {
    if n_init + n_steps > candidates.len() {
        return Err(Error::invalid(format!(
            "budget {} exceeds the {} candidates",
            n_init + n_steps,
            candidates.len()
        )));
    }
    let initial = initial_design(candidates.len(), n_init, seed)?;
    run_from(algorithm, candidates, &initial, n_steps, source)
}

/// As [`run_adc`] with an explicit initial design.
pub fn run_from<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    initial: &[usize],
    n_steps: usize,
    source: &mut impl ResponseSource<T>,
) -> Result<CollectedData<T>> {
    drive(algorithm, candidates, initial, initial.len() + n_steps, source).map(|(d, _)| d)
}

/// Reruns the algorithm from `initial` reading responses from `y` in query
/// order.
pub fn replay_trajectory<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    initial: &[usize],
    y: &[T],
) -> Result<Replay> {
    let mut source = |step: usize, _: usize| Ok(y[step]);
    let (data, events) = drive(algorithm, candidates, initial, y.len(), &mut source)?;
    Ok(Replay {
        indices: data.indices,
        events,
    })
}
