//! Brute-force event membership by replaying the whole pipeline.

use crate::adc::{replay_trajectory, Algorithm, CollectedData};
use crate::candidates::CandidateSet;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::target::{select_target, Selection, TargetDescriptor, TargetRule};

use super::constraints::{ConstraintMask, Family};
use super::line::LineSlice;

/// The observed selection event, ready to be compared against replays.
#[derive(Debug, Clone)]
pub struct EventReplay<'a, T> {
    algorithm: Algorithm<T>,
    candidates: &'a CandidateSet<T>,
    rule: TargetRule<T>,
    mask: ConstraintMask,
    initial: Vec<usize>,
    indices: Vec<usize>,
    highs: Vec<Option<Vec<usize>>>,
    points: Vec<Vec<T>>,
    selection: Selection,
}

impl<'a, T: Real> EventReplay<'a, T> {
    pub fn new(
        algorithm: &Algorithm<T>,
        candidates: &'a CandidateSet<T>,
        data: &CollectedData<T>,
        target: &TargetDescriptor<T>,
        mask: ConstraintMask,
    ) -> Result<Self> {
        let initial = data.indices[..data.n_init].to_vec();
        let observed = replay_trajectory(algorithm, candidates, &initial, &data.responses)?;
        if observed.indices != data.indices {
            return Err(Error::Inconsistent(
                "observed data do not replay to their own trajectory".into(),
            ));
        }
        Ok(Self {
            algorithm: *algorithm,
            candidates,
            rule: target.rule.clone(),
            mask,
            initial,
            indices: observed.indices,
            highs: observed.events.into_iter().map(|e| e.high).collect(),
            points: candidates.gather(&data.indices),
            selection: target.selection.clone(),
        })
    }

    /// Whether responses `y` reproduce the observed event: the trajectory
    /// together with every TPE split, and the selected sets.
    pub fn matches(&self, y: &[T]) -> Result<bool> {
        if self.mask.keeps(Family::Trajectory) {
            let replay = replay_trajectory(&self.algorithm, self.candidates, &self.initial, y)?;
            if replay.indices != self.indices {
                return Ok(false);
            }
            if replay.events.iter().zip(&self.highs).any(|(e, h)| &e.high != h) {
                return Ok(false);
            }
        }
        if self.mask.keeps(Family::Target) {
            match select_target(&self.rule, &self.points, y) {
                Ok(t) => return Ok(t.selection == self.selection),
                Err(Error::DegenerateSelection(_)) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
        Ok(true)
    }
}

/// Event membership of `a + b·z` for every `z` in `z_grid`.
pub fn scan_oracle<T: Real>(
    algorithm: &Algorithm<T>,
    candidates: &CandidateSet<T>,
    data: &CollectedData<T>,
    target: &TargetDescriptor<T>,
    line: &LineSlice<T>,
    mask: ConstraintMask,
    z_grid: &[T],
) -> Result<Vec<bool>> {
    let event = EventReplay::new(algorithm, candidates, data, target, mask)?;
    z_grid.iter().map(|&z| event.matches(&line.at(z))).collect()
}
