//! End-to-end inference for one collected data set.

use crate::adc::{Algorithm, CollectedData};
use crate::candidates::CandidateSet;
use crate::error::{Error, Result};
use crate::geometry::{compute_line, truncation_set, ConstraintMask, IntervalSet, LineSlice};
use crate::scalar::{dot, Real};
use crate::selective::{
    bonferroni_inference, naive_inference, randomized_inference, selective_inference, Method, SelectiveResult,
};
use crate::target::{select_target, TargetDescriptor, TargetRule};

/// Everything that stays fixed across replicates of one configuration.
#[derive(Debug, Clone)]
pub struct Problem<'a, T> {
    pub candidates: &'a CandidateSet<T>,
    pub algorithm: Algorithm<T>,
    pub rule: TargetRule<T>,
    pub sigma2: T,
}

/// Observed selection: the target chosen from the data and its line slice.
#[derive(Debug, Clone)]
pub struct ObservedEvent<T> {
    pub data: CollectedData<T>,
    pub target: TargetDescriptor<T>,
    pub line: LineSlice<T>,
}

impl<'a, T: Real> Problem<'a, T> {
    pub fn observe(&self, data: CollectedData<T>) -> Result<ObservedEvent<T>> {
        let points = self.candidates.gather(&data.indices);
        let target = select_target(&self.rule, &points, &data.responses)?;
        let line = compute_line(&target.eta, self.sigma2, &data.responses)?;
        Ok(ObservedEvent { data, target, line })
    }

    pub fn truncation(&self, event: &ObservedEvent<T>, mask: ConstraintMask) -> Result<IntervalSet<T>> {
        truncation_set(
            &self.algorithm,
            self.candidates,
            &event.data,
            &event.target,
            &event.line,
            mask,
        )
    }

    /// Inference for one non-randomized method.
    pub fn infer(&self, event: &ObservedEvent<T>, method: Method, ci_alpha: T) -> Result<SelectiveResult<T>> {
        let (t, v) = (event.line.t_obs, event.line.v);
        let hard = |mask| -> Result<SelectiveResult<T>> {
            let z = self.truncation(event, mask)?;
            selective_inference(t, v, &z, ci_alpha, method)
        };
        match method {
            Method::PostAdc => hard(ConstraintMask::Full),
            Method::WithoutEta => hard(ConstraintMask::WithoutEta),
            Method::WithoutTrajectory => hard(ConstraintMask::WithoutTrajectory),
            Method::Naive => naive_inference(t, v, ci_alpha),
            Method::Bonferroni => {
                let n_steps = event.data.len() - event.data.n_init;
                bonferroni_inference(t, v, ci_alpha, self.candidates.len(), n_steps)
            }
            Method::Randomized => Err(Error::invalid(
                "randomized inference needs the randomization draw; use randomized_pipeline",
            )),
        }
    }
}

/// Output of the randomized pipeline.
#[derive(Debug, Clone)]
pub struct RandomizedOutcome<T> {
    pub result: SelectiveResult<T>,
    pub target: TargetDescriptor<T>,
    /// Line slice of the randomized responses.
    pub line: LineSlice<T>,
    pub z_tilde: IntervalSet<T>,
}

/// Selection on `ỹ = y + ω`, inference on `ηᵀy`. `data.indices` must be the
/// trajectory the algorithm produced from `ỹ`; `data.responses` holds `y`.
pub fn randomized_pipeline<T: Real>(
    problem: &Problem<'_, T>,
    data: &CollectedData<T>,
    omega: &[T],
    tau2: T,
    ci_alpha: T,
) -> Result<RandomizedOutcome<T>> {
    if omega.len() != data.len() {
        return Err(Error::invalid("randomization draw length differs from the data"));
    }
    let y_tilde: Vec<T> = data.responses.iter().zip(omega).map(|(&y, &w)| y + w).collect();
    let randomized = CollectedData {
        n_init: data.n_init,
        indices: data.indices.clone(),
        responses: y_tilde,
    };
    let event = problem.observe(randomized)?;
    let z_tilde = problem.truncation(&event, ConstraintMask::Full)?;
    let eta = &event.target.eta;
    let t_obs = dot(eta, &data.responses);
    let norm2 = dot(eta, eta);
    let result = randomized_inference(t_obs, event.line.v, tau2, norm2, &z_tilde, ci_alpha)?;
    Ok(RandomizedOutcome {
        result,
        target: event.target,
        line: event.line,
        z_tilde,
    })
}
