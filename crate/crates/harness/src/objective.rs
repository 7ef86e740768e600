use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use postadc_core::CandidateSet;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Sinc,
    Cos,
    Chirp,
    Bump,
    Peak,
    NegativeForrester,
    ConstantZero,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Sinc,
        Family::Cos,
        Family::Chirp,
        Family::Bump,
        Family::Peak,
        Family::NegativeForrester,
        Family::ConstantZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sinc => "sinc",
            Family::Cos => "cos",
            Family::Chirp => "chirp",
            Family::Bump => "bump",
            Family::Peak => "peak",
            Family::NegativeForrester => "negative_forrester",
            Family::ConstantZero => "constant_zero",
        }
    }

    /// One-dimensional template on `[0, 1]`.
    pub fn template(self, u: f64) -> f64 {
        match self {
            Family::Sinc => {
                let t = 10.0 * (u - 0.5);
                if t == 0.0 {
                    1.0
                } else {
                    (PI * t).sin() / (PI * t)
                }
            }
            Family::Cos => -(2.0 * PI * u).cos(),
            Family::Chirp => (2.0 * PI * u * u).sin(),
            Family::Bump => (-(u - 0.7).powi(2) / (2.0 * 0.08 * 0.08)).exp(),
            Family::Peak => 1.0 - (u - 0.4).abs(),
            Family::NegativeForrester => -(6.0 * u - 2.0).powi(2) * (12.0 * u - 4.0).sin(),
            Family::ConstantZero => 0.0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown objective family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    pub family: Family,
    pub amplitude: f64,
}

/// True mean response at every candidate: the coordinate-averaged template,
/// rescaled to `[−1, 1]` over the candidates and multiplied by the amplitude.
pub fn synth_objective(spec: &ObjectiveSpec, candidates: &CandidateSet) -> Result<Vec<f64>, HarnessError> {
    if !(spec.amplitude >= 0.0) || !spec.amplitude.is_finite() {
        return Err(HarnessError::Config("amplitude must be nonnegative".into()));
    }
    if spec.family == Family::ConstantZero || spec.amplitude == 0.0 {
        return Ok(vec![0.0; candidates.len()]);
    }
    let d = candidates.dim() as f64;
    let raw: Vec<f64> = candidates
        .iter()
        .map(|x| x.iter().map(|&u| spec.family.template(u)).sum::<f64>() / d)
        .collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(HarnessError::Config(format!(
            "family {} is constant on the candidate set",
            spec.family
        )));
    }
    Ok(raw
        .iter()
        .map(|&f| spec.amplitude * (2.0 * f - (hi + lo)) / (hi - lo))
        .collect())
}
