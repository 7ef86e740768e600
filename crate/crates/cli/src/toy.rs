//! Golden check of the three-candidate threshold example.

use std::io::Write;

use postadc_core::adc::{replay_trajectory, Algorithm, CollectedData, ThresholdRule};
use postadc_core::geometry::{compute_line, truncation_set, ConstraintMask};
use postadc_core::target::select_top_n;
use postadc_core::{CandidateSet, IntervalSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

const TOL: f64 = 1e-12;

const BRANCHES: [&str; 4] = [
    "T=(1,2) eta=(0,1): Z=[y1,inf)",
    "T=(1,2) eta=(1,0): Z=(y2,0)",
    "T=(1,3) eta=(0,1): Z=[y1,inf)",
    "T=(1,3) eta=(1,0): Z=[max(0,y2),inf)",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ToyReport {
    pub draws: usize,
    pub per_branch: [usize; 4],
    pub failures: Vec<String>,
}

impl ToyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Toy {
    candidates: CandidateSet,
    algorithm: Algorithm<f64>,
}

impl Toy {
    fn new() -> Self {
        Self {
            candidates: CandidateSet::from_points(1, &[vec![0.0], vec![0.5], vec![1.0]]).expect("toy candidates"),
            algorithm: Algorithm::Threshold(ThresholdRule {
                threshold: 0.0,
                below: 1,
                at_or_above: 2,
            }),
        }
    }

    fn solve(&self, y: [f64; 2]) -> Result<(usize, bool, IntervalSet), CliError> {
        let indices = replay_trajectory(&self.algorithm, &self.candidates, &[0], &y)?.indices;
        let data = CollectedData {
            n_init: 1,
            indices: indices.clone(),
            responses: y.to_vec(),
        };
        let target = select_top_n(&data.responses, 1)?;
        let line = compute_line(&target.eta, 1.0, &data.responses)?;
        let z = truncation_set(
            &self.algorithm,
            &self.candidates,
            &data,
            &target,
            &line,
            ConstraintMask::Full,
        )?;
        Ok((indices[1], target.eta[1] == 1.0, z))
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TOL
}

/// Checks the closed-form truncation sets on the stated examples and on
/// `draws` random response pairs.
pub fn cmd_toy_check(draws: usize, seed: u64, out: &mut impl Write) -> Result<ToyReport, CliError> {
    let toy = Toy::new();
    let mut report = ToyReport {
        draws,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stated = [[0.5, 0.9], [-0.5, -1.0], [0.5, -2.0]];
    let random = (0..draws).map(|_| [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
    for (k, y) in stated.into_iter().chain(random).enumerate() {
        let (second, eta_second, z) = toy.solve(y)?;
        let [y1, y2] = y;
        let (branch, lo, hi) = match (second, eta_second) {
            (1, true) => (0, y1, f64::INFINITY),
            (1, false) => (1, y2, 0.0),
            (_, true) => (2, y1, f64::INFINITY),
            (_, false) => (3, y2.max(0.0), f64::INFINITY),
        };
        if k >= stated.len() {
            report.per_branch[branch] += 1;
        }
        let ok = z.intervals().len() == 1
            && close(z.lower().unwrap_or(f64::NAN), lo)
            && close(z.upper().unwrap_or(f64::NAN), hi);
        if !ok {
            report.failures.push(format!(
                "branch {}: y=({y1}, {y2}) gave {z}, expected [{lo}, {hi}]",
                BRANCHES[branch]
            ));
        }
    }
    for (name, n) in BRANCHES.iter().zip(report.per_branch) {
        writeln!(out, "{name}: {n} draws")?;
    }
    writeln!(
        out,
        "toy-check: {} draws, {} mismatches: {}",
        draws,
        report.failures.len(),
        if report.passed() { "PASS" } else { "FAIL" }
    )?;
    for f in &report.failures {
        writeln!(out, "  {f}")?;
    }
    Ok(report)
}
