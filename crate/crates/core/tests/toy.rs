use postadc_core::adc::{replay_trajectory, Algorithm, CollectedData, ThresholdRule};
use postadc_core::candidates::CandidateSet;
use postadc_core::geometry::{compute_line, truncation_set, ConstraintMask, IntervalSet};
use postadc_core::target::{select_top_n, TargetRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy() -> (CandidateSet<f64>, Algorithm<f64>) {
    let c = CandidateSet::from_points(1, &[vec![0.0], vec![0.5], vec![1.0]]).unwrap();
    let alg = Algorithm::Threshold(ThresholdRule {
        threshold: 0.0,
        below: 1,
        at_or_above: 2,
    });
    (c, alg)
}

fn solve(y1: f64, y2: f64) -> (Vec<usize>, Vec<f64>, IntervalSet<f64>) {
    let (c, alg) = toy();
    let traj = replay_trajectory(&alg, &c, &[0], &[y1, y2]).unwrap().indices;
    let data = CollectedData {
        n_init: 1,
        indices: traj.clone(),
        responses: vec![y1, y2],
    };
    let target = select_top_n(&data.responses, 1).unwrap();
    let line = compute_line(&target.eta, 1.0, &data.responses).unwrap();
    let z = truncation_set(&alg, &c, &data, &target, &line, ConstraintMask::Full).unwrap();
    (traj, target.eta, z)
}

fn bounds(z: &IntervalSet<f64>) -> (f64, f64) {
    assert_eq!(z.intervals().len(), 1);
    (z.lower().unwrap(), z.upper().unwrap())
}

#[test]
fn trajectory_branches() {
    let (c, alg) = toy();
    assert_eq!(
        replay_trajectory(&alg, &c, &[0], &[-0.1, 0.0]).unwrap().indices,
        vec![0, 1]
    );
    assert_eq!(
        replay_trajectory(&alg, &c, &[0], &[0.1, 0.0]).unwrap().indices,
        vec![0, 2]
    );
    assert_eq!(TargetRule::<f64>::TopN { n: 1 }.name(), "top_n");
}

#[test]
fn stated_examples() {
    let (_, eta, z) = solve(0.5, 0.9);
    assert_eq!(eta, vec![0.0, 1.0]);
    assert_eq!(bounds(&z), (0.5, f64::INFINITY));

    let (traj, eta, z) = solve(-0.5, -1.0);
    assert_eq!((traj, eta), (vec![0, 1], vec![1.0, 0.0]));
    assert_eq!(bounds(&z), (-1.0, 0.0));

    let (traj, eta, z) = solve(0.5, -2.0);
    assert_eq!((traj, eta), (vec![0, 2], vec![1.0, 0.0]));
    assert_eq!(bounds(&z), (0.0, f64::INFINITY));
}

#[test]
fn closed_forms_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = [0usize; 4];
    for _ in 0..1000 {
        let y1: f64 = rng.random_range(-3.0..3.0);
        let y2: f64 = rng.random_range(-3.0..3.0);
        let (traj, eta, z) = solve(y1, y2);
        let (lo, hi) = bounds(&z);
        let (branch, expect) = match (traj[1], eta[1] == 1.0) {
            (1, true) => (0, (y1, f64::INFINITY)),
            (1, false) => (1, (y2, 0.0)),
            (_, true) => (2, (y1, f64::INFINITY)),
            (_, false) => (3, (y2.max(0.0), f64::INFINITY)),
        };
        seen[branch] += 1;
        assert!(
            (lo - expect.0).abs() <= 1e-12 && (hi == expect.1 || (hi - expect.1).abs() <= 1e-12),
            "branch {branch}: y=({y1},{y2}) got [{lo},{hi}] expected {expect:?}"
        );
    }
    assert!(seen.iter().all(|&n| n > 100), "{seen:?}");
}
