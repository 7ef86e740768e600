use postadc_core::adc::{run_adc, Algorithm, GpUcbConfig, TpeConfig};
use postadc_core::candidates::make_grid;
use postadc_core::geometry::{scan_oracle, ConstraintMask};
use postadc_core::pipeline::Problem;
use postadc_core::target::TargetRule;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn mismatches(algorithm: Algorithm<f64>, seed: u64, mask: ConstraintMask) -> (usize, usize) {
    let cands = make_grid::<f64>(1, 16).unwrap();
    let problem = Problem {
        candidates: &cands,
        algorithm,
        rule: TargetRule::HighLow { side: 0.2 },
        sigma2: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu: Vec<f64> = (0..16).map(|i| (i as f64 / 3.0).sin()).collect();
    let noise: Vec<f64> = (0..11).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut src = |step: usize, idx: usize| Ok(mu[idx] + noise[step]);
    let data = run_adc(&problem.algorithm, &cands, &mut src, 3, 8, seed).unwrap();
    let event = match problem.observe(data) {
        Ok(e) => e,
        Err(_) => return (0, 0),
    };
    let z = problem.truncation(&event, mask).unwrap();
    let sd = event.line.v.sqrt();
    let grid: Vec<f64> = (0..2001)
        .map(|k| event.line.t_obs - 8.0 * sd + 16.0 * sd * k as f64 / 2000.0)
        .collect();
    let member = scan_oracle(
        &problem.algorithm,
        &cands,
        &event.data,
        &event.target,
        &event.line,
        mask,
        &grid,
    )
    .unwrap();
    let ends = z.endpoints();
    let mut bad = 0;
    let mut checked = 0;
    for (z_k, m) in grid.iter().zip(member) {
        if ends.iter().any(|e| (e - z_k).abs() <= 1e-9) {
            continue;
        }
        checked += 1;
        if z.contains(*z_k) != m {
            bad += 1;
        }
    }
    (bad, checked)
}

#[test]
fn gpucb_matches_replay() {
    for seed in 0..20 {
        for mask in [
            ConstraintMask::Full,
            ConstraintMask::WithoutEta,
            ConstraintMask::WithoutTrajectory,
        ] {
            let (bad, _) = mismatches(Algorithm::GpUcb(GpUcbConfig::for_dim(1)), seed, mask);
            assert_eq!(bad, 0, "seed {seed} {mask:?}");
        }
    }
}

#[test]
fn tpe_matches_replay() {
    for seed in 0..20 {
        for mask in [
            ConstraintMask::Full,
            ConstraintMask::WithoutEta,
            ConstraintMask::WithoutTrajectory,
        ] {
            let (bad, _) = mismatches(Algorithm::Tpe(TpeConfig::default()), seed, mask);
            assert_eq!(bad, 0, "seed {seed} {mask:?}");
        }
    }
}
