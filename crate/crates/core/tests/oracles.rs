//! Checks against independent reference computations written here from the
//! defining formulas.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use postadc_core::adc::{
    gp_posterior, next_point, run_adc, tpe_score, Algorithm, CollectedData, GpStep, GpUcbConfig, TpeConfig,
};
use postadc_core::candidates::{enumerate_windows, make_grid, window_members, CandidateSet};
use postadc_core::geometry::{compute_line, gpucb_constraints, Interval, IntervalSet, LineSlice, Sense};
use postadc_core::selective::{randomized_selective_cdf, selective_ci, tn_cdf, TruncatedNormal};
use postadc_core::target::select_high_low;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn kernel(x: &[f64], y: &[f64], cfg: &GpUcbConfig<f64>) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    cfg.kernel_variance * (-sq / (2.0 * cfg.length_scale * cfg.length_scale)).exp()
}

/// Posterior weights, mean and variance by a dense LU solve.
fn dense_posterior(points: &[&[f64]], y: &[f64], x: &[f64], cfg: &GpUcbConfig<f64>) -> (Vec<f64>, f64, f64) {
    let n = points.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        kernel(points[i], points[j], cfg) + if i == j { cfg.noise_variance } else { 0.0 }
    });
    let kx = DVector::from_fn(n, |i, _| kernel(points[i], x, cfg));
    let w = k.lu().solve(&kx).expect("nonsingular");
    let mean = w.dot(&DVector::from_column_slice(y));
    let var = kernel(x, x, cfg) - kx.dot(&w);
    (w.iter().copied().collect(), mean, var)
}

fn dense_ucb(points: &[&[f64]], y: &[f64], x: &[f64], cfg: &GpUcbConfig<f64>) -> f64 {
    let (_, mean, var) = dense_posterior(points, y, x, cfg);
    mean + cfg.kappa * var.max(0.0).sqrt()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

#[test]
fn gp_posterior_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..300 {
        let d = 1 + case % 3;
        let n = 1 + case % 12;
        let cfg = GpUcbConfig {
            kernel_variance: rng.random_range(0.5..2.0),
            length_scale: rng.random_range(0.05..0.5),
            noise_variance: rng.random_range(0.1..2.0),
            kappa: 2.0,
        };
        let pts = random_points(&mut rng, n, d);
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let (w, mean, var) = dense_posterior(&refs, &y, &x, &cfg);
        let (m, v) = gp_posterior(&refs, &y, &x, &cfg).unwrap();
        assert!((m - mean).abs() < 1e-10, "case {case}: mean {m} vs {mean}");
        assert!((v - var.max(0.0)).abs() < 1e-10, "case {case}: var {v} vs {var}");
        let pred = GpStep::fit(refs.clone(), &cfg, n).unwrap().predict(&x).unwrap();
        for (a, b) in pred.weights.iter().zip(&w) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn gpucb_two_candidate_expansion() {
    // Candidates 0 and 1, one observation at 0, then candidate 1 chosen.
    let cands = CandidateSet::from_points(1, &[vec![0.0], vec![1.0]]).unwrap();
    let cfg = GpUcbConfig {
        kernel_variance: 1.0,
        length_scale: 0.5,
        noise_variance: 0.25,
        kappa: 2.0,
    };
    let data = CollectedData {
        n_init: 1,
        indices: vec![0, 1],
        responses: vec![-1.0, 0.4],
    };
    let line = LineSlice {
        a: vec![0.3, -0.2],
        b: vec![0.5, 0.5],
        v: 0.5,
        t_obs: -2.6,
    };
    let cons = gpucb_constraints(&cands, &data, &cfg, &line).unwrap();
    assert_eq!(cons.len(), 1);
    let w_self = 1.0 / 1.25;
    let s_self = (1.0f64 - 1.0 / 1.25).sqrt();
    let w_other = (-2.0f64).exp() / 1.25;
    let s_other = (1.0 - (-4.0f64).exp() / 1.25).sqrt();
    let c = (w_self - w_other) * 0.3 + 2.0 * (s_self - s_other);
    let d = (w_self - w_other) * 0.5;
    assert!((cons[0].c - c).abs() < 1e-14, "{} vs {c}", cons[0].c);
    assert!((cons[0].d - d).abs() < 1e-14);
    assert_eq!(cons[0].sense, Sense::Lt);
}

fn parse_tag(tag: &str) -> (usize, usize, usize) {
    let nums: Vec<usize> = tag
        .split(':')
        .map(|p| p.split('=').nth(1).unwrap().parse().unwrap())
        .collect();
    (nums[0], nums[1], nums[2])
}

#[test]
fn gpucb_constraints_equal_score_gaps_along_line() {
    let cands = make_grid::<f64>(1, 12).unwrap();
    let cfg = GpUcbConfig::for_dim(1);
    let alg = Algorithm::GpUcb(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for seed in 0..10 {
        let noise: Vec<f64> = (0..8).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut src = |step: usize, _: usize| Ok(noise[step]);
        let data = run_adc(&alg, &cands, &mut src, 3, 5, seed).unwrap();
        let points = cands.gather(&data.indices);
        let Ok(target) = select_high_low(&points, &data.responses, 0.2) else {
            continue;
        };
        let line = compute_line(&target.eta, 1.0, &data.responses).unwrap();
        let cons = gpucb_constraints(&cands, &data, &cfg, &line).unwrap();
        let refs = data.points(&cands);
        for _ in 0..5 {
            let z = line.t_obs + rng.random_range(-3.0..3.0);
            let yz = line.at(z);
            for con in &cons {
                let (n, x, chosen) = parse_tag(&con.tag);
                let gap = dense_ucb(&refs[..n], &yz[..n], cands.point(x), &cfg)
                    - dense_ucb(&refs[..n], &yz[..n], cands.point(chosen), &cfg);
                assert!(
                    (con.value(z) - gap).abs() < 1e-9,
                    "{}: {} vs {gap}",
                    con.tag,
                    con.value(z)
                );
            }
        }
    }
}

/// TPE ratio from its definition with `γ = 1/5`, so the top count is the
/// integer `⌈n/5⌉`.
fn tpe_oracle(points: &[&[f64]], y: &[f64], x: &[f64], h: f64) -> f64 {
    let n = y.len();
    let m = n.div_ceil(5);
    let rank = |i: usize| (0..n).filter(|&j| y[j] > y[i] || (y[j] == y[i] && j < i)).count();
    let (mut g, mut l, mut ng, mut nl) = (0.0, 0.0, 0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        let sq: f64 = x.iter().zip(*p).map(|(a, b)| (a - b) * (a - b)).sum();
        let k = (-sq / (2.0 * h * h)).exp();
        if rank(i) < m {
            g += k;
            ng += 1.0;
        } else {
            l += k;
            nl += 1.0;
        }
    }
    (g / ng) / (l / nl)
}

#[test]
fn tpe_score_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = TpeConfig {
        gamma: 0.2,
        bandwidth: 0.15,
    };
    for case in 0..300 {
        let d = 1 + case % 2;
        let n = 2 + case % 14;
        let pts = random_points(&mut rng, n, d);
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        if case % 7 == 0 {
            y[n - 1] = y[0];
        }
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let s = tpe_score(&refs, &y, &x, &cfg).unwrap();
        let o = tpe_oracle(&refs, &y, &x, cfg.bandwidth);
        assert!((s - o).abs() <= 1e-12 * o.abs().max(1.0), "case {case}: {s} vs {o}");
    }
}

#[test]
fn next_point_is_first_maximizer() {
    let cands = make_grid::<f64>(2, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let gp = GpUcbConfig::for_dim(2);
    let tpe = TpeConfig {
        gamma: 0.2,
        bandwidth: 0.1,
    };
    for case in 0..100 {
        let n = 3 + case % 8;
        let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..cands.len())).collect();
        let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let refs: Vec<&[f64]> = indices.iter().map(|&i| cands.point(i)).collect();
        let first_max = |scores: Vec<f64>| {
            let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            scores.iter().position(|&s| s == best).unwrap()
        };
        let ucb: Vec<f64> = cands.iter().map(|x| dense_ucb(&refs, &y, x, &gp)).collect();
        let ev = next_point(&Algorithm::GpUcb(gp), &cands, &indices, &y).unwrap();
        assert_eq!(ev.chosen, first_max(ucb.clone()), "case {case}");
        let ratio: Vec<f64> = cands.iter().map(|x| tpe_oracle(&refs, &y, x, tpe.bandwidth)).collect();
        let ev = next_point(&Algorithm::Tpe(tpe), &cands, &indices, &y).unwrap();
        assert_eq!(ev.chosen, first_max(ratio), "case {case}");
    }
}

#[test]
fn windows_cover_dense_anchor_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..40 {
        let d = 1 + case % 2;
        let n = 2 + case % 7;
        let side = if d == 1 { 0.2 } else { 0.45 };
        let mut pts = random_points(&mut rng, n, d);
        if case % 5 == 0 {
            pts[n - 1] = pts[0].clone();
        }
        let windows = enumerate_windows(&pts, side).unwrap();
        let known: BTreeSet<Vec<usize>> = windows.iter().map(|w| w.member_steps.clone()).collect();
        assert_eq!(known.len(), windows.len());
        for w in &windows {
            assert_eq!(window_members(&pts, &w.anchor, side), w.member_steps);
        }
        let step = side / 100.0;
        let lo: Vec<f64> = (0..d)
            .map(|j| pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min) - side)
            .collect();
        let hi: Vec<f64> = (0..d)
            .map(|j| pts.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let counts: Vec<usize> = (0..d).map(|j| ((hi[j] - lo[j]) / step).ceil() as usize + 1).collect();
        let total: usize = counts.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let anchor: Vec<f64> = (0..d)
                .map(|j| {
                    let k = rem % counts[j];
                    rem /= counts[j];
                    lo[j] + step * k as f64
                })
                .collect();
            let members: Vec<usize> = (0..n)
                .filter(|&t| (0..d).all(|j| anchor[j] <= pts[t][j] && pts[t][j] <= anchor[j] + side))
                .collect();
            if !members.is_empty() {
                assert!(
                    known.contains(&members),
                    "case {case}: {members:?} missing at {anchor:?}"
                );
            }
        }
    }
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `eps`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    if !(b > a) {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 60)
}

/// `P(X ≤ t)` for `X ~ N(δ, v)` restricted to `z`, by quadrature of the
/// density rescaled so its peak over `z` is one.
fn tn_cdf_oracle(delta: f64, v: f64, z: &[(f64, f64)], t: f64) -> f64 {
    let sd = v.sqrt();
    // Mass beyond 40 sd of the nearest point of each piece is negligible.
    let clip: Vec<(f64, f64)> = z
        .iter()
        .map(|&(l, u)| {
            if l > delta {
                (l, u.min(l + 40.0 * sd))
            } else if u < delta {
                (l.max(u - 40.0 * sd), u)
            } else {
                (l.max(delta - 40.0 * sd), u.min(delta + 40.0 * sd))
            }
        })
        .collect();
    let peak = clip
        .iter()
        .map(|&(l, u)| {
            let c = delta.clamp(l, u);
            -(c - delta) * (c - delta) / (2.0 * v)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let f = move |x: f64| (-(x - delta) * (x - delta) / (2.0 * v) - peak).exp();
    let total: f64 = clip.iter().map(|&(l, u)| simpson(&f, l, u, 1e-14 * sd)).sum();
    let below: f64 = clip.iter().map(|&(l, u)| simpson(&f, l, u.min(t), 1e-14 * sd)).sum();
    below / total
}

fn random_set(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let k = rng.random_range(1..=3);
    let cuts = loop {
        let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(-6.0..6.0)).collect();
        cuts.sort_by(f64::total_cmp);
        if cuts.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            break cuts;
        }
    };
    let mut out: Vec<(f64, f64)> = cuts.chunks(2).map(|c| (c[0], c[1])).collect();
    if rng.random_bool(0.25) {
        out[0].0 = f64::NEG_INFINITY;
    }
    if rng.random_bool(0.25) {
        out.last_mut().unwrap().1 = f64::INFINITY;
    }
    out
}

fn to_set(z: &[(f64, f64)]) -> IntervalSet<f64> {
    IntervalSet::from_intervals(z.iter().map(|&(l, u)| Interval::closed(l, u)).collect())
}

#[test]
fn tn_cdf_matches_quadrature_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..10_000 {
        let (delta, v, z) = if case % 10 == 0 {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..2.0),
                vec![(10.0, 11.0)],
            )
        } else {
            (
                rng.random_range(-3.0..3.0),
                rng.random_range(0.2..4.0),
                random_set(&mut rng),
            )
        };
        let lo = z[0].0.max(-8.0);
        let hi = z.last().unwrap().1.min(8.0).max(z.last().unwrap().0 + 1.0);
        let t = rng.random_range(lo - 0.5..hi + 0.5);
        let got = tn_cdf(delta, v, &to_set(&z), t).unwrap();
        let expect = tn_cdf_oracle(delta, v, &z, t);
        let err = (got - expect).abs();
        worst = worst.max(err);
        assert!(
            err < 1e-8,
            "case {case}: δ={delta} v={v} Z={z:?} t={t}: {got} vs {expect}"
        );
    }
    println!("tn_cdf worst abs error {worst:e}");
}

#[test]
fn ci_endpoints_solve_their_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alpha = 0.1;
    let mut checked = 0;
    for case in 0..500 {
        let v = rng.random_range(0.3..3.0);
        let z = random_set(&mut rng);
        let (l, u) = z[rng.random_range(0..z.len())];
        let t = rng.random_range(l.max(-8.0)..u.min(8.0));
        let set = to_set(&z);
        let ci = selective_ci(t, v, &set, alpha).unwrap();
        for (end, target) in [(ci.lo, 1.0 - alpha / 2.0), (ci.hi, alpha / 2.0)] {
            if end.is_finite() {
                let g = TruncatedNormal::new(end, v, &set).unwrap().cdf(t);
                assert!((g - target).abs() < 1e-6, "case {case}: G={g} target {target}");
                checked += 1;
            }
        }
    }
    assert!(checked > 800);
}

#[test]
fn randomized_cdf_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..200 {
        let delta = rng.random_range(-2.0..2.0);
        let v = rng.random_range(0.5..2.0);
        let z = random_set(&mut rng);
        let (l, u) = z[rng.random_range(0..z.len())];
        let t = rng.random_range(l.max(-7.0)..u.min(7.0));
        let set = to_set(&z);
        let hard = tn_cdf(delta, v, &set, t).unwrap();
        let soft = randomized_selective_cdf(delta, v, 1e-8, 1.5, &set, t).unwrap();
        assert!((hard - soft).abs() < 1e-4, "case {case}: {hard} vs {soft}");
    }
}

#[test]
fn randomized_cdf_matches_monte_carlo() {
    let (delta, v, tau2, norm2): (f64, f64, f64, f64) = (0.3, 1.0, 0.5, 2.0);
    let z = to_set(&[(0.5, 2.0), (3.0, f64::INFINITY)]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let draws = 1_000_000;
    let ts = [0.0, 1.0, 2.5];
    let mut accepted = 0usize;
    let mut below = [0usize; 3];
    let sd_w = (tau2 * norm2).sqrt();
    for _ in 0..draws {
        let x = delta + v.sqrt() * Distribution::<f64>::sample(&StandardNormal, &mut rng);
        let w = sd_w * Distribution::<f64>::sample(&StandardNormal, &mut rng);
        if z.contains(x + w) {
            accepted += 1;
            for (k, &t) in ts.iter().enumerate() {
                if x <= t {
                    below[k] += 1;
                }
            }
        }
    }
    for (k, &t) in ts.iter().enumerate() {
        let p = below[k] as f64 / accepted as f64;
        let se = (p * (1.0 - p) / accepted as f64).sqrt();
        let g = randomized_selective_cdf(delta, v, tau2, norm2, &z, t).unwrap();
        assert!((g - p).abs() <= 3.0 * se, "t={t}: {g} vs {p} ± {se}");
    }
}

#[test]
fn single_precision_pipeline() {
    use postadc_core::pipeline::Problem;
    use postadc_core::selective::Method;
    use postadc_core::target::TargetRule;
    let cands = make_grid::<f32>(1, 16).unwrap();
    let problem = Problem {
        candidates: &cands,
        algorithm: Algorithm::Tpe(TpeConfig::default()),
        rule: TargetRule::HighLow { side: 0.2f32 },
        sigma2: 1.0f32,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut done = 0;
    for seed in 0..10 {
        let noise: Vec<f32> = (0..11).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut src = |step: usize, _: usize| Ok(noise[step]);
        let data = run_adc(&problem.algorithm, &cands, &mut src, 3, 8, seed).unwrap();
        let Ok(event) = problem.observe(data) else { continue };
        let r = problem.infer(&event, Method::PostAdc, 0.1).unwrap();
        assert!((0.0..=1.0).contains(&r.p_one_sided));
        assert!(r.ci.lo <= r.ci.hi);
        let z = r.z.unwrap();
        assert!(z.contains(event.line.t_obs) || (z.lower().unwrap() - event.line.t_obs).abs() < 1e-4);
        done += 1;
    }
    assert!(done > 5);
}
