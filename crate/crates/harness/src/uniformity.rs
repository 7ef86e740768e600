/// One-sample Kolmogorov–Smirnov comparison against Uniform(0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityReport {
    pub n: usize,
    pub statistic: f64,
    /// Asymptotic critical value at significance 0.01.
    pub critical: f64,
    pub pass: bool,
}

pub fn uniformity_check(pvalues: &[f64]) -> UniformityReport {
    let mut p: Vec<f64> = pvalues.to_vec();
    p.sort_by(f64::total_cmp);
    let n = p.len();
    let nf = n as f64;
    let statistic = p
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / nf - x).max(x - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    let critical = (-(0.005f64).ln() / 2.0).sqrt() / nf.sqrt();
    UniformityReport {
        n,
        statistic,
        critical,
        pass: n > 0 && statistic < critical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn even_grid_passes() {
        let n = 10_000;
        let p: Vec<f64> = (1..=n).map(|i| i as f64 / (n as f64 + 1.0)).collect();
        let r = uniformity_check(&p);
        assert!(r.statistic < 0.02);
        assert!(r.pass);
        assert!((r.critical * (n as f64).sqrt() - 1.627_6).abs() < 1e-4);
    }

    #[test]
    fn constant_fails() {
        assert!(!uniformity_check(&vec![0.5; 1000]).pass);
        assert!(!uniformity_check(&[]).pass);
    }

    #[test]
    fn pseudo_random_draws_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        assert!(uniformity_check(&p).pass);
    }
}
