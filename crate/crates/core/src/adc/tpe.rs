use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, sq_dist, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpeConfig<T> {
    pub gamma: T,
    pub bandwidth: T,
}

impl<T: Real> Default for TpeConfig<T> {
    fn default() -> Self {
        Self {
            gamma: lit(0.2),
            bandwidth: lit(0.1),
        }
    }
}

impl<T: Real> TpeConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            return Err(Error::invalid("gamma must lie in (0, 1)"));
        }
        if !(self.bandwidth > T::zero()) || !self.bandwidth.is_finite() {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        Ok(())
    }
}

pub fn tpe_kernel<T: Real>(x: &[T], x2: &[T], bandwidth: T) -> T {
    (-sq_dist(x, x2) / (lit::<T>(2.0) * bandwidth * bandwidth)).exp()
}

/// `⌈γn⌉`, ignoring round-off that pushes `γn` just past an integer.
pub fn tpe_top_count<T: Real>(n: usize, gamma: T) -> usize {
    let p = gamma * from_usize::<T>(n);
    let slack = lit::<T>(1e-9) * p.max(T::one());
    (p - slack).ceil().to_usize().unwrap_or(0).max(1)
}

/// Splits `[0, n)` into the top `⌈γn⌉` responses and the rest. Equal
/// responses enter the top set in index order. Both sets are returned sorted.
pub fn tpe_partition<T: Real>(y: &[T], gamma: T) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = y.len();
    let m = tpe_top_count(n, gamma);
    if m >= n {
        return Err(Error::DegenerateSelection(format!(
            "TPE split with {n} observations leaves the lower set empty"
        )));
    }
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical("NaN response".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| y[j].partial_cmp(&y[i]).unwrap().then(i.cmp(&j)));
    let mut high = order[..m].to_vec();
    let mut low = order[m..].to_vec();
    high.sort_unstable();
    low.sort_unstable();
    Ok((high, low))
}

/// Kernel density averages `(g, ℓ)` at `x` over the two index sets.
pub fn tpe_densities<T: Real>(points: &[&[T]], high: &[usize], low: &[usize], x: &[T], bandwidth: T) -> (T, T) {
    let avg =
        |set: &[usize]| set.iter().map(|&i| tpe_kernel(x, points[i], bandwidth)).sum::<T>() / from_usize(set.len());
    (avg(high), avg(low))
}

pub fn tpe_score<T: Real>(points: &[&[T]], y: &[T], x: &[T], cfg: &TpeConfig<T>) -> Result<T> {
    if points.len() != y.len() {
        return Err(Error::invalid("history points and responses differ in length"));
    }
    let (high, low) = tpe_partition(y, cfg.gamma)?;
    let (g, l) = tpe_densities(points, &high, &low, x, cfg.bandwidth);
    Ok(g / l)
}
