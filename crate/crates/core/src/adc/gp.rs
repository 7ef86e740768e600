use crate::error::{Error, Result};
use crate::numerics::linalg::Cholesky;
use crate::scalar::{dot, from_usize, lit, sq_dist, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpUcbConfig<T> {
    pub kernel_variance: T,
    pub length_scale: T,
    pub noise_variance: T,
    pub kappa: T,
}

impl<T: Real> GpUcbConfig<T> {
    /// Unit-variance RBF with length scale `0.1·√d`, unit noise and `κ = 2`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            kernel_variance: T::one(),
            length_scale: lit::<T>(0.1) * from_usize::<T>(dim).sqrt(),
            noise_variance: T::one(),
            kappa: lit(2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.kernel_variance) || !positive(self.length_scale) || !positive(self.noise_variance) {
            return Err(Error::invalid(
                "GP kernel variance, length scale and noise variance must be positive",
            ));
        }
        if !(self.kappa >= T::zero()) || !self.kappa.is_finite() {
            return Err(Error::invalid("kappa must be nonnegative"));
        }
        Ok(())
    }
}

/// Squared-exponential kernel `variance·exp(−‖x−x2‖²/(2ℓ²))`.
pub fn rbf_kernel<T: Real>(x: &[T], x2: &[T], variance: T, length_scale: T) -> T {
    variance * (-sq_dist(x, x2) / (lit::<T>(2.0) * length_scale * length_scale)).exp()
}

/// GP posterior at one query point, kept in the form needed for both scoring
/// and constraint extraction.
#[derive(Debug, Clone)]
pub struct GpPrediction<T> {
    /// `(K_n + σ²I)⁻¹ k_n(x)`; the posterior mean is `weightsᵀ y`.
    pub weights: Vec<T>,
    pub variance: T,
}

impl<T: Real> GpPrediction<T> {
    pub fn mean(&self, y: &[T]) -> T {
        dot(&self.weights, y)
    }

    pub fn sd(&self) -> T {
        self.variance.sqrt()
    }
}

/// Factorized GP surrogate after `n` observations.
#[derive(Debug, Clone)]
pub struct GpStep<'a, T> {
    cfg: GpUcbConfig<T>,
    points: Vec<&'a [T]>,
    chol: Cholesky<T>,
}

impl<'a, T: Real> GpStep<'a, T> {
    /// Factors `K_n + σ²I`; `step` labels a factorization failure.
    pub fn fit(points: Vec<&'a [T]>, cfg: &GpUcbConfig<T>, step: usize) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::invalid("GP needs at least one observation"));
        }
        let mut k = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = rbf_kernel(points[i], points[j], cfg.kernel_variance, cfg.length_scale);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
            k[i * n + i] = k[i * n + i] + cfg.noise_variance;
        }
        let chol = Cholesky::factor(&k, n, step)?;
        Ok(Self {
            cfg: *cfg,
            points,
            chol,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn predict(&self, x: &[T]) -> Result<GpPrediction<T>> {
        let kx: Vec<T> = self
            .points
            .iter()
            .map(|p| rbf_kernel(x, p, self.cfg.kernel_variance, self.cfg.length_scale))
            .collect();
        let weights = self.chol.solve(&kx);
        let raw = self.cfg.kernel_variance - dot(&kx, &weights);
        let tol = lit::<T>(1e-12).max(T::epsilon() * lit(100.0)) * self.cfg.kernel_variance;
        if raw < -tol || !raw.is_finite() {
            return Err(Error::Numerical(format!(
                "negative GP posterior variance {raw} at step {}",
                self.len()
            )));
        }
        Ok(GpPrediction {
            weights,
            variance: raw.max(T::zero()),
        })
    }

    /// `μ_n(x) + κ·s_n(x)` and the prediction it came from.
    pub fn ucb(&self, x: &[T], y: &[T]) -> Result<(T, GpPrediction<T>)> {
        let pred = self.predict(x)?;
        Ok((pred.mean(y) + self.cfg.kappa * pred.sd(), pred))
    }
}

/// Posterior mean and variance at `x` given observations `(points, y)`.
pub fn gp_posterior<T: Real>(points: &[&[T]], y: &[T], x: &[T], cfg: &GpUcbConfig<T>) -> Result<(T, T)> {
    if points.len() != y.len() {
        return Err(Error::invalid("history points and responses differ in length"));
    }
    let step = GpStep::fit(points.to_vec(), cfg, points.len())?;
    let pred = step.predict(x)?;
    Ok((pred.mean(y), pred.variance))
}

pub fn gpucb_score<T: Real>(points: &[&[T]], y: &[T], x: &[T], cfg: &GpUcbConfig<T>) -> Result<T> {
    let (mean, var) = gp_posterior(points, y, x, cfg)?;
    Ok(mean + cfg.kappa * var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(kappa: f64) -> GpUcbConfig<f64> {
        GpUcbConfig {
            kernel_variance: 1.0,
            length_scale: 0.3,
            noise_variance: 1.0,
            kappa,
        }
    }

    #[test]
    fn kernel_values() {
        assert_eq!(rbf_kernel(&[0.3], &[0.3], 1.0, 0.1), 1.0);
        assert_relative_eq!(
            rbf_kernel(&[0.0, 0.0], &[0.3, 0.4], 1.0, 0.5),
            (-0.5f64).exp(),
            max_relative = 1e-15
        );
        assert_eq!(rbf_kernel(&[0.0], &[1e3], 1.0, 0.1), 0.0);
    }

    #[test]
    fn single_observation() {
        let x1 = [0.5];
        let (m, v) = gp_posterior(&[&x1[..]], &[2.0], &x1, &unit(2.0)).unwrap();
        assert_relative_eq!(m, 1.0, max_relative = 1e-15);
        assert_relative_eq!(v, 0.5, max_relative = 1e-15);
        let s = gpucb_score(&[&x1[..]], &[2.0], &x1, &unit(2.0)).unwrap();
        assert_relative_eq!(s, 1.0 + 2.0 * 0.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(
            gpucb_score(&[&x1[..]], &[2.0], &x1, &unit(0.0)).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn orthogonal_query() {
        let x1 = [0.0];
        let (m, v) = gp_posterior(&[&x1[..]], &[2.0], &[1e3], &unit(2.0)).unwrap();
        assert_eq!(m, 0.0);
        assert_eq!(v, 1.0);
    }
}
