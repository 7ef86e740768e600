use crate::error::{Error, Result};
use crate::scalar::{dot, lit, Real};
use crate::target::ZERO_ETA_TOL;

/// `y(z) = a + b·z`, the responses that keep `y − b·ηᵀy` fixed and set
/// `ηᵀy(z) = z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSlice<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    /// Variance of `ηᵀY`, `σ²‖η‖²`.
    pub v: T,
    pub t_obs: T,
}

impl<T: Real> LineSlice<T> {
    pub fn at(&self, z: T) -> Vec<T> {
        self.a.iter().zip(&self.b).map(|(&a, &b)| a + b * z).collect()
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

pub fn compute_line<T: Real>(eta: &[T], sigma2: T, y: &[T]) -> Result<LineSlice<T>> {
    if eta.len() != y.len() {
        return Err(Error::invalid("eta and y differ in length"));
    }
    if !(sigma2 > T::zero()) || !sigma2.is_finite() {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    if eta.iter().all(|e| e.abs() < lit(ZERO_ETA_TOL)) {
        return Err(Error::DegenerateSelection("weight vector is numerically zero".into()));
    }
    let norm2 = dot(eta, eta);
    let t_obs = dot(eta, y);
    let b: Vec<T> = eta.iter().map(|&e| e / norm2).collect();
    let a = y.iter().zip(&b).map(|(&yi, &bi)| yi - bi * t_obs).collect();
    Ok(LineSlice {
        a,
        b,
        v: sigma2 * norm2,
        t_obs,
    })
}
