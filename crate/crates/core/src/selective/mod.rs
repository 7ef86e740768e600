//! Truncated-normal p-values and confidence intervals, with the naive,
//! Bonferroni and randomized variants.

mod randomized;

pub use randomized::{randomized_inference, randomized_selective_cdf, RandomizedModel};

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::geometry::IntervalSet;
use crate::numerics::normal::{ln_std_normal_mass, ln_sum_exp, std_normal_isf, std_normal_isf_ln, std_normal_sf};
use crate::numerics::roots::{find_switch, Crossing};
use crate::scalar::{from_usize, lit, Real};

/// Bisection tolerance for CI endpoints, in units of `√v`.
pub const CI_ROOT_TOL: f64 = 1e-8;
pub const CI_MAX_EXPANSIONS: usize = 200;

/// `N(δ, v)` restricted to `Z`.
#[derive(Debug, Clone)]
pub struct TruncatedNormal<T> {
    delta: T,
    sd: T,
    /// Standardized interval endpoints.
    pieces: Vec<(T, T)>,
    ln_total: T,
}

impl<T: Real> TruncatedNormal<T> {
    pub fn new(delta: T, v: T, z: &IntervalSet<T>) -> Result<Self> {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::invalid("variance must be positive"));
        }
        if !delta.is_finite() {
            return Err(Error::invalid("mean must be finite"));
        }
        if z.is_empty() {
            return Err(Error::invalid("truncation set is empty"));
        }
        let sd = v.sqrt();
        let pieces: Vec<(T, T)> = z
            .intervals()
            .iter()
            .map(|i| ((i.lo - delta) / sd, (i.hi - delta) / sd))
            .collect();
        let ln_total = ln_sum_exp(pieces.iter().map(|&(l, u)| ln_std_normal_mass(l, u)));
        if !ln_total.is_finite() {
            return Err(Error::Numerical(format!(
                "truncation set carries no representable mass under N({delta}, {v})"
            )));
        }
        Ok(Self {
            delta,
            sd,
            pieces,
            ln_total,
        })
    }

    pub fn ln_total_mass(&self) -> T {
        self.ln_total
    }

    /// `P(X ≤ t)`.
    pub fn cdf(&self, t: T) -> T {
        let s = (t - self.delta) / self.sd;
        let ln_num = ln_sum_exp(
            self.pieces
                .iter()
                .filter(|&&(l, _)| l < s)
                .map(|&(l, u)| ln_std_normal_mass(l, u.min(s))),
        );
        (ln_num - self.ln_total).exp().min(T::one())
    }

    /// `P(X > t)`, computed directly so small upper tails keep full precision.
    pub fn sf(&self, t: T) -> T {
        let s = (t - self.delta) / self.sd;
        let ln_num = ln_sum_exp(
            self.pieces
                .iter()
                .filter(|&&(_, u)| s < u)
                .map(|&(l, u)| ln_std_normal_mass(l.max(s), u)),
        );
        (ln_num - self.ln_total).exp().min(T::one())
    }
}

pub fn tn_cdf<T: Real>(delta: T, v: T, z: &IntervalSet<T>, t: T) -> Result<T> {
    Ok(TruncatedNormal::new(delta, v, z)?.cdf(t))
}

pub fn tn_sf<T: Real>(delta: T, v: T, z: &IntervalSet<T>, t: T) -> Result<T> {
    Ok(TruncatedNormal::new(delta, v, z)?.sf(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    PostAdc,
    Naive,
    Bonferroni,
    WithoutEta,
    WithoutTrajectory,
    Randomized,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::PostAdc,
        Method::Naive,
        Method::Bonferroni,
        Method::WithoutEta,
        Method::WithoutTrajectory,
        Method::Randomized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::PostAdc => "post_adc",
            Method::Naive => "naive",
            Method::Bonferroni => "bonferroni",
            Method::WithoutEta => "wo_eta",
            Method::WithoutTrajectory => "wo_T",
            Method::Randomized => "randomized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }
}

/// Two-sided interval; an endpoint is infinite when the root search ran out
/// of expansions in that direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> ConfidenceInterval<T> {
    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveResult<T> {
    pub method: Method,
    pub p_one_sided: T,
    pub p_two_sided: T,
    pub ci: ConfidenceInterval<T>,
    /// Lower end of the one-sided interval `[lo, ∞)`.
    pub ci_lower: T,
    pub t_obs: T,
    pub v: T,
    pub z: Option<IntervalSet<T>>,
}

fn clamp01<T: Real>(p: T) -> T {
    p.max(T::zero()).min(T::one())
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::invalid("alpha must lie in (0, 1)"))
    }
}

/// Solves a monotone root in `Δ` by bracketing from `start` and bisection.
/// `above(Δ)` must switch from false to true as `Δ` increases. The first
/// evaluation error aborts the search.
pub(crate) fn invert<T: Real>(above: impl Fn(T) -> Result<bool>, start: T, scale: T) -> Result<T> {
    let failure = RefCell::new(None);
    let crossing = find_switch(
        |d| match above(d) {
            Ok(b) => b,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                false
            }
        },
        start,
        scale,
        scale * lit(CI_ROOT_TOL),
        CI_MAX_EXPANSIONS,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(match crossing {
        Crossing::Found(x) => x,
        Crossing::Unbounded(dir) if dir < 0 => T::neg_infinity(),
        Crossing::Unbounded(_) => T::infinity(),
    })
}

fn check_inside<T: Real>(t_obs: T, z: &IntervalSet<T>) -> Result<()> {
    let slack = lit::<T>(1e-9) * (T::one() + t_obs.abs());
    if z.contains(t_obs) || z.contains(t_obs - slack) || z.contains(t_obs + slack) {
        Ok(())
    } else {
        Err(Error::invalid(format!("observed statistic {t_obs} lies outside {z}")))
    }
}

/// One-sided p-value `P(T ≥ t_obs)` at `Δ = 0`.
pub fn selective_p<T: Real>(t_obs: T, v: T, z: &IntervalSet<T>) -> Result<T> {
    check_inside(t_obs, z)?;
    Ok(clamp01(tn_sf(T::zero(), v, z, t_obs)?))
}

pub fn selective_p_two_sided<T: Real>(t_obs: T, v: T, z: &IntervalSet<T>) -> Result<T> {
    check_inside(t_obs, z)?;
    let tn = TruncatedNormal::new(T::zero(), v, z)?;
    Ok(clamp01(lit::<T>(2.0) * tn.cdf(t_obs).min(tn.sf(t_obs))))
}

/// Equal-tailed interval `{Δ : α/2 ≤ G_Δ(t_obs) ≤ 1 − α/2}`.
pub fn selective_ci<T: Real>(t_obs: T, v: T, z: &IntervalSet<T>, alpha: T) -> Result<ConfidenceInterval<T>> {
    check_alpha(alpha)?;
    check_inside(t_obs, z)?;
    let half = alpha * lit(0.5);
    let sd = v.sqrt();
    let lo = invert(|d| Ok(TruncatedNormal::new(d, v, z)?.sf(t_obs) >= half), t_obs, sd)?;
    let hi = invert(|d| Ok(TruncatedNormal::new(d, v, z)?.cdf(t_obs) <= half), t_obs, sd)?;
    Ok(ConfidenceInterval { lo, hi })
}

/// Lower end of `{Δ : G_Δ(t_obs) ≤ 1 − α}`.
pub fn selective_ci_lower<T: Real>(t_obs: T, v: T, z: &IntervalSet<T>, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    check_inside(t_obs, z)?;
    invert(
        |d| Ok(TruncatedNormal::new(d, v, z)?.sf(t_obs) >= alpha),
        t_obs,
        v.sqrt(),
    )
}

/// Full selective output for a hard truncation set.
pub fn selective_inference<T: Real>(
    t_obs: T,
    v: T,
    z: &IntervalSet<T>,
    ci_alpha: T,
    method: Method,
) -> Result<SelectiveResult<T>> {
    Ok(SelectiveResult {
        method,
        p_one_sided: selective_p(t_obs, v, z)?,
        p_two_sided: selective_p_two_sided(t_obs, v, z)?,
        ci: selective_ci(t_obs, v, z, ci_alpha)?,
        ci_lower: selective_ci_lower(t_obs, v, z, ci_alpha)?,
        t_obs,
        v,
        z: Some(z.clone()),
    })
}

/// Z-test ignoring selection.
pub fn naive_inference<T: Real>(t_obs: T, v: T, ci_alpha: T) -> Result<SelectiveResult<T>> {
    check_alpha(ci_alpha)?;
    if !(v > T::zero()) {
        return Err(Error::invalid("variance must be positive"));
    }
    let sd = v.sqrt();
    let p = std_normal_sf(t_obs / sd);
    let q = std_normal_isf(ci_alpha * lit(0.5));
    Ok(SelectiveResult {
        method: Method::Naive,
        p_one_sided: p,
        p_two_sided: clamp01(lit::<T>(2.0) * p.min(T::one() - p)),
        ci: ConfidenceInterval {
            lo: t_obs - q * sd,
            hi: t_obs + q * sd,
        },
        ci_lower: t_obs - std_normal_isf(ci_alpha) * sd,
        t_obs,
        v,
        z: None,
    })
}

/// `ln(M^{n_steps}·3^M)`.
pub fn bonferroni_ln_correction<T: Real>(candidates: usize, n_steps: usize) -> T {
    let m: T = from_usize(candidates);
    from_usize::<T>(n_steps) * m.ln() + m * lit::<T>(3.0).ln()
}

/// `min(1, p·M^{n_steps}·3^M)`.
pub fn bonferroni_p<T: Real>(p: T, candidates: usize, n_steps: usize) -> T {
    if p <= T::zero() {
        return T::zero();
    }
    let ln = p.ln() + bonferroni_ln_correction::<T>(candidates, n_steps);
    if ln >= T::zero() {
        T::one()
    } else {
        ln.exp()
    }
}

/// Naive test and interval with the level divided by the Bonferroni count.
pub fn bonferroni_inference<T: Real>(
    t_obs: T,
    v: T,
    ci_alpha: T,
    candidates: usize,
    n_steps: usize,
) -> Result<SelectiveResult<T>> {
    let naive = naive_inference(t_obs, v, ci_alpha)?;
    let ln_c = bonferroni_ln_correction::<T>(candidates, n_steps);
    let sd = v.sqrt();
    let q = std_normal_isf_ln((ci_alpha * lit(0.5)).ln() - ln_c);
    let q_lower = std_normal_isf_ln(ci_alpha.ln() - ln_c);
    Ok(SelectiveResult {
        method: Method::Bonferroni,
        p_one_sided: bonferroni_p(naive.p_one_sided, candidates, n_steps),
        p_two_sided: bonferroni_p(naive.p_two_sided, candidates, n_steps),
        ci: ConfidenceInterval {
            lo: t_obs - q * sd,
            hi: t_obs + q * sd,
        },
        ci_lower: t_obs - q_lower * sd,
        ..naive
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;
    use approx::assert_relative_eq;

    fn full() -> IntervalSet<f64> {
        IntervalSet::full()
    }

    fn ray(lo: f64) -> IntervalSet<f64> {
        IntervalSet::single(Interval::closed(lo, f64::INFINITY))
    }

    #[test]
    fn untruncated_values() {
        assert_relative_eq!(tn_cdf(0.0, 1.0, &full(), 0.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(
            selective_p(1.644_853_626_951_472_2, 1.0, &full()).unwrap(),
            0.05,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            selective_p_two_sided(1.959_963_984_540_054, 1.0, &full()).unwrap(),
            0.05,
            max_relative = 1e-12
        );
        let ci = selective_ci(0.7, 1.0, &full(), 0.10).unwrap();
        assert!((ci.lo - (0.7 - 1.644_853_626_951_472_2)).abs() < 1e-7);
        assert!((ci.hi - (0.7 + 1.644_853_626_951_472_2)).abs() < 1e-7);
        let lo = selective_ci_lower(0.7, 1.0, &full(), 0.05).unwrap();
        assert!((lo - (0.7 - 1.644_853_626_951_472_2)).abs() < 1e-7);
    }

    #[test]
    fn survival_ratio() {
        let p = selective_p(1.0, 1.0, &ray(0.5)).unwrap();
        assert_relative_eq!(
            p,
            0.158_655_253_931_457_05 / 0.308_537_538_725_986_9,
            max_relative = 1e-13
        );
        assert_eq!(selective_p(0.5, 1.0, &ray(0.5)).unwrap(), 1.0);
        assert!(selective_p(0.2, 1.0, &ray(0.5)).is_err());
    }

    #[test]
    fn naive_and_bonferroni() {
        let r = naive_inference(0.0f64, 1.0, 0.1).unwrap();
        assert_eq!(r.p_one_sided, 0.5);
        assert!((r.ci.length() - 2.0 * 1.644_853_626_951_472_2).abs() < 1e-12);
        assert_relative_eq!(bonferroni_p(1e-10, 4, 3), 5184e-10, max_relative = 1e-12);
        assert_eq!(bonferroni_p(0.01, 64, 15), 1.0);
        assert_eq!(bonferroni_p(0.0, 64, 15), 0.0);
        let b = bonferroni_inference(3.0, 1.0, 0.1, 4, 3).unwrap();
        let q = std_normal_isf(0.05 / 5184.0);
        assert_relative_eq!(b.ci.hi - 3.0, q, max_relative = 1e-12);
        let huge = bonferroni_inference(3.0, 1.0, 0.1, 1024, 50).unwrap();
        assert!(huge.ci.is_bounded() && huge.ci.length() > 80.0);
    }

    #[test]
    fn far_tail_window() {
        let z = IntervalSet::single(Interval::closed(10.0, 11.0));
        let c = tn_cdf(0.0, 1.0, &z, 10.5).unwrap();
        // ratio of tail masses, reference computed to 30 digits
        assert_relative_eq!(c, 0.994_356_836_634_419_05, max_relative = 1e-10);
    }
}
