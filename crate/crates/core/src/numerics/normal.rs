//! Standard normal tail probabilities evaluated in log space.
//!
//! Near the origin `Φ(x) − ½` is summed from an all-positive power series,
//! so no cancellation occurs. Beyond [`SERIES_LIMIT`] the upper tail is
//! `φ(x)·R(x)` with the Mills ratio `R` taken from its Laplace continued
//! fraction, which keeps `ln Φ̄(x)` accurate far past the point where
//! `Φ̄(x)` itself underflows.

use crate::scalar::{lit, Real};

const SERIES_LIMIT: f64 = 1.0;
const MAX_TERMS: usize = 5000;

#[inline]
fn ln_sqrt_2pi<T: Real>() -> T {
    lit(0.918_938_533_204_672_8)
}

pub fn std_normal_pdf<T: Real>(x: T) -> T {
    ln_std_normal_pdf(x).exp()
}

pub fn ln_std_normal_pdf<T: Real>(x: T) -> T {
    -(x * x) * lit(0.5) - ln_sqrt_2pi()
}

/// `Φ(x) − ½` for `0 ≤ x ≤ SERIES_LIMIT`.
fn central_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let eps = T::epsilon() * lit(0.25);
    let mut k = 1usize;
    while k < MAX_TERMS {
        term = term * x2 / lit((2 * k + 1) as f64);
        sum = sum + term;
        if term <= eps * sum {
            break;
        }
        k += 1;
    }
    sum * std_normal_pdf(x)
}

/// Mills ratio `Φ̄(x)/φ(x)` for `x ≥ SERIES_LIMIT`, by modified Lentz on
/// `x + 1/(x + 2/(x + 3/(x + …)))`.
fn mills_ratio_cf<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let mut f = x;
    let mut c = f;
    let mut d = T::zero();
    for j in 1..MAX_TERMS {
        let a: T = lit(j as f64);
        d = x + a * d;
        if d == T::zero() {
            d = tiny;
        }
        c = x + a / c;
        if c == T::zero() {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= eps {
            break;
        }
    }
    f.recip()
}

/// `Φ(x) − ½` for `x ≥ 0`, accurate in relative terms on the whole half line.
fn central_mass<T: Real>(x: T) -> T {
    if x <= lit(SERIES_LIMIT) {
        central_series(x)
    } else {
        lit::<T>(0.5) - std_normal_sf(x)
    }
}

/// Upper tail `Φ̄(x) = P(X > x)`.
pub fn std_normal_sf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x > lit(SERIES_LIMIT) {
        if x == T::infinity() {
            return T::zero();
        }
        (ln_std_normal_pdf(x) + mills_ratio_cf(x).ln()).exp()
    } else if x >= T::zero() {
        lit::<T>(0.5) - central_series(x)
    } else {
        lit::<T>(0.5) + central_mass(-x)
    }
}

pub fn std_normal_cdf<T: Real>(x: T) -> T {
    std_normal_sf(-x)
}

/// `ln Φ̄(x)`, finite for every finite `x`.
pub fn ln_std_normal_sf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x == T::infinity() {
        return T::neg_infinity();
    }
    if x > lit(SERIES_LIMIT) {
        ln_std_normal_pdf(x) + mills_ratio_cf(x).ln()
    } else if x >= -lit::<T>(SERIES_LIMIT) {
        std_normal_sf(x).ln()
    } else {
        // Φ̄(x) = 1 − Φ̄(−x) with Φ̄(−x) tiny
        (-std_normal_sf(-x)).ln_1p()
    }
}

pub fn ln_std_normal_cdf<T: Real>(x: T) -> T {
    ln_std_normal_sf(-x)
}

/// `ln(1 − eˣ)` for `x ≤ 0`.
pub fn ln_one_minus_exp<T: Real>(x: T) -> T {
    if x > T::zero() {
        return T::nan();
    }
    if x > -T::LN_2() {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(eᵃ + eᵇ)` tolerating `−∞` arguments.
pub fn ln_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn ln_sum_exp<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::neg_infinity(), ln_add_exp)
}

/// `ln P(lo < X < hi)` for a standard normal `X`; `−∞` when `lo ≥ hi`.
pub fn ln_std_normal_mass<T: Real>(lo: T, hi: T) -> T {
    if !(lo < hi) {
        return T::neg_infinity();
    }
    if lo >= T::zero() {
        let ln_lo = ln_std_normal_sf(lo);
        let ln_hi = ln_std_normal_sf(hi);
        if ln_lo == T::neg_infinity() {
            return T::neg_infinity();
        }
        ln_lo + ln_one_minus_exp(ln_hi - ln_lo)
    } else if hi <= T::zero() {
        ln_std_normal_mass(-hi, -lo)
    } else {
        (central_mass(hi) + central_mass(-lo)).ln()
    }
}

/// `x` such that `ln Φ̄(x) = ln_p`, i.e. the upper quantile of an upper-tail
/// probability supplied in log form. Valid down to probabilities far below
/// the smallest representable positive float.
pub fn std_normal_isf_ln<T: Real>(ln_p: T) -> T {
    if ln_p.is_nan() || ln_p > T::zero() {
        return T::nan();
    }
    if ln_p == T::neg_infinity() {
        return T::infinity();
    }
    if ln_p == T::zero() {
        return T::neg_infinity();
    }
    if ln_p > -T::LN_2() {
        return -std_normal_isf_ln(ln_one_minus_exp(ln_p));
    }
    // ln Φ̄ is concave and decreasing, so Newton started to the right of the
    // root stays to the right and converges monotonically.
    let mut x = (lit::<T>(-2.0) * ln_p).sqrt();
    for _ in 0..200 {
        let g = ln_std_normal_sf(x);
        let hazard = (ln_std_normal_pdf(x) - g).exp();
        let step = (g - ln_p) / hazard;
        x = x + step;
        if step.abs() <= T::epsilon() * lit(4.0) * (T::one() + x.abs()) {
            break;
        }
    }
    x
}

/// Upper quantile `Φ̄⁻¹(p)`.
pub fn std_normal_isf<T: Real>(p: T) -> T {
    if p <= T::zero() {
        return T::infinity();
    }
    std_normal_isf_ln(p.ln())
}
