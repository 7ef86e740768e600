//! Bracketing and bisection for monotone predicates.

use crate::scalar::{lit, Real};

/// Outcome of locating the switch point of a monotone predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing<T> {
    Found(T),
    /// No switch within the expansion budget; the crossing lies beyond the
    /// last probe in the reported direction (`+1` above, `-1` below).
    Unbounded(i8),
}

/// Finds the point where `above` switches from `false` (left) to `true`
/// (right). The bracket is grown geometrically from `start ± scale` by
/// factors of two, at most `max_expansions` times, then bisected until its
/// width is at most `tol`.
pub fn find_switch<T: Real>(
    above: impl Fn(T) -> bool,
    start: T,
    scale: T,
    tol: T,
    max_expansions: usize,
) -> Crossing<T> {
    let (mut lo, mut hi);
    if above(start) {
        hi = start;
        let mut step = scale;
        let mut k = 0;
        loop {
            let probe = start - step;
            if !above(probe) {
                lo = probe;
                break;
            }
            hi = probe;
            k += 1;
            step = step * lit(2.0);
            if k >= max_expansions || !probe.is_finite() {
                return Crossing::Unbounded(-1);
            }
        }
    } else {
        lo = start;
        let mut step = scale;
        let mut k = 0;
        loop {
            let probe = start + step;
            if above(probe) {
                hi = probe;
                break;
            }
            lo = probe;
            k += 1;
            step = step * lit(2.0);
            if k >= max_expansions || !probe.is_finite() {
                return Crossing::Unbounded(1);
            }
        }
    }
    for _ in 0..2000 {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Crossing::Found(lo + (hi - lo) * lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locates_threshold_in_either_direction() {
        let r = find_switch(|x: f64| x >= 3.25, 0.0, 1.0, 1e-12, 200);
        match r {
            Crossing::Found(x) => assert!((x - 3.25).abs() < 1e-11),
            other => panic!("{other:?}"),
        }
        let r = find_switch(|x: f64| x >= -1e6, 0.0, 1.0, 1e-6, 200);
        match r {
            Crossing::Found(x) => assert!((x + 1e6).abs() < 1e-5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_unbounded() {
        assert_eq!(find_switch(|_x: f64| true, 0.0, 1.0, 1e-8, 50), Crossing::Unbounded(-1));
        assert_eq!(find_switch(|_x: f64| false, 0.0, 1.0, 1e-8, 50), Crossing::Unbounded(1));
    }
}
