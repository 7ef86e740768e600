use std::cmp::Ordering;
use std::fmt;

use crate::scalar::Real;

/// Interval on the extended real line. Infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: T, hi: T) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: T, hi: T) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn full() -> Self {
        Self::open(T::neg_infinity(), T::infinity())
    }

    /// True when the interval contains more than one point.
    pub fn is_proper(&self) -> bool {
        self.lo < self.hi
    }

    pub fn contains(&self, x: T) -> bool {
        (self.lo < x || (self.lo_closed && x == self.lo)) && (x < self.hi || (self.hi_closed && x == self.hi))
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo).unwrap() {
            Ordering::Greater => (self.lo, self.lo_closed),
            Ordering::Less => (other.lo, other.lo_closed),
            Ordering::Equal => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi).unwrap() {
            Ordering::Less => (self.hi, self.hi_closed),
            Ordering::Greater => (other.hi, other.hi_closed),
            Ordering::Equal => (self.hi, self.hi_closed && other.hi_closed),
        };
        Self::new(lo, hi, lo_closed, hi_closed)
    }

    fn covers(&self, inner: &Self) -> bool {
        let lo_ok = self.lo < inner.lo || (self.lo == inner.lo && (self.lo_closed || !inner.lo_closed));
        let hi_ok = inner.hi < self.hi || (self.hi == inner.hi && (self.hi_closed || !inner.hi_closed));
        lo_ok && hi_ok
    }
}

impl<T: Real> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Sorted union of disjoint proper intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<T> {
    intervals: Vec<Interval<T>>,
}

impl<T: Real> IntervalSet<T> {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn full() -> Self {
        Self::single(Interval::full())
    }

    pub fn single(interval: Interval<T>) -> Self {
        Self::from_intervals(vec![interval])
    }

    /// Normalizes arbitrary intervals: drops degenerate ones, sorts and
    /// merges overlapping or touching pieces.
    pub fn from_intervals(mut raw: Vec<Interval<T>>) -> Self {
        raw.retain(|i| i.is_proper());
        raw.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .unwrap()
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut out: Vec<Interval<T>> = Vec::with_capacity(raw.len());
        for iv in raw {
            if let Some(last) = out.last_mut() {
                let touches = iv.lo < last.hi || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
                if touches {
                    if iv.hi > last.hi || (iv.hi == last.hi && iv.hi_closed) {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: T) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn lower(&self) -> Option<T> {
        self.intervals.first().map(|i| i.lo)
    }

    pub fn upper(&self) -> Option<T> {
        self.intervals.last().map(|i| i.hi)
    }

    /// Finite interval endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<T> {
        self.intervals
            .iter()
            .flat_map(|i| [i.lo, i.hi])
            .filter(|e| e.is_finite())
            .collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::from_intervals(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let c = a.intersect(b);
                if c.is_proper() {
                    out.push(c);
                }
            }
        }
        Self::from_intervals(out)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.intervals
            .iter()
            .all(|a| other.intervals.iter().any(|b| b.covers(a)))
    }

    pub fn shift(&self, delta: T) -> Self {
        Self {
            intervals: self
                .intervals
                .iter()
                .map(|i| Interval::new(i.lo + delta, i.hi + delta, i.lo_closed, i.hi_closed))
                .collect(),
        }
    }
}

impl<T: Real> fmt::Display for IntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, i) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " U ")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}
