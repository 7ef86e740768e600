//! Finite candidate domains and the sliding-window region family over queried points.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Finite query domain: `len()` points in `[0, 1]^dim`, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet<T> {
    dim: usize,
    coords: Vec<T>,
    points_per_axis: Option<usize>,
}

impl<T: Real> CandidateSet<T> {
    /// Builds a candidate set from explicit points. Coordinates must lie in
    /// `[0, 1]` and points must be pairwise distinct.
    pub fn from_points(dim: usize, points: &[Vec<T>]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if points.is_empty() {
            return Err(Error::invalid("candidate set must be nonempty"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::invalid(format!(
                    "point has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|&c| !(c >= T::zero() && c <= T::one())) {
                return Err(Error::invalid("candidate coordinates must lie in [0, 1]"));
            }
            coords.extend_from_slice(p);
        }
        let set = Self {
            dim,
            coords,
            points_per_axis: None,
        };
        let mut sorted: Vec<&[T]> = (0..set.len()).map(|i| set.point(i)).collect();
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("candidate points must be distinct"));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Points per axis when the set is a generated grid.
    pub fn points_per_axis(&self) -> Option<usize> {
        self.points_per_axis
    }

    pub fn point(&self, index: usize) -> &[T] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Coordinates of the points visited by `indices`, in order.
    pub fn gather(&self, indices: &[usize]) -> Vec<Vec<T>> {
        indices.iter().map(|&i| self.point(i).to_vec()).collect()
    }
}

/// Axis-aligned grid `{0, 1/(m−1), …, 1}^d` in row-major order (the last
/// axis varies fastest).
pub fn make_grid<T: Real>(dim: usize, m_per_axis: usize) -> Result<CandidateSet<T>> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if m_per_axis < 2 {
        return Err(Error::invalid("grid needs at least 2 points per axis"));
    }
    let total = m_per_axis
        .checked_pow(dim as u32)
        .filter(|&t| t <= 1 << 26)
        .ok_or_else(|| Error::invalid("grid too large"))?;
    let denom: T = from_usize(m_per_axis - 1);
    let axis: Vec<T> = (0..m_per_axis)
        .map(|i| {
            if i == m_per_axis - 1 {
                T::one()
            } else {
                from_usize::<T>(i) / denom
            }
        })
        .collect();
    let mut coords = Vec::with_capacity(total * dim);
    for k in 0..total {
        let mut rem = k;
        let mut digits = vec![0usize; dim];
        for j in (0..dim).rev() {
            digits[j] = rem % m_per_axis;
            rem /= m_per_axis;
        }
        coords.extend(digits.iter().map(|&i| axis[i]));
    }
    Ok(CandidateSet {
        dim,
        coords,
        points_per_axis: Some(m_per_axis),
    })
}

/// Dimension-adjusted window side `base^{1/d}`.
pub fn side_length_for_dim<T: Real>(dim: usize, base: T) -> T {
    if dim == 1 {
        return base;
    }
    base.powf(from_usize::<T>(dim).recip())
}

/// Points per axis giving roughly `m1` grid points in `dim` dimensions.
pub fn points_per_axis_for_dim(dim: usize, m1: usize) -> usize {
    ((m1 as f64).powf(1.0 / dim as f64)).round() as usize
}

/// One member of the sliding-window family: the steps whose queried point
/// falls in the closed hypercube `∏ [anchor_j, anchor_j + side]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowIndexSet<T> {
    /// Sorted 0-based step indices.
    pub member_steps: Vec<usize>,
    pub anchor: Vec<T>,
    pub side: T,
}

impl<T: Real> WindowIndexSet<T> {
    pub fn contains_point(&self, x: &[T]) -> bool {
        in_window(x, &self.anchor, self.side)
    }
}

#[inline]
fn in_axis<T: Real>(x: T, s: T, side: T) -> bool {
    s <= x && x <= s + side
}

fn in_window<T: Real>(x: &[T], anchor: &[T], side: T) -> bool {
    x.iter().zip(anchor).all(|(&xi, &si)| in_axis(xi, si, side))
}

/// Steps whose point lies in the window anchored at `anchor`.
pub fn window_members<T: Real>(points: &[Vec<T>], anchor: &[T], side: T) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| in_window(p, anchor, side))
        .map(|(t, _)| t)
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn members(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.0.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }
}

/// Every distinct nonempty index set cut out by a side-`side` window, sorted
/// lexicographically by member set.
///
/// Along one axis, membership of step `t` is the closed anchor interval
/// `[x_t − side, x_t]`, so the axis membership is piecewise constant with
/// breakpoints at `x_t` and `x_t − side`. Evaluating each axis at every
/// breakpoint and at every midpoint between consecutive breakpoints visits
/// each distinct axis set; the full family is the nonempty intersections
/// across axes.
pub fn enumerate_windows<T: Real>(points: &[Vec<T>], side: T) -> Result<Vec<WindowIndexSet<T>>> {
    if points.is_empty() {
        return Err(Error::invalid("no queried points"));
    }
    if !(side > T::zero()) || !side.is_finite() {
        return Err(Error::invalid("window side must be positive"));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("queried points must share a positive dimension"));
    }
    let n = points.len();

    let mut per_axis: Vec<Vec<(Bits, T)>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut breaks: Vec<T> = points.iter().flat_map(|p| [p[j], p[j] - side]).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut anchors = Vec::with_capacity(2 * breaks.len());
        for (i, &b) in breaks.iter().enumerate() {
            anchors.push(b);
            if let Some(&next) = breaks.get(i + 1) {
                anchors.push(b + (next - b) * lit(0.5));
            }
        }
        let mut seen: BTreeMap<Bits, T> = BTreeMap::new();
        let mut ordered = Vec::new();
        for s in anchors {
            let mut bits = Bits::empty(n);
            for (t, p) in points.iter().enumerate() {
                if in_axis(p[j], s, side) {
                    bits.set(t);
                }
            }
            if bits.is_empty() || seen.contains_key(&bits) {
                continue;
            }
            seen.insert(bits.clone(), s);
            ordered.push((bits, s));
        }
        per_axis.push(ordered);
    }

    let mut found: BTreeMap<Vec<usize>, Vec<T>> = BTreeMap::new();
    let mut anchor = vec![T::zero(); dim];
    collect_products(&per_axis, 0, None, &mut anchor, &mut found);

    Ok(found
        .into_iter()
        .map(|(member_steps, anchor)| WindowIndexSet {
            member_steps,
            anchor,
            side,
        })
        .collect())
}

fn collect_products<T: Real>(
    per_axis: &[Vec<(Bits, T)>],
    axis: usize,
    acc: Option<&Bits>,
    anchor: &mut Vec<T>,
    found: &mut BTreeMap<Vec<usize>, Vec<T>>,
) {
    if axis == per_axis.len() {
        if let Some(bits) = acc {
            found.entry(bits.members()).or_insert_with(|| anchor.clone());
        }
        return;
    }
    for (bits, s) in &per_axis[axis] {
        let next = match acc {
            Some(a) => a.and(bits),
            None => bits.clone(),
        };
        if next.is_empty() {
            continue;
        }
        anchor[axis] = *s;
        collect_products(per_axis, axis + 1, Some(&next), anchor, found);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    fn sets(ws: &[WindowIndexSet<f64>]) -> Vec<Vec<usize>> {
        ws.iter().map(|w| w.member_steps.clone()).collect()
    }

    #[test]
    fn grid_examples() {
        let g = make_grid::<f64>(1, 3).unwrap();
        assert_eq!(g.iter().map(|p| p[0]).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        let g = make_grid::<f64>(2, 2).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.point(0), &[0.0, 0.0]);
        assert_eq!(g.point(1), &[0.0, 1.0]);
        assert_eq!(g.point(2), &[1.0, 0.0]);
        assert_eq!(g.point(3), &[1.0, 1.0]);
        let g = make_grid::<f64>(1, 1024).unwrap();
        assert_eq!(g.len(), 1024);
        assert!((g.point(1)[0] - 1.0 / 1023.0).abs() < 1e-16);
        assert_eq!(g.point(1023)[0], 1.0);
    }

    #[test]
    fn grid_rejects_bad_dimensions() {
        assert!(make_grid::<f64>(0, 4).is_err());
        assert!(make_grid::<f64>(2, 1).is_err());
    }

    #[test]
    fn side_lengths() {
        assert_eq!(side_length_for_dim(1, 0.2f64), 0.2);
        assert!((side_length_for_dim(2, 0.25f64) - 0.5).abs() < 1e-15);
        assert!((side_length_for_dim(3, 0.2f64) - 0.584_803_547_642_573_2).abs() < 1e-12);
        assert_eq!(points_per_axis_for_dim(1, 1024), 1024);
        assert_eq!(points_per_axis_for_dim(2, 1024), 32);
        assert_eq!(points_per_axis_for_dim(3, 1024), 10);
    }

    #[test]
    fn window_examples() {
        let w = enumerate_windows(&pts(&[0.1, 0.15, 0.9]), 0.2).unwrap();
        assert_eq!(sets(&w), vec![vec![0], vec![0, 1], vec![1], vec![2]]);
        let w = enumerate_windows(&pts(&[0.42]), 0.01).unwrap();
        assert_eq!(sets(&w), vec![vec![0]]);
        let w = enumerate_windows(&pts(&[0.0, 0.5, 1.0]), 0.2).unwrap();
        assert_eq!(sets(&w), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn isolated_middle_point_is_found() {
        // {0.3} alone needs an anchor strictly between breakpoints.
        let w = enumerate_windows(&pts(&[0.0, 0.3, 0.5]), 0.4).unwrap();
        assert!(sets(&w).contains(&vec![1]));
    }

    #[test]
    fn duplicates_share_membership() {
        let w = enumerate_windows(&pts(&[0.3, 0.3, 0.8]), 0.1).unwrap();
        assert_eq!(sets(&w), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn stored_anchors_reproduce_members() {
        let p = vec![vec![0.1, 0.7], vec![0.2, 0.75], vec![0.9, 0.1], vec![0.15, 0.2]];
        let ws = enumerate_windows(&p, 0.3).unwrap();
        for w in &ws {
            assert_eq!(window_members(&p, &w.anchor, w.side), w.member_steps);
        }
    }

    #[test]
    fn candidate_set_validation() {
        assert!(CandidateSet::from_points(1, &[vec![0.2], vec![0.2]]).is_err());
        assert!(CandidateSet::from_points(1, &[vec![1.2]]).is_err());
        let c = CandidateSet::from_points(2, &[vec![0.2, 0.1], vec![0.3, 0.3]]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.points_per_axis(), None);
    }
}
