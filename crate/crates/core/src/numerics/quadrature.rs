//! Globally adaptive Gauss–Kronrod (7/15) integration on finite intervals.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_segments: usize,
}

impl<T: Real> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-9),
            rel_tol: lit(1e-12),
            max_segments: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error: T,
    pub segments: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half: T = (b - a) * lit(0.5);
    let centre: T = (a + b) * lit(0.5);
    let fc = f(centre);
    let mut kronrod = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * lit(x);
        let pair = f(centre - dx) + f(centre + dx);
        kronrod = kronrod + pair * lit(w);
        if j % 2 == 1 {
            gauss = gauss + pair * lit(WG[j / 2]);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` (finite), bisecting the segment with the
/// largest error estimate until the total estimate meets the tolerance.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, opts: &QuadratureOptions<T>) -> Result<QuadratureResult<T>> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// As [`integrate`], over consecutive pairs of the sorted `points`; placing
/// breaks at kinks or steep transitions of `f` speeds convergence.
pub fn integrate_with_breaks<T: Real, F: Fn(T) -> T>(
    f: F,
    points: &[T],
    opts: &QuadratureOptions<T>,
) -> Result<QuadratureResult<T>> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("quadrature limits must be finite"));
    }
    let mut segments: Vec<Segment<T>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();
    if segments.is_empty() {
        return Ok(QuadratureResult {
            value: T::zero(),
            error: T::zero(),
            segments: 0,
        });
    }
    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadratureResult {
                value,
                error,
                segments: segments.len(),
            });
        }
        if segments.len() >= opts.max_segments {
            return Err(Error::Numerical(format!(
                "quadrature did not converge: error {error} after {} segments",
                segments.len()
            )));
        }
        let (worst, _) =
            segments.iter().enumerate().fold(
                (0, T::neg_infinity()),
                |acc, (i, s)| {
                    if s.error > acc.1 {
                        (i, s.error)
                    } else {
                        acc
                    }
                },
            );
        let seg = segments.swap_remove(worst);
        let mid = (seg.a + seg.b) * lit(0.5);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Numerical(
                "quadrature segment cannot be subdivided further".into(),
            ));
        }
        segments.push(kronrod15(&f, seg.a, mid));
        segments.push(kronrod15(&f, mid, seg.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        // K15 integrates degree 22 exactly, G7 degree 13.
        let seg = kronrod15(&|x: f64| x.powi(22), -1.0, 1.0);
        assert_relative_eq!(seg.value, 2.0 / 23.0, max_relative = 1e-14);
        let seg = kronrod15(&|x: f64| x.powi(12) + x.powi(3), 0.0, 1.0);
        assert_relative_eq!(seg.value, 1.0 / 13.0 + 0.25, max_relative = 1e-14);
        assert!(seg.error < 1e-14);
    }

    #[test]
    fn adaptive_resolves_gaussian_and_kink() {
        let opts = QuadratureOptions::default();
        let r = integrate(|x: f64| (-x * x / 2.0).exp(), -12.0, 12.0, &opts).unwrap();
        assert_relative_eq!(r.value, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-12);
        let r = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &opts).unwrap();
        assert_relative_eq!(r.value, 4.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn breaks_handle_near_step() {
        let opts = QuadratureOptions::default();
        let f = |x: f64| 1.0 / (1.0 + (-(x - 0.3) / 1e-6).exp());
        let r = integrate_with_breaks(f, &[0.0, 0.3, 1.0], &opts).unwrap();
        assert_relative_eq!(r.value, 0.7, epsilon = 1e-9);
    }

    #[test]
    fn rejects_infinite_limits() {
        let opts = QuadratureOptions::default();
        assert!(integrate(|x: f64| x, 0.0, f64::INFINITY, &opts).is_err());
    }
}
