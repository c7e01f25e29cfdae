//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.

// nodes and weights are the published 25-digit values
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

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

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadError {
    /// The integrand returned NaN or infinity at this abscissa.
    NonFinite(f64),
    /// Subdivision limit reached with this error estimate.
    NotConverged(f64),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [0.0; 15];
    fv[0] = f(center);
    if !fv[0].is_finite() {
        return Err(QuadError::NonFinite(center));
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(x2));
        }
        fv[1 + 2 * j] = f1;
        fv[2 + 2 * j] = f2;
    }
    let weight = |i: usize| if i == 0 { WGK[7] } else { WGK[(i - 1) / 2] };
    let mut kron = 0.0;
    let mut abs_sum = 0.0;
    for (i, &v) in fv.iter().enumerate() {
        kron += weight(i) * v;
        abs_sum += weight(i) * v.abs();
    }
    let mut gauss = fv[0] * WG[3];
    for j in (1..7).step_by(2) {
        gauss += WG[j / 2] * (fv[1 + 2 * j] + fv[2 + 2 * j]);
    }
    let mean = 0.5 * kron;
    let spread: f64 = fv.iter().enumerate().map(|(i, &v)| weight(i) * (v - mean).abs()).sum();
    let half_abs = half.abs();
    let (abs_value, spread) = (abs_sum * half_abs, spread * half_abs);
    let mut error = ((kron - gauss) * half).abs();
    if spread != 0.0 && error != 0.0 {
        error = spread * (200.0 * error / spread).powf(1.5).min(1.0);
    }
    error = error.max(50.0 * f64::EPSILON * abs_value);
    Ok(Segment { a, b, value: kron * half, error, abs_value })
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`, or to the
/// rounding floor of the integrand when that is larger.
///
/// `a > b` is allowed and flips the sign. Endpoints are never evaluated.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let mut segments = vec![kronrod(&mut f, a, b)?];
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        let floor = 100.0 * f64::EPSILON * segments.iter().map(|s| s.abs_value).sum::<f64>();
        if total_err <= tol.max(floor) {
            break;
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(QuadError::NotConverged(total_err));
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let worst = segments.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            return Err(QuadError::NotConverged(total_err));
        }
        segments.push(kronrod(&mut f, worst.a, mid)?);
        segments.push(kronrod(&mut f, mid, worst.b)?);
    }
    // sum smallest first
    let mut values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    values.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    Ok(values.iter().sum())
}

/// Integrate over `[a, b]` where `f` may have inverse-square-root
/// singularities at either endpoint.
///
/// Uses `x = (a + b)/2 - (b - a)/2 cos(t)`, `t` in `[0, pi]`. The Jacobian
/// `sin t` vanishes like `sqrt((x - a)(b - x))`, which cancels such
/// singularities and leaves a smooth integrand.
pub fn integrate_endpoint_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    integrate(
        |t| {
            let s = t.sin();
            if s == 0.0 {
                return 0.0;
            }
            f(mid - half * t.cos()) * half * s
        },
        0.0,
        PI,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(v, 8.0, epsilon = 1e-13);
        let v = integrate(|x| 3.0 * x * x, 2.0, 0.0, 1e-14).unwrap();
        assert_abs_diff_eq!(v, -8.0, epsilon = 1e-13);
    }

    #[test]
    fn smooth_oscillatory() {
        let v = integrate(f64::sin, 0.0, 20.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0 - 20f64.cos(), epsilon = 1e-11);
    }

    #[test]
    fn inverse_sqrt_endpoints() {
        // int_0^1 dx / sqrt(x (1 - x)) = pi
        let v = integrate_endpoint_singular(|x| 1.0 / (x * (1.0 - x)).sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(v, PI, epsilon = 1e-12);
        // int_0^1 dx / sqrt(1 - x) = 2
        let v = integrate_endpoint_singular(|x| 1.0 / (1.0 - x).sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn non_finite_reported() {
        let r = integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(QuadError::NonFinite(_))));
    }
}
