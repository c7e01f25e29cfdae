//! Exact evaluators for every closed-form solution family, each returning
//! the value together with exact first and second conformal-time
//! derivatives.
//!
//! Conventions used throughout:
//! - `x = eta - eta0` for all three curvatures (including the flat damped
//!   solution);
//! - square roots take the nonnegative branch, and a nonpositive radicand is
//!   a [`BoundaryReason::SqrtArgumentZero`] domain error;
//! - `x^(1/gamma_bar)` with `x > 0` is `exp(ln x / gamma_bar)`; a negative base
//!   is accepted only when `1/gamma_bar` is an integer.

use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul};

use crate::error::{BoundaryReason, Error, Result};
use crate::ode::EquationId;
use crate::params::{validate_config, Curvature, EPConfig, Fluid};
use crate::quad;

/// A value with its first and second derivatives in conformal time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet { value, d1, d2 }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Square root on the nonnegative branch.
    pub fn sqrt(self, at: f64) -> Result<Jet> {
        if !(self.value > 0.0) {
            return Err(Error::domain(BoundaryReason::SqrtArgumentZero, at));
        }
        let v = self.value.sqrt();
        let d1 = self.d1 / (2.0 * v);
        let d2 = (0.5 * self.d2 - d1 * d1) / v;
        Ok(Jet::new(v, d1, d2))
    }

    /// `self^p`, real-valued. Zero is always rejected; negative values only
    /// for integer `p`.
    pub fn powf(self, p: f64, at: f64) -> Result<Jet> {
        let u = self.value;
        if u == 0.0 || !u.is_finite() {
            return Err(Error::domain(BoundaryReason::SolutionZero, at));
        }
        let integer = (p - p.round()).abs() < 1e-12;
        let v = if integer {
            u.powi(p.round() as i32)
        } else if u > 0.0 {
            (p * u.ln()).exp()
        } else {
            return Err(Error::domain(BoundaryReason::SqrtArgumentZero, at));
        };
        let over_u = v / u;
        let d1 = p * over_u * self.d1;
        let d2 = p * (p - 1.0) * over_u / u * self.d1 * self.d1 + p * over_u * self.d2;
        Ok(Jet::new(v, d1, d2))
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;

    fn mul(self, s: f64) -> Jet {
        Jet::new(self.value * s, self.d1 * s, self.d2 * s)
    }
}

impl Add for Jet {
    type Output = Jet;

    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

/// `sin(w x)`, `cos(w x)`, `sinh(w x)`, `cosh(w x)` as jets in `x`.
fn sin_jet(w: f64, x: f64) -> Jet {
    let (s, c) = (w * x).sin_cos();
    Jet::new(s, w * c, -w * w * s)
}

fn cos_jet(w: f64, x: f64) -> Jet {
    let (s, c) = (w * x).sin_cos();
    Jet::new(c, -w * s, -w * w * c)
}

fn sinh_jet(w: f64, x: f64) -> Jet {
    let (s, c) = ((w * x).sinh(), (w * x).cosh());
    Jet::new(s, w * c, w * w * s)
}

fn cosh_jet(w: f64, x: f64) -> Jet {
    let (s, c) = ((w * x).sinh(), (w * x).cosh());
    Jet::new(c, w * s, w * w * c)
}

/// Which of the two independent solutions of `u'' + kappa gamma_bar^2 u = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `sinh`, `x`, `cos`: the modes whose 1/gamma_bar power is the standard scale factor.
    First,
    /// `cosh`, `1`, `sin`.
    Second,
}

/// Linear oscillator modes.
pub fn u_mode(curvature: Curvature, fluid: Fluid, eta: f64, eta0: f64, branch: Branch) -> Jet {
    let gb = fluid.gamma_bar();
    let x = eta - eta0;
    match (curvature, branch) {
        (Curvature::Open, Branch::First) => sinh_jet(gb, x),
        (Curvature::Open, Branch::Second) => cosh_jet(gb, x),
        (Curvature::Flat, Branch::First) => Jet::new(x, 1.0, 0.0),
        (Curvature::Flat, Branch::Second) => Jet::new(1.0, 0.0, 0.0),
        (Curvature::Closed, Branch::First) => cos_jet(gb, x),
        (Curvature::Closed, Branch::Second) => sin_jet(gb, x),
    }
}

/// `u1 u2' - u1' u2` for the [`u_mode`] pair. It is `-gamma_bar` (open),
/// `-1` (flat) and `gamma_bar` (closed).
pub fn wronskian(curvature: Curvature, fluid: Fluid) -> f64 {
    match curvature {
        Curvature::Open => -fluid.gamma_bar(),
        Curvature::Flat => -1.0,
        Curvature::Closed => fluid.gamma_bar(),
    }
}

/// Standard unit-amplitude scale factor `a = u^(1/gamma_bar)`.
pub fn standard_scale_factor(curvature: Curvature, fluid: Fluid, eta: f64, eta0: f64) -> Result<Jet> {
    u_mode(curvature, fluid, eta, eta0, Branch::First).powf(fluid.exponent(), eta)
}

fn require_k_nonpositive(cfg: &EPConfig) -> Result<()> {
    if cfg.k > 0.0 {
        return Err(Error::KPositive { k: cfg.k });
    }
    Ok(())
}

/// Particular solutions of the undamped Ermakov-Pinney equation
/// `v'' + kappa gamma_bar^2 v + k v^-3 = 0`.
pub fn pinney_v(cfg: &EPConfig, eta: f64) -> Result<Jet> {
    require_k_nonpositive(cfg)?;
    let gb = cfg.gamma_bar();
    let x = cfg.offset(eta);
    let k = cfg.k;
    let radicand = match cfg.curvature {
        Curvature::Open => {
            // -1 + (1 - k/gb^2) cosh^2(gb x)
            // written as sinh^2 - (k/gb^2) cosh^2 to avoid cancellation near x = 0
            let b = 1.0 - k / (gb * gb);
            let (sh1, ch) = ((gb * x).sinh(), (gb * x).cosh());
            let sh = (2.0 * gb * x).sinh();
            Jet::new(sh1 * sh1 - k / (gb * gb) * ch * ch, b * gb * sh, 2.0 * b * gb * gb * (2.0 * gb * x).cosh())
        }
        Curvature::Flat => Jet::new(x * x - k, 2.0 * x, 2.0),
        Curvature::Closed => {
            // 1 - (1 + k/gb^2) sin^2(gb x)
            let a = 1.0 + k / (gb * gb);
            let (s, c) = (gb * x).sin_cos();
            let (s2, c2) = (2.0 * gb * x).sin_cos();
            Jet::new(c * c - k / (gb * gb) * s * s, -a * gb * s2, -2.0 * a * gb * gb * c2)
        }
    };
    radicand.sqrt(eta)
}

/// `sqrt(u1^2 - k u2^2 / W^2)`.
pub fn pinney_superpose(u1: f64, u2: f64, w: f64, k: f64) -> Result<f64> {
    if w == 0.0 {
        return Err(Error::WronskianZero);
    }
    let radicand = u1 * u1 - k * u2 * u2 / (w * w);
    if !(radicand > 0.0) {
        return Err(Error::domain(BoundaryReason::SqrtArgumentZero, radicand));
    }
    Ok(radicand.sqrt())
}

/// Default absolute tolerance for the Milne phase quadrature.
pub const MILNE_QUAD_TOL: f64 = 1e-10;

/// Milne phase `sqrt(-k) * integral_{eta0}^{eta} d eta / v^2`.
pub fn milne_phase(cfg: &EPConfig, eta: f64, quad_tol: f64) -> Result<f64> {
    if !(cfg.k < 0.0) {
        return Err(Error::InvalidInput("Milne reconstruction needs k < 0".into()));
    }
    let integral = quad::integrate(
        |t| match pinney_v(cfg, t) {
            Ok(v) => 1.0 / (v.value * v.value),
            Err(_) => f64::NAN,
        },
        cfg.eta0,
        eta,
        quad_tol,
    )
    .map_err(|e| match e {
        quad::QuadError::NonFinite(at) => Error::domain(BoundaryReason::SolutionZero, at),
        quad::QuadError::NotConverged(estimate) => Error::QuadratureFailed { estimate, tol: quad_tol },
    })?;
    Ok((-cfg.k).sqrt() * integral)
}

/// Linear mode rebuilt from the EP solution: `v cos(milne_phase + phi)`.
pub fn milne_reconstruct(cfg: &EPConfig, eta: f64, phi: f64, quad_tol: f64) -> Result<f64> {
    let v = pinney_v(cfg, eta)?;
    let phase = milne_phase(cfg, eta, quad_tol)?;
    Ok(v.value * (phase + phi).cos())
}

/// The `k -> 0` limit of [`milne_reconstruct`] for phase `phi`.
///
/// With the phase integral anchored at `eta0` the limit is a multiple of the
/// first linear mode: `cos(phi) cos(gb x)` (closed), `-sin(phi) x` (flat),
/// `-sin(phi) sinh(|gb| x)` (open). At finite `k` the reconstruction differs
/// from it by a term proportional to `sqrt(-k)`.
pub fn milne_limit(curvature: Curvature, fluid: Fluid, eta: f64, eta0: f64, phi: f64) -> f64 {
    let gb = fluid.gamma_bar();
    let x = eta - eta0;
    match curvature {
        Curvature::Closed => phi.cos() * (gb * x).cos(),
        Curvature::Flat => -phi.sin() * x,
        Curvature::Open => -phi.sin() * (gb.abs() * x).sinh(),
    }
}

/// `2 sqrt(2) gamma_bar`, the angular frequency of the damped family.
pub fn damped_frequency(fluid: Fluid) -> f64 {
    2.0 * SQRT_2 * fluid.gamma_bar()
}

/// General solutions of the Chiellini-damped EP equation (equivalently of
/// `v'' + 2 h(v) = 0`).
pub fn damped_v(cfg: &EPConfig, eta: f64) -> Result<Jet> {
    let cfg = validate_config(cfg)?;
    let gb = cfg.gamma_bar();
    let x = cfg.offset(eta);
    let c1 = cfg.c1;
    let w = damped_frequency(cfg.fluid);
    match cfg.curvature {
        Curvature::Open => {
            let e = (-cfg.delta_minus()).sqrt();
            let inner = cosh_jet(w, x) * e + Jet::new(-c1, 0.0, 0.0);
            Ok(inner.sqrt(eta)? * (1.0 / (2.0 * gb.abs())))
        }
        Curvature::Flat => Jet::new(c1 * x * x - 2.0 * cfg.k / c1, 2.0 * c1 * x, 2.0 * c1).sqrt(eta),
        Curvature::Closed => {
            let d = cfg.delta_plus().sqrt();
            let inner = sin_jet(w, x) * d + Jet::new(c1, 0.0, 0.0);
            Ok(inner.sqrt(eta)? * (1.0 / (2.0 * gb.abs())))
        }
    }
}

fn require_reduced(cfg: &EPConfig) -> Result<()> {
    if cfg.k != 0.0 {
        return Err(Error::InvalidInput(format!("reduced family needs k = 0, got {}", cfg.k)));
    }
    require_c1_positive(cfg.c1)
}

fn require_c1_positive(c1: f64) -> Result<()> {
    if c1 == 0.0 {
        return Err(Error::C1Zero);
    }
    if !(c1 > 0.0) {
        return Err(Error::C1NonPositive { c1 });
    }
    Ok(())
}

/// Solutions of the reduced (`k = 0`) damped equation.
pub fn reduced_u(cfg: &EPConfig, eta: f64) -> Result<Jet> {
    require_reduced(cfg)?;
    let gb = cfg.gamma_bar();
    let x = cfg.offset(eta);
    let sc1 = cfg.c1.sqrt();
    let w = damped_frequency(cfg.fluid);
    let amp = sc1 / (2.0 * gb.abs());
    match cfg.curvature {
        Curvature::Open => Ok((cosh_jet(w, x) + Jet::new(-1.0, 0.0, 0.0)).sqrt(eta)? * amp),
        Curvature::Flat => Ok(Jet::new(sc1 * x, sc1, 0.0)),
        Curvature::Closed => Ok((sin_jet(w, x) + Jet::new(1.0, 0.0, 0.0)).sqrt(eta)? * amp),
    }
}

/// The harmonic solutions of the closed reduced equation:
/// `(sqrt(c1)/(sqrt 2 gb)) (sin, cos)(sqrt 2 gb x)`.
pub fn harmonic_pair(fluid: Fluid, c1: f64, eta: f64, eta0: f64) -> Result<(Jet, Jet)> {
    require_c1_positive(c1)?;
    let gb = fluid.gamma_bar();
    let amp = c1.sqrt() / (SQRT_2 * gb);
    let w = SQRT_2 * gb;
    let x = eta - eta0;
    Ok((sin_jet(w, x) * amp, cos_jet(w, x) * amp))
}

/// Amplitude factor `sqrt(c1)/(sqrt 2 |gb|)` of the non-flat Chiellini
/// modes (`sqrt(c1)` for the flat one), before taking the 1/gb power.
pub fn chiellini_amplitude(curvature: Curvature, fluid: Fluid, c1: f64) -> f64 {
    match curvature {
        Curvature::Flat => c1.sqrt(),
        _ => c1.sqrt() / (SQRT_2 * fluid.gamma_bar().abs()),
    }
}

/// The mode whose 1/gb power is the Chiellini scale factor: `A sinh(theta)`,
/// `sqrt(c1) x`, `A (sin theta + cos theta)` with `theta = sqrt 2 gb x`.
pub fn chiellini_base(cfg: &EPConfig, eta: f64) -> Result<Jet> {
    require_reduced(cfg)?;
    let x = cfg.offset(eta);
    let amp = chiellini_amplitude(cfg.curvature, cfg.fluid, cfg.c1);
    let w = SQRT_2 * cfg.gamma_bar();
    Ok(match cfg.curvature {
        Curvature::Open => sinh_jet(w, x) * amp,
        Curvature::Flat => Jet::new(x, 1.0, 0.0) * amp,
        Curvature::Closed => (sin_jet(w, x) + cos_jet(w, x)) * amp,
    })
}

/// Scale factors of the Chiellini barotropic universes.
pub fn chiellini_scale_factor(cfg: &EPConfig, eta: f64) -> Result<Jet> {
    chiellini_base(cfg, eta)?.powf(cfg.fluid.exponent(), eta)
}

/// `h(v) = kappa gb^2 v + k v^-3` with its first two v-derivatives.
pub(crate) fn cosmological_h(cfg: &EPConfig, v: f64) -> (f64, f64, f64) {
    let kg2 = cfg.kappa() * cfg.gamma_bar().powi(2);
    let k = cfg.k;
    if k == 0.0 {
        return (kg2 * v, kg2, 0.0);
    }
    let inv = 1.0 / v;
    let inv3 = inv * inv * inv;
    (kg2 * v + k * inv3, kg2 - 3.0 * k * inv3 * inv, 12.0 * k * inv3 * inv * inv)
}

/// `c1 - 4 int h dv = c1 - 2 kappa gb^2 v^2 + 2 k v^-2`.
pub(crate) fn damping_radicand(cfg: &EPConfig, v: f64) -> f64 {
    let kg2 = cfg.kappa() * cfg.gamma_bar().powi(2);
    let mut r = cfg.c1 - 2.0 * kg2 * v * v;
    if cfg.k != 0.0 {
        r += 2.0 * cfg.k / (v * v);
    }
    r
}

/// The Chiellini damping `g(v) = h(v) / sqrt(c1 - 4 int h dv)`.
pub fn chiellini_damping(cfg: &EPConfig, v: f64) -> Result<f64> {
    if cfg.k != 0.0 && v == 0.0 {
        return Err(Error::domain(BoundaryReason::SolutionZero, v));
    }
    let r = damping_radicand(cfg, v);
    if !(r > 0.0) {
        return Err(Error::domain(BoundaryReason::DampingDenominatorZero, v));
    }
    Ok(cosmological_h(cfg, v).0 / r.sqrt())
}

/// The damping evaluated along the damped solution (the reduced mode when
/// `k = 0`), as a function of conformal time.
pub fn damping_along(cfg: &EPConfig, eta: f64) -> Result<Jet> {
    let v = if cfg.k == 0.0 { reduced_u(cfg, eta)? } else { damped_v(cfg, eta)? };
    if cfg.k != 0.0 && v.value == 0.0 {
        return Err(Error::domain(BoundaryReason::SolutionZero, eta));
    }
    let r = damping_radicand(cfg, v.value);
    if !(r > 0.0) {
        return Err(Error::domain(BoundaryReason::DampingDenominatorZero, eta));
    }
    let (h, dh, d2h) = cosmological_h(cfg, v.value);
    let sr = r.sqrt();
    let r32 = r * sr;
    let r52 = r32 * r;
    let g = h / sr;
    let g_v = dh / sr + 2.0 * h * h / r32;
    let g_vv = d2h / sr + 6.0 * h * dh / r32 + 12.0 * h * h * h / r52;
    Ok(Jet::new(g, g_v * v.d1, g_vv * v.d1 * v.d1 + g_v * v.d2))
}

/// A window `[lo, lo + len]` on which [`damped_v`] is strictly increasing,
/// centred on the steepest point of a rising branch. This is the branch on
/// which the damped and undamped equations agree.
pub fn increasing_branch_window(cfg: &EPConfig, len: f64) -> Result<(f64, f64)> {
    let cfg = validate_config(cfg)?;
    let w = damped_frequency(cfg.fluid);
    let sign = w.signum();
    let centre = match cfg.curvature {
        Curvature::Closed => {
            // rising where w cos(w x) > 0; the branch spans pi / |w| in x
            let branch = std::f64::consts::PI / w.abs();
            if len >= branch {
                return Err(Error::InvalidInput(format!(
                    "window {len} longer than the rising branch {branch}"
                )));
            }
            if sign > 0.0 { 0.0 } else { std::f64::consts::PI / w }
        }
        Curvature::Open => {
            // rising where w sinh(w x) > 0, i.e. x > 0; stay clear of the turning point at 0
            0.2 + 0.5 * len
        }
        Curvature::Flat => {
            // v v' = c1 x
            cfg.c1.signum() * (0.2 + 0.5 * len)
        }
    };
    let lo = cfg.eta0 + centre - 0.5 * len;
    Ok((lo, lo + len))
}

/// Closed-form solution families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    /// Standard scale factor `a(eta)`.
    StandardScale,
    /// First linear mode `u`.
    LinearU,
    /// Particular EP solution `v(eta; k)`.
    PinneyV,
    /// Damped EP solution `v(eta; c1, k)`.
    DampedV,
    /// Reduced damped mode `u(eta; c1)`.
    ReducedU,
    /// Chiellini scale factor.
    ChielliniScale,
    /// First (sine) member of the closed harmonic pair.
    HarmonicPair,
}

impl SolutionKind {
    pub const ALL: [SolutionKind; 7] = [
        SolutionKind::StandardScale,
        SolutionKind::LinearU,
        SolutionKind::PinneyV,
        SolutionKind::DampedV,
        SolutionKind::ReducedU,
        SolutionKind::ChielliniScale,
        SolutionKind::HarmonicPair,
    ];

    pub fn evaluate(self, cfg: &EPConfig, eta: f64) -> Result<Jet> {
        match self {
            SolutionKind::StandardScale => standard_scale_factor(cfg.curvature, cfg.fluid, eta, cfg.eta0),
            SolutionKind::LinearU => Ok(u_mode(cfg.curvature, cfg.fluid, eta, cfg.eta0, Branch::First)),
            SolutionKind::PinneyV => pinney_v(cfg, eta),
            SolutionKind::DampedV => damped_v(cfg, eta),
            SolutionKind::ReducedU => reduced_u(cfg, eta),
            SolutionKind::ChielliniScale => chiellini_scale_factor(cfg, eta),
            SolutionKind::HarmonicPair => {
                if cfg.curvature != Curvature::Closed {
                    return Err(Error::InvalidInput("harmonic pair exists only for kappa = +1".into()));
                }
                Ok(harmonic_pair(cfg.fluid, cfg.c1, eta, cfg.eta0)?.0)
            }
        }
    }

    /// The ordinary differential equation this family solves exactly.
    ///
    /// Chiellini scale factors solve the scale-factor equation with doubled
    /// curvature term; the damped families solve the undamped equation with
    /// `2h`, and the damped one only on rising branches.
    pub fn governing_equation(self) -> EquationId {
        match self {
            SolutionKind::StandardScale => EquationId::ScaleFactor,
            SolutionKind::LinearU => EquationId::LinearU,
            SolutionKind::PinneyV => EquationId::ErmakovPinney,
            SolutionKind::DampedV => EquationId::UndampedScaled,
            SolutionKind::ReducedU => EquationId::UndampedScaled,
            SolutionKind::ChielliniScale => EquationId::ChielliniScaleFactor,
            SolutionKind::HarmonicPair => EquationId::ReducedDamped,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn rad() -> Fluid {
        Fluid::radiation()
    }

    #[test]
    fn u_mode_examples() {
        let u = u_mode(Curvature::Flat, Fluid::dust(), 2.0, 0.0, Branch::First);
        assert_eq!((u.value, u.d1), (2.0, 1.0));
        let u = u_mode(Curvature::Closed, rad(), 0.0, 0.0, Branch::First);
        assert_eq!((u.value, u.d1), (1.0, 0.0));
        let u = u_mode(Curvature::Open, Fluid::dust(), 2.0, 0.0, Branch::First);
        assert_abs_diff_eq!(u.value, 1f64.sinh(), epsilon = 1e-15);
        assert_abs_diff_eq!(u.value, 1.175_201_193_643_801_4, epsilon = 1e-12);
        assert_abs_diff_eq!(u.d1, 0.771_540_317_408_621_3, epsilon = 1e-12);
    }

    #[test]
    fn wronskian_matches_modes() {
        for c in Curvature::ALL {
            for f in [Fluid::dust(), rad(), Fluid::vacuum()] {
                for &x in &[-0.7, 0.0, 0.3, 1.9] {
                    let u1 = u_mode(c, f, x, 0.0, Branch::First);
                    let u2 = u_mode(c, f, x, 0.0, Branch::Second);
                    let w = u1.value * u2.d1 - u1.d1 * u2.value;
                    assert_abs_diff_eq!(w, wronskian(c, f), epsilon = 1e-12 * (1.0 + u1.value.abs() * u2.value.abs()));
                }
            }
        }
    }

    #[test]
    fn standard_scale_examples() {
        let a = standard_scale_factor(Curvature::Flat, rad(), 2.0, 0.0).unwrap();
        assert_eq!(a.value, 2.0);
        let a = standard_scale_factor(Curvature::Flat, Fluid::dust(), 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(a.value, 4.0, epsilon = 1e-14);
        let a = standard_scale_factor(Curvature::Closed, rad(), FRAC_PI_3, 0.0).unwrap();
        assert_abs_diff_eq!(a.value, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn fractional_power_of_negative_base_is_domain_error() {
        let f = Fluid::from_gamma_bar(1.5).unwrap();
        let e = standard_scale_factor(Curvature::Flat, f, -1.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::Domain { reason: BoundaryReason::SqrtArgumentZero, .. }));
        let e = standard_scale_factor(Curvature::Flat, rad(), 0.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::Domain { reason: BoundaryReason::SolutionZero, .. }));
        // integer exponent: negative base stays real
        let a = standard_scale_factor(Curvature::Flat, Fluid::vacuum(), -2.0, 0.0).unwrap();
        assert_eq!(a.value, -0.5);
    }

    #[test]
    fn pinney_examples() {
        let cfg = EPConfig::new(Curvature::Closed, rad(), -1.0, 0.0, 0.0);
        for &x in &[-2.0, 0.0, 0.4, 3.0] {
            let v = pinney_v(&cfg, x).unwrap();
            assert_abs_diff_eq!(v.value, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.d1, 0.0, epsilon = 1e-15);
        }
        let cfg = EPConfig::new(Curvature::Flat, rad(), -1.0, 0.0, 0.0);
        assert_eq!(pinney_v(&cfg, 0.0).unwrap().value, 1.0);
        let cfg = EPConfig::new(Curvature::Open, rad(), 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(pinney_v(&cfg, 1.0).unwrap().value, 1f64.sinh(), epsilon = 1e-14);
        let cfg = EPConfig::new(Curvature::Open, rad(), 0.5, 0.0, 0.0);
        assert!(matches!(pinney_v(&cfg, 1.0), Err(Error::KPositive { .. })));
    }

    #[test]
    fn superpose_examples() {
        assert_eq!(pinney_superpose(1.0, 0.0, 0.5, -3.0).unwrap(), 1.0);
        assert_eq!(pinney_superpose(0.0, 1.0, 1.0, -1.0).unwrap(), 1.0);
        assert!(matches!(pinney_superpose(1.0, 1.0, 0.0, -1.0), Err(Error::WronskianZero)));
        assert!(pinney_superpose(0.0, 1.0, 1.0, 0.0).is_err());
        for &x in &[0.0f64, 0.5, 1.3, 2.9] {
            let v = pinney_superpose(x.cos(), x.sin(), 1.0, -1.0).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn milne_examples() {
        let cfg = EPConfig::new(Curvature::Flat, rad(), -1e-4, 0.0, 0.0);
        assert_abs_diff_eq!(milne_reconstruct(&cfg, 0.0, FRAC_PI_2, 1e-12).unwrap(), 0.0, epsilon = 1e-15);
        // phase -pi/2 recovers u = x at any k; phase 0 gives sqrt(-k)
        assert_abs_diff_eq!(milne_reconstruct(&cfg, 1.0, -FRAC_PI_2, 1e-12).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(milne_reconstruct(&cfg, 1.0, 0.0, 1e-12).unwrap(), 0.01, epsilon = 1e-9);
        let zero_k = EPConfig::new(Curvature::Flat, rad(), 0.0, 0.0, 0.0);
        assert!(milne_reconstruct(&zero_k, 1.0, 0.0, 1e-10).is_err());
    }

    #[test]
    fn milne_deviation_shrinks_with_k() {
        for c in Curvature::ALL {
            let f = rad();
            let phi = -FRAC_PI_4;
            let mut last = f64::INFINITY;
            for k in [-1e-2, -1e-4, -1e-6] {
                let cfg = EPConfig::new(c, f, k, 0.0, 0.0);
                let dev = (milne_reconstruct(&cfg, 0.5, phi, 1e-12).unwrap()
                    - milne_limit(c, f, 0.5, 0.0, phi))
                .abs();
                assert!(dev < last, "{c}: {dev} !< {last}");
                last = dev;
            }
            assert!(last < 1e-3);
        }
    }

    #[test]
    fn damped_examples() {
        let cfg = EPConfig::new(Curvature::Flat, rad(), -2.0, 4.0, 0.0);
        assert_abs_diff_eq!(damped_v(&cfg, 1.0).unwrap().value, 5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(damped_v(&cfg, 0.0).unwrap().value, 1.0, epsilon = 1e-15);
        let cfg = EPConfig::reduced(Curvature::Closed, rad(), 1.0, 0.0);
        assert_abs_diff_eq!(damped_v(&cfg, 0.0).unwrap().value, 0.5, epsilon = 1e-15);
        let bad = EPConfig::new(Curvature::Closed, rad(), -1.0, 1.0, 0.0);
        assert!(matches!(damped_v(&bad, 0.0), Err(Error::DeltaPlusNonPositive { .. })));
    }

    #[test]
    fn reduced_examples() {
        let cfg = EPConfig::reduced(Curvature::Flat, rad(), 1.0, 0.0);
        assert_eq!(reduced_u(&cfg, 3.0).unwrap().value, 3.0);
        let cfg = EPConfig::reduced(Curvature::Open, Fluid::dust(), 1.0, 0.0);
        let expect = (-1.0 + SQRT_2.cosh()).sqrt();
        assert_abs_diff_eq!(reduced_u(&cfg, 1.0).unwrap().value, expect, epsilon = 1e-14);
        assert_abs_diff_eq!(expect, 1.085_44, epsilon = 1e-5);
        let cfg = EPConfig::reduced(Curvature::Closed, rad(), 2.0, 0.0);
        assert_abs_diff_eq!(reduced_u(&cfg, 0.0).unwrap().value, SQRT_2 / 2.0, epsilon = 1e-15);
        let cfg = EPConfig::reduced(Curvature::Closed, rad(), 0.0, 0.0);
        assert!(matches!(reduced_u(&cfg, 0.0), Err(Error::C1Zero)));
        let cfg = EPConfig::reduced(Curvature::Closed, rad(), -1.0, 0.0);
        assert!(matches!(reduced_u(&cfg, 0.0), Err(Error::C1NonPositive { .. })));
    }

    #[test]
    fn harmonic_examples() {
        let f = Fluid::dust();
        let (u1, u2) = harmonic_pair(f, 3.0, 0.0, 0.0).unwrap();
        assert_eq!(u1.value, 0.0);
        assert_abs_diff_eq!(u2.value, 3f64.sqrt() / (SQRT_2 * 0.5), epsilon = 1e-15);
        let (u1, u2) = harmonic_pair(rad(), 2.0, PI / (2.0 * SQRT_2), 0.0).unwrap();
        assert_abs_diff_eq!(u1.value, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u2.value, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn chiellini_scale_examples() {
        let cfg = EPConfig::reduced(Curvature::Closed, rad(), 1.0, 0.0);
        assert_abs_diff_eq!(chiellini_scale_factor(&cfg, 0.0).unwrap().value, 1.0 / SQRT_2, epsilon = 1e-15);
        let cfg = EPConfig::reduced(Curvature::Open, Fluid::dust(), 1.0 / 16.0, 0.0);
        let a = chiellini_scale_factor(&cfg, 1.0).unwrap().value;
        let expect = 0.125 * (SQRT_2 / 2.0).sinh().powi(2);
        assert_abs_diff_eq!(a, expect, epsilon = 1e-15);
        assert_abs_diff_eq!(a, 0.073636, epsilon = 1e-6);
        for f in [Fluid::dust(), rad(), Fluid::vacuum()] {
            let cfg = EPConfig::reduced(Curvature::Flat, f, 1.0, 0.3);
            for &eta in &[-1.2, 0.9, 2.5] {
                let a = chiellini_scale_factor(&cfg, eta).unwrap();
                let b = standard_scale_factor(Curvature::Flat, f, eta, 0.3).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn reduced_identities() {
        for f in [Fluid::dust(), rad(), Fluid::vacuum()] {
            let gb = f.gamma_bar();
            let c1 = 0.7;
            for i in 0..50 {
                let x = -2.0 + 0.0817 * i as f64;
                let closed = EPConfig::reduced(Curvature::Closed, f, c1, 0.0);
                if let Ok(u) = reduced_u(&closed, x) {
                    let th = 2.0 * SQRT_2 * gb * x;
                    assert_abs_diff_eq!(u.value * u.value, c1 / (4.0 * gb * gb) * (1.0 + th.sin()), epsilon = 1e-12);
                    let a = chiellini_scale_factor(&closed, x).unwrap().value;
                    // the printed closed scale factor carries sin + cos, i.e. sqrt(2) times the reduced mode
                    assert_abs_diff_eq!(a.abs().powf(2.0 * gb), 2.0 * u.value * u.value, epsilon = 1e-12 * (1.0 + u.value * u.value));
                }
                let open = EPConfig::reduced(Curvature::Open, f, c1, 0.0);
                if let Ok(u) = reduced_u(&open, x) {
                    let expect = c1.sqrt() / (SQRT_2 * gb.abs()) * (SQRT_2 * gb * x).sinh().abs();
                    assert_abs_diff_eq!(u.value, expect, epsilon = 1e-12 * (1.0 + expect));
                }
            }
        }
    }

    #[test]
    fn damping_examples() {
        let cfg = EPConfig::reduced(Curvature::Open, rad(), 1.0, 0.0);
        assert_abs_diff_eq!(chiellini_damping(&cfg, 1.0).unwrap(), -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        let cfg = EPConfig::reduced(Curvature::Closed, rad(), 1.0, 0.0);
        assert_eq!(chiellini_damping(&cfg, 0.0).unwrap(), 0.0);
        let cfg = EPConfig::reduced(Curvature::Flat, rad(), 1.0, 0.0);
        assert_eq!(chiellini_damping(&cfg, 2.0).unwrap(), 0.0);
        let cfg = EPConfig::reduced(Curvature::Closed, rad(), 1.0, 0.0);
        assert!(matches!(
            chiellini_damping(&cfg, 1.0),
            Err(Error::Domain { reason: BoundaryReason::DampingDenominatorZero, .. })
        ));
    }

    #[test]
    fn damping_along_derivatives_match_differences() {
        let cases = [
            EPConfig::reduced(Curvature::Open, Fluid::dust(), 1.0 / 16.0, 0.0),
            EPConfig::reduced(Curvature::Closed, rad(), 1.0 / 16.0, 0.0),
            EPConfig::new(Curvature::Open, rad(), -0.2, 1.0, 0.0),
            EPConfig::new(Curvature::Flat, Fluid::vacuum(), -2.0, 4.0, 0.0),
        ];
        for cfg in cases {
            for &eta in &[0.35, 0.6, 1.1] {
                let Ok(g) = damping_along(&cfg, eta) else { continue };
                let at = |s: f64| damping_along(&cfg, eta + s).map(|j| j.value);
                let (Ok(p1), Ok(m1), Ok(p2), Ok(m2)) = (at(1e-5), at(-1e-5), at(1e-4), at(-1e-4)) else {
                    continue;
                };
                let fd1 = (p1 - m1) / 2e-5;
                let fd2 = (p2 - 2.0 * g.value + m2) / 1e-8;
                assert_abs_diff_eq!(g.d1, fd1, epsilon = 1e-6 * (1.0 + g.d1.abs()));
                assert_abs_diff_eq!(g.d2, fd2, epsilon = 1e-4 * (1.0 + g.d2.abs()));
            }
        }
    }

    #[test]
    fn rising_windows_are_rising() {
        for c in Curvature::ALL {
            for f in [Fluid::dust(), rad(), Fluid::vacuum()] {
                let cfg = EPConfig::new(c, f, -1.0 / 32.0, 1.0, 0.4);
                let (lo, hi) = increasing_branch_window(&cfg, 1.0).unwrap();
                for i in 0..=20 {
                    let eta = lo + (hi - lo) * i as f64 / 20.0;
                    assert!(damped_v(&cfg, eta).unwrap().d1 > 0.0, "{c} {f:?} {eta}");
                }
            }
        }
    }
}
