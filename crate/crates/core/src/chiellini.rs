//! Chiellini-integrable damping for `v'' + g(v) v' + h(v) = 0`.
//!
//! Writing `v' = z(v)` turns the equation into an Abel equation of the second
//! kind, `z dz/dv + g z + h = 0`, and `z = 1/y` into one of the first kind,
//! `dy/dv = g y^2 + h y^3`. The latter is integrable when
//! `d/dv (h/g) = p g` for a constant `p`. With `p = -2` the damped equation
//! has the same solutions as `v'' + 2 h(v) = 0` along `v' = h/g`, and the
//! damping follows from the first integral of that equation alone:
//! `g = h / sqrt(c1 - 4 int h dv)`.
//!
//! This module works with any restoring function supplied through
//! [`HField`]; [`CosmologicalH`] is the `kappa gb^2 v + k v^-3` instance.

use std::sync::Arc;

use crate::closed_form::damped_v;
use crate::error::{BoundaryReason, Error, Result};
use crate::ode::{integrate_through, EquationId, IntegratorSettings};
use crate::params::{validate_config, EPConfig};
use crate::quad::{integrate_endpoint_singular, QuadError};
use crate::roots::{brent, RootError};

/// A restoring function with its derivative and an antiderivative whose
/// integration constant is fixed by the implementation.
pub trait HField: Send + Sync {
    fn h(&self, v: f64) -> f64;
    fn dh(&self, v: f64) -> f64;
    fn antiderivative(&self, v: f64) -> f64;

    /// `c1 - 4 int h dv`, the square of `v'` on the first integral.
    fn radicand(&self, c1: f64, v: f64) -> f64 {
        c1 - 4.0 * self.antiderivative(v)
    }
}

/// `h(v) = kappa gb^2 v + k v^-3` with `int h dv = kappa gb^2 v^2/2 - k v^-2/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosmologicalH {
    kappa_gb2: f64,
    k: f64,
}

impl CosmologicalH {
    pub fn new(cfg: &EPConfig) -> Self {
        CosmologicalH { kappa_gb2: cfg.kappa() * cfg.gamma_bar().powi(2), k: cfg.k }
    }
}

impl HField for CosmologicalH {
    fn h(&self, v: f64) -> f64 {
        if self.k == 0.0 {
            self.kappa_gb2 * v
        } else {
            self.kappa_gb2 * v + self.k / (v * v * v)
        }
    }

    fn dh(&self, v: f64) -> f64 {
        if self.k == 0.0 {
            self.kappa_gb2
        } else {
            self.kappa_gb2 - 3.0 * self.k / (v * v * v * v)
        }
    }

    fn antiderivative(&self, v: f64) -> f64 {
        if self.k == 0.0 {
            0.5 * self.kappa_gb2 * v * v
        } else {
            0.5 * self.kappa_gb2 * v * v - 0.5 * self.k / (v * v)
        }
    }
}

/// An [`HField`] assembled from three closures.
#[derive(Clone)]
pub struct FnHField<H, D, A> {
    h: H,
    dh: D,
    antiderivative: A,
}

impl<H, D, A> FnHField<H, D, A>
where
    H: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
    A: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(h: H, dh: D, antiderivative: A) -> Self {
        FnHField { h, dh, antiderivative }
    }
}

impl<H, D, A> HField for FnHField<H, D, A>
where
    H: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
    A: Fn(f64) -> f64 + Send + Sync,
{
    fn h(&self, v: f64) -> f64 {
        (self.h)(v)
    }

    fn dh(&self, v: f64) -> f64 {
        (self.dh)(v)
    }

    fn antiderivative(&self, v: f64) -> f64 {
        (self.antiderivative)(v)
    }
}

/// Largest relative mismatch of `dh` against a central difference of `h`,
/// and of a central difference of the antiderivative against `h`.
pub fn hfield_consistency(h: &dyn HField, grid: &[f64]) -> (f64, f64) {
    let mut worst_dh = 0.0f64;
    let mut worst_int = 0.0f64;
    for &v in grid {
        let step = 1e-5 * v.abs().max(1.0);
        let fd_h = (h.h(v + step) - h.h(v - step)) / (2.0 * step);
        let fd_int = (h.antiderivative(v + step) - h.antiderivative(v - step)) / (2.0 * step);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        worst_dh = worst_dh.max(rel(fd_h, h.dh(v)));
        worst_int = worst_int.max(rel(fd_int, h.h(v)));
    }
    (worst_dh, worst_int)
}

#[derive(Clone)]
enum DampingKind {
    /// `scale * h / sqrt(c1 - 4 int h dv)`.
    FromH { h: Arc<dyn HField>, c1: f64, scale: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A damping coefficient `g(v)` together with its real domain.
#[derive(Clone)]
pub struct DampingField {
    kind: DampingKind,
}

impl std::fmt::Debug for DampingField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            DampingKind::FromH { c1, scale, .. } => {
                f.debug_struct("DampingField").field("c1", c1).field("scale", scale).finish()
            }
            DampingKind::Custom(_) => f.write_str("DampingField(custom)"),
        }
    }
}

impl DampingField {
    /// An arbitrary damping, real for every `v` where it is finite.
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(g: F) -> Self {
        DampingField { kind: DampingKind::Custom(Arc::new(g)) }
    }

    /// The first-integral constant, for fields built by [`damping_from_h`].
    pub fn c1(&self) -> Option<f64> {
        match &self.kind {
            DampingKind::FromH { c1, .. } => Some(*c1),
            DampingKind::Custom(_) => None,
        }
    }

    /// `c1 - 4 int h dv` at `v`, for fields built from h.
    pub fn radicand(&self, v: f64) -> Option<f64> {
        match &self.kind {
            DampingKind::FromH { h, c1, .. } => Some(h.radicand(*c1, v)),
            DampingKind::Custom(_) => None,
        }
    }

    pub fn in_domain(&self, v: f64) -> bool {
        self.value(v).is_some()
    }

    /// `g(v)`, or `None` outside the real domain.
    pub fn value(&self, v: f64) -> Option<f64> {
        let g = match &self.kind {
            DampingKind::FromH { h, c1, scale } => {
                let r = h.radicand(*c1, v);
                if !(r > 0.0) {
                    return None;
                }
                scale * h.h(v) / r.sqrt()
            }
            DampingKind::Custom(g) => g(v),
        };
        g.is_finite().then_some(g)
    }

    /// `h/g` at `v`, continued through points where both vanish.
    fn ratio(&self, h: &dyn HField, v: f64) -> Option<f64> {
        let g = self.value(v)?;
        if g != 0.0 {
            return Some(h.h(v) / g);
        }
        match &self.kind {
            DampingKind::FromH { h: own, c1, scale } => Some(own.radicand(*c1, v).sqrt() / scale),
            DampingKind::Custom(_) => None,
        }
    }

    /// The same field multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DampingField {
        let kind = match &self.kind {
            DampingKind::FromH { h, c1, scale } => DampingKind::FromH { h: h.clone(), c1: *c1, scale: scale * factor },
            DampingKind::Custom(g) => {
                let g = g.clone();
                DampingKind::Custom(Arc::new(move |v| factor * g(v)))
            }
        };
        DampingField { kind }
    }
}

/// Build the Chiellini damping `g = h / sqrt(c1 - 4 int h dv)`.
///
/// `probe` is a set of v values; at least one must lie inside the real
/// domain, otherwise the result is [`Error::EmptyDomain`].
pub fn damping_from_h<H: HField + 'static>(h: H, c1: f64, probe: &[f64]) -> Result<DampingField> {
    if probe.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !probe.iter().any(|&v| h.radicand(c1, v) > 0.0) {
        return Err(Error::EmptyDomain);
    }
    Ok(DampingField { kind: DampingKind::FromH { h: Arc::new(h), c1, scale: 1.0 } })
}

/// The points of `candidates` where the damping radicand exceeds `margin`.
pub fn domain_points(g: &DampingField, candidates: impl IntoIterator<Item = f64>, margin: f64) -> Vec<f64> {
    candidates
        .into_iter()
        .filter(|&v| match g.radicand(v) {
            Some(r) => r > margin,
            None => g.in_domain(v),
        })
        .collect()
}

/// Central-difference step used by [`check_chiellini`].
pub fn chiellini_step(v: f64) -> f64 {
    1e-4 * v.abs().max(1.0)
}

/// Largest `|d/dv (h/g) - p g|` over `vgrid`, the derivative by the
/// five-point central stencil with step `1e-4 max(1, |v|)`.
pub fn check_chiellini(h: &dyn HField, g: &DampingField, p: f64, vgrid: &[f64]) -> Result<f64> {
    if vgrid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut worst = 0.0f64;
    for &v in vgrid {
        let step = chiellini_step(v);
        let outside = || Error::domain(BoundaryReason::DampingDenominatorZero, v);
        let at = |dv: f64| g.ratio(h, v + dv).ok_or_else(outside);
        let near = at(step)? - at(-step)?;
        let far = at(2.0 * step)? - at(-2.0 * step)?;
        let gv = g.value(v).ok_or_else(outside)?;
        let derivative = (8.0 * near - far) / (12.0 * step);
        worst = worst.max((derivative - p * gv).abs());
    }
    Ok(worst)
}

fn quad_error(e: QuadError, tol: f64) -> Error {
    match e {
        QuadError::NonFinite(at) => Error::domain(BoundaryReason::DampingDenominatorZero, at),
        QuadError::NotConverged(estimate) => Error::QuadratureFailed { estimate, tol },
    }
}

const PATH_SAMPLES: usize = 64;

/// `I_h(v) = int_{v_ref}^{v} dv / sqrt(c1 - 4 int h dv)`.
///
/// The radicand may vanish at either endpoint (turning points); it must be
/// positive in between.
pub fn quadrature_ih(h: &dyn HField, c1: f64, v_ref: f64, v: f64, tol: f64) -> Result<f64> {
    if v == v_ref {
        return Ok(0.0);
    }
    let scale = c1.abs().max(1.0);
    for &end in &[v_ref, v] {
        if h.radicand(c1, end) < -1e-12 * scale {
            return Err(Error::domain(BoundaryReason::DampingDenominatorZero, end));
        }
    }
    for i in 1..PATH_SAMPLES {
        let s = v_ref + (v - v_ref) * i as f64 / PATH_SAMPLES as f64;
        if !(h.radicand(c1, s) > 0.0) {
            return Err(Error::domain(BoundaryReason::DampingDenominatorZero, s));
        }
    }
    integrate_endpoint_singular(
        |s| {
            let r = h.radicand(c1, s);
            if r > 0.0 {
                1.0 / r.sqrt()
            } else {
                f64::NAN
            }
        },
        v_ref,
        v,
        tol,
    )
    .map_err(|e| quad_error(e, tol))
}

/// Locate where the radicand first reaches zero between `inside` (positive
/// radicand) and `outside`. Returns the last point with positive radicand.
fn boundary_between(h: &dyn HField, c1: f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if h.radicand(c1, mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Solve `I_h(v) = target` for `v` on the branch leaving `v_ref` in the
/// direction of `target`'s sign (`v' = +sqrt(radicand)`).
///
/// The result satisfies `|I_h(v) - target| < tol`.
pub fn invert_ih(h: &dyn HField, c1: f64, v_ref: f64, target: f64, tol: f64) -> Result<f64> {
    if target == 0.0 {
        return Ok(v_ref);
    }
    if h.radicand(c1, v_ref) < -1e-12 * c1.abs().max(1.0) {
        return Err(Error::domain(BoundaryReason::DampingDenominatorZero, v_ref));
    }
    let dir = target.signum();
    let quad_tol = 0.01 * tol;
    let mut step = 0.05 * v_ref.abs().max(1e-2);
    let mut inner = v_ref;
    let mut outer = None;
    for _ in 0..200 {
        let next = inner + dir * step;
        // first non-positive radicand on (inner, next]
        let mut hit = None;
        let mut prev = inner;
        for i in 1..=PATH_SAMPLES {
            let s = inner + (next - inner) * i as f64 / PATH_SAMPLES as f64;
            if !(h.radicand(c1, s) > 0.0) {
                hit = Some((prev, s));
                break;
            }
            prev = s;
        }
        if let Some((good, bad)) = hit {
            let edge = boundary_between(h, c1, good, bad);
            let reach = quadrature_ih(h, c1, v_ref, edge, quad_tol)?;
            if reach.abs() + tol < target.abs() {
                return Err(Error::TargetOutOfRange { target, limit: reach });
            }
            outer = Some(edge);
            break;
        }
        let value = quadrature_ih(h, c1, v_ref, next, quad_tol)?;
        if value.abs() >= target.abs() {
            outer = Some(next);
            break;
        }
        inner = next;
        step *= 2.0;
    }
    let outer = outer.ok_or(Error::NoBracket)?;
    let xtol = 4.0 * f64::EPSILON * outer.abs().max(v_ref.abs()).max(1e-300);
    let f = |v: f64| match quadrature_ih(h, c1, v_ref, v, quad_tol) {
        Ok(i) => i - target,
        Err(_) => f64::NAN,
    };
    let f_outer = f(outer);
    if f_outer.abs() < tol {
        return Ok(outer);
    }
    match brent(f, inner, outer, xtol, tol, 200) {
        Ok(v) => Ok(v),
        Err(RootError::NotBracketed) => Err(Error::NoBracket),
        Err(RootError::MaxIterations(v)) => Ok(v),
        Err(RootError::NonFinite(at)) => Err(Error::domain(BoundaryReason::DampingDenominatorZero, at)),
    }
}

/// Slope on the first-integral manifold `v' = h/g = sqrt(c1 - 4 int h dv)`.
pub fn manifold_slope(cfg: &EPConfig, v: f64) -> Result<f64> {
    let r = CosmologicalH::new(cfg).radicand(cfg.c1, v);
    if !(r >= 0.0) {
        return Err(Error::domain(BoundaryReason::DampingDenominatorZero, v));
    }
    Ok(r.sqrt())
}

/// Integrate the damped equation and the undamped `2h` equation from the
/// same state at `eta_span.0` and return their largest deviation at 101
/// equally spaced points of the span.
///
/// The initial value is the closed-form damped solution; the initial slope
/// is the manifold value plus `slope_offset`.
pub fn equivalence_check_with(cfg: &EPConfig, eta_span: (f64, f64), tol: f64, slope_offset: f64) -> Result<f64> {
    let cfg = validate_config(cfg)?;
    let (lo, hi) = eta_span;
    let v0 = damped_v(&cfg, lo)?.value;
    let y0 = [v0, manifold_slope(&cfg, v0)? + slope_offset];
    let settings = IntegratorSettings::with_tolerance(tol);
    let stops: Vec<f64> = (0..=100).map(|i| lo + (hi - lo) * i as f64 / 100.0).collect();
    let damped = integrate_through(EquationId::DampedEP, &cfg, &y0, eta_span, &settings, &stops)?;
    let undamped = integrate_through(EquationId::UndampedScaled, &cfg, &y0, eta_span, &settings, &stops)?;
    let mut worst = 0.0f64;
    let mut compared = 0;
    for &t in &stops {
        if let (Some(a), Some(b)) = (damped.value_at(t), undamped.value_at(t)) {
            worst = worst.max((a - b).abs());
            compared += 1;
        }
    }
    if compared < 2 {
        return Err(Error::domain(damped.window.reason, damped.window.hi));
    }
    Ok(worst)
}

/// [`equivalence_check_with`] starting exactly on the manifold.
pub fn equivalence_check(cfg: &EPConfig, eta_span: (f64, f64), tol: f64) -> Result<f64> {
    equivalence_check_with(cfg, eta_span, tol, 0.0)
}
