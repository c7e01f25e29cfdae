//! The differential equations of the model as first-order systems, their
//! residuals, and adaptive integration into [`Trajectory`] values.

mod integrator;

pub use integrator::{solve, IntegratorSettings, OdeSystem, Solution};

use std::fmt;

use crate::closed_form::{cosmological_h, damping_radicand};
use crate::error::{BoundaryReason, Error, Result};
use crate::params::{EPConfig, ValidityWindow};
use crate::trajectory::Trajectory;

/// `|H|` above which the Riccati solution is treated as having hit its pole.
pub const RICCATI_BLOWUP: f64 = 1e8;

/// Catalog of equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationId {
    /// `a a'' + (gb - 1) a'^2 + kappa gb a^2 = 0`.
    ScaleFactor,
    /// The scale-factor equation with the curvature term doubled, solved by
    /// the Chiellini scale factors.
    ChielliniScaleFactor,
    /// `H' + gb H^2 + kappa gb = 0` for the conformal Hubble rate.
    Riccati,
    /// `u'' + kappa gb^2 u = 0`.
    LinearU,
    /// `v'' + kappa gb^2 v + k v^-3 = 0`.
    ErmakovPinney,
    /// `v'' + g(v) v' + h(v) = 0` with Chiellini damping g.
    DampedEP,
    /// `v'' + 2 h(v) = 0`.
    UndampedScaled,
    /// The damped equation at `k = 0`.
    ReducedDamped,
}

impl EquationId {
    pub const ALL: [EquationId; 8] = [
        EquationId::ScaleFactor,
        EquationId::ChielliniScaleFactor,
        EquationId::Riccati,
        EquationId::LinearU,
        EquationId::ErmakovPinney,
        EquationId::DampedEP,
        EquationId::UndampedScaled,
        EquationId::ReducedDamped,
    ];

    /// State dimension of the first-order form.
    pub fn dimension(self) -> usize {
        match self {
            EquationId::Riccati => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EquationId::ScaleFactor => "scale-factor",
            EquationId::ChielliniScaleFactor => "chiellini-scale-factor",
            EquationId::Riccati => "riccati",
            EquationId::LinearU => "linear-u",
            EquationId::ErmakovPinney => "ep",
            EquationId::DampedEP => "damped-ep",
            EquationId::UndampedScaled => "undamped-scaled",
            EquationId::ReducedDamped => "reduced-damped",
        }
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A second-order equation from the catalog in first-order form.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrder {
    eq: EquationId,
    cfg: EPConfig,
    /// Sign of the initial value; value guards use `value * orientation`.
    orientation: f64,
}

impl SecondOrder {
    pub fn new(eq: EquationId, cfg: &EPConfig, initial_value: f64) -> Result<Self> {
        if eq == EquationId::Riccati {
            return Err(Error::InvalidInput("the Riccati equation is first order".into()));
        }
        let mut cfg = *cfg;
        if eq == EquationId::ReducedDamped {
            cfg.k = 0.0;
        }
        let orientation = if initial_value < 0.0 { -1.0 } else { 1.0 };
        Ok(SecondOrder { eq, cfg, orientation })
    }

    fn acceleration(&self, v: f64, dv: f64) -> Option<f64> {
        let kappa = self.cfg.kappa();
        let gb = self.cfg.gamma_bar();
        let k = self.cfg.k;
        let acc = match self.eq {
            EquationId::ScaleFactor | EquationId::ChielliniScaleFactor => {
                if v == 0.0 {
                    return None;
                }
                let curv = if self.eq == EquationId::ChielliniScaleFactor { 2.0 * kappa } else { kappa };
                -((gb - 1.0) * dv * dv + curv * gb * v * v) / v
            }
            EquationId::LinearU => -kappa * gb * gb * v,
            EquationId::ErmakovPinney => {
                if v == 0.0 {
                    return None;
                }
                -kappa * gb * gb * v - k / (v * v * v)
            }
            EquationId::UndampedScaled => {
                if k != 0.0 && v == 0.0 {
                    return None;
                }
                -2.0 * cosmological_h(&self.cfg, v).0
            }
            EquationId::DampedEP | EquationId::ReducedDamped => {
                if k != 0.0 && v == 0.0 {
                    return None;
                }
                let r = damping_radicand(&self.cfg, v);
                if !(r > 0.0) {
                    return None;
                }
                let h = cosmological_h(&self.cfg, v).0;
                -h / r.sqrt() * dv - h
            }
            EquationId::Riccati => unreachable!("rejected in SecondOrder::new"),
        };
        Some(acc)
    }
}

impl OdeSystem<2> for SecondOrder {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        Some([y[1], self.acceleration(y[0], y[1])?])
    }

    fn guard(&self, _t: f64, y: &[f64; 2]) -> Option<(f64, BoundaryReason)> {
        let value_guard = || (y[0] * self.orientation, BoundaryReason::SolutionZero);
        match self.eq {
            EquationId::ScaleFactor | EquationId::ChielliniScaleFactor | EquationId::ErmakovPinney => {
                Some(value_guard())
            }
            EquationId::UndampedScaled if self.cfg.k != 0.0 => Some(value_guard()),
            EquationId::DampedEP | EquationId::ReducedDamped => {
                let damping = (damping_radicand(&self.cfg, y[0]), BoundaryReason::DampingDenominatorZero);
                if self.cfg.k != 0.0 {
                    let v = value_guard();
                    Some(if v.0 < damping.0 { v } else { damping })
                } else {
                    Some(damping)
                }
            }
            _ => None,
        }
    }
}

/// `H' = -gb H^2 - kappa gb`, stopped when `|H|` reaches [`RICCATI_BLOWUP`].
#[derive(Debug, Clone, Copy)]
pub struct RiccatiSystem {
    cfg: EPConfig,
}

impl RiccatiSystem {
    pub fn new(cfg: &EPConfig) -> Self {
        RiccatiSystem { cfg: *cfg }
    }
}

impl OdeSystem<1> for RiccatiSystem {
    fn rhs(&self, _t: f64, y: &[f64; 1]) -> Option<[f64; 1]> {
        let gb = self.cfg.gamma_bar();
        Some([-gb * y[0] * y[0] - self.cfg.kappa() * gb])
    }

    fn guard(&self, _t: f64, y: &[f64; 1]) -> Option<(f64, BoundaryReason)> {
        // the pole of H is the zero of the scale factor
        Some((RICCATI_BLOWUP - y[0].abs(), BoundaryReason::SolutionZero))
    }
}

fn window_of<const N: usize>(sol: &Solution<N>) -> Result<ValidityWindow> {
    let lo = sol.ts[0];
    let hi = *sol.ts.last().expect("non-empty");
    if !(hi > lo) {
        return Err(Error::Domain { reason: sol.end, at: lo });
    }
    ValidityWindow::new(lo, hi, sol.end)
}

/// Integrate `eq` from `y0` at `eta_span.0` towards `eta_span.1`.
///
/// The trajectory ends early, with the boundary cause in its window, if a
/// guarded quantity (value, damping radicand, Riccati blow-up) reaches zero.
pub fn integrate(
    eq: EquationId,
    cfg: &EPConfig,
    y0: &[f64],
    eta_span: (f64, f64),
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    integrate_through(eq, cfg, y0, eta_span, settings, &[])
}

/// Like [`integrate`], with every time in `stops` an exact node.
pub fn integrate_through(
    eq: EquationId,
    cfg: &EPConfig,
    y0: &[f64],
    eta_span: (f64, f64),
    settings: &IntegratorSettings,
    stops: &[f64],
) -> Result<Trajectory> {
    if y0.len() != eq.dimension() {
        return Err(Error::InvalidInput(format!(
            "{eq} needs an initial state of dimension {}, got {}",
            eq.dimension(),
            y0.len()
        )));
    }
    let (t0, t1) = eta_span;
    if eq == EquationId::Riccati {
        let sys = RiccatiSystem::new(cfg);
        let sol = solve(&sys, t0, [y0[0]], t1, settings, stops)?;
        let window = window_of(&sol)?;
        let gb = cfg.gamma_bar();
        let values: Vec<f64> = sol.ys.iter().map(|y| y[0]).collect();
        let derivs: Vec<f64> = sol.fs.iter().map(|f| f[0]).collect();
        let second = values.iter().zip(&derivs).map(|(h, dh)| -2.0 * gb * h * dh).collect();
        return Trajectory::new(sol.ts, values, derivs, Some(second), window);
    }
    let sys = SecondOrder::new(eq, cfg, y0[0])?;
    let sol = solve(&sys, t0, [y0[0], y0[1]], t1, settings, stops)?;
    let window = window_of(&sol)?;
    Trajectory::new(
        sol.ts,
        sol.ys.iter().map(|y| y[0]).collect(),
        sol.ys.iter().map(|y| y[1]).collect(),
        Some(sol.fs.iter().map(|f| f[1]).collect()),
        window,
    )
}

/// Left-hand side of `eq` at the given value and derivatives, divided by the
/// largest absolute term.
///
/// For [`EquationId::Riccati`], `value` is H and `d1` is H'; `d2` is unused.
pub fn residual(eq: EquationId, cfg: &EPConfig, eta: f64, value: f64, d1: f64, d2: f64) -> Result<f64> {
    let kappa = cfg.kappa();
    let gb = cfg.gamma_bar();
    let k = cfg.k;
    let needs_nonzero = matches!(
        eq,
        EquationId::ScaleFactor | EquationId::ChielliniScaleFactor | EquationId::ErmakovPinney
    ) || (k != 0.0 && matches!(eq, EquationId::DampedEP | EquationId::UndampedScaled));
    if needs_nonzero && value == 0.0 {
        return Err(Error::domain(BoundaryReason::SolutionZero, eta));
    }
    let terms: Vec<f64> = match eq {
        EquationId::ScaleFactor => vec![value * d2, (gb - 1.0) * d1 * d1, kappa * gb * value * value],
        EquationId::ChielliniScaleFactor => {
            vec![value * d2, (gb - 1.0) * d1 * d1, 2.0 * kappa * gb * value * value]
        }
        EquationId::Riccati => vec![d1, gb * value * value, kappa * gb],
        EquationId::LinearU => vec![d2, kappa * gb * gb * value],
        EquationId::ErmakovPinney => vec![d2, kappa * gb * gb * value, k / (value * value * value)],
        EquationId::UndampedScaled => {
            let mut t = vec![d2, 2.0 * kappa * gb * gb * value];
            if k != 0.0 {
                t.push(2.0 * k / (value * value * value));
            }
            t
        }
        EquationId::DampedEP | EquationId::ReducedDamped => {
            let mut c = *cfg;
            if eq == EquationId::ReducedDamped {
                c.k = 0.0;
            }
            let r = damping_radicand(&c, value);
            if !(r > 0.0) {
                return Err(Error::domain(BoundaryReason::DampingDenominatorZero, eta));
            }
            let h = cosmological_h(&c, value).0;
            vec![d2, h / r.sqrt() * d1, h]
        }
    };
    let total: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(total.abs() / scale)
}

/// Scale factor from a conformal Hubble-rate trajectory,
/// `a = a_start exp(int H d eta)`.
///
/// Each step of the integral uses the cubic Hermite rule
/// `h/2 (H0 + H1) + h^2/12 (H0' - H1')`.
pub fn riccati_to_scale(traj_h: &Trajectory, a_at_start: f64) -> Result<Trajectory> {
    let n = traj_h.len();
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    let mut log_a = 0.0;
    for i in 0..n {
        if i > 0 {
            let h = traj_h.etas[i] - traj_h.etas[i - 1];
            let (h0, h1) = (traj_h.values[i - 1], traj_h.values[i]);
            let (d0, d1) = (traj_h.derivs[i - 1], traj_h.derivs[i]);
            log_a += 0.5 * h * (h0 + h1) + h * h / 12.0 * (d0 - d1);
        }
        let a = a_at_start * log_a.exp();
        let hub = traj_h.values[i];
        values.push(a);
        derivs.push(a * hub);
        second.push(a * (traj_h.derivs[i] + hub * hub));
    }
    Trajectory::new(traj_h.etas.clone(), values, derivs, Some(second), traj_h.window)
}
