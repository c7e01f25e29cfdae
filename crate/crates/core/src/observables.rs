//! Conformal Hubble rate, deceleration parameter and energy density
//! (units with `4 pi G = 1`) from any scale-factor source.

use crate::closed_form::{chiellini_scale_factor, standard_scale_factor, Jet};
use crate::error::{Error, Result};
use crate::params::{Curvature, EPConfig};
use crate::par;
use crate::trajectory::Trajectory;

/// `|a'|` below which the deceleration parameter is undefined.
pub const DERIVATIVE_EPS: f64 = 1e-14;

/// `q = 1 - a'' a / a'^2`.
pub fn deceleration(a: f64, a1: f64, a2: f64) -> Result<f64> {
    if !(a1.abs() >= DERIVATIVE_EPS) {
        return Err(Error::DerivativeZero);
    }
    Ok(1.0 - a2 * a / (a1 * a1))
}

/// `rho = 3/2 (a'^2 + kappa a^2) / a^4`.
///
/// Negative `a` is accepted: for integer exponents the scale factor of an
/// oscillating mode changes sign between lobes and `rho` depends on `a^2`
/// only.
pub fn energy_density(curvature: Curvature, a: f64, a1: f64) -> Result<f64> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::ScaleFactorZero);
    }
    let a2 = a * a;
    Ok(1.5 * (a1 * a1 + curvature.kappa() * a2) / (a2 * a2))
}

/// Why a row carries no complete set of numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    /// The scale factor is not real or vanishes at this time.
    Domain,
    /// `a' = 0`; only `q` is missing.
    DerivZero,
}

impl RowFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RowFlag::Domain => "domain",
            RowFlag::DerivZero => "deriv-zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRow {
    pub eta: f64,
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub hubble: f64,
    pub q: Option<f64>,
    pub rho: f64,
    pub flag: Option<RowFlag>,
}

impl ObservableRow {
    fn flagged(eta: f64) -> Self {
        ObservableRow {
            eta,
            a: f64::NAN,
            a1: f64::NAN,
            a2: f64::NAN,
            hubble: f64::NAN,
            q: None,
            rho: f64::NAN,
            flag: Some(RowFlag::Domain),
        }
    }

    /// Row from a scale factor and its first two derivatives.
    pub fn from_jet(curvature: Curvature, eta: f64, a: Jet) -> Self {
        if !a.is_finite() {
            return Self::flagged(eta);
        }
        let rho = match energy_density(curvature, a.value, a.d1) {
            Ok(r) => r,
            Err(_) => return Self::flagged(eta),
        };
        let q = deceleration(a.value, a.d1, a.d2).ok();
        ObservableRow {
            eta,
            a: a.value,
            a1: a.d1,
            a2: a.d2,
            hubble: a.d1 / a.value,
            q,
            rho,
            flag: if q.is_none() { Some(RowFlag::DerivZero) } else { None },
        }
    }
}

/// Where the scale factor comes from.
#[derive(Debug, Clone, Copy)]
pub enum ScaleSource<'a> {
    /// The standard `a = u^(1/gb)`.
    Standard(&'a EPConfig),
    /// The Chiellini scale factor.
    Chiellini(&'a EPConfig),
    /// A numerical scale-factor trajectory and its curvature.
    Trajectory(&'a Trajectory, Curvature),
}

impl ScaleSource<'_> {
    fn curvature(&self) -> Curvature {
        match self {
            ScaleSource::Standard(c) | ScaleSource::Chiellini(c) => c.curvature,
            ScaleSource::Trajectory(_, c) => *c,
        }
    }

    fn jet(&self, eta: f64) -> Option<Jet> {
        match self {
            ScaleSource::Standard(c) => standard_scale_factor(c.curvature, c.fluid, eta, c.eta0).ok(),
            ScaleSource::Chiellini(c) => chiellini_scale_factor(c, eta).ok(),
            ScaleSource::Trajectory(t, _) => {
                let (value, d1) = t.eval(eta)?;
                Some(Jet::new(value, d1, t.second_at(eta)?))
            }
        }
    }
}

/// Observables on `etas`, one row per grid point; rows outside the domain
/// of the source are flagged rather than dropped.
pub fn observable_series(source: ScaleSource<'_>, etas: &[f64]) -> Vec<ObservableRow> {
    let curvature = source.curvature();
    par::map(etas, |&eta| match source.jet(eta) {
        Some(a) => ObservableRow::from_jet(curvature, eta, a),
        None => ObservableRow::flagged(eta),
    })
}
