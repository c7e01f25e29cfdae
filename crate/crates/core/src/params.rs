//! Domain types shared by every other module: curvature, fluid, the damped
//! Ermakov-Pinney parameter set and the real-domain bookkeeping.

use std::fmt;

use crate::error::{BoundaryReason, Error, Result};

/// Smallest accepted |gamma_bar|; anything closer to zero is rejected.
pub const GAMMA_BAR_EPS: f64 = 1e-12;

/// Spatial curvature index kappa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curvature {
    Open,
    Flat,
    Closed,
}

impl Curvature {
    pub const ALL: [Curvature; 3] = [Curvature::Open, Curvature::Flat, Curvature::Closed];

    pub fn from_index(kappa: i64) -> Result<Self> {
        match kappa {
            -1 => Ok(Curvature::Open),
            0 => Ok(Curvature::Flat),
            1 => Ok(Curvature::Closed),
            other => Err(Error::InvalidCurvature(other)),
        }
    }

    pub fn index(self) -> i64 {
        match self {
            Curvature::Open => -1,
            Curvature::Flat => 0,
            Curvature::Closed => 1,
        }
    }

    /// kappa as a float, for use in formulas.
    pub fn kappa(self) -> f64 {
        self.index() as f64
    }

    pub fn name(self) -> &'static str {
        match self {
            Curvature::Open => "open",
            Curvature::Flat => "flat",
            Curvature::Closed => "closed",
        }
    }
}

impl TryFrom<i64> for Curvature {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        Curvature::from_index(value)
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A barotropic fluid `p = (gamma - 1) rho`.
///
/// Only the derived exponent `gamma_bar = 3 gamma / 2 - 1` enters the
/// solutions. It is never zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fluid {
    gamma: f64,
    gamma_bar: f64,
}

impl Fluid {
    pub fn new(gamma: f64) -> Result<Self> {
        let gamma_bar = 1.5 * gamma - 1.0;
        if !gamma.is_finite() || gamma_bar.abs() < GAMMA_BAR_EPS {
            return Err(Error::GammaBarZero { gamma });
        }
        Ok(Fluid { gamma, gamma_bar })
    }

    /// Fluid with the given `gamma_bar`; `gamma` is recovered as `2 (gamma_bar + 1) / 3`.
    pub fn from_gamma_bar(gamma_bar: f64) -> Result<Self> {
        let gamma = 2.0 * (gamma_bar + 1.0) / 3.0;
        if !gamma_bar.is_finite() || gamma_bar.abs() < GAMMA_BAR_EPS {
            return Err(Error::GammaBarZero { gamma });
        }
        Ok(Fluid { gamma, gamma_bar })
    }

    /// Pressureless matter, gamma = 1.
    pub fn dust() -> Self {
        Fluid { gamma: 1.0, gamma_bar: 0.5 }
    }

    /// gamma = 4/3.
    pub fn radiation() -> Self {
        Fluid { gamma: 4.0 / 3.0, gamma_bar: 1.0 }
    }

    /// gamma = 0, i.e. gamma_bar = -1.
    pub fn vacuum() -> Self {
        Fluid { gamma: 0.0, gamma_bar: -1.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    /// The exponent 1/gamma_bar turning u-modes into scale factors.
    pub fn exponent(&self) -> f64 {
        1.0 / self.gamma_bar
    }

    /// Conventional label for the three figure fluids, `None` otherwise.
    pub fn label(&self) -> Option<&'static str> {
        if self.gamma == 1.0 {
            Some("dust")
        } else if (self.gamma - 4.0 / 3.0).abs() < 1e-15 {
            Some("radiation")
        } else if self.gamma == 0.0 {
            Some("vacuum")
        } else {
            None
        }
    }
}

/// Make a fluid from its adiabatic index.
pub fn make_fluid(gamma: f64) -> Result<Fluid> {
    Fluid::new(gamma)
}

/// Full parameter set of the (damped) Ermakov-Pinney family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EPConfig {
    pub curvature: Curvature,
    pub fluid: Fluid,
    /// Strength of the inverse-cubic term, `k <= 0`.
    pub k: f64,
    /// First-integral constant of the damped family.
    pub c1: f64,
    pub eta0: f64,
}

impl EPConfig {
    pub fn new(curvature: Curvature, fluid: Fluid, k: f64, c1: f64, eta0: f64) -> Self {
        EPConfig { curvature, fluid, k, c1, eta0 }
    }

    /// `k = 0` member of the family.
    pub fn reduced(curvature: Curvature, fluid: Fluid, c1: f64, eta0: f64) -> Self {
        EPConfig::new(curvature, fluid, 0.0, c1, eta0)
    }

    pub fn kappa(&self) -> f64 {
        self.curvature.kappa()
    }

    pub fn gamma_bar(&self) -> f64 {
        self.fluid.gamma_bar()
    }

    /// `16 k gamma_bar^2 + c1^2`.
    pub fn delta_plus(&self) -> f64 {
        let gb = self.gamma_bar();
        16.0 * self.k * gb * gb + self.c1 * self.c1
    }

    /// `16 k gamma_bar^2 - c1^2`.
    pub fn delta_minus(&self) -> f64 {
        let gb = self.gamma_bar();
        16.0 * self.k * gb * gb - self.c1 * self.c1
    }

    /// Shift to the offset time `x = eta - eta0`.
    pub fn offset(&self, eta: f64) -> f64 {
        eta - self.eta0
    }

    pub fn is_reduced(&self) -> bool {
        self.k == 0.0
    }
}

/// An [`EPConfig`] that passed [`validate_config`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedConfig(EPConfig);

impl ValidatedConfig {
    pub fn config(&self) -> &EPConfig {
        &self.0
    }

    pub fn into_inner(self) -> EPConfig {
        self.0
    }
}

impl std::ops::Deref for ValidatedConfig {
    type Target = EPConfig;

    fn deref(&self) -> &EPConfig {
        &self.0
    }
}

/// Check the sign conditions of the damped family. The error names the first
/// violated condition.
pub fn validate_config(cfg: &EPConfig) -> Result<ValidatedConfig> {
    let gb = cfg.gamma_bar();
    if !gb.is_finite() || gb.abs() < GAMMA_BAR_EPS {
        return Err(Error::GammaBarZero { gamma: cfg.fluid.gamma() });
    }
    if !(cfg.k.is_finite() && cfg.c1.is_finite() && cfg.eta0.is_finite()) {
        return Err(Error::InvalidInput("non-finite configuration value".into()));
    }
    if cfg.k > 0.0 {
        return Err(Error::KPositive { k: cfg.k });
    }
    // flat solutions divide by c1, the reduced family scales with sqrt(c1)
    if cfg.c1 == 0.0 && (cfg.is_reduced() || cfg.curvature == Curvature::Flat) {
        return Err(Error::C1Zero);
    }
    match cfg.curvature {
        Curvature::Closed => {
            let delta = cfg.delta_plus();
            if delta <= 0.0 {
                return Err(Error::DeltaPlusNonPositive { delta });
            }
        }
        Curvature::Open => {
            let delta = cfg.delta_minus();
            if delta >= 0.0 {
                return Err(Error::DeltaMinusNonNegative { delta });
            }
        }
        Curvature::Flat => {}
    }
    Ok(ValidatedConfig(*cfg))
}

/// Conformal-time interval on which a solution is real and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityWindow {
    pub lo: f64,
    pub hi: f64,
    /// What ended the window at `hi`.
    pub reason: BoundaryReason,
}

impl ValidityWindow {
    pub fn new(lo: f64, hi: f64, reason: BoundaryReason) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!("empty window [{lo}, {hi}]")));
        }
        Ok(ValidityWindow { lo, hi, reason })
    }

    pub fn contains(&self, eta: f64) -> bool {
        eta >= self.lo && eta <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}
