//! The invariant suite behind `frw-chiellini validate`.
//!
//! Each property returns a [`PropertyReport`] with the measured worst-case
//! value and the threshold it is held to. Properties are independent and
//! run through [`crate::par::map`].

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use crate::chiellini::{
    check_chiellini, damping_from_h, domain_points, equivalence_check, invert_ih, CosmologicalH, DampingField,
    HField,
};
use crate::closed_form::{
    chiellini_scale_factor, damped_frequency, damped_v, increasing_branch_window, milne_limit, milne_reconstruct,
    pinney_superpose, pinney_v, reduced_u, standard_scale_factor, u_mode, wronskian, Branch, SolutionKind,
    MILNE_QUAD_TOL,
};
use crate::error::{Error, Result};
use crate::observables::{observable_series, ScaleSource};
use crate::ode::{integrate, residual, EquationId, IntegratorSettings};
use crate::par;
use crate::params::{Curvature, EPConfig, Fluid};

/// Deliberate defects for exercising the suite's failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Use `-g` in place of the Chiellini damping.
    FlipDampingSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst value measured.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl PropertyReport {
    fn measured(name: &'static str, value: f64, threshold: f64, detail: String) -> Self {
        PropertyReport { name, passed: value < threshold, value, threshold, detail }
    }

    fn failed(name: &'static str, threshold: f64, err: &Error) -> Self {
        PropertyReport { name, passed: false, value: f64::NAN, threshold, detail: err.to_string() }
    }

    fn from_result(name: &'static str, threshold: f64, r: Result<(f64, String)>) -> Self {
        match r {
            Ok((value, detail)) => Self::measured(name, value, threshold, detail),
            Err(e) => Self::failed(name, threshold, &e),
        }
    }
}

/// The three fluids used throughout: dust, radiation, vacuum.
pub fn default_fluids() -> [Fluid; 3] {
    [Fluid::dust(), Fluid::radiation(), Fluid::vacuum()]
}

/// `n` midpoints of `n` equal cells of `[lo, hi]`.
pub fn midpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

/// `n >= 2` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Angular frequency of the trig/hyperbolic argument of a family.
fn argument_frequency(kind: SolutionKind, cfg: &EPConfig) -> f64 {
    if cfg.curvature == Curvature::Flat {
        return 1.0;
    }
    let gb = cfg.gamma_bar();
    match kind {
        SolutionKind::StandardScale | SolutionKind::LinearU | SolutionKind::PinneyV => gb,
        SolutionKind::DampedV | SolutionKind::ReducedU => damped_frequency(cfg.fluid),
        SolutionKind::ChielliniScale | SolutionKind::HarmonicPair => SQRT_2 * gb,
    }
}

/// An eta window on which the argument of `kind` runs over `[0.1, 1]`.
pub fn argument_window(kind: SolutionKind, cfg: &EPConfig) -> (f64, f64) {
    let w = argument_frequency(kind, cfg);
    let (a, b) = (0.1 / w, 1.0 / w);
    (cfg.eta0 + a.min(b), cfg.eta0 + a.max(b))
}

/// A rising-branch window of length at most 1, kept clear of the turning points.
pub fn rising_window(cfg: &EPConfig) -> Result<(f64, f64)> {
    let len = match cfg.curvature {
        Curvature::Closed => (0.8 * std::f64::consts::PI / damped_frequency(cfg.fluid).abs()).min(1.0),
        _ => 1.0,
    };
    increasing_branch_window(cfg, len)
}

/// Configurations exercised for each closed-form family.
pub fn residual_cases(kind: SolutionKind) -> Vec<EPConfig> {
    let mut out = Vec::new();
    for c in Curvature::ALL {
        if kind == SolutionKind::HarmonicPair && c != Curvature::Closed {
            continue;
        }
        for f in default_fluids() {
            match kind {
                SolutionKind::StandardScale | SolutionKind::LinearU => out.push(EPConfig::new(c, f, 0.0, 1.0, 0.0)),
                SolutionKind::PinneyV => {
                    for k in [-2.0, -1.0, -0.1] {
                        out.push(EPConfig::new(c, f, k, 1.0, 0.0));
                    }
                }
                SolutionKind::DampedV => {
                    for k in [-1.0 / 32.0, -0.01] {
                        out.push(EPConfig::new(c, f, k, 1.0, 0.0));
                    }
                }
                SolutionKind::ReducedU | SolutionKind::HarmonicPair => {
                    for c1 in [1.0 / 16.0, 1.0] {
                        out.push(EPConfig::reduced(c, f, c1, 0.0));
                    }
                }
                SolutionKind::ChielliniScale => {
                    for c1 in [1.0 / 16.0, 1.0, 1.25] {
                        out.push(EPConfig::reduced(c, f, c1, 0.0));
                    }
                }
            }
        }
    }
    out
}

/// Largest relative residual of `kind` in `eq` over `etas`, skipping points
/// where the first derivative is not above `min_slope` (used for the damped
/// equations, which hold on rising branches only).
pub fn residual_on(
    kind: SolutionKind,
    eq: EquationId,
    cfg: &EPConfig,
    etas: &[f64],
    min_slope: Option<f64>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &eta in etas {
        let j = kind.evaluate(cfg, eta)?;
        if min_slope.is_some_and(|m| !(j.d1 > m)) {
            continue;
        }
        worst = worst.max(residual(eq, cfg, eta, j.value, j.d1, j.d2)?);
    }
    Ok(worst)
}

/// Residuals of every closed-form family in its governing equation, 100
/// points per case; the damped families also in the damped equation on a
/// rising branch.
pub fn residual_suite() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for kind in SolutionKind::ALL {
        for cfg in residual_cases(kind) {
            let (lo, hi) = argument_window(kind, &cfg);
            let etas = midpoints(lo, hi, 100);
            let eq = kind.governing_equation();
            let min_slope = (eq == EquationId::ReducedDamped).then_some(1e-6);
            worst = worst.max(residual_on(kind, eq, &cfg, &etas, min_slope)?);
            count += 1;
            let damped_eq = match kind {
                SolutionKind::DampedV => Some(EquationId::DampedEP),
                SolutionKind::ReducedU => Some(EquationId::ReducedDamped),
                _ => None,
            };
            if let Some(deq) = damped_eq {
                let (lo, hi) = rising_window(&cfg)?;
                worst = worst.max(residual_on(kind, deq, &cfg, &midpoints(lo, hi, 100), Some(1e-6))?);
                count += 1;
            }
        }
    }
    Ok((worst, format!("{count} cases x 100 points")))
}

/// The (k, c1) combinations of the Chiellini-condition sweep.
pub const CONDITION_K: [f64; 2] = [0.0, -1.0];
pub const CONDITION_C1: [f64; 3] = [1.0 / 16.0, 1.0, 1.25];

/// Candidate v values for the condition sweep. The flat `k = -1`,
/// `c1 = 1/16` domain starts near `v = 5.7`.
pub fn condition_probe() -> Vec<f64> {
    linspace(0.01, 20.0, 2000)
}

/// Grid for the Chiellini condition: points with radicand above a fifth
/// of `c1`, so the finite-difference stencil stays well inside the domain.
pub fn condition_grid(g: &DampingField, c1: f64) -> Vec<f64> {
    domain_points(g, condition_probe(), 0.2 * c1)
}

/// Outcome of the condition check for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionOutcome {
    /// Worst `|d/dv (h/g) + 2g|` over this many grid points.
    Checked(f64, usize),
    /// The damping has no real domain for these parameters.
    EmptyDomain,
}

pub fn condition_for(cfg: &EPConfig, fault: Fault) -> Result<ConditionOutcome> {
    let h = CosmologicalH::new(cfg);
    let g = match damping_from_h(h, cfg.c1, &condition_probe()) {
        Ok(g) => g,
        Err(Error::EmptyDomain) => return Ok(ConditionOutcome::EmptyDomain),
        Err(e) => return Err(e),
    };
    let g = match fault {
        Fault::None => g,
        Fault::FlipDampingSign => g.scaled(-1.0),
    };
    let grid = condition_grid(&g, cfg.c1);
    if grid.is_empty() {
        return Ok(ConditionOutcome::EmptyDomain);
    }
    Ok(ConditionOutcome::Checked(check_chiellini(&h, &g, -2.0, &grid)?, grid.len()))
}

/// `h/g` at the closed-form damped solution against its slope `v'`, on a
/// rising branch.
fn manifold_mismatch(cfg: &EPConfig, fault: Fault) -> Result<f64> {
    let h = CosmologicalH::new(cfg);
    let (lo, hi) = rising_window(cfg)?;
    let etas = midpoints(lo, hi, 50);
    let probe: Vec<f64> = etas.iter().map(|&e| damped_v(cfg, e).map(|j| j.value)).collect::<Result<_>>()?;
    let g = damping_from_h(h, cfg.c1, &probe)?;
    let g = if fault == Fault::FlipDampingSign { g.scaled(-1.0) } else { g };
    let mut worst = 0.0f64;
    for &eta in &etas {
        let v = damped_v(cfg, eta)?;
        let Some(gv) = g.value(v.value) else { continue };
        if gv == 0.0 {
            continue;
        }
        worst = worst.max((h.h(v.value) / gv - v.d1).abs() / v.d1.abs().max(1.0));
    }
    Ok(worst)
}

fn chiellini_condition(fault: Fault) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let (mut checked, mut empty) = (0, 0);
    for c in Curvature::ALL {
        for f in default_fluids() {
            for k in CONDITION_K {
                for c1 in CONDITION_C1 {
                    let cfg = EPConfig::new(c, f, k, c1, 0.0);
                    match condition_for(&cfg, fault)? {
                        ConditionOutcome::Checked(r, _) => {
                            worst = worst.max(r);
                            checked += 1;
                        }
                        ConditionOutcome::EmptyDomain => empty += 1,
                    }
                }
            }
        }
    }
    let mut manifold = 0.0f64;
    for cfg in equivalence_cases() {
        manifold = manifold.max(manifold_mismatch(&cfg, fault)?);
    }
    Ok((
        worst.max(manifold),
        format!("condition {worst:.2e} on {checked} cases ({empty} with empty domain); h/g vs v' {manifold:.2e}"),
    ))
}

/// Configurations for the equivalence theorem and the manifold check.
pub fn equivalence_cases() -> Vec<EPConfig> {
    let mut out = Vec::new();
    for c in Curvature::ALL {
        for f in default_fluids() {
            out.push(EPConfig::new(c, f, -1.0 / 32.0, 1.0, 0.0));
            out.push(EPConfig::reduced(c, f, if c == Curvature::Flat { 1.25 } else { 1.0 / 16.0 }, 0.0));
        }
    }
    out
}

fn equivalence() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    for cfg in equivalence_cases() {
        let span = rising_window(&cfg)?;
        worst = worst.max(equivalence_check(&cfg, span, 1e-9)?);
    }
    Ok((worst, format!("{} cases at tolerance 1e-9", equivalence_cases().len())))
}

/// Integrator tolerances of the convergence ladder.
pub const TOLERANCE_LADDER: [f64; 3] = [1e-6, 1e-8, 1e-10];

/// Equivalence deviations along [`TOLERANCE_LADDER`] for one case.
pub fn ladder_deviations(cfg: &EPConfig) -> Result<Vec<f64>> {
    let span = rising_window(cfg)?;
    TOLERANCE_LADDER.iter().map(|&t| equivalence_check(cfg, span, t)).collect()
}

fn tolerance_ladder() -> Result<(f64, String)> {
    let cases = [
        EPConfig::new(Curvature::Closed, Fluid::radiation(), -1.0 / 32.0, 1.0, 0.0),
        EPConfig::new(Curvature::Open, Fluid::dust(), -1.0 / 32.0, 1.0, 0.0),
        EPConfig::new(Curvature::Flat, Fluid::radiation(), -2.0, 4.0, 0.0),
    ];
    let mut increases = 0.0f64;
    let mut detail = Vec::new();
    for cfg in cases {
        let devs = ladder_deviations(&cfg)?;
        for w in devs.windows(2) {
            increases = increases.max(w[1] - w[0]);
        }
        detail.push(devs.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(" > "));
    }
    // value is the largest increase between rungs; anything positive fails
    Ok((increases, detail.join("; ")))
}

/// Largest deviation of the first integral `v'^2 + 4 int h dv = c1` along
/// the damped closed forms and along a numerical undamped trajectory.
fn first_integrals() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    for cfg in equivalence_cases() {
        let h = CosmologicalH::new(&cfg);
        let (lo, hi) = argument_window(SolutionKind::DampedV, &cfg);
        for eta in midpoints(lo, hi, 50) {
            let v = if cfg.k == 0.0 { reduced_u(&cfg, eta)? } else { damped_v(&cfg, eta)? };
            let e = v.d1 * v.d1 + 4.0 * h.antiderivative(v.value);
            worst = worst.max((e - cfg.c1).abs() / cfg.c1.abs().max(1.0));
        }
        let v0 = damped_v(&cfg, lo)?;
        let tr = integrate(
            EquationId::UndampedScaled,
            &cfg,
            &[v0.value, v0.d1],
            (lo, hi),
            &IntegratorSettings::with_tolerance(1e-10),
        )?;
        for i in 0..tr.len() {
            let e = tr.derivs[i] * tr.derivs[i] + 4.0 * h.antiderivative(tr.values[i]);
            worst = worst.max((e - cfg.c1).abs() / cfg.c1.abs().max(1.0));
        }
    }
    Ok((worst, "closed forms and integrated trajectories".into()))
}

/// Damped solutions at `k = -1e-10` against the reduced mode, `x > 0`.
fn k_to_zero() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    for c in Curvature::ALL {
        for f in default_fluids() {
            let c1 = if c == Curvature::Flat { 1.25 } else { 1.0 / 16.0 };
            let reduced = EPConfig::reduced(c, f, c1, 0.0);
            let near = EPConfig::new(c, f, -1e-10, c1, 0.0);
            let (lo, hi) = rising_window(&reduced)?;
            for eta in midpoints(lo.max(0.05), hi.max(0.1), 50) {
                let Ok(r) = reduced_u(&reduced, eta) else { continue };
                if r.value < 1e-3 {
                    continue;
                }
                worst = worst.max((damped_v(&near, eta)?.value - r.value).abs());
            }
        }
    }
    Ok((worst, "k = -1e-10 vs k = 0".into()))
}

/// Flat universes with `c1 = 1`: Chiellini and standard observables agree.
fn flat_calibration() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    for f in default_fluids() {
        let cfg = EPConfig::reduced(Curvature::Flat, f, 1.0, 0.0);
        let etas = midpoints(0.1, 3.0, 100);
        let a = observable_series(ScaleSource::Chiellini(&cfg), &etas);
        let b = observable_series(ScaleSource::Standard(&cfg), &etas);
        for (x, y) in a.iter().zip(&b) {
            let q = match (x.q, y.q) {
                (Some(p), Some(r)) => (p - r).abs(),
                _ => f64::INFINITY,
            };
            let d = [(x.a - y.a).abs(), (x.a1 - y.a1).abs(), (x.rho - y.rho).abs(), q];
            worst = worst.max(d.iter().cloned().fold(0.0, f64::max));
        }
    }
    Ok((worst, "a, a', q, rho on 100 points per fluid".into()))
}

/// Superposed linear modes against the direct EP closed forms.
fn pinney_superposition() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    for c in Curvature::ALL {
        for f in default_fluids() {
            let w = wronskian(c, f);
            for k in [-2.0, -1.0, -0.1] {
                let cfg = EPConfig::new(c, f, k, 1.0, 0.0);
                for eta in midpoints(-1.5, 1.5, 40) {
                    let u1 = u_mode(c, f, eta, 0.0, Branch::First).value;
                    let u2 = u_mode(c, f, eta, 0.0, Branch::Second).value;
                    let direct = pinney_v(&cfg, eta)?.value;
                    worst = worst.max((pinney_superpose(u1, u2, w, k)? - direct).abs() / direct.max(1.0));
                }
            }
        }
    }
    Ok((worst, "k in {-2, -1, -0.1}, all curvatures and fluids".into()))
}

/// The Milne k ladder.
pub const MILNE_LADDER: [f64; 3] = [-1e-2, -1e-4, -1e-6];

/// Deviations of the Milne reconstruction from its `k -> 0` limit at
/// `x = 0.5`, phase `-pi/4`, along [`MILNE_LADDER`].
pub fn milne_deviations(curvature: Curvature, fluid: Fluid) -> Result<Vec<f64>> {
    MILNE_LADDER
        .iter()
        .map(|&k| {
            let cfg = EPConfig::new(curvature, fluid, k, 1.0, 0.0);
            let u = milne_reconstruct(&cfg, 0.5, -FRAC_PI_4, MILNE_QUAD_TOL * 1e-2)?;
            Ok((u - milne_limit(curvature, fluid, 0.5, 0.0, -FRAC_PI_4)).abs())
        })
        .collect()
}

fn milne_ladder() -> Result<(f64, String)> {
    let mut worst_last = 0.0f64;
    let mut monotone = true;
    for c in Curvature::ALL {
        let d = milne_deviations(c, Fluid::radiation())?;
        monotone &= d.windows(2).all(|w| w[1] < w[0]);
        worst_last = worst_last.max(d[2]);
    }
    let value = if monotone { worst_last } else { f64::INFINITY };
    Ok((value, format!("deviation at k = -1e-6: {worst_last:.2e}; monotone: {monotone}")))
}

/// `invert_ih` against the closed-form damped solutions on rising branches.
pub fn inversion_cases() -> Vec<EPConfig> {
    vec![
        EPConfig::new(Curvature::Flat, Fluid::radiation(), -2.0, 4.0, 0.0),
        EPConfig::reduced(Curvature::Flat, Fluid::dust(), 1.25, 0.0),
        EPConfig::reduced(Curvature::Closed, Fluid::radiation(), 1.0, 0.0),
        EPConfig::reduced(Curvature::Closed, Fluid::dust(), 1.0 / 16.0, 0.0),
        EPConfig::reduced(Curvature::Closed, Fluid::vacuum(), 1.0 / 16.0, 0.0),
    ]
}

/// Worst `|invert_ih(I) - v(eta)|` along a rising branch of `cfg`.
pub fn inversion_error(cfg: &EPConfig) -> Result<f64> {
    let h = CosmologicalH::new(cfg);
    let (lo, hi) = rising_window(cfg)?;
    let closed = |eta: f64| if cfg.k == 0.0 { reduced_u(cfg, eta) } else { damped_v(cfg, eta) };
    let v_ref = closed(lo)?.value;
    let mut worst = 0.0f64;
    for eta in midpoints(lo, hi, 20) {
        let v = invert_ih(&h, cfg.c1, v_ref, eta - lo, 1e-12)?;
        worst = worst.max((v - closed(eta)?.value).abs());
    }
    Ok(worst)
}

fn quadrature_inversion() -> Result<(f64, String)> {
    let cases = inversion_cases();
    let mut worst = 0.0f64;
    for cfg in &cases {
        worst = worst.max(inversion_error(cfg)?);
    }
    Ok((worst, format!("{} cases, 20 points each", cases.len())))
}

/// Closed-form standard scale factors integrated through the Riccati form
/// against the closed form.
fn riccati_consistency() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    for c in Curvature::ALL {
        for f in default_fluids() {
            let (lo, hi) = argument_window(SolutionKind::StandardScale, &EPConfig::new(c, f, 0.0, 1.0, 0.0));
            let a0 = standard_scale_factor(c, f, lo, 0.0)?;
            let cfg = EPConfig::new(c, f, 0.0, 1.0, 0.0);
            let tr = integrate(
                EquationId::Riccati,
                &cfg,
                &[a0.d1 / a0.value],
                (lo, hi),
                &IntegratorSettings::with_tolerance(1e-10),
            )?;
            let a = crate::ode::riccati_to_scale(&tr, a0.value)?;
            for i in 0..a.len() {
                let exact = standard_scale_factor(c, f, a.etas[i], 0.0)?.value;
                worst = worst.max((a.values[i] - exact).abs() / exact.abs().max(1.0));
            }
        }
    }
    Ok((worst, "conformal Hubble rate integrated and exponentiated".into()))
}

/// Also used by the Chiellini scale-factor checks: `a` is real wherever
/// [`chiellini_scale_factor`] succeeds on the argument window.
fn chiellini_real_on_window() -> Result<(f64, String)> {
    let mut failures = 0usize;
    for cfg in residual_cases(SolutionKind::ChielliniScale) {
        let (lo, hi) = argument_window(SolutionKind::ChielliniScale, &cfg);
        for eta in midpoints(lo, hi, 20) {
            if !chiellini_scale_factor(&cfg, eta).is_ok_and(|a| a.is_finite()) {
                failures += 1;
            }
        }
    }
    Ok((failures as f64, "non-real samples".into()))
}

type Property = (&'static str, f64, fn(Fault) -> Result<(f64, String)>);

const PROPERTIES: [Property; 12] = [
    ("residuals", 1e-9, |_| residual_suite()),
    ("chiellini-condition", 1e-6, chiellini_condition),
    ("equivalence", 1e-6, |_| equivalence()),
    ("tolerance-ladder", f64::MIN_POSITIVE, |_| tolerance_ladder()),
    ("first-integral", 1e-8, |_| first_integrals()),
    ("k-to-zero", 1e-4, |_| k_to_zero()),
    ("flat-calibration", 1e-12, |_| flat_calibration()),
    ("pinney-superposition", 1e-12, |_| pinney_superposition()),
    ("milne-ladder", 1e-3, |_| milne_ladder()),
    ("quadrature-inversion", 1e-8, |_| quadrature_inversion()),
    ("riccati", 1e-7, |_| riccati_consistency()),
    ("chiellini-real", 0.5, |_| chiellini_real_on_window()),
];

/// Run every property, in a fixed order.
pub fn run_suite(fault: Fault) -> Vec<PropertyReport> {
    par::map(&PROPERTIES, |&(name, threshold, check)| PropertyReport::from_result(name, threshold, check(fault)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_are_ordered() {
        for kind in SolutionKind::ALL {
            for cfg in residual_cases(kind) {
                let (lo, hi) = argument_window(kind, &cfg);
                assert!(lo < hi);
            }
        }
    }

    #[test]
    fn clean_suite_passes() {
        for r in run_suite(Fault::None) {
            assert!(r.passed, "{}: {} ({})", r.name, r.value, r.detail);
        }
    }

    #[test]
    fn flipped_damping_is_caught() {
        let reports = run_suite(Fault::FlipDampingSign);
        let cond = reports.iter().find(|r| r.name == "chiellini-condition").unwrap();
        assert!(!cond.passed);
    }
}
