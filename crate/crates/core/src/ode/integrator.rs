//! Dormand-Prince 5(4) with PI step control, cubic Hermite dense output and
//! zero-crossing events on guarded quantities.

use crate::error::{BoundaryReason, Error, Result};

/// Step control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// First trial step; `0` picks one from the initial slope.
    pub initial_step: f64,
    /// Disable adaptivity and take equal steps of this size.
    pub fixed_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: f64::INFINITY,
            initial_step: 0.0,
            fixed_step: None,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorSettings {
    /// `rel_tol = tol`, `abs_tol = tol / 100`.
    pub fn with_tolerance(tol: f64) -> Self {
        IntegratorSettings { rel_tol: tol, abs_tol: 0.01 * tol, ..Default::default() }
    }

    pub fn fixed(step: f64) -> Self {
        IntegratorSettings { fixed_step: Some(step), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.fixed_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidInput(format!("fixed step must be positive, got {h}")));
            }
            return Ok(());
        }
        if !(self.abs_tol > 0.0 && self.abs_tol <= self.rel_tol && self.rel_tol <= 1e-3) {
            return Err(Error::InvalidInput(format!(
                "tolerances must satisfy 0 < abs ({}) <= rel ({}) <= 1e-3",
                self.abs_tol, self.rel_tol
            )));
        }
        if !(self.max_step > 0.0) || self.initial_step < 0.0 {
            return Err(Error::InvalidInput("step limits must be positive".into()));
        }
        Ok(())
    }
}

/// A first-order system `y' = f(t, y)` with an optional guarded quantity.
pub trait OdeSystem<const N: usize> {
    /// Right-hand side, `None` when the state is outside the real domain.
    fn rhs(&self, t: f64, y: &[f64; N]) -> Option<[f64; N]>;

    /// Quantity that must stay positive, and what it means when it does not.
    fn guard(&self, _t: f64, _y: &[f64; N]) -> Option<(f64, BoundaryReason)> {
        None
    }
}

/// Raw integrator output: accepted nodes with states and slopes.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub fs: Vec<[f64; N]>,
    /// `UserSpan` if the requested end was reached.
    pub end: BoundaryReason,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

struct Step<const N: usize> {
    y: [f64; N],
    f: [f64; N],
    err: f64,
}

fn try_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
    settings: &IntegratorSettings,
) -> Option<Step<N>> {
    let mut k = [[0.0; N]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let mut ys = *y;
        for (i, yi) in ys.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += A[s][j] * kj[i];
            }
            *yi += h * acc;
        }
        if ys.iter().any(|v| !v.is_finite()) {
            return None;
        }
        k[s] = sys.rhs(t + C[s] * h, &ys)?;
        if k[s].iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    // FSAL: row 6 of A are the solution weights, so stage 7 sits at y_new
    let mut y_new = *y;
    for (i, yi) in y_new.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..6 {
            acc += A[6][j] * k[j][i];
        }
        *yi += h * acc;
    }
    let mut sum = 0.0;
    for i in 0..N {
        let mut e = 0.0;
        for (j, kj) in k.iter().enumerate() {
            e += E[j] * kj[i];
        }
        let scale = settings.abs_tol + settings.rel_tol * y[i].abs().max(y_new[i].abs());
        let r = h * e / scale;
        sum += r * r;
    }
    Some(Step { y: y_new, f: k[6], err: (sum / N as f64).sqrt() })
}

fn hermite_state<const N: usize>(
    t0: f64,
    t1: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    y1: &[f64; N],
    f1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    out
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    settings: &IntegratorSettings,
) -> f64 {
    let scale = |i: usize| settings.abs_tol + settings.rel_tol * y0[i].abs();
    let d0 = (y0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    // one explicit Euler probe for the second derivative
    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h0 * f0[i];
    }
    let d2 = match sys.rhs(t0 + h0, &y1) {
        Some(f1) => {
            (f1.iter()
                .zip(f0)
                .enumerate()
                .map(|(i, (a, b))| ((a - b) / scale(i)).powi(2))
                .sum::<f64>()
                / N as f64)
                .sqrt()
                / h0
        }
        None => return h0,
    };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrate from `t0` to `t_end > t0`. Every time in `stops` inside the span
/// becomes an accepted node exactly.
pub fn solve<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    settings: &IntegratorSettings,
    stops: &[f64],
) -> Result<Solution<N>> {
    settings.validate()?;
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!("integration span [{t0}, {t_end}] is empty")));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { eta: t0 });
    }
    let f0 = sys.rhs(t0, &y0).ok_or(Error::Domain { reason: BoundaryReason::SqrtArgumentZero, at: t0 })?;
    if let Some((g, reason)) = sys.guard(t0, &y0) {
        if g <= 0.0 {
            return Err(Error::Domain { reason, at: t0 });
        }
    }
    let mut stops: Vec<f64> = stops.iter().copied().filter(|&s| s > t0 && s < t_end).collect();
    stops.sort_by(f64::total_cmp);
    stops.push(t_end);
    let mut next_stop = 0usize;

    let mut sol = Solution { ts: vec![t0], ys: vec![y0], fs: vec![f0], end: BoundaryReason::UserSpan, rejected: 0 };
    let (mut t, mut y, mut f) = (t0, y0, f0);
    let mut h = match settings.fixed_step {
        Some(step) => step,
        None if settings.initial_step > 0.0 => settings.initial_step,
        None => initial_step(sys, t0, &y0, &f0, settings),
    }
    .min(settings.max_step);
    let mut err_prev: f64 = 1e-4;
    let mut domain_rejection = false;

    for _ in 0..settings.max_steps {
        let target = stops[next_stop];
        let h_min = 1e-14 * t.abs().max(1.0);
        let mut landing = false;
        let mut h_try = h;
        if t + h_try >= target || target - (t + h_try) < h_min {
            h_try = target - t;
            landing = true;
        }
        let step = try_step(sys, t, &y, &f, h_try, settings);
        let accepted = match &step {
            None => {
                domain_rejection = true;
                false
            }
            Some(s) => settings.fixed_step.is_some() || s.err <= 1.0,
        };
        if !accepted {
            sol.rejected += 1;
            h = match &step {
                Some(s) if settings.fixed_step.is_none() => {
                    h_try * (SAFETY * s.err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0)
                }
                _ => 0.25 * h_try,
            };
            if h < h_min {
                if domain_rejection {
                    sol.end = sys.guard(t, &y).map_or(BoundaryReason::SqrtArgumentZero, |(_, r)| r);
                    return Ok(sol);
                }
                return Err(Error::StepSizeUnderflow { eta: t, h });
            }
            continue;
        }
        let step = step.expect("accepted step exists");
        let t_new = if landing { target } else { t + h_try };

        if let Some((g_new, reason)) = sys.guard(t_new, &step.y) {
            if g_new <= 0.0 {
                // bisect the guard along the Hermite interpolant of this step
                let (mut lo, mut hi) = (t, t_new);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let ym = hermite_state(t, t_new, &y, &f, &step.y, &step.f, mid);
                    match sys.guard(mid, &ym) {
                        Some((g, _)) if g > 0.0 => lo = mid,
                        _ => hi = mid,
                    }
                }
                if lo > t {
                    let ye = hermite_state(t, t_new, &y, &f, &step.y, &step.f, lo);
                    let fe = sys.rhs(lo, &ye).unwrap_or_else(|| {
                        let mut d = [0.0; N];
                        let eps = 1e-7 * (t_new - t);
                        let yb = hermite_state(t, t_new, &y, &f, &step.y, &step.f, lo - eps);
                        for i in 0..N {
                            d[i] = (ye[i] - yb[i]) / eps;
                        }
                        d
                    });
                    sol.ts.push(lo);
                    sol.ys.push(ye);
                    sol.fs.push(fe);
                }
                sol.end = reason;
                return Ok(sol);
            }
        }

        t = t_new;
        y = step.y;
        f = step.f;
        sol.ts.push(t);
        sol.ys.push(y);
        sol.fs.push(f);
        domain_rejection = false;
        if landing {
            next_stop += 1;
            if next_stop == stops.len() {
                return Ok(sol);
            }
        }
        h = match settings.fixed_step {
            Some(step) => step,
            None => {
                let err = step.err.max(1e-10);
                let factor = (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR);
                err_prev = err;
                // the landing step may have been truncated
                if landing { h.max(h_try) * factor } else { h_try * factor }
            }
        }
        .min(settings.max_step);
    }
    Err(Error::StepSizeUnderflow { eta: t, h })
}
