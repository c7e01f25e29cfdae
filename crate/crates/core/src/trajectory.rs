//! Sampled solutions with cubic Hermite dense output.

use crate::error::{Error, Result};
use crate::params::ValidityWindow;

/// A sampled solution `(eta_i, value_i, value'_i)` over its validity window.
///
/// `second`, when present, holds `value''` at the nodes and is used to
/// interpolate the first derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub etas: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub second: Option<Vec<f64>>,
    pub window: ValidityWindow,
}

fn hermite(t0: f64, t1: f64, y0: f64, m0: f64, y1: f64, m1: f64, t: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = dh00 * y0 + dh10 * m0 + dh01 * y1 + dh11 * m1;
    (value, deriv)
}

impl Trajectory {
    /// Build a trajectory, checking that the nodes are strictly increasing,
    /// the columns have equal length and every entry is finite.
    pub fn new(
        etas: Vec<f64>,
        values: Vec<f64>,
        derivs: Vec<f64>,
        second: Option<Vec<f64>>,
        window: ValidityWindow,
    ) -> Result<Self> {
        let n = etas.len();
        if n == 0 || values.len() != n || derivs.len() != n || second.as_ref().is_some_and(|s| s.len() != n) {
            return Err(Error::InvalidInput("trajectory columns must be non-empty and of equal length".into()));
        }
        if etas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("trajectory times must be strictly increasing".into()));
        }
        let finite = |v: &Vec<f64>| v.iter().all(|x| x.is_finite());
        if !(finite(&etas) && finite(&values) && finite(&derivs) && second.as_ref().is_none_or(finite)) {
            return Err(Error::InvalidInput("trajectory entries must be finite".into()));
        }
        Ok(Trajectory { etas, values, derivs, second, window })
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    pub fn first_eta(&self) -> f64 {
        self.etas[0]
    }

    pub fn last_eta(&self) -> f64 {
        *self.etas.last().expect("non-empty")
    }

    fn segment(&self, eta: f64) -> Option<usize> {
        if eta < self.first_eta() || eta > self.last_eta() {
            return None;
        }
        if self.len() == 1 {
            return Some(0);
        }
        let i = self.etas.partition_point(|&t| t <= eta);
        Some(i.saturating_sub(1).min(self.len() - 2))
    }

    /// Value and first derivative at `eta`, by cubic Hermite interpolation
    /// between the surrounding nodes. `None` outside the sampled range.
    pub fn eval(&self, eta: f64) -> Option<(f64, f64)> {
        let i = self.segment(eta)?;
        if self.len() == 1 {
            return Some((self.values[0], self.derivs[0]));
        }
        let (t0, t1) = (self.etas[i], self.etas[i + 1]);
        if eta == t0 {
            return Some((self.values[i], self.derivs[i]));
        }
        if eta == t1 {
            return Some((self.values[i + 1], self.derivs[i + 1]));
        }
        let (value, slope) = hermite(t0, t1, self.values[i], self.derivs[i], self.values[i + 1], self.derivs[i + 1], eta);
        let deriv = match &self.second {
            Some(s) => hermite(t0, t1, self.derivs[i], s[i], self.derivs[i + 1], s[i + 1], eta).0,
            None => slope,
        };
        Some((value, deriv))
    }

    pub fn value_at(&self, eta: f64) -> Option<f64> {
        self.eval(eta).map(|(v, _)| v)
    }

    pub fn deriv_at(&self, eta: f64) -> Option<f64> {
        self.eval(eta).map(|(_, d)| d)
    }

    /// Second derivative at `eta`: Hermite-interpolated when node values
    /// are stored, otherwise the slope of the first-derivative interpolant.
    pub fn second_at(&self, eta: f64) -> Option<f64> {
        let i = self.segment(eta)?;
        if self.len() == 1 {
            return self.second.as_ref().map(|s| s[0]);
        }
        let (t0, t1) = (self.etas[i], self.etas[i + 1]);
        match &self.second {
            Some(s) => {
                // linear in the second derivative keeps this consistent with the cubic in derivs
                let w = (eta - t0) / (t1 - t0);
                Some(s[i] * (1.0 - w) + s[i + 1] * w)
            }
            None => {
                let (_, d) = hermite(t0, t1, self.derivs[i], 0.0, self.derivs[i + 1], 0.0, eta);
                Some(d)
            }
        }
    }
}
