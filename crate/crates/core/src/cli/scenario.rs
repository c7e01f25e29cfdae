//! `key = value` scenario files.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{validate_config, Curvature, EPConfig, Fluid};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub curvature: Curvature,
    pub gamma: f64,
    pub k: f64,
    pub c1: f64,
    pub eta0: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub samples: usize,
}

const KEYS: [&str; 9] = ["name", "curvature", "gamma", "k", "c1", "eta0", "eta_min", "eta_max", "samples"];

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn parse_atom(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('-') {
        return parse_atom(rest).map(|v| -v);
    }
    if s == "pi" {
        return Some(PI);
    }
    if let Some(coef) = s.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        return coef.parse::<f64>().ok().map(|c| c * PI);
    }
    s.parse::<f64>().ok()
}

/// A real number written as a decimal, `pi`, `2*pi`, or a quotient of those
/// such as `4/3` or `pi/3`.
pub fn parse_real(s: &str) -> Result<f64> {
    let value = match s.split_once('/') {
        Some((num, den)) => match (parse_atom(num), parse_atom(den)) {
            (Some(n), Some(d)) if d != 0.0 => Some(n / d),
            _ => None,
        },
        None => parse_atom(s),
    };
    value.filter(|v| v.is_finite()).ok_or_else(|| bad(format!("not a real number: {s:?}")))
}

fn parse_curvature(s: &str) -> Result<Curvature> {
    match s.trim() {
        "open" => Ok(Curvature::Open),
        "flat" => Ok(Curvature::Flat),
        "closed" => Ok(Curvature::Closed),
        other => {
            let i: i64 = other.trim_start_matches('+').parse().map_err(|_| bad(format!("bad curvature {other:?}")))?;
            Curvature::from_index(i)
        }
    }
}

impl Scenario {
    pub fn parse(text: &str, default_name: &str) -> Result<Self> {
        let mut map: HashMap<&str, &str> = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| bad(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(bad(format!("line {}: unknown key {key:?}", n + 1)));
            }
            if map.insert(key, value.trim()).is_some() {
                return Err(bad(format!("line {}: duplicate key {key:?}", n + 1)));
            }
        }
        let required = |key: &str| map.get(key).copied().ok_or_else(|| bad(format!("missing key {key:?}")));
        let real_or = |key: &str, default: f64| map.get(key).map_or(Ok(default), |v| parse_real(v));
        let samples_raw = required("samples")?;
        let samples: usize = samples_raw.parse().map_err(|_| bad(format!("bad samples {samples_raw:?}")))?;
        let scenario = Scenario {
            name: map.get("name").map_or_else(|| default_name.to_string(), |s| s.to_string()),
            curvature: parse_curvature(required("curvature")?)?,
            gamma: parse_real(required("gamma")?)?,
            k: real_or("k", 0.0)?,
            c1: parse_real(required("c1")?)?,
            eta0: real_or("eta0", 0.0)?,
            eta_min: parse_real(required("eta_min")?)?,
            eta_max: parse_real(required("eta_max")?)?,
            samples,
        };
        scenario.check()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::parse(&text, stem)
    }

    fn check(&self) -> Result<()> {
        if !(self.eta_min < self.eta_max) {
            return Err(bad("eta_min must be below eta_max"));
        }
        if self.samples < 2 {
            return Err(bad("samples must be at least 2"));
        }
        validate_config(&self.config()?)?;
        Ok(())
    }

    pub fn fluid(&self) -> Result<Fluid> {
        Fluid::new(self.gamma)
    }

    pub fn config(&self) -> Result<EPConfig> {
        Ok(EPConfig::new(self.curvature, self.fluid()?, self.k, self.c1, self.eta0))
    }

    /// `samples` equally spaced times from `eta_min` to `eta_max`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n).map(|i| self.eta_min + (self.eta_max - self.eta_min) * i as f64 / (n - 1) as f64).collect()
    }

    /// The same scenario with another adiabatic index, revalidated.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let s = Scenario { gamma, ..self.clone() };
        s.check()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("4/3").unwrap(), 4.0 / 3.0);
        assert_eq!(parse_real("pi/3").unwrap(), PI / 3.0);
        assert_eq!(parse_real("-2*pi").unwrap(), -2.0 * PI);
        assert_eq!(parse_real("1e-3").unwrap(), 1e-3);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
    }

    #[test]
    fn full_file() {
        let s = Scenario::parse(
            "# closed radiation\ncurvature = 1\ngamma = 4/3\nc1 = 1/16\neta0 = pi/3\neta_min = 0\neta_max = 2\nsamples = 5\n",
            "x",
        )
        .unwrap();
        assert_eq!(s.name, "x");
        assert_eq!(s.curvature, Curvature::Closed);
        assert_eq!(s.k, 0.0);
        assert_eq!(s.grid().len(), 5);
    }

    #[test]
    fn rejections() {
        let base = "curvature = 0\ngamma = 1\nc1 = 1\neta_min = 0\neta_max = 1\nsamples = 3\n";
        assert!(Scenario::parse(base, "x").is_ok());
        assert!(Scenario::parse(&format!("{base}colour = red\n"), "x").is_err());
        assert!(Scenario::parse(&format!("{base}gamma = 2\n"), "x").is_err());
        assert!(Scenario::parse(&base.replace("samples = 3", "samples = 1"), "x").is_err());
        assert!(Scenario::parse(&base.replace("gamma = 1", "gamma = 2/3"), "x").is_err());
        assert!(Scenario::parse(&base.replace("c1 = 1", "c1 = 0"), "x").is_err());
    }
}
