//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check or comparison failed, 2 bad input.

pub mod csv;
pub mod figures;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::closed_form::{
    chiellini_scale_factor, damped_v, damping_along, harmonic_pair, pinney_v, reduced_u, standard_scale_factor,
    u_mode, Branch, Jet,
};
use crate::error::{Error, Result};
use crate::observables::{observable_series, ScaleSource};
use crate::ode::{integrate_through, EquationId, IntegratorSettings};
use crate::params::{Curvature, EPConfig, Fluid};
use crate::validation::{run_suite, Fault};
use figures::{figure_panels, FigureOptions};
use scenario::{parse_real, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

/// Integrator tolerance used by `compare`.
pub const COMPARE_INTEGRATOR_TOL: f64 = 1e-11;

#[derive(Parser, Debug)]
#[command(name = "frw-chiellini", version, about = "Barotropic FRW cosmologies with Chiellini damping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a closed-form quantity on the scenario grid
    Eval {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// Scale factor used by `scale`, `q` and `rho`
        #[arg(long, value_enum, default_value_t = Family::Standard)]
        family: Family,
        /// Override the scenario's adiabatic index
        #[arg(long)]
        gamma: Option<String>,
        /// Write `<name>_<quantity>.csv` here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate an equation from closed-form initial data and compare
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_parser = parse_equation)]
        equation: EquationId,
        #[arg(long)]
        gamma: Option<String>,
        /// Largest acceptable deviation
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Write the figure data files
    Figures {
        #[arg(long)]
        out: PathBuf,
        /// Adiabatic indices to plot instead of dust, radiation and vacuum
        #[arg(long)]
        gamma: Vec<String>,
        #[arg(long, default_value_t = 3.0)]
        half_width: f64,
        #[arg(long, default_value_t = 600)]
        samples: usize,
    },
    /// Run the invariant suite
    Validate {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Scale,
    U,
    V,
    Damped,
    Reduced,
    G,
    Q,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Standard,
    Chiellini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    FlipDampingSign,
}

fn parse_equation(s: &str) -> std::result::Result<EquationId, String> {
    EquationId::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
        let names: Vec<_> = EquationId::ALL.iter().map(|e| e.name()).collect();
        format!("unknown equation {s:?}; expected one of {}", names.join(", "))
    })
}

/// Parse `args` (program name first) and run, writing to the given streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_BAD_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Eval { scenario, quantity, family, gamma, out: dir } => {
            load(&scenario, gamma.as_deref()).and_then(|s| cmd_eval(&s, quantity, family, dir.as_deref(), out))
        }
        Command::Compare { scenario, equation, gamma, tol } => {
            load(&scenario, gamma.as_deref()).and_then(|s| cmd_compare(&s, equation, tol, out))
        }
        Command::Figures { out: dir, gamma, half_width, samples } => {
            figure_options(&gamma, half_width, samples).and_then(|o| cmd_figures(&dir, &o, out))
        }
        Command::Validate { inject_fault } => {
            let fault = match inject_fault {
                Some(FaultArg::FlipDampingSign) => Fault::FlipDampingSign,
                None => Fault::None,
            };
            cmd_validate(fault, out)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_BAD_INPUT
        }
    }
}

/// Entry point for the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn load(path: &Path, gamma: Option<&str>) -> Result<Scenario> {
    let s = Scenario::load(path)?;
    match gamma {
        Some(g) => s.with_gamma(parse_real(g)?),
        None => Ok(s),
    }
}

fn figure_options(gammas: &[String], half_width: f64, samples: usize) -> Result<FigureOptions> {
    let mut opts = FigureOptions::default();
    if !gammas.is_empty() {
        let fluids = gammas.iter().map(|g| Fluid::new(parse_real(g)?)).collect::<Result<Vec<_>>>()?;
        opts.q_fluids = fluids.clone();
        opts.fluids = fluids;
    }
    if !(half_width > 0.0 && half_width.is_finite()) || samples < 2 {
        return Err(Error::InvalidInput("need half-width > 0 and at least 2 samples".into()));
    }
    opts.half_width = half_width;
    opts.samples = samples;
    Ok(opts)
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::Scale => "scale",
        Quantity::U => "u",
        Quantity::V => "v",
        Quantity::Damped => "damped",
        Quantity::Reduced => "reduced",
        Quantity::G => "g",
        Quantity::Q => "q",
        Quantity::Rho => "rho",
    }
}

/// CSV text for one closed-form quantity over the scenario grid.
pub fn eval_csv(s: &Scenario, quantity: Quantity, family: Family) -> Result<String> {
    let cfg = s.config()?;
    let etas = s.grid();
    let mut text = String::new();
    match quantity {
        Quantity::Q | Quantity::Rho => {
            text.push_str(&csv::header(csv::OBSERVABLE_HEADER, false));
            let source = match family {
                Family::Standard => ScaleSource::Standard(&cfg),
                Family::Chiellini => ScaleSource::Chiellini(&cfg),
            };
            for row in observable_series(source, &etas) {
                csv::observable_row(&mut text, None, &row);
            }
        }
        _ => {
            text.push_str(&csv::header(csv::QUANTITY_HEADER, false));
            let jets: Vec<Option<Jet>> = crate::par::map(&etas, |&eta| quantity_jet(&cfg, quantity, family, eta).ok());
            for (&eta, jet) in etas.iter().zip(jets) {
                csv::quantity_row(&mut text, None, eta, jet);
            }
        }
    }
    Ok(text)
}

fn quantity_jet(cfg: &EPConfig, quantity: Quantity, family: Family, eta: f64) -> Result<Jet> {
    match quantity {
        Quantity::Scale => match family {
            Family::Standard => standard_scale_factor(cfg.curvature, cfg.fluid, eta, cfg.eta0),
            Family::Chiellini => chiellini_scale_factor(cfg, eta),
        },
        Quantity::U => Ok(u_mode(cfg.curvature, cfg.fluid, eta, cfg.eta0, Branch::First)),
        Quantity::V => pinney_v(cfg, eta),
        Quantity::Damped => damped_v(cfg, eta),
        Quantity::Reduced => reduced_u(cfg, eta),
        Quantity::G => damping_along(cfg, eta),
        Quantity::Q | Quantity::Rho => unreachable!("observable quantities use the series path"),
    }
}

fn cmd_eval(s: &Scenario, quantity: Quantity, family: Family, dir: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let text = eval_csv(s, quantity, family)?;
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join(format!("{}_{}.csv", s.name, quantity_name(quantity))), text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

/// Closed form against which `eq` is compared; for the Riccati equation the
/// jet holds `H`, `H'`, `H''` of the standard scale factor.
pub fn reference_solution(eq: EquationId, cfg: &EPConfig, eta: f64) -> Result<Jet> {
    match eq {
        EquationId::ScaleFactor => standard_scale_factor(cfg.curvature, cfg.fluid, eta, cfg.eta0),
        EquationId::ChielliniScaleFactor => chiellini_scale_factor(cfg, eta),
        EquationId::Riccati => {
            let a = standard_scale_factor(cfg.curvature, cfg.fluid, eta, cfg.eta0)?;
            let h = a.d1 / a.value;
            let dh = a.d2 / a.value - h * h;
            let gb = cfg.gamma_bar();
            Ok(Jet::new(h, dh, -2.0 * gb * h * dh))
        }
        EquationId::LinearU => Ok(u_mode(cfg.curvature, cfg.fluid, eta, cfg.eta0, Branch::First)),
        EquationId::ErmakovPinney => pinney_v(cfg, eta),
        EquationId::DampedEP | EquationId::UndampedScaled => {
            if cfg.k == 0.0 {
                reduced_u(cfg, eta)
            } else {
                damped_v(cfg, eta)
            }
        }
        EquationId::ReducedDamped => {
            let reduced = EPConfig { k: 0.0, ..*cfg };
            if cfg.curvature == Curvature::Closed {
                Ok(harmonic_pair(cfg.fluid, cfg.c1, eta, cfg.eta0)?.0)
            } else {
                reduced_u(&reduced, eta)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub compared: usize,
    pub total: usize,
    pub max: f64,
    pub mean: f64,
    pub window: crate::params::ValidityWindow,
}

/// Integrate `eq` from the closed form at the first grid point and measure
/// the deviation from the closed form at every grid point reached.
pub fn compare(s: &Scenario, eq: EquationId) -> Result<Comparison> {
    let cfg = s.config()?;
    let etas = s.grid();
    let start = reference_solution(eq, &cfg, s.eta_min)?;
    let y0: Vec<f64> = if eq == EquationId::Riccati { vec![start.value] } else { vec![start.value, start.d1] };
    let settings = IntegratorSettings::with_tolerance(COMPARE_INTEGRATOR_TOL);
    let tr = integrate_through(eq, &cfg, &y0, (s.eta_min, s.eta_max), &settings, &etas)?;
    let (mut max, mut sum, mut compared) = (0.0f64, 0.0, 0);
    for &eta in &etas {
        let (Some(num), Ok(exact)) = (tr.value_at(eta), reference_solution(eq, &cfg, eta)) else { continue };
        let d = (num - exact.value).abs();
        max = max.max(d);
        sum += d;
        compared += 1;
    }
    let mean = if compared > 0 { sum / compared as f64 } else { f64::NAN };
    Ok(Comparison { compared, total: etas.len(), max, mean, window: tr.window })
}

fn cmd_compare(s: &Scenario, eq: EquationId, tol: f64, out: &mut dyn Write) -> Result<i32> {
    let c = compare(s, eq)?;
    writeln!(out, "scenario: {}", s.name)?;
    writeln!(out, "equation: {eq}")?;
    writeln!(out, "points compared: {} of {}", c.compared, c.total)?;
    writeln!(out, "max deviation: {:.3e}", c.max)?;
    writeln!(out, "mean deviation: {:.3e}", c.mean)?;
    writeln!(out, "integrated over: [{}, {}] (end: {})", c.window.lo, c.window.hi, c.window.reason)?;
    if c.window.hi < s.eta_max {
        writeln!(out, "integration stopped early at eta = {} ({})", c.window.hi, c.window.reason)?;
    }
    let pass = c.compared > 0 && c.max <= tol;
    writeln!(out, "result: {} (tolerance {tol:e})", if pass { "PASS" } else { "FAIL" })?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_figures(dir: &Path, opts: &FigureOptions, out: &mut dyn Write) -> Result<i32> {
    std::fs::create_dir_all(dir)?;
    for panel in figure_panels(opts) {
        std::fs::write(dir.join(&panel.file), &panel.contents)?;
        writeln!(out, "wrote {}", dir.join(&panel.file).display())?;
    }
    Ok(EXIT_OK)
}

fn cmd_validate(fault: Fault, out: &mut dyn Write) -> Result<i32> {
    let reports = run_suite(fault);
    let mut failed = 0;
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {:<22} {:.3e} (limit {:.1e})  {}", r.name, r.value, r.threshold, r.detail)?;
        failed += usize::from(!r.passed);
    }
    writeln!(out, "{} of {} properties passed", reports.len() - failed, reports.len())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}
