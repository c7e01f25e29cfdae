//! Data behind the four figure panels.

use std::f64::consts::FRAC_PI_3;

use super::csv;
use crate::closed_form::{chiellini_scale_factor, damping_along, standard_scale_factor};
use crate::observables::{observable_series, ScaleSource};
use crate::par;
use crate::params::{Curvature, EPConfig, Fluid};

#[derive(Debug, Clone)]
pub struct FigureOptions {
    /// Fluids for figures 1, 2 and 4.
    pub fluids: Vec<Fluid>,
    /// Fluids for figure 3.
    pub q_fluids: Vec<Fluid>,
    /// Panels cover `[eta0 - half_width, eta0 + half_width]`.
    pub half_width: f64,
    pub samples: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            fluids: vec![Fluid::dust(), Fluid::radiation(), Fluid::vacuum()],
            q_fluids: vec![Fluid::radiation(), Fluid::dust()],
            half_width: 3.0,
            samples: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    /// File name, without directory.
    pub file: String,
    pub contents: String,
}

pub fn fluid_label(f: &Fluid) -> String {
    match f.label() {
        Some(l) => l.to_string(),
        None => format!("gamma-{}", f.gamma()),
    }
}

/// `c1` of the scale-factor and damping figures.
pub fn scale_c1(curvature: Curvature) -> f64 {
    match curvature {
        Curvature::Flat => 1.25,
        _ => 1.0 / 16.0,
    }
}

/// `c1` of the deceleration and density figures.
pub const OBSERVABLE_C1: f64 = 1.0 / 16.0;

/// Initial phase of the deceleration and density figures.
pub fn observable_eta0(curvature: Curvature) -> f64 {
    match curvature {
        Curvature::Closed => FRAC_PI_3,
        _ => 0.0,
    }
}

fn grid(eta0: f64, opts: &FigureOptions) -> Vec<f64> {
    let (lo, n) = (eta0 - opts.half_width, opts.samples);
    let step = 2.0 * opts.half_width / n as f64;
    (0..n).map(|i| lo + step * (i as f64 + 0.5)).collect()
}

enum PanelKind {
    Scale(Curvature),
    Damping(Curvature),
    Deceleration(Curvature),
    Density(Curvature),
}

fn render(kind: &PanelKind, opts: &FigureOptions) -> Panel {
    let mut out = String::new();
    let (file, curvature) = match kind {
        PanelKind::Scale(c) => ("fig1", *c),
        PanelKind::Damping(c) => ("fig2", *c),
        PanelKind::Deceleration(c) => ("fig3", *c),
        PanelKind::Density(c) => ("fig4", *c),
    };
    match kind {
        PanelKind::Scale(_) | PanelKind::Damping(_) => {
            out.push_str(&csv::header(csv::QUANTITY_HEADER, true));
            let etas = grid(0.0, opts);
            for f in &opts.fluids {
                let cfg = EPConfig::reduced(curvature, *f, scale_c1(curvature), 0.0);
                let label = fluid_label(f);
                if let PanelKind::Scale(_) = kind {
                    let series = format!("chiellini-{label}");
                    for &eta in &etas {
                        csv::quantity_row(&mut out, Some(&series), eta, chiellini_scale_factor(&cfg, eta).ok());
                    }
                    let series = format!("standard-{label}");
                    for &eta in &etas {
                        let a = standard_scale_factor(curvature, *f, eta, 0.0).ok();
                        csv::quantity_row(&mut out, Some(&series), eta, a);
                    }
                } else {
                    let series = format!("g-{label}");
                    for &eta in &etas {
                        csv::quantity_row(&mut out, Some(&series), eta, damping_along(&cfg, eta).ok());
                    }
                }
            }
        }
        PanelKind::Deceleration(_) | PanelKind::Density(_) => {
            out.push_str(&csv::header(csv::OBSERVABLE_HEADER, true));
            let eta0 = observable_eta0(curvature);
            let etas = grid(eta0, opts);
            let fluids = if let PanelKind::Deceleration(_) = kind { &opts.q_fluids } else { &opts.fluids };
            for f in fluids {
                let cfg = EPConfig::reduced(curvature, *f, OBSERVABLE_C1, eta0);
                let label = fluid_label(f);
                for (name, source) in [("chiellini", ScaleSource::Chiellini(&cfg)), ("standard", ScaleSource::Standard(&cfg))] {
                    let series = format!("{name}-{label}");
                    for row in observable_series(source, &etas) {
                        csv::observable_row(&mut out, Some(&series), &row);
                    }
                }
            }
        }
    }
    Panel { file: format!("{file}_{}.csv", curvature.name()), contents: out }
}

/// All panels, computed in parallel, in a fixed order.
pub fn figure_panels(opts: &FigureOptions) -> Vec<Panel> {
    let mut kinds = Vec::new();
    for c in Curvature::ALL {
        kinds.push(PanelKind::Scale(c));
    }
    kinds.push(PanelKind::Damping(Curvature::Open));
    kinds.push(PanelKind::Damping(Curvature::Closed));
    for c in Curvature::ALL {
        kinds.push(PanelKind::Deceleration(c));
    }
    for c in Curvature::ALL {
        kinds.push(PanelKind::Density(c));
    }
    par::map(&kinds, |s| render(s, opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_panels_with_headers() {
        let opts = FigureOptions { samples: 8, ..Default::default() };
        let panels = figure_panels(&opts);
        assert_eq!(panels.len(), 11);
        assert_eq!(panels[0].file, "fig1_open.csv");
        assert!(panels[3].file == "fig2_open.csv" && panels[4].file == "fig2_closed.csv");
        assert!(panels[5].contents.starts_with("series,eta,a,a1,a2,H,q,rho,flag\n"));
        // 3 fluids x 2 series x 8 samples + header
        assert_eq!(panels[0].contents.lines().count(), 49);
    }
}
