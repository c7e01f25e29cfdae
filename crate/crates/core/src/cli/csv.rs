//! Deterministic CSV output.

use std::fmt::Write as _;

use crate::closed_form::Jet;
use crate::observables::ObservableRow;

pub const QUANTITY_HEADER: &str = "eta,value,deriv1,deriv2,flag";
pub const OBSERVABLE_HEADER: &str = "eta,a,a1,a2,H,q,rho,flag";

/// 17 significant digits; undefined values become empty fields.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn prefix(out: &mut String, series: Option<&str>) {
    if let Some(s) = series {
        out.push_str(s);
        out.push(',');
    }
}

pub fn header(base: &str, with_series: bool) -> String {
    if with_series {
        format!("series,{base}\n")
    } else {
        format!("{base}\n")
    }
}

/// One row of the single-quantity schema; `None` marks a domain failure.
pub fn quantity_row(out: &mut String, series: Option<&str>, eta: f64, jet: Option<Jet>) {
    prefix(out, series);
    match jet.filter(Jet::is_finite) {
        Some(j) => {
            let _ = writeln!(out, "{},{},{},{},", number(eta), number(j.value), number(j.d1), number(j.d2));
        }
        None => {
            let _ = writeln!(out, "{},,,,domain", number(eta));
        }
    }
}

pub fn observable_row(out: &mut String, series: Option<&str>, row: &ObservableRow) {
    prefix(out, series);
    let flag = row.flag.map_or("", |f| f.as_str());
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        number(row.eta),
        number(row.a),
        number(row.a1),
        number(row.a2),
        number(row.hubble),
        row.q.map_or(String::new(), number),
        number(row.rho),
        flag
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(number(1.0), "1.0000000000000000e0");
        assert_eq!(number(f64::NAN), "");
        let mut s = String::new();
        quantity_row(&mut s, Some("x"), 0.5, None);
        assert_eq!(s, "x,5.0000000000000000e-1,,,,domain\n");
    }
}
