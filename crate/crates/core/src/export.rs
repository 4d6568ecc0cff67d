//! Plot-ready tables. Every number is written in scientific notation with 17
//! significant digits so that a CSV round-trips the `f64` exactly.

use std::io;

use serde::Serialize;

use crate::error::Result;
use crate::fields::SolutionFamily;
use crate::norms::NormSeries;
use crate::numerics::QuadratureSpec;
use crate::oracle::{exact_value, OracleSolution, OracleTarget};
use crate::profiles::{EvalPath, SwirlProfile};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Panics when the row width differs from the header.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|&x| format_number(x)))?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// Columns r, phi0, phi0_prime, phi0_second, ode_residual.
pub fn profile_table(profile: &SwirlProfile, radii: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["r", "phi0", "phi0_prime", "phi0_second", "ode_residual"]);
    for &r in radii {
        let jet = profile.jet(r, EvalPath::Direct)?;
        t.push(vec![
            r,
            jet.phi0,
            jet.phi0_prime,
            jet.phi0_second,
            profile.ode_residual(r)?,
        ]);
    }
    Ok(t)
}

/// Field slice at time `t`. Quantities undefined at a point (η and v̄ in
/// part one, Y on the axis) are written as NaN.
pub fn field_slice(fam: &SolutionFamily, t: f64, radii: &[f64], spec: &QuadratureSpec) -> Result<Table> {
    let mut table = Table::new(&[
        "r", "t", "sigma", "u", "v", "eta", "vbar", "P", "h", "Y1", "Y2", "Y3", "Y4",
    ]);
    for &r in radii {
        let s = fam.sample(r, t, spec)?;
        let y = s.y.map(|y| y.as_array()).unwrap_or([f64::NAN; 4]);
        table.push(vec![
            s.r,
            s.t,
            s.sigma,
            s.u,
            s.v,
            s.eta.unwrap_or(f64::NAN),
            s.vbar.unwrap_or(f64::NAN),
            s.pressure,
            s.h,
            y[0],
            y[1],
            y[2],
            y[3],
        ]);
    }
    Ok(table)
}

/// Columns j, t_j, T_minus_t, value, normalizer, ratio.
pub fn norm_series_table(series: &NormSeries) -> Table {
    let mut t = Table::new(&["j", "t_j", "T_minus_t", "value", "normalizer", "ratio"]);
    for (((level, &value), &norm), ratio) in series
        .levels
        .iter()
        .zip(&series.values)
        .zip(&series.normalizers)
        .zip(series.ratios())
    {
        t.push(vec![level.j as f64, level.t, level.remaining, value, norm, ratio]);
    }
    t
}

/// Columns t, r, phi_numeric, phi_exact, abs_error over every snapshot.
pub fn trajectory_table(fam: &SolutionFamily, target: OracleTarget, sol: &OracleSolution) -> Result<Table> {
    let mut table = Table::new(&["t", "r", "phi_numeric", "phi_exact", "abs_error"]);
    for (&t, snap) in sol.times.iter().zip(&sol.snapshots) {
        for (&r, &v) in sol.radii.iter().zip(snap) {
            let exact = exact_value(fam, target, r, t)?;
            table.push(vec![t, r, v, exact, (v - exact).abs()]);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -6.159_692_896_014_062e-3, 1e-300, 12345.678, 0.0] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(s.contains('e'));
        }
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, 2.0]);
        let s = t.to_csv_string();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("a,b"));
        assert_eq!(lines.next(), Some("1.0000000000000000e0,2.0000000000000000e0"));
        assert_eq!(t.column("b"), Some(vec![2.0]));
    }
}
