//! Quadrature, finite differences, interpolation and grids shared by the
//! rest of the crate.

mod diff;
mod grid;
mod interp;
mod quadrature;

pub use diff::{differentiate, DerivativeOrder};
pub use grid::{make_radial_grid, Grading, RadialGrid, TimeLadder, TimeLevel};
pub use interp::CubicHermite;
pub use quadrature::{integrate, integrate_with_breaks, Integral, QuadratureSpec};

/// Axis cutoff: below this self-similar radius series surrogates replace
/// the 0/0 closed forms.
pub const AXIS_EPS: f64 = 1e-4;

/// Ordinary least squares fit `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LinearFit {
        intercept,
        slope,
        r_squared,
        slope_stderr,
    })
}
