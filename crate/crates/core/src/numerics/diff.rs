use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Central difference of `f` at `x` with step `h`.
///
/// First derivative uses the two-point stencil `(f(x+h) - f(x-h)) / 2h`,
/// second derivative the three-point stencil; both are O(h²). Errors from
/// `f` (e.g. a stencil point leaving the field's domain) are passed through.
pub fn differentiate<F>(f: F, x: f64, h: f64, order: DerivativeOrder) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let plus = f(x + h)?;
    let minus = f(x - h)?;
    match order {
        DerivativeOrder::First => Ok((plus - minus) / (2.0 * h)),
        DerivativeOrder::Second => {
            let center = f(x)?;
            Ok((plus - 2.0 * center + minus) / (h * h))
        }
    }
}
