//! Piecewise cubic Hermite interpolation on a sorted node set.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl CubicHermite {
    /// Interpolant with prescribed slopes at the nodes.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() || x.len() != dy.len() {
            return Err(Error::InvalidArgument(
                "hermite interpolation needs >= 2 nodes and matching value/slope lengths".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "interpolation nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self { x, y, dy })
    }

    /// Monotone (Fritsch–Carlson) slopes: the interpolant does not overshoot
    /// the data, so sign constraints on the samples carry over.
    pub fn monotone(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || n != y.len() {
            return Err(Error::InvalidArgument(
                "monotone interpolation needs >= 2 nodes and matching lengths".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "interpolation nodes must be strictly increasing".into(),
            ));
        }
        let secants: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut dy = vec![0.0; n];
        dy[0] = secants[0];
        dy[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            dy[i] = if a * b <= 0.0 {
                0.0
            } else {
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / a + w2 / b)
            };
        }
        for (i, s) in secants.iter().enumerate() {
            if *s == 0.0 {
                dy[i] = 0.0;
                dy[i + 1] = 0.0;
            }
        }
        Ok(Self { x, y, dy })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value and first derivative; arguments are clamped to the node range.
    pub fn eval_with_slope(&self, at: f64) -> (f64, f64) {
        let (lo, hi) = self.domain();
        let at = at.clamp(lo, hi);
        let i = match self.x.binary_search_by(|v| v.total_cmp(&at)) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (at - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.dy[i] * h, self.dy[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let slope = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
        (value, slope)
    }

    pub fn eval(&self, at: f64) -> f64 {
        self.eval_with_slope(at).0
    }
}
