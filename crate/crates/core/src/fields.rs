//! Closed-form swirl, pressure and forcing fields built from a profile.
//!
//! With `L = √(2(T − t))` and `σ = r/L` the self-similar swirl is
//! `φ(r, t) = φ₀(σ)/L = g(σ)/r`. For r ≥ L the profile is already in its
//! `−α/σ` regime, so φ = −α/r there and does not depend on t.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breaks, QuadratureSpec, AXIS_EPS};
use crate::profiles::{EvalPath, SwirlProfile};

/// Which member of the family is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    /// Swirl `v = u + αr` driven by the forcing h.
    One,
    /// Logarithmic swirl `v̄ = ln(1 + u) − ln(1 − α) r`; needs k ≤ 0, k ≢ 0.
    Two,
}

/// Scalar swirl-type quantities that can be evaluated on the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Swirl {
    U,
    V,
    Eta,
    VBar,
}

impl Swirl {
    pub fn name(self) -> &'static str {
        match self {
            Swirl::U => "u",
            Swirl::V => "v",
            Swirl::Eta => "eta",
            Swirl::VBar => "vbar",
        }
    }

    fn needs_part_two(self) -> bool {
        matches!(self, Swirl::Eta | Swirl::VBar)
    }
}

/// The four pieces of the forcing Y for the logarithmic swirl.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YParts {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub y4: f64,
}

impl YParts {
    pub fn total(&self) -> f64 {
        self.y1 + self.y2 + self.y3 + self.y4
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.y1, self.y2, self.y3, self.y4]
    }
}

/// Velocity in cylindrical components; the swirl is the only nonzero one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VectorFieldValue {
    pub radial: f64,
    pub swirl: f64,
    pub vertical: f64,
}

/// Every field of the family at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub r: f64,
    pub t: f64,
    pub sigma: f64,
    pub u: f64,
    pub v: f64,
    pub eta: Option<f64>,
    pub vbar: Option<f64>,
    pub pressure: f64,
    pub h: f64,
    pub y: Option<YParts>,
}

/// φ and ∂_rφ at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwirlJet {
    pub phi: f64,
    pub phi_r: f64,
}

/// The explicit solution family for a fixed profile and blow-up time.
#[derive(Debug, Clone)]
pub struct SolutionFamily {
    profile: Arc<SwirlProfile>,
    final_time: f64,
    part: Part,
    path: EvalPath,
}

impl SolutionFamily {
    pub fn new(profile: Arc<SwirlProfile>, final_time: f64, part: Part) -> Result<Self> {
        if !(final_time > 0.0 && final_time <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "blow-up time must lie in (0, 1/2], got {final_time}"
            )));
        }
        if part == Part::Two && !profile.forcing().admits_log_construction() {
            return Err(Error::InvalidArgument(
                "the logarithmic swirl needs k <= 0 and k not identically zero".into(),
            ));
        }
        Ok(Self {
            profile,
            final_time,
            part,
            path: EvalPath::default(),
        })
    }

    pub fn with_path(mut self, path: EvalPath) -> Self {
        self.path = path;
        self
    }

    pub fn profile(&self) -> &SwirlProfile {
        &self.profile
    }

    pub fn shared_profile(&self) -> Arc<SwirlProfile> {
        Arc::clone(&self.profile)
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn part(&self) -> Part {
        self.part
    }

    pub fn path(&self) -> EvalPath {
        self.path
    }

    pub fn alpha(&self) -> f64 {
        self.profile.alpha()
    }

    /// T − t, rejecting times at or past blow-up.
    pub fn remaining(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
        }
        if t >= self.final_time {
            return Err(Error::BlowUpTime {
                t,
                final_time: self.final_time,
            });
        }
        Ok(self.final_time - t)
    }

    /// Self-similar length L = √(2(T − t)).
    pub fn scale(&self, t: f64) -> Result<f64> {
        Ok((2.0 * self.remaining(t)?).sqrt())
    }

    pub fn sigma(&self, r: f64, t: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(r / self.scale(t)?)
    }

    /// Near-axis slope c(t) with φ ≈ c r.
    pub fn axis_slope(&self, t: f64) -> Result<f64> {
        let l = self.scale(t)?;
        Ok(self.profile.axis_slope() / (l * l))
    }

    pub fn swirl_jet(&self, r: f64, t: f64) -> Result<SwirlJet> {
        check_radius(r)?;
        let l = self.scale(t)?;
        let sigma = r / l;
        let j = self.profile.jet(sigma, self.path)?;
        let phi = if r == 0.0 {
            0.0
        } else if sigma < AXIS_EPS {
            j.phi0 / l
        } else {
            j.g / r
        };
        Ok(SwirlJet {
            phi,
            phi_r: j.phi0_prime / (l * l),
        })
    }

    pub fn eval_u(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.swirl_jet(r, t)?.phi)
    }

    pub fn eval_v(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.eval_u(r, t)? + self.alpha() * r)
    }

    pub fn eval_eta(&self, r: f64, t: f64) -> Result<f64> {
        self.require_part_two()?;
        let phi = self.eval_u(r, t)?;
        log_one_plus(phi, r, t)
    }

    pub fn eval_vbar(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.eval_eta(r, t)? - (-self.alpha()).ln_1p() * r)
    }

    /// Any of the swirl-type quantities.
    pub fn eval(&self, which: Swirl, r: f64, t: f64) -> Result<f64> {
        match which {
            Swirl::U => self.eval_u(r, t),
            Swirl::V => self.eval_v(r, t),
            Swirl::Eta => self.eval_eta(r, t),
            Swirl::VBar => self.eval_vbar(r, t),
        }
    }

    /// Value and exact radial derivative of a swirl-type quantity.
    pub fn eval_with_radial_derivative(&self, which: Swirl, r: f64, t: f64) -> Result<(f64, f64)> {
        if which.needs_part_two() {
            self.require_part_two()?;
        }
        let SwirlJet { phi, phi_r } = self.swirl_jet(r, t)?;
        let alpha = self.alpha();
        Ok(match which {
            Swirl::U => (phi, phi_r),
            Swirl::V => (phi + alpha * r, phi_r + alpha),
            Swirl::Eta | Swirl::VBar => {
                let eta = log_one_plus(phi, r, t)?;
                let d = phi_r / (1.0 + phi);
                if which == Swirl::Eta {
                    (eta, d)
                } else {
                    let slope = (-alpha).ln_1p();
                    (eta - slope * r, d - slope)
                }
            }
        })
    }

    /// Swirl velocity of the selected part as a vector; radial and vertical
    /// components vanish identically.
    pub fn velocity(&self, r: f64, t: f64) -> Result<VectorFieldValue> {
        let swirl = match self.part {
            Part::One => self.eval_v(r, t)?,
            Part::Two => self.eval_vbar(r, t)?,
        };
        Ok(VectorFieldValue {
            radial: 0.0,
            swirl,
            vertical: 0.0,
        })
    }

    /// Forcing h(r, t) = k(σ)/L³.
    pub fn eval_h(&self, r: f64, t: f64) -> Result<f64> {
        check_radius(r)?;
        let l = self.scale(t)?;
        Ok(self.profile.forcing().eval(r / l) / (l * l * l))
    }

    /// Forcing of the logarithmic swirl; undefined on the axis where Y1 and
    /// Y2 blow up separately.
    pub fn eval_y(&self, r: f64, t: f64) -> Result<YParts> {
        self.require_part_two()?;
        check_radius(r)?;
        if r == 0.0 {
            return Err(Error::Domain("Y1 and Y2 are singular on the axis".into()));
        }
        let SwirlJet { phi, phi_r } = self.swirl_jet(r, t)?;
        let eta = log_one_plus(phi, r, t)?;
        let h = self.eval_h(r, t)?;
        let r2 = r * r;
        let q = phi_r / (phi + 1.0);
        Ok(YParts {
            y1: -eta / r2,
            y2: phi / (r2 * (phi + 1.0)),
            y3: h / (phi + 1.0),
            y4: -q * q,
        })
    }

    /// r²·Y, finite wherever the swirl is, including where Y alone overflows
    /// (the near-axis slope of φ grows like 1/(T − t)).
    pub fn eval_y_weighted(&self, r: f64, t: f64) -> Result<YParts> {
        self.require_part_two()?;
        check_radius(r)?;
        let l = self.scale(t)?;
        let SwirlJet { phi, phi_r } = self.swirl_jet(r, t)?;
        let eta = log_one_plus(phi, r, t)?;
        let sigma = r / l;
        let q = r * phi_r / (phi + 1.0);
        Ok(YParts {
            y1: -eta,
            y2: phi / (phi + 1.0),
            y3: self.profile.forcing().eval(sigma) * sigma * sigma / l / (phi + 1.0),
            y4: -q * q,
        })
    }

    /// r²·h(r, t) = k(σ)σ²/L.
    pub fn eval_h_weighted(&self, r: f64, t: f64) -> Result<f64> {
        check_radius(r)?;
        let l = self.scale(t)?;
        let sigma = r / l;
        Ok(self.profile.forcing().eval(sigma) * sigma * sigma / l)
    }

    /// P(r, t) = ∫_0^r w²/l dl for the swirl w = v or v̄ (normalized P(0) = 0).
    pub fn eval_pressure(&self, which: Swirl, r: f64, t: f64, spec: &QuadratureSpec) -> Result<f64> {
        if !matches!(which, Swirl::V | Swirl::VBar) {
            return Err(Error::InvalidArgument("pressure is defined for v and vbar only".into()));
        }
        check_radius(r)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let l = self.scale(t)?;
        let mut points = vec![0.0];
        points.extend([0.5 * l, l, 2.0 * l].into_iter().filter(|&p| p < r));
        points.push(r);
        let failure = std::cell::Cell::new(None);
        let integrand = |x: f64| {
            if x == 0.0 {
                return 0.0;
            }
            match self.eval(which, x, t) {
                Ok(w) => w * w / x,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        };
        let value = integrate_with_breaks(integrand, &points, spec);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(value?.value)
    }

    /// All fields at one point; part-two quantities are `None` for part one.
    pub fn sample(&self, r: f64, t: f64, spec: &QuadratureSpec) -> Result<FieldSample> {
        let sigma = self.sigma(r, t)?;
        let two = self.part == Part::Two;
        let pressure_of = if two { Swirl::VBar } else { Swirl::V };
        Ok(FieldSample {
            r,
            t,
            sigma,
            u: self.eval_u(r, t)?,
            v: self.eval_v(r, t)?,
            eta: if two { Some(self.eval_eta(r, t)?) } else { None },
            vbar: if two { Some(self.eval_vbar(r, t)?) } else { None },
            pressure: self.eval_pressure(pressure_of, r, t, spec)?,
            h: self.eval_h(r, t)?,
            y: if two && r > 0.0 { Some(self.eval_y(r, t)?) } else { None },
        })
    }

    fn require_part_two(&self) -> Result<()> {
        if self.part != Part::Two {
            return Err(Error::InvalidArgument(
                "eta, vbar and Y belong to the logarithmic (part two) family".into(),
            ));
        }
        Ok(())
    }
}

fn log_one_plus(phi: f64, r: f64, t: f64) -> Result<f64> {
    if !(phi > -1.0) {
        return Err(Error::Invariant(format!(
            "1 + u = {} <= 0 at r = {r}, t = {t}",
            1.0 + phi
        )));
    }
    Ok(phi.ln_1p())
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("r must lie in [0, 1], got {r}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_profile, reference_k, ForcingProfile};

    fn family(part: Part) -> SolutionFamily {
        let p = build_profile(reference_k(), QuadratureSpec::default()).unwrap();
        SolutionFamily::new(Arc::new(p), 0.5, part).unwrap()
    }

    #[test]
    fn boundary_values_vanish() {
        let f = family(Part::Two);
        for t in [0.0, 0.25, 0.49, 0.5 - 1e-9] {
            assert!(f.eval_v(1.0, t).unwrap().abs() < 1e-15);
            assert!(f.eval_vbar(1.0, t).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn axis_values() {
        let f = family(Part::Two);
        assert_eq!(f.eval_u(0.0, 0.1).unwrap(), 0.0);
        assert_eq!(f.eval_v(0.0, 0.1).unwrap(), 0.0);
        assert_eq!(f.eval_vbar(0.0, 0.1).unwrap(), 0.0);
        assert!(f.eval_y(0.0, 0.1).is_err());
    }

    #[test]
    fn domain_errors() {
        let f = family(Part::One);
        assert!(matches!(f.eval_u(0.5, 0.5), Err(Error::BlowUpTime { .. })));
        assert!(matches!(f.eval_u(0.5, 0.7), Err(Error::BlowUpTime { .. })));
        assert!(matches!(f.eval_u(1.5, 0.1), Err(Error::Domain(_))));
        assert!(matches!(f.eval_u(-0.1, 0.1), Err(Error::Domain(_))));
        assert!(f.eval_eta(0.5, 0.1).is_err());
    }

    #[test]
    fn part_two_needs_nonpositive_forcing() {
        let p = build_profile(ForcingProfile::zero(), QuadratureSpec::default()).unwrap();
        assert!(SolutionFamily::new(Arc::new(p.clone()), 0.5, Part::Two).is_err());
        let f = SolutionFamily::new(Arc::new(p), 0.5, Part::One).unwrap();
        assert_eq!(f.eval_v(0.3, 0.2).unwrap(), 0.0);
        assert_eq!(f.eval_h(0.3, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn outer_region_is_stationary() {
        let f = family(Part::One);
        let a = f.eval_v(0.5, 0.5 - 1e-4).unwrap();
        let b = f.eval_v(0.5, 0.45).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(a > 0.0);
    }

    #[test]
    fn radial_derivative_matches_difference() {
        let f = family(Part::Two).with_path(EvalPath::Direct);
        let (r, t, h) = (0.3, 0.45, 1e-5);
        for which in [Swirl::U, Swirl::V, Swirl::Eta, Swirl::VBar] {
            let (_, d) = f.eval_with_radial_derivative(which, r, t).unwrap();
            let fd = (f.eval(which, r + h, t).unwrap() - f.eval(which, r - h, t).unwrap()) / (2.0 * h);
            assert!((d - fd).abs() < 1e-8 * d.abs().max(1.0), "{which:?}: {d} vs {fd}");
        }
    }

    #[test]
    fn weighted_forcings_match_plain_ones() {
        let f = family(Part::Two);
        for (r, t) in [(0.05, 0.3), (0.4, 0.49), (0.9, 0.1)] {
            let y = f.eval_y(r, t).unwrap().as_array();
            let w = f.eval_y_weighted(r, t).unwrap().as_array();
            for (a, b) in y.iter().zip(w) {
                assert!((a * r * r - b).abs() <= 1e-14 * b.abs().max(1e-300));
            }
            let h = f.eval_h(r, t).unwrap();
            assert!((h * r * r - f.eval_h_weighted(r, t).unwrap()).abs() <= 1e-14 * (h * r * r).abs());
        }
    }

    #[test]
    fn pressure_is_monotone_from_zero() {
        let f = family(Part::One);
        let spec = QuadratureSpec::default();
        assert_eq!(f.eval_pressure(Swirl::V, 0.0, 0.3, &spec).unwrap(), 0.0);
        let mut last = 0.0;
        for i in 1..=10 {
            let p = f.eval_pressure(Swirl::V, i as f64 / 10.0, 0.3, &spec).unwrap();
            assert!(p > last);
            last = p;
        }
        assert!(f.eval_pressure(Swirl::U, 0.5, 0.3, &spec).is_err());
    }

    #[test]
    fn sample_collects_everything() {
        let f = family(Part::Two);
        let s = f.sample(0.2, 0.4, &QuadratureSpec::default()).unwrap();
        assert!(s.eta.is_some() && s.vbar.is_some() && s.y.is_some());
        assert_eq!(s.v, s.u + f.alpha() * 0.2);
        let v = f.velocity(0.2, 0.4).unwrap();
        assert_eq!((v.radial, v.vertical), (0.0, 0.0));
        assert_eq!(v.swirl, s.vbar.unwrap());
    }
}
