//! Self-similar swirl profile φ₀ generated by a radial forcing profile k.
//!
//! With g = rφ₀ the profile equation becomes
//! `g'' − (1/r + r) g' = r k`, `g'(0) = 0`, whose integrating-factor
//! solution is
//!
//! ```text
//! I(s) = ∫_s^∞ e^{−l²/2} k(l) dl
//! g(r) = −∫_0^r s e^{s²/2} I(s) ds
//! ```
//!
//! Exchanging the order of integration gives the single-integral form
//! `g(r) = −∫_0^r k(l)(1 − e^{−l²/2}) dl − (e^{r²/2} − 1) I(r)`, which is
//! what [`SwirlProfile::g`] evaluates; the nested form is kept as
//! [`SwirlProfile::g_nested`] for cross-checks.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate, CubicHermite, QuadratureSpec, AXIS_EPS};

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kernel {
    Zero,
    Bump,
    Table(Arc<CubicHermite>),
    Custom(KernelFn),
}

/// Radial forcing profile k(r), supported in [0, 1].
#[derive(Clone)]
pub struct ForcingProfile {
    kernel: Kernel,
    support: (f64, f64),
    nonpositive: bool,
    nontrivial: bool,
}

impl fmt::Debug for ForcingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kernel {
            Kernel::Zero => "zero",
            Kernel::Bump => "reference_bump",
            Kernel::Table(_) => "table",
            Kernel::Custom(_) => "custom",
        };
        f.debug_struct("ForcingProfile")
            .field("kind", &kind)
            .field("support", &self.support)
            .field("nonpositive", &self.nonpositive)
            .field("nontrivial", &self.nontrivial)
            .finish()
    }
}

/// The reference bump k*(r) = −exp(−1/(r(1−r))) on (0, 1), zero elsewhere.
pub fn reference_k() -> ForcingProfile {
    ForcingProfile {
        kernel: Kernel::Bump,
        support: (0.0, 1.0),
        nonpositive: true,
        nontrivial: true,
    }
}

fn bump(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        -(-1.0 / (r * (1.0 - r))).exp()
    }
}

impl ForcingProfile {
    pub fn zero() -> Self {
        Self {
            kernel: Kernel::Zero,
            support: (0.0, 1.0),
            nonpositive: true,
            nontrivial: false,
        }
    }

    /// Sampled profile `(r, k)` with monotone cubic interpolation.
    ///
    /// End values are forced to zero; the returned warnings list every end
    /// value that was larger than 1e-12 in magnitude.
    pub fn from_table(points: &[(f64, f64)]) -> Result<(Self, Vec<String>)> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("k table needs at least two rows".into()));
        }
        let mut warnings = Vec::new();
        let (mut r, mut k): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        if r.iter().chain(&k).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("k table contains non-finite values".into()));
        }
        if r[0] < 0.0 || r[r.len() - 1] > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "k table radii must lie in [0, 1], got [{}, {}]",
                r[0],
                r[r.len() - 1]
            )));
        }
        let last = k.len() - 1;
        for i in [0, last] {
            if k[i].abs() > 1e-12 {
                warnings.push(format!(
                    "k({}) = {:e} forced to 0 at the end of the support",
                    r[i], k[i]
                ));
            }
            k[i] = 0.0;
        }
        let nonpositive = k.iter().all(|&v| v <= 0.0);
        let nontrivial = k.iter().any(|&v| v != 0.0);
        let support = (r[0], r[last]);
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "k table radii must be strictly increasing".into(),
            ));
        }
        let interp = CubicHermite::monotone(std::mem::take(&mut r), k)?;
        Ok((
            Self {
                kernel: Kernel::Table(Arc::new(interp)),
                support,
                nonpositive,
                nontrivial,
            },
            warnings,
        ))
    }

    /// Arbitrary k; sign flags are determined by sampling 4097 points of the support.
    pub fn custom<F>(k: F, support: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (lo, hi) = support;
        if !(lo >= 0.0 && hi <= 1.0 && hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "support must be a sub-interval of [0, 1], got [{lo}, {hi}]"
            )));
        }
        let samples: Vec<f64> = (0..=4096).map(|i| k(lo + (hi - lo) * i as f64 / 4096.0)).collect();
        Ok(Self {
            kernel: Kernel::Custom(Arc::new(k)),
            support,
            nonpositive: samples.iter().all(|&v| v <= 0.0),
            nontrivial: samples.iter().any(|&v| v != 0.0),
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r < self.support.0 || r > self.support.1 {
            return 0.0;
        }
        match &self.kernel {
            Kernel::Zero => 0.0,
            Kernel::Bump => bump(r),
            Kernel::Table(t) => t.eval(r),
            Kernel::Custom(f) => f(r),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_nonpositive(&self) -> bool {
        self.nonpositive
    }

    pub fn is_nontrivial(&self) -> bool {
        self.nontrivial
    }

    /// k ≤ 0 and k ≢ 0: the hypotheses of the logarithmic construction.
    pub fn admits_log_construction(&self) -> bool {
        self.nonpositive && self.nontrivial
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kernel, Kernel::Zero)
    }

    /// k(0⁺) and k'(0⁺) for the axis series.
    fn axis_taylor(&self) -> (f64, f64) {
        if self.support.0 > 0.0 {
            return (0.0, 0.0);
        }
        match &self.kernel {
            Kernel::Zero | Kernel::Bump => (0.0, 0.0),
            Kernel::Table(t) => t.eval_with_slope(0.0),
            Kernel::Custom(f) => {
                let h = 1e-6;
                let k0 = f(0.0);
                (k0, (f(h) - k0) / h)
            }
        }
    }
}

/// I(s) = ∫_s^∞ e^{−l²/2} k(l) dl, truncated at the end of the support.
pub fn inner_integral(k: &ForcingProfile, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("inner integral needs s >= 0, got {s}")));
    }
    let (lo, hi) = k.support();
    if k.is_zero() || s >= hi {
        return Ok(0.0);
    }
    let from = s.max(lo);
    Ok(integrate(|l: f64| (-0.5 * l * l).exp() * k.eval(l), from, hi, spec)?.value)
}

/// g and its first two derivatives, plus φ₀ = g/r and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub inner: f64,
    pub g: f64,
    pub g_prime: f64,
    pub g_second: f64,
    pub phi0: f64,
    pub phi0_prime: f64,
    pub phi0_second: f64,
}

/// How profile values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    /// Adaptive quadrature at every call; smooth in r, used by verification.
    Direct,
    /// Hermite interpolation of a tabulation built once; used for bulk norms.
    #[default]
    Cached,
}

const CACHE_NODES: usize = 2049;

#[derive(Debug, Clone)]
struct ProfileCache {
    inner: CubicHermite,
    g: CubicHermite,
}

/// Self-similar swirl profile; immutable after [`build_profile`].
#[derive(Debug, Clone)]
pub struct SwirlProfile {
    k: ForcingProfile,
    spec: QuadratureSpec,
    inner_at_zero: f64,
    alpha: f64,
    /// φ₀(σ) ≈ a₁σ + a₂σ² + a₃σ³ near the axis.
    series: [f64; 3],
    forcing_sup: f64,
    cache: Option<ProfileCache>,
}

/// Construct φ₀ for the forcing `k` with quadrature tolerances `spec`.
pub fn build_profile(k: ForcingProfile, spec: QuadratureSpec) -> Result<SwirlProfile> {
    let inner_at_zero = inner_integral(&k, 0.0, &spec)?;
    let (_, hi) = k.support();
    let alpha = if k.is_zero() {
        0.0
    } else {
        integrate(|l: f64| k.eval(l) * -(-0.5 * l * l).exp_m1(), 0.0, hi, &spec)?.value
    };
    let (k0, k1) = k.axis_taylor();
    let series = [-0.5 * inner_at_zero, k0 / 3.0, (k1 - inner_at_zero) / 8.0];
    let (lo, _) = k.support();
    let forcing_sup = (0..=4096)
        .map(|i| k.eval(lo + (hi - lo) * i as f64 / 4096.0).abs())
        .fold(0.0, f64::max);
    let mut profile = SwirlProfile {
        k,
        spec,
        inner_at_zero,
        alpha,
        series,
        forcing_sup,
        cache: None,
    };
    if !profile.k.is_zero() {
        profile.cache = Some(profile.tabulate()?);
    }
    Ok(profile)
}

impl SwirlProfile {
    pub fn forcing(&self) -> &ForcingProfile {
        &self.k
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// α = −g(1) = −φ₀(1).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// I(0).
    pub fn inner_at_zero(&self) -> f64 {
        self.inner_at_zero
    }

    /// max |k| over 4097 samples of the support.
    pub fn forcing_sup(&self) -> f64 {
        self.forcing_sup
    }

    /// φ₀'(0) = −I(0)/2.
    pub fn axis_slope(&self) -> f64 {
        self.series[0]
    }

    /// End of the support of k; beyond it g ≡ −α and φ₀ = −α/σ.
    fn outer(&self) -> f64 {
        self.k.support().1
    }

    pub fn inner_integral(&self, s: f64) -> Result<f64> {
        inner_integral(&self.k, s, &self.spec)
    }

    /// ∫_0^r k(l)(1 − e^{−l²/2}) dl
    fn weighted_k_integral(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.k.support();
        let to = r.min(hi);
        if to <= lo {
            return Ok(0.0);
        }
        Ok(integrate(|l: f64| self.k.eval(l) * -(-0.5 * l * l).exp_m1(), lo, to, &self.spec)?.value)
    }

    /// g(r) = rφ₀(r) by the single-integral form.
    pub fn g(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        if self.k.is_zero() {
            return Ok(0.0);
        }
        if r >= self.outer() {
            return Ok(-self.alpha);
        }
        let inner = self.inner_integral(r)?;
        Ok(-self.weighted_k_integral(r)? - (0.5 * r * r).exp_m1() * inner)
    }

    /// g(r) = −∫_0^r s e^{s²/2} I(s) ds with I evaluated by its own quadrature
    /// at every outer node.
    pub fn g_nested(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        if self.k.is_zero() {
            return Ok(0.0);
        }
        let to = r.min(self.outer());
        let failure = std::cell::Cell::new(None);
        let outer = integrate(
            |s: f64| match self.inner_integral(s) {
                Ok(i) => s * (0.5 * s * s).exp() * i,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            },
            0.0,
            to,
            &self.spec,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(-outer?.value)
    }

    /// Value and derivatives at self-similar radius `r`.
    ///
    /// Derivatives come from the closed forms
    /// `g' = −r e^{r²/2} I(r)` and `g'' = −(1 + r²) e^{r²/2} I(r) + r k(r)`,
    /// never from differencing. Below [`AXIS_EPS`] φ₀ and its derivatives
    /// use the axis series.
    pub fn jet(&self, r: f64, path: EvalPath) -> Result<ProfileJet> {
        check_radius(r)?;
        if self.k.is_zero() {
            return Ok(ProfileJet {
                inner: 0.0,
                g: 0.0,
                g_prime: 0.0,
                g_second: 0.0,
                phi0: 0.0,
                phi0_prime: 0.0,
                phi0_second: 0.0,
            });
        }
        let (inner, g) = if r >= self.outer() {
            (0.0, -self.alpha)
        } else {
            match (path, &self.cache) {
                (EvalPath::Cached, Some(cache)) => (cache.inner.eval(r), cache.g.eval(r)),
                _ => {
                    let inner = self.inner_integral(r)?;
                    (inner, -self.weighted_k_integral(r)? - (0.5 * r * r).exp_m1() * inner)
                }
            }
        };
        let (g_prime, g_second) = if r >= self.outer() {
            // I ≡ 0 here; e^{r²/2} alone would overflow
            (0.0, 0.0)
        } else {
            let e = (0.5 * r * r).exp();
            (-r * e * inner, -(1.0 + r * r) * e * inner + r * self.k.eval(r))
        };
        let (phi0, phi0_prime, phi0_second) = if r < AXIS_EPS {
            let [a1, a2, a3] = self.series;
            (
                r * (a1 + r * (a2 + r * a3)),
                a1 + r * (2.0 * a2 + 3.0 * a3 * r),
                2.0 * a2 + 6.0 * a3 * r,
            )
        } else {
            let (r2, r3) = (r * r, r * r * r);
            (
                g / r,
                g_prime / r - g / r2,
                g_second / r - 2.0 * g_prime / r2 + 2.0 * g / r3,
            )
        };
        Ok(ProfileJet {
            inner,
            g,
            g_prime,
            g_second,
            phi0,
            phi0_prime,
            phi0_second,
        })
    }

    pub fn phi0(&self, r: f64) -> Result<f64> {
        Ok(self.jet(r, EvalPath::Direct)?.phi0)
    }

    pub fn phi0_prime(&self, r: f64) -> Result<f64> {
        Ok(self.jet(r, EvalPath::Direct)?.phi0_prime)
    }

    pub fn phi0_second(&self, r: f64) -> Result<f64> {
        Ok(self.jet(r, EvalPath::Direct)?.phi0_second)
    }

    /// φ₀'' + φ₀'/r − φ₀/r² − φ₀ − rφ₀' − k at r > 0.
    pub fn ode_residual(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("ode residual needs r > 0, got {r}")));
        }
        if self.k.is_zero() {
            return Ok(0.0);
        }
        // the axis series is a surrogate, so the residual always uses the g chain
        let (p, dp, d2p) = self.jet_unclamped(r)?;
        Ok(d2p + dp / r - p / (r * r) - p - r * dp - self.k.eval(r))
    }

    fn jet_unclamped(&self, r: f64) -> Result<(f64, f64, f64)> {
        if r >= self.outer() {
            let a = -self.alpha;
            return Ok((a / r, -a / (r * r), 2.0 * a / (r * r * r)));
        }
        let inner = self.inner_integral(r)?;
        let g = -self.weighted_k_integral(r)? - (0.5 * r * r).exp_m1() * inner;
        let e = (0.5 * r * r).exp();
        let gp = -r * e * inner;
        let gpp = -(1.0 + r * r) * e * inner + r * self.k.eval(r);
        Ok((
            g / r,
            gp / r - g / (r * r),
            gpp / r - 2.0 * gp / (r * r) + 2.0 * g / (r * r * r),
        ))
    }

    /// Cumulative tabulation of I and g on the support, with exact slopes
    /// I' = −e^{−s²/2} k and g' = −s e^{s²/2} I.
    fn tabulate(&self) -> Result<ProfileCache> {
        let hi = self.outer();
        let nodes: Vec<f64> = (0..CACHE_NODES)
            .map(|i| {
                if i == CACHE_NODES - 1 {
                    hi
                } else {
                    hi * i as f64 / (CACHE_NODES - 1) as f64
                }
            })
            .collect();
        let weight_inner = |l: f64| (-0.5 * l * l).exp() * self.k.eval(l);
        let weight_g = |l: f64| self.k.eval(l) * -(-0.5 * l * l).exp_m1();

        let mut inner = vec![0.0; CACHE_NODES];
        for i in (0..CACHE_NODES - 1).rev() {
            inner[i] = inner[i + 1] + integrate(weight_inner, nodes[i], nodes[i + 1], &self.spec)?.value;
        }
        let mut weighted = vec![0.0; CACHE_NODES];
        for i in 1..CACHE_NODES {
            weighted[i] = weighted[i - 1] + integrate(weight_g, nodes[i - 1], nodes[i], &self.spec)?.value;
        }
        let g: Vec<f64> = nodes
            .iter()
            .zip(&inner)
            .zip(&weighted)
            .map(|((&s, &i), &w)| -w - (0.5 * s * s).exp_m1() * i)
            .collect();
        let inner_slope: Vec<f64> = nodes.iter().map(|&s| -(-0.5 * s * s).exp() * self.k.eval(s)).collect();
        let g_slope: Vec<f64> = nodes
            .iter()
            .zip(&inner)
            .map(|(&s, &i)| -s * (0.5 * s * s).exp() * i)
            .collect();
        Ok(ProfileCache {
            inner: CubicHermite::with_slopes(nodes.clone(), inner, inner_slope)?,
            g: CubicHermite::with_slopes(nodes, g, g_slope)?,
        })
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "profile radius must be finite and >= 0, got {r}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> SwirlProfile {
        build_profile(reference_k(), QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn bump_values() {
        let k = reference_k();
        assert_eq!(k.eval(0.0), 0.0);
        assert_eq!(k.eval(1.0), 0.0);
        assert_eq!(k.eval(0.5), -(-4.0f64).exp());
        assert!(k.eval(0.01).abs() < 0.01f64.powi(10));
        assert!(k.admits_log_construction());
    }

    #[test]
    fn zero_forcing_gives_zero_profile() {
        let p = build_profile(ForcingProfile::zero(), QuadratureSpec::default()).unwrap();
        assert_eq!(p.alpha(), 0.0);
        for r in [0.0, 0.3, 1.0, 3.0] {
            assert_eq!(p.phi0(r).unwrap(), 0.0);
            assert_eq!(inner_integral(p.forcing(), r, p.spec()).unwrap(), 0.0);
        }
        assert_eq!(p.ode_residual(0.7).unwrap(), 0.0);
    }

    #[test]
    fn inner_integral_cutoff_and_errors() {
        let k = reference_k();
        let spec = QuadratureSpec::default();
        assert_eq!(inner_integral(&k, 1.0, &spec).unwrap(), 0.0);
        assert_eq!(inner_integral(&k, 2.5, &spec).unwrap(), 0.0);
        assert!(inner_integral(&k, -0.1, &spec).is_err());
        let mut last = inner_integral(&k, 0.0, &spec).unwrap();
        assert!(last < 0.0);
        for i in 1..20 {
            let v = inner_integral(&k, i as f64 / 20.0, &spec).unwrap();
            assert!(v < 0.0 && v > last, "I must increase toward 0");
            last = v;
        }
    }

    #[test]
    fn sign_structure_for_nonpositive_k() {
        let p = reference();
        assert!(p.alpha() < 0.0);
        assert!(1.0 - p.alpha() > 1.0);
        assert!(p.phi0(0.5).unwrap() > 0.0);
        for i in 1..=100 {
            assert!(p.phi0(i as f64 / 100.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn axis_conditions() {
        let p = reference();
        assert_eq!(p.phi0(0.0).unwrap(), 0.0);
        assert_eq!(p.jet(0.0, EvalPath::Direct).unwrap().g_prime, 0.0);
        // α = −g(1) = −φ₀(1)
        assert!((p.alpha() + p.g(1.0).unwrap()).abs() < 1e-15);
        assert!((p.alpha() + p.phi0(1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn outside_support_profile_is_inverse_radius() {
        let p = reference();
        for r in [1.0, 1.5, 4.0] {
            let j = p.jet(r, EvalPath::Direct).unwrap();
            assert_eq!(j.phi0, -p.alpha() / r);
            assert!((j.phi0_prime - p.alpha() / (r * r)).abs() < 1e-18);
            assert!(p.ode_residual(r).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn single_and_nested_forms_agree() {
        let p = reference();
        for r in [0.05, 0.2, 0.5, 0.8, 1.0] {
            let a = p.g(r).unwrap();
            let b = p.g_nested(r).unwrap();
            assert!((a - b).abs() < 1e-13, "r = {r}: {a} vs {b}");
        }
    }

    #[test]
    fn cached_path_tracks_direct() {
        let p = reference();
        for i in 0..200 {
            let r = 1.2 * (i as f64 + 0.37) / 200.0;
            let d = p.jet(r, EvalPath::Direct).unwrap();
            let c = p.jet(r, EvalPath::Cached).unwrap();
            assert!((d.phi0 - c.phi0).abs() < 1e-13, "r = {r}");
            assert!((d.phi0_prime - c.phi0_prime).abs() < 1e-11, "r = {r}");
        }
    }

    #[test]
    fn small_radius_series_consistency() {
        // |φ₀(r) + I(0) r/2| ≤ C r³ with a stable fitted C
        let p = reference();
        let fit = |n: usize| {
            (1..=n)
                .map(|i| {
                    let r = 0.05 * i as f64 / n as f64;
                    let j = p.jet_unclamped(r).unwrap();
                    (j.0 + p.inner_at_zero() * r / 2.0).abs() / r.powi(3)
                })
                .fold(0.0, f64::max)
        };
        let (c1, c2) = (fit(25), fit(50));
        assert!(c1.is_finite() && c1 > 0.0);
        assert!((c1 - c2).abs() / c2 < 0.01, "{c1} vs {c2}");
    }

    #[test]
    fn residual_rejects_axis() {
        let p = reference();
        assert!(p.ode_residual(0.0).is_err());
        assert!(p.ode_residual(-1.0).is_err());
    }

    #[test]
    fn ode_residual_small_everywhere() {
        let p = reference();
        for r in [1e-3, 0.01, 0.1, 0.5, 0.9, 2.0] {
            assert!(p.ode_residual(r).unwrap().abs() < 1e-8, "r = {r}");
        }
    }

    #[test]
    fn table_endpoints_forced_with_warnings() {
        let rows = [(0.0, 0.1), (0.5, -0.2), (1.0, -0.3)];
        let (k, warnings) = ForcingProfile::from_table(&rows).unwrap();
        assert_eq!(warnings.len(), 2);
        assert_eq!(k.eval(0.0), 0.0);
        assert_eq!(k.eval(1.0), 0.0);
        assert!(k.admits_log_construction());
        assert!(ForcingProfile::from_table(&[(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(ForcingProfile::from_table(&[(0.0, 0.0), (1.5, 0.0)]).is_err());
    }

    #[test]
    fn zero_table_is_trivial() {
        let (k, warnings) = ForcingProfile::from_table(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]).unwrap();
        assert!(warnings.is_empty());
        assert!(!k.is_nontrivial());
        let p = build_profile(k, QuadratureSpec::default()).unwrap();
        assert_eq!(p.alpha(), 0.0);
        assert_eq!(p.phi0(0.4).unwrap(), 0.0);
    }

    #[test]
    fn custom_sign_detection() {
        let k = ForcingProfile::custom(|r| (std::f64::consts::PI * r).sin(), (0.0, 1.0)).unwrap();
        assert!(!k.is_nonpositive());
        assert!(ForcingProfile::custom(|_| 0.0, (0.5, 2.0)).is_err());
    }
}
