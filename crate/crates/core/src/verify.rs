//! Residual, boundary and pointwise-bound checks of the closed-form family.
//!
//! PDE residuals are computed with central differences of the field
//! evaluators. Steps follow the local length scale: `h_r = ε·min(r, L)` and
//! `h_t = min(cap, fraction·(T − t))`. Each sample carries the tolerance unit
//! `(ĥ_r² + ĥ_t²)·max(1, M)`, where `ĥ_r = ε`, `ĥ_t = h_t/(T − t)` and M is the
//! largest operator term at that sample. A report passes when every residual
//! is within [`KAPPA`] of its unit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Part, SolutionFamily, Swirl};
use crate::numerics::{differentiate, DerivativeOrder, QuadratureSpec, RadialGrid, TimeLadder, AXIS_EPS};
use crate::profiles::SwirlProfile;

/// Truncation constant of the finite-difference tolerance model.
pub const KAPPA: f64 = 100.0;

/// Minimum fraction of requested samples that must be evaluable.
pub const MIN_COVERAGE: f64 = 0.95;

/// Pointwise tolerance of boundary values.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Tolerance of the profile equation residual.
pub const ODE_TOL: f64 = 1e-8;

const WORST_KEPT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    SwirlPdePart1,
    SwirlPdePart2,
    RadialMomentum,
    OdeFode,
    EtaIdentity,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSample {
    pub r: f64,
    pub t: f64,
    pub residual: f64,
    /// |residual| divided by the sample's tolerance unit.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub equation: Equation,
    /// Bound on `max_scaled_residual`.
    pub tolerance: f64,
    pub tolerance_model: String,
    pub requested: usize,
    pub skipped: usize,
    pub max_abs_residual: f64,
    pub max_scaled_residual: f64,
    /// At least [`MIN_COVERAGE`] of the requested samples were evaluated.
    pub valid: bool,
    pub passed: bool,
    pub worst: Vec<ResidualSample>,
    #[serde(skip)]
    pub samples: Vec<ResidualSample>,
}

impl ResidualReport {
    fn build(
        name: impl Into<String>,
        equation: Equation,
        tolerance: f64,
        tolerance_model: impl Into<String>,
        requested: usize,
        samples: Vec<ResidualSample>,
    ) -> Self {
        let skipped = requested - samples.len();
        let max_abs_residual = samples.iter().map(|s| s.residual.abs()).fold(0.0, f64::max);
        let max_scaled_residual = samples.iter().map(|s| s.scaled).fold(0.0, f64::max);
        let mut worst = samples.clone();
        worst.sort_by(|a, b| b.scaled.total_cmp(&a.scaled));
        worst.truncate(WORST_KEPT);
        let valid = requested > 0 && samples.len() as f64 >= MIN_COVERAGE * requested as f64;
        let finite = samples.iter().all(|s| s.residual.is_finite());
        Self {
            name: name.into(),
            equation,
            tolerance,
            tolerance_model: tolerance_model.into(),
            requested,
            skipped,
            max_abs_residual,
            max_scaled_residual,
            valid,
            passed: valid && finite && max_scaled_residual <= tolerance,
            worst,
            samples,
        }
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }
}

/// Finite-difference step rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdSteps {
    /// ε in h_r = ε·min(r, L).
    pub radial: f64,
    /// Upper cap on h_t.
    pub time_cap: f64,
    /// h_t ≤ fraction·(T − t).
    pub time_fraction: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            radial: 1.0 / 64.0,
            time_cap: 1e-5,
            time_fraction: 0.01,
        }
    }
}

impl FdSteps {
    pub fn halved(self) -> Self {
        Self {
            radial: self.radial / 2.0,
            time_cap: self.time_cap / 2.0,
            time_fraction: self.time_fraction / 2.0,
        }
    }

    fn model(&self) -> String {
        format!(
            "|res| <= kappa*(eps^2 + (h_t/(T-t))^2)*max(1, M), h_r = eps*min(r, L), eps = {}, \
             h_t = min({:e}, {}*(T-t))",
            self.radial, self.time_cap, self.time_fraction
        )
    }
}

/// Interior radii (r ≥ ε₀) crossed with every ladder level except the last two.
fn interior_samples(grid: &RadialGrid, ladder: &TimeLadder) -> Vec<(f64, f64)> {
    let levels = ladder.levels();
    let keep = levels.len().saturating_sub(2);
    let radii: Vec<f64> = grid.interior().filter(|&r| r >= AXIS_EPS).collect();
    levels[..keep]
        .iter()
        .flat_map(|l| radii.iter().map(move |&r| (r, l.t)))
        .collect()
}

/// Result of one FD sample: `None` when the stencil leaves the domain.
type SampleOutcome = Result<Option<ResidualSample>>;

fn collect(outcomes: Vec<SampleOutcome>) -> Result<Vec<ResidualSample>> {
    let mut out = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        if let Some(s) = o? {
            out.push(s);
        }
    }
    Ok(out)
}

/// (Δ − 1/r²)w − ∂_t w − RHS for w ∈ {u, v} (RHS = h) or w ∈ {η, v̄} (RHS = Y).
pub fn check_swirl_pde(
    fam: &SolutionFamily,
    which: Swirl,
    grid: &RadialGrid,
    ladder: &TimeLadder,
    steps: FdSteps,
) -> Result<ResidualReport> {
    let (equation, two) = match which {
        Swirl::U | Swirl::V => (Equation::SwirlPdePart1, false),
        Swirl::Eta => (Equation::EtaIdentity, true),
        Swirl::VBar => (Equation::SwirlPdePart2, true),
    };
    if two && fam.part() != Part::Two {
        return Err(Error::InvalidArgument(format!(
            "{} needs the part two family",
            which.name()
        )));
    }
    check_ladder(fam, ladder)?;
    let points = interior_samples(grid, ladder);
    let outcomes: Vec<SampleOutcome> = points
        .par_iter()
        .map(|&(r, t)| pde_sample(fam, which, two, r, t, steps))
        .collect();
    let samples = collect(outcomes)?;
    Ok(ResidualReport::build(
        format!("swirl_pde_{}", which.name()),
        equation,
        KAPPA,
        steps.model(),
        points.len(),
        samples,
    ))
}

fn pde_sample(fam: &SolutionFamily, which: Swirl, two: bool, r: f64, t: f64, steps: FdSteps) -> SampleOutcome {
    let s = fam.remaining(t)?;
    let l = (2.0 * s).sqrt();
    let hr = steps.radial * r.min(l);
    let ht = steps.time_cap.min(steps.time_fraction * s);
    if r + hr > 1.0 || r - hr <= 0.0 || t - ht < 0.0 {
        return Ok(None);
    }
    let in_r = |x: f64| fam.eval(which, x, t);
    let in_t = |x: f64| fam.eval(which, r, x);
    let w = fam.eval(which, r, t)?;
    let w_rr = differentiate(in_r, r, hr, DerivativeOrder::Second)?;
    let w_r = differentiate(in_r, r, hr, DerivativeOrder::First)?;
    let w_t = differentiate(in_t, t, ht, DerivativeOrder::First)?;
    let rhs = if two {
        fam.eval_y(r, t)?.total()
    } else {
        fam.eval_h(r, t)?
    };
    let terms = [w_rr, w_r / r, w / (r * r), w_t, rhs];
    let residual = w_rr + w_r / r - w / (r * r) - w_t - rhs;
    let magnitude = terms.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let unit = (steps.radial.powi(2) + (ht / s).powi(2)) * magnitude;
    Ok(Some(ResidualSample {
        r,
        t,
        residual,
        scaled: residual.abs() / unit,
    }))
}

/// w²/r − ∂_r P with P differenced from [`SolutionFamily::eval_pressure`].
pub fn check_radial_momentum(
    fam: &SolutionFamily,
    which: Swirl,
    grid: &RadialGrid,
    ladder: &TimeLadder,
    steps: FdSteps,
    spec: &QuadratureSpec,
) -> Result<ResidualReport> {
    match (which, fam.part()) {
        (Swirl::V, _) | (Swirl::VBar, Part::Two) => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "radial momentum is checked for v (part one) or vbar (part two), not {}",
                which.name()
            )))
        }
    }
    check_ladder(fam, ladder)?;
    let points = interior_samples(grid, ladder);
    let outcomes: Vec<SampleOutcome> = points
        .par_iter()
        .map(|&(r, t)| {
            let s = fam.remaining(t)?;
            let hr = steps.radial * r.min((2.0 * s).sqrt());
            if r + hr > 1.0 || r - hr <= 0.0 {
                return Ok(None);
            }
            let w = fam.eval(which, r, t)?;
            let dp = differentiate(|x| fam.eval_pressure(which, x, t, spec), r, hr, DerivativeOrder::First)?;
            let centripetal = w * w / r;
            let residual = centripetal - dp;
            let unit = steps.radial.powi(2) * 1.0f64.max(centripetal.abs()).max(dp.abs());
            Ok(Some(ResidualSample {
                r,
                t,
                residual,
                scaled: residual.abs() / unit,
            }))
        })
        .collect();
    let samples = collect(outcomes)?;
    Ok(ResidualReport::build(
        format!("radial_momentum_{}", which.name()),
        Equation::RadialMomentum,
        KAPPA,
        steps.model(),
        points.len(),
        samples,
    ))
}

/// Result of [`check_boundary`]: the wall values plus the structural facts
/// of the swirl-only ansatz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub vertical: ResidualReport,
    /// v_r ≡ 0, v₃ ≡ 0 and no x₃ dependence hold by construction.
    pub horizontal_structural: bool,
    pub note: String,
    pub passed: bool,
}

/// |w(1, t_j)| over every ladder level.
pub fn check_boundary(fam: &SolutionFamily, which: Swirl, ladder: &TimeLadder) -> Result<BoundaryReport> {
    if !matches!(which, Swirl::V | Swirl::VBar) {
        return Err(Error::InvalidArgument("boundary check is for v or vbar".into()));
    }
    check_ladder(fam, ladder)?;
    let mut samples = Vec::with_capacity(ladder.levels().len());
    for level in ladder.levels() {
        let w = fam.eval(which, 1.0, level.t)?;
        samples.push(ResidualSample {
            r: 1.0,
            t: level.t,
            residual: w,
            scaled: w.abs(),
        });
    }
    let vertical = ResidualReport::build(
        format!("boundary_{}", which.name()),
        Equation::Boundary,
        BOUNDARY_TOL,
        "|w(1, t_j)| <= 1e-9",
        ladder.levels().len(),
        samples,
    );
    let passed = vertical.passed;
    Ok(BoundaryReport {
        vertical,
        horizontal_structural: true,
        note: "v_r = v_3 = 0 and no x3 dependence by construction; horizontal slip conditions exact".into(),
        passed,
    })
}

/// Residual of the profile equation at the given self-similar radii.
pub fn check_ode(profile: &SwirlProfile, radii: &[f64]) -> Result<ResidualReport> {
    let outcomes: Vec<SampleOutcome> = radii
        .par_iter()
        .map(|&r| {
            let residual = profile.ode_residual(r)?;
            Ok(Some(ResidualSample {
                r,
                t: 0.0,
                residual,
                scaled: residual.abs(),
            }))
        })
        .collect();
    let samples = collect(outcomes)?;
    Ok(ResidualReport::build(
        "ode_profile",
        Equation::OdeFode,
        ODE_TOL,
        "|res| <= 1e-8",
        radii.len(),
        samples,
    ))
}

/// `n` points log-spaced on [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()
            }
        })
        .collect()
}

/// A PDE report at steps and at halved steps, with the observed order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCheck {
    pub coarse: ResidualReport,
    pub fine: ResidualReport,
    pub order: f64,
    pub min_order: f64,
    pub passed: bool,
}

pub fn check_swirl_pde_convergence(
    fam: &SolutionFamily,
    which: Swirl,
    grid: &RadialGrid,
    ladder: &TimeLadder,
    steps: FdSteps,
    min_order: f64,
) -> Result<ConvergenceCheck> {
    let coarse = check_swirl_pde(fam, which, grid, ladder, steps)?;
    let fine = check_swirl_pde(fam, which, grid, ladder, steps.halved())?;
    let order = observed_order(coarse.max_abs_residual, fine.max_abs_residual);
    // a zero residual at both resolutions is exact, not a failed order
    let exact = coarse.max_abs_residual == 0.0 && fine.max_abs_residual == 0.0;
    let passed = coarse.passed && fine.passed && (exact || order >= min_order);
    Ok(ConvergenceCheck {
        coarse,
        fine,
        order,
        min_order,
        passed,
    })
}

/// log₂ of the error ratio under halving.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// |u| ≤ C r/(r² + T − t)
    UUpper,
    /// |∇u| ≤ C/(r² + T − t)
    GradUUpper,
    /// u ≥ r/(C(r² + T − t))
    PhiLower,
}

impl Bound {
    fn normalizer(self) -> &'static str {
        match self {
            Bound::UUpper => "|u|*(r^2+T-t)/r",
            Bound::GradUUpper => "|grad u|*(r^2+T-t)",
            Bound::PhiLower => "r/(u*(r^2+T-t))",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub normalizer: String,
    pub samples: Vec<f64>,
    /// Max of the normalized samples.
    pub fitted_c: f64,
    /// Max of the normalized samples at doubled density.
    pub refined_c: f64,
    pub refinement_drift: f64,
    pub passed: bool,
}

/// Fits C in the chosen bound on grid × ladder, then again on the refined
/// grid with half-level times interleaved, and reports the relative change.
pub fn check_bound(fam: &SolutionFamily, bound: Bound, grid: &RadialGrid, ladder: &TimeLadder) -> Result<BoundCheck> {
    if bound == Bound::PhiLower && !fam.profile().forcing().admits_log_construction() {
        return Err(Error::InvalidArgument(
            "the lower bound needs k <= 0 and k not identically zero".into(),
        ));
    }
    check_ladder(fam, ladder)?;
    let coarse_radii: Vec<f64> = grid.interior().collect();
    let coarse_times: Vec<f64> = ladder.times().collect();
    let refined_grid = grid.refined();
    let fine_radii: Vec<f64> = refined_grid.interior().collect();
    let mut fine_times = coarse_times.clone();
    fine_times.extend(
        ladder
            .levels()
            .iter()
            .map(|l| fam.final_time() - l.remaining * std::f64::consts::FRAC_1_SQRT_2),
    );
    fine_times.sort_by(f64::total_cmp);

    let samples = bound_values(fam, bound, &coarse_radii, &coarse_times)?;
    let fine = bound_values(fam, bound, &fine_radii, &fine_times)?;
    let fitted_c = samples.iter().copied().fold(0.0, f64::max);
    let refined_c = fine.iter().copied().fold(0.0, f64::max);
    let refinement_drift = if refined_c == 0.0 && fitted_c == 0.0 {
        0.0
    } else {
        (refined_c - fitted_c).abs() / refined_c.abs().max(fitted_c.abs())
    };
    let finite = fitted_c.is_finite() && refined_c.is_finite();
    Ok(BoundCheck {
        name: format!("{bound:?}"),
        normalizer: bound.normalizer().into(),
        samples,
        fitted_c,
        refined_c,
        refinement_drift,
        passed: finite && refinement_drift < 0.05,
    })
}

fn bound_values(fam: &SolutionFamily, bound: Bound, radii: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    let points: Vec<(f64, f64)> = times.iter().flat_map(|&t| radii.iter().map(move |&r| (r, t))).collect();
    points
        .par_iter()
        .map(|&(r, t)| {
            let s = fam.remaining(t)?;
            let weight = r * r + s;
            let j = fam.swirl_jet(r, t)?;
            Ok(match bound {
                Bound::UUpper => j.phi.abs() * weight / r,
                Bound::GradUUpper => j.phi_r.hypot(j.phi / r) * weight,
                Bound::PhiLower => {
                    if j.phi > 0.0 {
                        r / (j.phi * weight)
                    } else {
                        f64::INFINITY
                    }
                }
            })
        })
        .collect()
}

fn check_ladder(fam: &SolutionFamily, ladder: &TimeLadder) -> Result<()> {
    if ladder.final_time() != fam.final_time() {
        return Err(Error::InvalidArgument(format!(
            "ladder accumulates at {} but the family blows up at {}",
            ladder.final_time(),
            fam.final_time()
        )));
    }
    Ok(())
}
