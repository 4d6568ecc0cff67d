//! Energies, spatial L¹ norms of the forcings, and the L^q_t L¹_x
//! classification of a norm series.
//!
//! Radial integrals run in x = ln r so that the core of width L and the
//! outer 1/r region are both resolved. A small disc r < ε(t) around the axis
//! is left out and bounded with the near-axis series φ ≈ c(t) r; the bound is
//! reported as the uncertainty of the value.

use std::cell::Cell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Part, SolutionFamily, Swirl};
use crate::numerics::{
    integrate, integrate_with_breaks, linear_fit, LinearFit, QuadratureSpec, RadialGrid, TimeLadder, TimeLevel,
    AXIS_EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    EnergyV,
    EnergyVbar,
    L1F,
    L1Y1,
    L1Y2,
    L1Y3,
    L1Y4,
    L1Y,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::EnergyV,
        Quantity::EnergyVbar,
        Quantity::L1F,
        Quantity::L1Y1,
        Quantity::L1Y2,
        Quantity::L1Y3,
        Quantity::L1Y4,
        Quantity::L1Y,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::EnergyV => "energy_v",
            Quantity::EnergyVbar => "energy_vbar",
            Quantity::L1F => "L1_f",
            Quantity::L1Y1 => "L1_Y1",
            Quantity::L1Y2 => "L1_Y2",
            Quantity::L1Y3 => "L1_Y3",
            Quantity::L1Y4 => "L1_Y4",
            Quantity::L1Y => "L1_Y",
        }
    }

    /// Growth shape claimed for the quantity near blow-up.
    pub fn shape(self) -> GrowthShape {
        match self {
            Quantity::EnergyV | Quantity::L1Y2 | Quantity::L1Y4 => GrowthShape::Log,
            Quantity::EnergyVbar | Quantity::L1Y3 => GrowthShape::Constant,
            Quantity::L1F => GrowthShape::InverseSqrt,
            Quantity::L1Y1 | Quantity::L1Y => GrowthShape::LogSquared,
        }
    }

    pub fn is_energy(self) -> bool {
        matches!(self, Quantity::EnergyV | Quantity::EnergyVbar)
    }

    pub fn needs_part_two(self) -> bool {
        !matches!(self, Quantity::EnergyV | Quantity::L1F)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthShape {
    Constant,
    /// ln(1/(T − t))
    Log,
    /// ln²(1/(T − t))
    LogSquared,
    /// (T − t)^{−1/2}
    InverseSqrt,
}

impl GrowthShape {
    pub fn eval(self, remaining: f64) -> f64 {
        let l = (1.0 / remaining).ln();
        match self {
            GrowthShape::Constant => 1.0,
            GrowthShape::Log => l,
            GrowthShape::LogSquared => l * l,
            GrowthShape::InverseSqrt => remaining.sqrt().recip(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Quantity {
    F,
    Y1,
    Y2,
    Y3,
    Y4,
    Y,
}

impl L1Quantity {
    fn series_quantity(self) -> Quantity {
        match self {
            L1Quantity::F => Quantity::L1F,
            L1Quantity::Y1 => Quantity::L1Y1,
            L1Quantity::Y2 => Quantity::L1Y2,
            L1Quantity::Y3 => Quantity::L1Y3,
            L1Quantity::Y4 => Quantity::L1Y4,
            L1Quantity::Y => Quantity::L1Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    /// Bound on the omitted axis disc.
    pub uncertainty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyValue {
    /// 2π∫ w² r dr at time t.
    pub kinetic: f64,
    /// ∫_0^t 2π∫ (w_r² + w²/r²) r dr ds.
    pub dissipation: f64,
    pub uncertainty: f64,
}

impl EnergyValue {
    pub fn total(&self) -> f64 {
        self.kinetic + self.dissipation
    }
}

/// Quadrature and cutoff settings for norm evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSettings {
    pub spec: QuadratureSpec,
    /// ε₀; the omitted disc has radius ε₀·min(1, L²).
    pub axis_cutoff: f64,
    /// Geometric sub-intervals between consecutive ladder levels in time integrals.
    pub sub_intervals: usize,
}

impl Default for NormSettings {
    fn default() -> Self {
        Self {
            spec: QuadratureSpec {
                abs_tol: 1e-300,
                rel_tol: 1e-10,
                max_subdivisions: 4000,
            },
            axis_cutoff: AXIS_EPS,
            sub_intervals: 8,
        }
    }
}

fn cutoff(settings: &NormSettings, remaining: f64) -> f64 {
    settings.axis_cutoff * (2.0 * remaining).min(1.0)
}

/// 2π∫_{cut}^1 q(r) r dr = 2π∫ r²q d(ln r), with `weighted` returning r²q.
/// Breakpoints sit at the grid nodes and the characteristic radii of the family.
fn radial_integral<F>(
    fam: &SolutionFamily,
    weighted: F,
    cut: f64,
    remaining: f64,
    grid: &RadialGrid,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = (cut.ln(), 0.0);
    let l = (2.0 * remaining).sqrt();
    let alpha = fam.alpha().abs();
    let mut points: Vec<f64> = [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0]
        .iter()
        .map(|s| s * l)
        .chain([alpha / 10.0, alpha, 10.0 * alpha])
        .chain(grid.nodes().iter().copied())
        .filter(|&r| r > cut && r < 1.0)
        .map(f64::ln)
        .collect();
    points.push(lo);
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let failure = Cell::new(None);
    let integrand = |x: f64| {
        let r = x.exp().min(1.0);
        match weighted(r) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let result = integrate_with_breaks(integrand, &points, spec);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(2.0 * PI * result?.value)
}

fn energy_swirl(fam: &SolutionFamily, which: Swirl) -> Result<()> {
    match (which, fam.part()) {
        (Swirl::V, _) | (Swirl::VBar, Part::Two) => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "energy is defined for v, or for vbar on the part two family, not {}",
            which.name()
        ))),
    }
}

/// |∂_r w(0)|, the near-axis slope of the swirl.
fn axis_slope(fam: &SolutionFamily, which: Swirl, t: f64) -> Result<f64> {
    let c = fam.axis_slope(t)?;
    Ok(match which {
        Swirl::V => (c + fam.alpha()).abs(),
        _ => (c - (-fam.alpha()).ln_1p()).abs(),
    })
}

fn kinetic(
    fam: &SolutionFamily,
    which: Swirl,
    t: f64,
    grid: &RadialGrid,
    settings: &NormSettings,
) -> Result<NormValue> {
    let s = fam.remaining(t)?;
    let cut = cutoff(settings, s);
    let value = radial_integral(
        fam,
        |r| {
            let w = fam.eval(which, r, t)?;
            Ok(w * w * r * r)
        },
        cut,
        s,
        grid,
        &settings.spec,
    )?;
    let c = axis_slope(fam, which, t)?;
    Ok(NormValue {
        value,
        uncertainty: 2.0 * PI * (c * cut).powi(2) * cut * cut / 4.0,
    })
}

/// Rate of dissipation 2π∫(w_r² + w²/r²) r dr at time t.
fn dissipation_rate(
    fam: &SolutionFamily,
    which: Swirl,
    t: f64,
    grid: &RadialGrid,
    settings: &NormSettings,
) -> Result<NormValue> {
    let s = fam.remaining(t)?;
    let cut = cutoff(settings, s);
    let value = radial_integral(
        fam,
        |r| {
            let (w, dw) = fam.eval_with_radial_derivative(which, r, t)?;
            Ok((dw * r).powi(2) + w * w)
        },
        cut,
        s,
        grid,
        &settings.spec,
    )?;
    let c = axis_slope(fam, which, t)?;
    Ok(NormValue {
        value,
        uncertainty: 2.0 * PI * (c * cut).powi(2),
    })
}

/// ∫ of the dissipation rate over remaining times in [s_late, s_early],
/// split into geometric sub-intervals and integrated in τ = ln(1/(T − t)).
fn dissipation_between(
    fam: &SolutionFamily,
    which: Swirl,
    s_early: f64,
    s_late: f64,
    grid: &RadialGrid,
    settings: &NormSettings,
) -> Result<(f64, f64)> {
    let final_time = fam.final_time();
    let (a, b) = (-s_early.ln(), -s_late.ln());
    let n = settings.sub_intervals.max(1);
    // each rate is itself a quadrature and t = T − s carries s only to ε·T/s,
    // so the outer integral cannot ask for more than that
    let outer = QuadratureSpec {
        rel_tol: (100.0 * settings.spec.rel_tol).max(64.0 * f64::EPSILON * final_time / s_late),
        ..settings.spec
    };
    let mut value = 0.0;
    let mut uncertainty = 0.0;
    for i in 0..n {
        let ta = a + (b - a) * i as f64 / n as f64;
        let tb = if i + 1 == n {
            b
        } else {
            a + (b - a) * (i + 1) as f64 / n as f64
        };
        let failure = Cell::new(None);
        let piece = |tau: f64, bound: bool| {
            let s = (-tau).exp();
            match dissipation_rate(fam, which, final_time - s, grid, settings) {
                Ok(d) => s * if bound { d.uncertainty } else { d.value },
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        };
        let body = integrate(|tau| piece(tau, false), ta, tb, &outer);
        let bound = integrate(|tau| piece(tau, true), ta, tb, &outer);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        value += body?.value;
        uncertainty += bound?.value;
    }
    Ok((value, uncertainty))
}

/// Smallest (T − t)/T at which energies are evaluated; below it t = T − (T − t)
/// no longer carries T − t to four digits.
pub const RESOLUTION_FLOOR: f64 = 1e-12;

/// Energy of the swirl w ∈ {v, v̄} at time t: kinetic part plus the
/// accumulated dissipation since t = 0.
pub fn energy(
    fam: &SolutionFamily,
    which: Swirl,
    t: f64,
    grid: &RadialGrid,
    settings: &NormSettings,
) -> Result<EnergyValue> {
    energy_swirl(fam, which)?;
    let s_t = fam.remaining(t)?;
    if s_t < RESOLUTION_FLOOR * fam.final_time() {
        return Err(Error::Resolution(format!(
            "T - t = {s_t:e} is too close to blow-up for the time integral"
        )));
    }
    let k = kinetic(fam, which, t, grid, settings)?;
    let mut dissipation = 0.0;
    let mut uncertainty = k.uncertainty;
    let mut s = fam.final_time();
    while s > s_t {
        let next = (s / 2.0).max(s_t);
        let (d, u) = dissipation_between(fam, which, s, next, grid, settings)?;
        dissipation += d;
        uncertainty += u;
        s = next;
    }
    Ok(EnergyValue {
        kinetic: k.value,
        dissipation,
        uncertainty,
    })
}

/// 2π∫|q(r, t)| r dr for the forcing h (`F`) or the pieces of Y.
pub fn spatial_l1(
    fam: &SolutionFamily,
    quantity: L1Quantity,
    t: f64,
    grid: &RadialGrid,
    settings: &NormSettings,
) -> Result<NormValue> {
    if quantity != L1Quantity::F && fam.part() != Part::Two {
        return Err(Error::InvalidArgument("Y norms need the part two family".into()));
    }
    let s = fam.remaining(t)?;
    if s < 1e-300 {
        return Err(Error::Resolution(format!("T - t = {s:e} underflows")));
    }
    let cut = cutoff(settings, s);
    let value = radial_integral(
        fam,
        |r| {
            if quantity == L1Quantity::F {
                return Ok(fam.eval_h_weighted(r, t)?.abs());
            }
            let y = fam.eval_y_weighted(r, t)?;
            Ok(match quantity {
                L1Quantity::Y1 => y.y1.abs(),
                L1Quantity::Y2 => y.y2.abs(),
                L1Quantity::Y3 => y.y3.abs(),
                L1Quantity::Y4 => y.y4.abs(),
                _ => y.total().abs(),
            })
        },
        cut,
        s,
        grid,
        &settings.spec,
    )?;
    // disc bounds: |Y1|, |Y2| ≤ c/r; |Y4| ≤ c²; |Y3| ≤ |h| ≤ sup|k|/L³
    let l = (2.0 * s).sqrt();
    let c_cut = fam.axis_slope(t)?.abs() * cut;
    let forcing = PI * fam.profile().forcing_sup() * (cut / l).powi(2) / l;
    let uncertainty = match quantity {
        L1Quantity::F | L1Quantity::Y3 => forcing,
        L1Quantity::Y1 | L1Quantity::Y2 => 2.0 * PI * c_cut,
        L1Quantity::Y4 => PI * c_cut * c_cut,
        L1Quantity::Y => 4.0 * PI * c_cut + PI * c_cut * c_cut + forcing,
    };
    Ok(NormValue { value, uncertainty })
}

/// max over r ∈ [0, 1] of |w(r, t)|, sampled on the grid nodes and on
/// 600 core-scaled points r = Lσ, σ ∈ [1e-3, 1e3], then polished by golden
/// section around the best sample.
pub fn sup_abs(fam: &SolutionFamily, which: Swirl, t: f64, grid: &RadialGrid) -> Result<f64> {
    let l = fam.scale(t)?;
    let mut radii: Vec<f64> = grid.nodes().to_vec();
    radii.extend(
        (0..600)
            .map(|i| l * 10f64.powf(-3.0 + 6.0 * i as f64 / 599.0))
            .filter(|&r| r <= 1.0),
    );
    radii.sort_by(f64::total_cmp);
    let f = |r: f64| fam.eval(which, r, t).map(f64::abs);
    let values = radii.iter().map(|&r| f(r)).collect::<Result<Vec<_>>>()?;
    let (best, _) = values.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
    );
    let (mut a, mut b) = (radii[best.saturating_sub(1)], radii[(best + 1).min(radii.len() - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut top = values[best];
    for _ in 0..60 {
        if b - a <= 1e-15 * b.max(1e-300) {
            break;
        }
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        let (f1, f2) = (f(x1)?, f(x2)?);
        top = top.max(f1).max(f2);
        if f1 >= f2 {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(top)
}

/// Values of one quantity along a ladder, with the claimed growth shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSeries {
    pub quantity: Quantity,
    pub shape: GrowthShape,
    pub final_time: f64,
    pub levels: Vec<TimeLevel>,
    pub values: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub normalizers: Vec<f64>,
}

impl NormSeries {
    pub fn new(
        quantity: Quantity,
        final_time: f64,
        levels: Vec<TimeLevel>,
        values: Vec<f64>,
        uncertainties: Vec<f64>,
    ) -> Result<Self> {
        if levels.len() != values.len() || values.len() != uncertainties.len() {
            return Err(Error::InvalidArgument("norm series lengths differ".into()));
        }
        let shape = quantity.shape();
        let normalizers = levels.iter().map(|l| shape.eval(l.remaining)).collect();
        Ok(Self {
            quantity,
            shape,
            final_time,
            levels,
            values,
            uncertainties,
            normalizers,
        })
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.values.iter().zip(&self.normalizers).map(|(v, n)| v / n).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest value, i.e. the sup over the ladder.
    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates `quantity` at every ladder level.
pub fn norm_series(
    fam: &SolutionFamily,
    quantity: Quantity,
    ladder: &TimeLadder,
    grid: &RadialGrid,
    settings: &NormSettings,
) -> Result<NormSeries> {
    if ladder.final_time() != fam.final_time() {
        return Err(Error::InvalidArgument(
            "ladder and family have different blow-up times".into(),
        ));
    }
    let levels = ladder.levels().to_vec();
    let (values, uncertainties): (Vec<f64>, Vec<f64>) = match quantity {
        Quantity::EnergyV | Quantity::EnergyVbar => {
            let which = if quantity == Quantity::EnergyV {
                Swirl::V
            } else {
                Swirl::VBar
            };
            energy_swirl(fam, which)?;
            energy_along(fam, which, &levels, grid, settings)?.into_iter().unzip()
        }
        _ => {
            let q = match quantity {
                Quantity::L1F => L1Quantity::F,
                Quantity::L1Y1 => L1Quantity::Y1,
                Quantity::L1Y2 => L1Quantity::Y2,
                Quantity::L1Y3 => L1Quantity::Y3,
                Quantity::L1Y4 => L1Quantity::Y4,
                _ => L1Quantity::Y,
            };
            debug_assert_eq!(q.series_quantity(), quantity);
            let out: Result<Vec<NormValue>> = levels
                .par_iter()
                .map(|l| spatial_l1(fam, q, l.t, grid, settings))
                .collect();
            out?.into_iter().map(|v| (v.value, v.uncertainty)).unzip()
        }
    };
    NormSeries::new(quantity, fam.final_time(), levels, values, uncertainties)
}

fn energy_along(
    fam: &SolutionFamily,
    which: Swirl,
    levels: &[TimeLevel],
    grid: &RadialGrid,
    settings: &NormSettings,
) -> Result<Vec<(f64, f64)>> {
    let final_time = fam.final_time();
    let segments: Vec<(f64, f64)> = levels
        .iter()
        .enumerate()
        .map(|(i, l)| (if i == 0 { final_time } else { levels[i - 1].remaining }, l.remaining))
        .collect();
    let pieces: Result<Vec<((f64, f64), NormValue)>> = segments
        .par_iter()
        .zip(levels.par_iter())
        .map(|(&(early, late), l)| {
            if late < RESOLUTION_FLOOR * final_time {
                return Err(Error::Resolution(format!(
                    "T - t = {late:e} is too close to blow-up for the time integral"
                )));
            }
            let d = dissipation_between(fam, which, early, late, grid, settings)?;
            let k = kinetic(fam, which, l.t, grid, settings)?;
            Ok((d, k))
        })
        .collect();
    let mut acc = (0.0, 0.0);
    let mut out = Vec::with_capacity(levels.len());
    for ((d, du), k) in pieces? {
        acc.0 += d;
        acc.1 += du;
        out.push((k.value + acc.0, k.uncertainty + acc.1));
    }
    Ok(out)
}

/// Linear fit of the series values against |ln(T − t_j)| over levels
/// `from..=to` (ladder indices j).
pub fn growth_fit(series: &NormSeries, from: u32, to: u32) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = series
        .levels
        .iter()
        .zip(&series.values)
        .filter(|(l, _)| l.j >= from && l.j <= to)
        .map(|(l, &v)| (l.remaining.ln().abs(), v))
        .unzip();
    linear_fit(&x, &y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessCheck {
    pub quantity: Quantity,
    pub shape: GrowthShape,
    /// d ln(value/normalizer) / d ln ln(1/(T − t)) over the last levels.
    pub exponent: f64,
    pub window: usize,
    pub max_ratio: f64,
    pub bounded: bool,
}

/// Exponent of ratio growth below which value/normalizer counts as bounded.
/// A normalizer that is right gives exponent → 0; one that is a logarithm
/// too weak gives exponent → 1.
pub const BOUNDED_EXPONENT: f64 = 0.5;

/// Whether value/normalizer stays bounded, judged from the growth exponent
/// of the ratio in ln(1/(T − t)) over the last `window` levels.
pub fn check_bounded(series: &NormSeries, window: usize) -> Result<BoundednessCheck> {
    let n = series.len();
    let window = window.min(n);
    if window < 3 {
        return Err(Error::InvalidArgument(
            "boundedness check needs at least 3 levels".into(),
        ));
    }
    let ratios = series.ratios();
    let max_ratio = ratios.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let tail = n - window..n;
    let exponent = if ratios[tail.clone()].iter().all(|&r| r == 0.0) {
        0.0
    } else {
        let (x, y): (Vec<f64>, Vec<f64>) = tail
            .map(|i| ((1.0 / series.levels[i].remaining).ln().ln(), ratios[i].abs().ln()))
            .unzip();
        linear_fit(&x, &y).map_or(f64::NAN, |f| f.slope)
    };
    Ok(BoundednessCheck {
        quantity: series.quantity,
        shape: series.shape,
        exponent,
        window,
        max_ratio,
        bounded: max_ratio.is_finite() && exponent < BOUNDED_EXPONENT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    Constant,
    Log,
    LogSquared,
    /// value ≈ a·(T − t)^{−exponent}
    Power {
        exponent: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub quantity: Quantity,
    pub q: f64,
    pub verdict: Verdict,
    pub model: Option<TailModel>,
    /// Relative RMS misfit of the chosen tail model.
    pub misfit: f64,
    /// ∫_0^T ‖·‖^q dt when finite.
    pub estimate: Option<f64>,
}

/// Tail window for model selection.
pub const TAIL_LEVELS: usize = 8;

/// A fitted power tail with p·q within this of 1 is indistinguishable from
/// the divergent p·q = 1 on a finite ladder and is classified infinite.
pub const MARGINAL_POWER: f64 = 1e-3;

struct Fitted {
    model: TailModel,
    coefficients: [f64; 3],
    misfit: f64,
}

/// Whether ∫_0^T ‖·(t)‖^q dt is finite, from the ladder values plus a tail
/// extrapolated with the best of {constant, ln, ln², power} over the last
/// [`TAIL_LEVELS`] levels.
pub fn classify_lq_l1(series: &NormSeries, q: f64) -> Result<Classification> {
    if !(q > 0.0) {
        return Err(Error::InvalidArgument(format!("q must be positive, got {q}")));
    }
    let inconclusive = |misfit: f64| Classification {
        quantity: series.quantity,
        q,
        verdict: Verdict::Inconclusive,
        model: None,
        misfit,
        estimate: None,
    };
    let values: Vec<f64> = series.values.iter().map(|v| v.abs()).collect();
    if values.iter().all(|&v| v == 0.0) {
        return Ok(Classification {
            quantity: series.quantity,
            q,
            verdict: Verdict::Finite,
            model: Some(TailModel::Constant),
            misfit: 0.0,
            estimate: Some(0.0),
        });
    }
    let n = values.len();
    if n < 4 || values.iter().any(|v| !v.is_finite()) {
        return Ok(inconclusive(f64::NAN));
    }
    let w = TAIL_LEVELS.min(n);
    let tail = &series.levels[n - w..];
    let y = &values[n - w..];
    let noise = 1e-8 * y.iter().copied().fold(0.0, f64::max);
    let rising = y.windows(2).all(|p| p[1] - p[0] >= -noise);
    let falling = y.windows(2).all(|p| p[1] - p[0] <= noise);
    if !(rising || falling) {
        return Ok(inconclusive(f64::NAN));
    }
    let ell: Vec<f64> = tail.iter().map(|l| (1.0 / l.remaining).ln()).collect();
    let Some(best) = select_tail_model(&ell, y) else {
        return Ok(inconclusive(f64::NAN));
    };

    let last = &series.levels[n - 1];
    let s_last = last.remaining;
    let tail_integral = match best.model {
        TailModel::Power { exponent } => {
            let a = best.coefficients[0];
            let pq = exponent * q;
            if pq >= 1.0 - MARGINAL_POWER {
                None
            } else {
                Some(a.powf(q) * s_last.powf(1.0 - pq) / (1.0 - pq))
            }
        }
        _ => {
            let [c0, c1, c2] = best.coefficients;
            let l0 = (1.0 / s_last).ln();
            let f = |l: f64| (c0 + c1 * l + c2 * l * l).abs().powf(q) * (-l).exp();
            let points: Vec<f64> = [0.0, 5.0, 20.0, 60.0, 150.0, 400.0].iter().map(|d| l0 + d).collect();
            Some(integrate_with_breaks(f, &points, &QuadratureSpec::default())?.value)
        }
    };
    let Some(tail_integral) = tail_integral else {
        return Ok(Classification {
            quantity: series.quantity,
            q,
            verdict: Verdict::Infinite,
            model: Some(best.model),
            misfit: best.misfit,
            estimate: None,
        });
    };
    // ladder body, with N^q interpolated as a local power of T − t between
    // levels; the first segment reuses the exponent of levels 1 and 2
    let levels = &series.levels;
    let powered: Vec<f64> = values.iter().map(|v| v.powf(q)).collect();
    let first_exponent = local_exponent(levels[0].remaining, levels[1].remaining, powered[0], powered[1]);
    let mut body = power_segment(series.final_time, levels[0].remaining, powered[0], first_exponent);
    for i in 1..n {
        let (sa, sb) = (levels[i - 1].remaining, levels[i].remaining);
        let p = local_exponent(sa, sb, powered[i - 1], powered[i]);
        body += power_segment(sa, sb, powered[i], p);
    }
    Ok(Classification {
        quantity: series.quantity,
        q,
        verdict: Verdict::Finite,
        model: Some(best.model),
        misfit: best.misfit,
        estimate: Some(body + tail_integral),
    })
}

/// p with f ∝ s^{−p} through (sa, fa) and (sb, fb); `None` when a value vanishes.
fn local_exponent(sa: f64, sb: f64, fa: f64, fb: f64) -> Option<f64> {
    (fa > 0.0 && fb > 0.0).then(|| (fb / fa).ln() / (sa / sb).ln())
}

/// ∫_{sb}^{sa} f ds for f = fb·(s/sb)^{−p}; constant fb when p is unknown.
fn power_segment(sa: f64, sb: f64, fb: f64, p: Option<f64>) -> f64 {
    match p {
        None => fb * (sa - sb),
        Some(p) if (p - 1.0).abs() < 1e-12 => fb * sb * (sa / sb).ln(),
        Some(p) => fb * sb * ((sa / sb).powf(1.0 - p) - 1.0) / (1.0 - p),
    }
}

/// Best tail model by relative RMS misfit. A simpler model is preferred
/// unless a richer one fits at least twice as well.
fn select_tail_model(ell: &[f64], y: &[f64]) -> Option<Fitted> {
    let scale = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    let misfit = |f: &dyn Fn(f64) -> f64| {
        let sse: f64 = ell.iter().zip(y).map(|(&l, &v)| (v - f(l)).powi(2)).sum();
        (sse / y.len() as f64).sqrt() / scale
    };
    let mut candidates = Vec::new();

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    candidates.push(Fitted {
        model: TailModel::Constant,
        coefficients: [mean, 0.0, 0.0],
        misfit: misfit(&|_| mean),
    });
    if let Some(f) = linear_fit(ell, y) {
        candidates.push(Fitted {
            model: TailModel::Log,
            coefficients: [f.intercept, f.slope, 0.0],
            misfit: misfit(&|l| f.intercept + f.slope * l),
        });
    }
    if y.iter().all(|&v| v > 0.0) {
        let logs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        if let Some(f) = linear_fit(ell, &logs) {
            let a = f.intercept.exp();
            candidates.push(Fitted {
                model: TailModel::Power { exponent: f.slope },
                coefficients: [a, f.slope, 0.0],
                misfit: misfit(&|l| a * (f.slope * l).exp()),
            });
        }
    }
    if let Some(c) = quadratic_fit(ell, y) {
        candidates.push(Fitted {
            model: TailModel::LogSquared,
            coefficients: c,
            misfit: misfit(&|l| c[0] + c[1] * l + c[2] * l * l),
        });
    }
    // candidates are ordered from simplest to richest
    let mut best: Option<Fitted> = None;
    for c in candidates {
        if !c.misfit.is_finite() {
            continue;
        }
        best = match best {
            Some(b) if !(c.misfit < 0.5 * b.misfit) => Some(b),
            _ => Some(c),
        };
    }
    best
}

/// Least squares y ≈ c₀ + c₁x + c₂x², solved in the centered variable.
fn quadratic_fit(x: &[f64], y: &[f64]) -> Option<[f64; 3]> {
    if x.len() < 3 {
        return None;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let u = xi - m;
        let basis = [1.0, u, u * u];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += basis[i] * basis[j];
            }
            b[i] += basis[i] * yi;
        }
    }
    let d = solve3(a, b)?;
    // back to powers of x
    Some([d[0] - d[1] * m + d[2] * m * m, d[1] - 2.0 * d[2] * m, d[2]])
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::numerics::{make_radial_grid, Grading};
    use crate::profiles::{build_profile, reference_k, ForcingProfile};

    fn synthetic(quantity: Quantity, final_time: f64, f: impl Fn(f64) -> f64) -> NormSeries {
        let ladder = TimeLadder::new(final_time, 30).unwrap();
        let levels = ladder.levels().to_vec();
        let values = levels.iter().map(|l| f(l.remaining)).collect();
        NormSeries::new(quantity, final_time, levels, values, vec![0.0; 30]).unwrap()
    }

    #[test]
    fn zero_series_is_finite_zero() {
        let s = synthetic(Quantity::L1Y, 0.5, |_| 0.0);
        let c = classify_lq_l1(&s, 4.0).unwrap();
        assert_eq!(c.verdict, Verdict::Finite);
        assert_eq!(c.estimate, Some(0.0));
    }

    #[test]
    fn power_tail_flips_at_critical_exponent() {
        // ∫_0^T (T−t)^{−q/2} dt converges iff q < 2
        let s = synthetic(Quantity::L1F, 0.5, |r| 3.0 / r.sqrt());
        for (q, v) in [
            (1.5, Verdict::Finite),
            (1.9, Verdict::Finite),
            (2.1, Verdict::Infinite),
            (3.0, Verdict::Infinite),
        ] {
            let c = classify_lq_l1(&s, q).unwrap();
            assert_eq!(c.verdict, v, "q = {q}");
            assert!(matches!(c.model, Some(TailModel::Power { exponent }) if (exponent - 0.5).abs() < 1e-9));
        }
        // closed form 3^q T^{1−q/2}/(1−q/2) at q = 1.5
        let c = classify_lq_l1(&s, 1.5).unwrap();
        let exact = 3f64.powf(1.5) * 0.5f64.powf(0.25) / 0.25;
        assert!((c.estimate.unwrap() - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn log_squared_tail_is_integrable() {
        let s = synthetic(Quantity::L1Y, 0.5, |r| 0.7 * r.ln().powi(2) + 2.0);
        for q in [1.5, 2.0, 4.0] {
            let c = classify_lq_l1(&s, q).unwrap();
            assert_eq!(c.verdict, Verdict::Finite);
            assert_eq!(c.model, Some(TailModel::LogSquared));
        }
    }

    #[test]
    fn oscillating_tail_is_inconclusive() {
        let s = synthetic(Quantity::L1Y3, 0.5, |r| 1.0 + 0.1 * (r.ln() * 2.0).sin());
        assert_eq!(classify_lq_l1(&s, 2.0).unwrap().verdict, Verdict::Inconclusive);
        assert!(classify_lq_l1(&s, 0.0).is_err());
    }

    #[test]
    fn boundedness_exponent() {
        let good = synthetic(Quantity::L1Y2, 0.5, |r| 3.0 * (1.0 / r).ln() + 1.0);
        assert!(check_bounded(&good, 8).unwrap().bounded);
        let bad = synthetic(Quantity::L1Y2, 0.5, |r| (1.0 / r).ln().powi(2));
        let b = check_bounded(&bad, 8).unwrap();
        assert!(!b.bounded && (b.exponent - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_fit_recovers_coefficients() {
        let x: Vec<f64> = (0..8).map(|i| 40.0 + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 0.25 * v + 0.75 * v * v).collect();
        let c = quadratic_fit(&x, &y).unwrap();
        assert!((c[0] - 1.5).abs() < 1e-6 && (c[1] + 0.25).abs() < 1e-8 && (c[2] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn zero_forcing_norms_vanish() {
        let p = build_profile(ForcingProfile::zero(), QuadratureSpec::default()).unwrap();
        let fam = SolutionFamily::new(Arc::new(p), 0.5, Part::One).unwrap();
        let grid = make_radial_grid(17, Grading::Uniform).unwrap();
        let settings = NormSettings::default();
        let e = energy(&fam, Swirl::V, 0.3, &grid, &settings).unwrap();
        assert_eq!(e.total(), 0.0);
        assert_eq!(
            spatial_l1(&fam, L1Quantity::F, 0.3, &grid, &settings).unwrap().value,
            0.0
        );
    }

    #[test]
    fn log_variable_kinetic_matches_plain_quadrature() {
        let p = build_profile(reference_k(), QuadratureSpec::default()).unwrap();
        let fam = SolutionFamily::new(Arc::new(p), 0.5, Part::One).unwrap();
        let grid = make_radial_grid(33, Grading::Uniform).unwrap();
        let settings = NormSettings::default();
        let t = 0.45;
        let k = kinetic(&fam, Swirl::V, t, &grid, &settings).unwrap();
        let plain = integrate(
            |r| {
                let v = fam.eval_v(r, t).unwrap();
                2.0 * PI * v * v * r
            },
            0.0,
            1.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((k.value - plain.value).abs() <= 1e-9 * plain.value + k.uncertainty);
    }

    #[test]
    fn energy_series_matches_pointwise_energy() {
        let p = build_profile(reference_k(), QuadratureSpec::default()).unwrap();
        let fam = SolutionFamily::new(Arc::new(p), 0.5, Part::One).unwrap();
        let grid = make_radial_grid(33, Grading::Uniform).unwrap();
        let settings = NormSettings::default();
        let ladder = TimeLadder::new(0.5, 5).unwrap();
        let series = norm_series(&fam, Quantity::EnergyV, &ladder, &grid, &settings).unwrap();
        let direct = energy(&fam, Swirl::V, ladder.levels()[4].t, &grid, &settings).unwrap();
        assert!((series.values[4] - direct.total()).abs() < 1e-9 * direct.total());
        assert!(series.values.windows(2).all(|w| w[1] >= w[0]));
    }
}
