//! Implicit time stepping of the linear radial swirl equation
//!
//! ```text
//! ∂_t φ = φ_rr + φ_r/r − φ/r² − F(r, t)
//! ```
//!
//! on a uniform grid of [0, 1] with Dirichlet data at both ends. The forcing
//! of the swirl problem is rebuilt here from k alone, so the stepper shares
//! no evaluation path with the closed-form profile; only the initial data
//! and the final comparison use the field evaluators.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Part, SolutionFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Radial nodes including both ends.
    pub n_r: usize,
    pub dt: f64,
    /// The run stops at T − delta.
    pub delta: f64,
    /// 0.5 is Crank–Nicolson, 1 is backward Euler.
    pub theta: f64,
}

impl OracleConfig {
    pub fn new(n_r: usize, dt: f64, delta: f64, theta: f64) -> Result<Self> {
        if n_r < 16 {
            return Err(Error::InvalidArgument(format!("oracle needs n_r >= 16, got {n_r}")));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        if !(dt > 0.0 && dt < delta / 10.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must lie in (0, delta/10) = (0, {}), got {dt}",
                delta / 10.0
            )));
        }
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in [0.5, 1], got {theta}"
            )));
        }
        Ok(Self { n_r, dt, delta, theta })
    }

    pub fn dr(&self) -> f64 {
        1.0 / (self.n_r - 1) as f64
    }

    /// Twice the nodes and half the time step.
    pub fn refined(&self) -> Self {
        Self {
            n_r: 2 * self.n_r,
            dt: self.dt / 2.0,
            ..*self
        }
    }

    /// `count` levels starting from `self`, each refined from the previous one.
    pub fn ladder(&self, count: usize) -> Vec<Self> {
        std::iter::successors(Some(*self), |c| Some(c.refined()))
            .take(count)
            .collect()
    }
}

/// Snapshots of a discrete trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    /// Time step actually used (T − delta is an integer number of steps).
    pub dt: f64,
    pub steps: usize,
}

impl OracleSolution {
    pub fn final_state(&self) -> &[f64] {
        self.snapshots.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Solves `a_i x_{i−1} + b_i x_i + c_i x_{i+1} = d_i` by forward elimination
/// and back substitution (`a[0]` and `c[n−1]` are ignored).
pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || c.len() != n || d.len() != n || n == 0 {
        return Err(Error::InvalidArgument(
            "tridiagonal bands must have equal, nonzero length".into(),
        ));
    }
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut pivot = b[0];
    for i in 0..n {
        if i > 0 {
            pivot = b[i] - a[i] * cp[i - 1];
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Numerical(format!("zero or non-finite pivot in row {i}")));
        }
        cp[i] = c[i] / pivot;
        dp[i] = (d[i] - if i > 0 { a[i] * dp[i - 1] } else { 0.0 }) / pivot;
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    Ok(x)
}

const SNAPSHOTS: usize = 8;

/// θ-scheme march of `∂_t φ = Aφ − F` from `initial` (all nodes) to `t_end`.
/// `forcing(t, radii, out)` fills F at the interior nodes.
pub fn theta_march<F>(
    cfg: &OracleConfig,
    t_end: f64,
    initial: Vec<f64>,
    right_value: f64,
    forcing: F,
) -> Result<OracleSolution>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = cfg.n_r;
    if initial.len() != n {
        return Err(Error::InvalidArgument("initial data length differs from n_r".into()));
    }
    let dr = cfg.dr();
    let radii: Vec<f64> = (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 * dr }).collect();
    let steps = ((t_end / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let theta = cfg.theta;
    let m = n - 2;
    let interior = &radii[1..n - 1];

    // A on interior nodes: lower, diagonal, upper
    let inv_dr2 = 1.0 / (dr * dr);
    let lower: Vec<f64> = interior.iter().map(|&r| inv_dr2 - 0.5 / (r * dr)).collect();
    let upper: Vec<f64> = interior.iter().map(|&r| inv_dr2 + 0.5 / (r * dr)).collect();
    let diag: Vec<f64> = interior.iter().map(|&r| -2.0 * inv_dr2 - 1.0 / (r * r)).collect();

    let lhs_a: Vec<f64> = lower.iter().map(|v| -theta * dt * v).collect();
    let lhs_b: Vec<f64> = diag.iter().map(|v| 1.0 - theta * dt * v).collect();
    let lhs_c: Vec<f64> = upper.iter().map(|v| -theta * dt * v).collect();

    let mut state = initial;
    state[0] = 0.0;
    state[n - 1] = right_value;
    let mut times = vec![0.0];
    let mut snapshots = vec![state.clone()];
    let every = (steps / SNAPSHOTS).max(1);
    let mut f = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for step in 0..steps {
        let t = step as f64 * dt;
        forcing(t + theta * dt, interior, &mut f)?;
        for i in 0..m {
            let (left, mid, right) = (state[i], state[i + 1], state[i + 2]);
            let a_phi = lower[i] * left + diag[i] * mid + upper[i] * right;
            rhs[i] = mid + (1.0 - theta) * dt * a_phi - dt * f[i];
        }
        // the boundary value is fixed, so its implicit part moves to the right side
        rhs[m - 1] += theta * dt * upper[m - 1] * right_value;
        let next = solve_tridiagonal(&lhs_a, &lhs_b, &lhs_c, &rhs)?;
        state[1..n - 1].copy_from_slice(&next);
        if (step + 1) % every == 0 || step + 1 == steps {
            times.push(if step + 1 == steps {
                t_end
            } else {
                (step + 1) as f64 * dt
            });
            snapshots.push(state.clone());
        }
    }
    Ok(OracleSolution {
        radii,
        times,
        snapshots,
        dt,
        steps,
    })
}

fn end_time(fam: &SolutionFamily, cfg: &OracleConfig) -> Result<f64> {
    let t_end = fam.final_time() - cfg.delta;
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta = {} leaves no time before T = {}",
            cfg.delta,
            fam.final_time()
        )));
    }
    Ok(t_end)
}

/// Steps the swirl equation driven by h = k(r/L)/L³, starting from u(·, 0).
pub fn solve_swirl(fam: &SolutionFamily, cfg: &OracleConfig) -> Result<OracleSolution> {
    if fam.part() != Part::One {
        return Err(Error::InvalidArgument("solve_swirl needs the part one family".into()));
    }
    let t_end = end_time(fam, cfg)?;
    let initial = initial_data(cfg, |r| fam.eval_u(r, 0.0))?;
    let k = fam.profile().forcing().clone();
    let final_time = fam.final_time();
    theta_march(cfg, t_end, initial, -fam.alpha(), move |t, radii, out| {
        let l = (2.0 * (final_time - t)).sqrt();
        let l3 = l * l * l;
        for (o, &r) in out.iter_mut().zip(radii) {
            *o = k.eval(r / l) / l3;
        }
        Ok(())
    })
}

/// Steps the η equation driven by Y from the field evaluators, starting from η(·, 0).
pub fn solve_eta(fam: &SolutionFamily, cfg: &OracleConfig) -> Result<OracleSolution> {
    if fam.part() != Part::Two {
        return Err(Error::InvalidArgument("solve_eta needs the part two family".into()));
    }
    let t_end = end_time(fam, cfg)?;
    let initial = initial_data(cfg, |r| fam.eval_eta(r, 0.0))?;
    theta_march(cfg, t_end, initial, (-fam.alpha()).ln_1p(), |t, radii, out| {
        for (o, &r) in out.iter_mut().zip(radii) {
            *o = fam.eval_y(r, t)?.total();
        }
        Ok(())
    })
}

fn initial_data(cfg: &OracleConfig, f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    let dr = cfg.dr();
    (0..cfg.n_r)
        .map(|i| f(if i == cfg.n_r - 1 { 1.0 } else { i as f64 * dr }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleTarget {
    /// φ = u driven by h (part one).
    Swirl,
    /// η = ln(1 + u) driven by Y (part two).
    Eta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelError {
    pub config: OracleConfig,
    pub dt_used: f64,
    pub steps: usize,
    pub final_error_linf: f64,
    pub final_error_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRun {
    pub target: OracleTarget,
    /// Finest configuration.
    pub config: OracleConfig,
    pub final_error_linf: f64,
    pub final_error_l2: f64,
    /// Observed order of the last refinement pair (L∞ errors); `None` when
    /// the errors are at rounding level.
    pub convergence_order: Option<f64>,
    pub pair_orders: Vec<f64>,
    pub levels: Vec<LevelError>,
    /// Errors decrease monotonically across levels.
    pub valid: bool,
    pub rounding_level: bool,
    #[serde(skip)]
    pub finest: Option<OracleSolution>,
}

/// Errors at or below this are treated as rounding.
pub const ROUNDING_LEVEL: f64 = 1e-13;

/// Runs every level, compares the final state with the closed form, and
/// measures the order from consecutive levels.
pub fn convergence_study(fam: &SolutionFamily, target: OracleTarget, levels: &[OracleConfig]) -> Result<OracleRun> {
    if levels.len() < 2 {
        return Err(Error::InvalidArgument(
            "a convergence study needs at least two levels".into(),
        ));
    }
    if levels.windows(2).any(|w| !(w[1].n_r > w[0].n_r && w[1].dt < w[0].dt)) {
        return Err(Error::InvalidArgument("study levels must refine both dr and dt".into()));
    }
    let runs: Result<Vec<(LevelError, OracleSolution)>> = levels
        .par_iter()
        .map(|cfg| {
            let sol = match target {
                OracleTarget::Swirl => solve_swirl(fam, cfg)?,
                OracleTarget::Eta => solve_eta(fam, cfg)?,
            };
            let (linf, l2) = final_errors(fam, target, &sol)?;
            Ok((
                LevelError {
                    config: *cfg,
                    dt_used: sol.dt,
                    steps: sol.steps,
                    final_error_linf: linf,
                    final_error_l2: l2,
                },
                sol,
            ))
        })
        .collect();
    let (levels, mut solutions): (Vec<LevelError>, Vec<OracleSolution>) = runs?.into_iter().unzip();
    let finest = solutions.pop();
    let pair_orders: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            let h = w[0].config.dr() / w[1].config.dr();
            (w[0].final_error_linf / w[1].final_error_linf).ln() / h.ln()
        })
        .collect();
    let last = levels.last().expect("at least two levels");
    let rounding_level = last.final_error_linf <= ROUNDING_LEVEL;
    let valid = rounding_level || levels.windows(2).all(|w| w[1].final_error_linf < w[0].final_error_linf);
    Ok(OracleRun {
        target,
        config: last.config,
        final_error_linf: last.final_error_linf,
        final_error_l2: last.final_error_l2,
        convergence_order: if rounding_level {
            None
        } else {
            pair_orders.last().copied()
        },
        pair_orders,
        valid,
        rounding_level,
        levels,
        finest,
    })
}

/// Closed-form value the trajectory is compared with.
pub fn exact_value(fam: &SolutionFamily, target: OracleTarget, r: f64, t: f64) -> Result<f64> {
    match target {
        OracleTarget::Swirl => fam.eval_u(r, t),
        OracleTarget::Eta => fam.eval_eta(r, t),
    }
}

/// L∞ and L²(2πr dr) errors of the final state.
pub fn final_errors(fam: &SolutionFamily, target: OracleTarget, sol: &OracleSolution) -> Result<(f64, f64)> {
    let t = sol.final_time();
    let dr = sol.radii.get(1).copied().unwrap_or(1.0);
    let mut linf: f64 = 0.0;
    let mut l2 = 0.0;
    for (&r, &v) in sol.radii.iter().zip(sol.final_state()) {
        let e = (v - exact_value(fam, target, r, t)?).abs();
        linf = linf.max(e);
        l2 += e * e * r * dr;
    }
    Ok((linf, (2.0 * std::f64::consts::PI * l2).sqrt()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::numerics::QuadratureSpec;
    use crate::profiles::{build_profile, ForcingProfile};

    #[test]
    fn thomas_matches_dense_solution() {
        let a = [0.0, 1.0, 2.0, -1.0];
        let b = [4.0, 5.0, 6.0, 7.0];
        let c = [1.0, -2.0, 1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let d: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = b[i] * x[i];
                if i > 0 {
                    s += a[i] * x[i - 1];
                }
                if i < 3 {
                    s += c[i] * x[i + 1];
                }
                s
            })
            .collect();
        let got = solve_tridiagonal(&a, &b, &c, &d).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).abs() < 1e-14);
        }
        assert!(solve_tridiagonal(&[0.0], &[0.0], &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OracleConfig::new(8, 1e-3, 0.1, 0.5).is_err());
        assert!(OracleConfig::new(32, 0.02, 0.1, 0.5).is_err());
        assert!(OracleConfig::new(32, 1e-3, 0.0, 0.5).is_err());
        assert!(OracleConfig::new(32, 1e-3, 0.1, 0.4).is_err());
        let c = OracleConfig::new(32, 1e-3, 0.1, 0.5).unwrap();
        let l = c.ladder(3);
        assert_eq!(l[2].n_r, 128);
        assert_eq!(l[2].dt, 2.5e-4);
    }

    #[test]
    fn zero_forcing_gives_zero_trajectory() {
        let p = build_profile(ForcingProfile::zero(), QuadratureSpec::default()).unwrap();
        let fam = SolutionFamily::new(Arc::new(p), 0.5, Part::One).unwrap();
        let cfg = OracleConfig::new(33, 1e-3, 0.0625, 0.5).unwrap();
        let sol = solve_swirl(&fam, &cfg).unwrap();
        assert!(sol.snapshots.iter().flatten().all(|&v| v == 0.0));
        let run = convergence_study(&fam, OracleTarget::Swirl, &cfg.ladder(2)).unwrap();
        assert!(run.rounding_level && run.valid && run.convergence_order.is_none());
    }

    #[test]
    fn linear_mode_is_stationary() {
        let cfg = OracleConfig::new(65, 1e-3, 0.05, 0.5).unwrap();
        let initial: Vec<f64> = (0..65).map(|i| 0.3 * i as f64 / 64.0).collect();
        let sol = theta_march(&cfg, 0.2, initial.clone(), 0.3, |_, _, out| {
            out.fill(0.0);
            Ok(())
        })
        .unwrap();
        for (a, b) in sol.final_state().iter().zip(&initial) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn heat_mode_decays_at_the_bessel_rate() {
        // J₁(j₁,₁ r) e^{−j₁,₁² t} solves the unforced equation with zero ends
        let j11 = 3.831_705_970_207_512_f64;
        let bessel_j1 = |x: f64| {
            // power series, ample for x ≤ 3.9
            let mut term = x / 2.0;
            let mut sum = term;
            for m in 1..40 {
                term *= -(x * x / 4.0) / (m as f64 * (m + 1) as f64);
                sum += term;
            }
            sum
        };
        let errors: Vec<f64> = [64usize, 128]
            .iter()
            .map(|&n| {
                let cfg = OracleConfig::new(n + 1, 0.4 / n as f64 / 4.0, 0.2, 0.5).unwrap();
                let initial: Vec<f64> = (0..=n).map(|i| bessel_j1(j11 * i as f64 / n as f64)).collect();
                let sol = theta_march(&cfg, 0.05, initial, 0.0, |_, _, out| {
                    out.fill(0.0);
                    Ok(())
                })
                .unwrap();
                let decay = (-j11 * j11 * 0.05).exp();
                sol.radii
                    .iter()
                    .zip(sol.final_state())
                    .map(|(&r, &v)| (v - bessel_j1(j11 * r) * decay).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let order = (errors[0] / errors[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }
}
