use std::sync::Arc;
use std::thread;

use anyhow::{Context, Result};
use blowup_core::export::{field_slice, format_number, norm_series_table, profile_table, trajectory_table};
use blowup_core::fields::{Part, SolutionFamily, Swirl};
use blowup_core::norms::{
    check_bounded, classify_lq_l1, growth_fit, norm_series, NormSettings, Quantity, Verdict, RESOLUTION_FLOOR,
    TAIL_LEVELS,
};
use blowup_core::numerics::{make_radial_grid, QuadratureSpec, RadialGrid, TimeLadder};
use blowup_core::oracle::{convergence_study, OracleConfig, OracleTarget};
use blowup_core::profiles::{build_profile, EvalPath, SwirlProfile};
use blowup_core::verify::{
    check_bound, check_boundary, check_ode, check_radial_momentum, check_swirl_pde_convergence, log_spaced, Bound,
    FdSteps,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::OutputDir;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(command: &str, checks: Vec<Check>, warnings: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            warnings,
        }
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Everything the commands share, built once per invocation.
pub struct Session {
    pub cfg: RunConfig,
    pub profile: Arc<SwirlProfile>,
    pub verification_profile: Arc<SwirlProfile>,
    pub warnings: Vec<String>,
    pub grid: RadialGrid,
    pub ladder: TimeLadder,
}

impl Session {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let (k, warnings) = cfg.k.load()?;
        if cfg.part == Part::Two && !k.admits_log_construction() {
            anyhow::bail!("part 2 needs a nonpositive, nontrivial k");
        }
        let profile = Arc::new(build_profile(k.clone(), QuadratureSpec::default())?);
        let verification_profile = Arc::new(build_profile(k, QuadratureSpec::verification())?);
        let grid = make_radial_grid(cfg.grid_n, cfg.grading)?;
        let ladder = TimeLadder::new(cfg.final_time, cfg.ladder_j)?;
        Ok(Self {
            cfg,
            profile,
            verification_profile,
            warnings,
            grid,
            ladder,
        })
    }

    fn family(&self, profile: &Arc<SwirlProfile>) -> Result<SolutionFamily> {
        Ok(SolutionFamily::new(
            profile.clone(),
            self.cfg.final_time,
            self.cfg.part,
        )?)
    }

    fn swirl(&self) -> Swirl {
        match self.cfg.part {
            Part::One => Swirl::V,
            Part::Two => Swirl::VBar,
        }
    }
}

pub fn cmd_profile(session: &Session, out: &mut OutputDir) -> Result<Outcome> {
    let profile = &session.profile;
    let table = profile_table(profile, &log_spaced(1e-3, 1.0, 200))?;
    out.table("profile.csv", &table)?;
    let ode = check_ode(profile, &log_spaced(1e-3, 1.0, 50))?;
    let slice_time = session.ladder.levels()[session.ladder.levels().len() / 2].t;
    let fam = session.family(profile)?;
    let slice = field_slice(&fam, slice_time, session.grid.nodes(), profile.spec())?;
    out.table("field_slice.csv", &slice)?;
    eprintln!("alpha = {}", format_number(profile.alpha()));
    let report = json!({
        "alpha": profile.alpha(),
        "inner_at_zero": profile.inner_at_zero(),
        "axis_slope": profile.axis_slope(),
        "field_slice_time": slice_time,
        "ode_residual": ode,
    });
    out.report("profile.json", &report)?;
    let checks = vec![check(
        "ode_residual",
        ode.passed,
        format!(
            "max |residual| = {:.3e} (tolerance {:.0e})",
            ode.max_abs_residual, ode.tolerance
        ),
    )];
    Ok(Outcome::new("profile", checks, session.warnings.clone()))
}

type Job<'a> = Box<dyn FnOnce() -> Result<(Check, Value)> + Send + 'a>;

fn run_parallel(jobs: Vec<Job<'_>>) -> Result<Vec<(Check, Value)>> {
    thread::scope(|scope| {
        let handles: Vec<_> = jobs.into_iter().map(|job| scope.spawn(job)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("a check panicked"))))
            .collect()
    })
}

pub fn cmd_verify(session: &Session, out: &mut OutputDir) -> Result<Outcome> {
    let fam = session
        .family(&session.verification_profile)?
        .with_path(EvalPath::Direct);
    let which = session.swirl();
    let (grid, ladder, spec) = (&session.grid, &session.ladder, *session.verification_profile.spec());
    let steps = FdSteps::default();
    let fam = &fam;
    let pde = move |w: Swirl, name: &'static str| -> Job<'_> {
        Box::new(move || {
            let c = check_swirl_pde_convergence(fam, w, grid, ladder, steps, 1.8)?;
            let detail = format!(
                "order {:.3}, max scaled residual {:.3e} (tolerance {})",
                c.order, c.coarse.max_scaled_residual, c.coarse.tolerance
            );
            Ok((check(name, c.passed, detail), serde_json::to_value(&c)?))
        })
    };
    let mut jobs: Vec<Job<'_>> = vec![pde(which, "swirl_pde")];
    if session.cfg.part == Part::Two {
        jobs.push(pde(Swirl::Eta, "eta_identity"));
    }
    jobs.push(Box::new(move || {
        let r = check_radial_momentum(fam, which, grid, ladder, steps, &spec)?;
        let detail = format!("max scaled residual {:.3e}", r.max_scaled_residual);
        Ok((check("radial_momentum", r.passed, detail), serde_json::to_value(&r)?))
    }));
    jobs.push(Box::new(move || {
        let b = check_boundary(fam, which, ladder)?;
        let detail = format!("max |value at r = 1| {:.3e}", b.vertical.max_abs_residual);
        Ok((check("boundary", b.passed, detail), serde_json::to_value(&b)?))
    }));
    let mut bounds = vec![
        (Bound::UUpper, "bound_u_upper"),
        (Bound::GradUUpper, "bound_grad_u_upper"),
    ];
    if fam.profile().forcing().admits_log_construction() {
        bounds.push((Bound::PhiLower, "bound_phi_lower"));
    }
    for (bound, name) in bounds {
        jobs.push(Box::new(move || {
            let b = check_bound(fam, bound, grid, ladder)?;
            let detail = format!("C = {:.4e}, refinement drift {:.2e}", b.fitted_c, b.refinement_drift);
            Ok((check(name, b.passed, detail), serde_json::to_value(&b)?))
        }));
    }
    let results = run_parallel(jobs)?;
    let report: serde_json::Map<String, Value> = results.iter().map(|(c, v)| (c.name.clone(), v.clone())).collect();
    out.report("verify.json", &report)?;
    let checks = results.into_iter().map(|(c, _)| c).collect();
    Ok(Outcome::new("verify", checks, session.warnings.clone()))
}

#[derive(Debug, Serialize)]
struct ClassificationRow {
    quantity: &'static str,
    q: f64,
    verdict: Verdict,
    model: String,
    misfit: f64,
    estimate: Option<f64>,
}

pub const F_EXPONENTS: [f64; 5] = [1.5, 1.9, 2.0, 2.1, 4.0];
pub const Y_EXPONENTS: [f64; 3] = [1.5, 2.0, 4.0];

pub fn cmd_norms(session: &Session, out: &mut OutputDir) -> Result<Outcome> {
    let fam = session.family(&session.profile)?;
    let settings = NormSettings::default();
    let quantities: Vec<Quantity> = Quantity::ALL
        .into_iter()
        .filter(|q| session.cfg.part == Part::Two || !q.needs_part_two())
        .collect();
    let mut warnings = session.warnings.clone();
    // energies stop where T − t can no longer be resolved from t
    let energy_depth = (1.0 / RESOLUTION_FLOOR).log2().floor() as u32;
    let energy_ladder = if session.ladder.depth() > energy_depth {
        warnings.push(format!("energy series truncated at j = {energy_depth}"));
        TimeLadder::new(session.cfg.final_time, energy_depth)?
    } else {
        session.ladder.clone()
    };
    let mut series = Vec::new();
    for &q in &quantities {
        let ladder = if q.is_energy() { &energy_ladder } else { &session.ladder };
        let s = norm_series(&fam, q, ladder, &session.grid, &settings)
            .with_context(|| format!("computing {}", q.name()))?;
        out.table(&format!("norms_{}.csv", q.name()), &norm_series_table(&s))?;
        series.push(s);
    }
    let find = |q: Quantity| series.iter().find(|s| s.quantity == q);
    let mut checks = Vec::new();
    let nontrivial = fam.profile().forcing().is_nontrivial();
    let depth = energy_ladder.depth();

    let energy_fit = find(Quantity::EnergyV).and_then(|s| growth_fit(s, 8.min(depth - 3), depth));
    if nontrivial {
        let (passed, detail) = match &energy_fit {
            Some(f) => (
                f.slope > 0.0 && f.r_squared > 0.99,
                format!("slope {:.4e}, R^2 {:.6}", f.slope, f.r_squared),
            ),
            None => (false, "fit failed".to_string()),
        };
        checks.push(check("energy_v_log_growth", passed, detail));
    }
    let boundedness: Vec<_> = series
        .iter()
        .filter(|s| s.quantity != Quantity::EnergyV)
        .map(|s| check_bounded(s, TAIL_LEVELS))
        .collect::<std::result::Result<_, _>>()?;
    if let Some(b) = boundedness.iter().find(|b| b.quantity == Quantity::EnergyVbar) {
        let detail = format!("growth exponent {:.3}, max {:.4e}", b.exponent, b.max_ratio);
        checks.push(check("energy_vbar_bounded", b.bounded, detail));
    }

    let mut classifications = Vec::new();
    for (quantity, exponents) in [(Quantity::L1F, &F_EXPONENTS[..]), (Quantity::L1Y, &Y_EXPONENTS[..])] {
        let Some(s) = find(quantity) else { continue };
        for &q in exponents {
            classifications.push(classify_lq_l1(s, q)?);
        }
    }
    for c in &classifications {
        if c.verdict == Verdict::Inconclusive {
            warnings.push(format!("{} at q = {}: inconclusive", c.quantity.name(), c.q));
        }
    }
    if session.cfg.part == Part::Two && nontrivial {
        let infinite: Vec<f64> = classifications
            .iter()
            .filter(|c| c.quantity == Quantity::L1Y && c.verdict == Verdict::Infinite)
            .map(|c| c.q)
            .collect();
        checks.push(check(
            "y_classification",
            infinite.is_empty(),
            if infinite.is_empty() {
                "no q classified infinite".to_string()
            } else {
                format!("infinite at q = {infinite:?}")
            },
        ));
    }
    let rows: Vec<ClassificationRow> = classifications
        .iter()
        .map(|c| ClassificationRow {
            quantity: c.quantity.name(),
            q: c.q,
            verdict: c.verdict,
            model: c.model.map(|m| format!("{m:?}")).unwrap_or_default(),
            misfit: c.misfit,
            estimate: c.estimate,
        })
        .collect();
    if session.cfg.formats.csv && !rows.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["quantity", "q", "verdict", "model", "misfit", "estimate"])?;
        for r in &rows {
            w.write_record([
                r.quantity.to_string(),
                format_number(r.q),
                format!("{:?}", r.verdict).to_lowercase(),
                r.model.clone(),
                format_number(r.misfit),
                r.estimate.map(format_number).unwrap_or_default(),
            ])?;
        }
        out.write_bytes("classification.csv", &w.into_inner()?)?;
    }
    for r in &rows {
        eprintln!("{:<8} q = {:<4} {:?}", r.quantity, r.q, r.verdict);
    }
    let report = json!({
        "energy_v_fit": energy_fit,
        "boundedness": boundedness,
        "classification": classifications,
    });
    out.report("norms.json", &report)?;
    Ok(Outcome::new("norms", checks, warnings))
}

/// Order window and final-error budget for a θ.
pub fn oracle_budget(theta: f64) -> ((f64, f64), f64) {
    if theta == 0.5 {
        ((1.7, 2.3), 1e-5)
    } else {
        ((0.7, 1.3), 1e-4)
    }
}

pub fn cmd_oracle(session: &Session, out: &mut OutputDir) -> Result<Outcome> {
    let fam = session.family(&session.profile)?;
    let o = session.cfg.oracle;
    let t = session.cfg.final_time;
    let delta = o.delta.unwrap_or(t / 8.0);
    let dt = o.dt.unwrap_or((t - delta) / (4.0 * (o.n_r - 1) as f64));
    let base = OracleConfig::new(o.n_r, dt, delta, o.theta)?;
    let target = match session.cfg.part {
        Part::One => OracleTarget::Swirl,
        Part::Two => OracleTarget::Eta,
    };
    let run = convergence_study(&fam, target, &base.ladder(o.levels))?;
    if let Some(finest) = &run.finest {
        out.table("trajectory.csv", &trajectory_table(&fam, target, finest)?)?;
    }
    out.report("oracle.json", &run)?;
    let ((lo, hi), budget) = oracle_budget(o.theta);
    let order_ok = run.rounding_level || run.convergence_order.is_some_and(|p| (lo..=hi).contains(&p));
    let checks = vec![
        check("study_valid", run.valid, format!("pair orders {:?}", run.pair_orders)),
        check(
            "convergence_order",
            order_ok,
            match run.convergence_order {
                Some(p) => format!("order {p:.3}, expected [{lo}, {hi}]"),
                None => "errors at rounding level".to_string(),
            },
        ),
        check(
            "final_error",
            run.final_error_linf < budget,
            format!("L-inf error {:.3e} (budget {budget:.0e})", run.final_error_linf),
        ),
    ];
    Ok(Outcome::new("oracle", checks, session.warnings.clone()))
}
