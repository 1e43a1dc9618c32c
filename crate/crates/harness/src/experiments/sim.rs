use fracwave_core::sim::{gaussian_bump, lifespan_sweep, measure_linear_decay, simulate, Verdict};
use fracwave_core::testfn::{blow_up_range, critical_exponent, lifespan_exponent, linear_decay_exponents};
use serde_json::json;

use super::{Context, Report};
use crate::outcome::{HarnessError, Outcome};
use crate::table::{PlotSpec, ResultTable};

const VERDICTS: [&str; 3] = ["completed", "blew-up", "step-collapse"];

/// One run from `u₀ = 0`, `u₁ = ε·exp(-|x|²/(2w²))`. With an expected verdict the exit code
/// says whether it was met; without one, a step collapse exits with the non-convergence code.
pub fn blowup(ctx: &Context) -> Result<Report, HarnessError> {
    let cfg = &ctx.config.blowup;
    if let Some(e) = cfg.expect.as_deref() {
        if !VERDICTS.contains(&e) {
            return Err(HarnessError::Usage(format!("expect must be one of {VERDICTS:?}, got {e:?}")));
        }
    }
    if !(cfg.epsilon > 0.0) || !(cfg.sim.width > 0.0) {
        return Err(HarnessError::Usage("epsilon and width must be positive".into()));
    }
    let params = cfg.sim.params()?;
    let sim = cfg.sim.sim_config()?;
    let grid = sim.grid.build()?;
    let u1 = gaussian_bump(&grid, cfg.epsilon, cfg.sim.width);
    let rec = simulate(&vec![0.0; grid.len()], &u1, &sim)?;

    let mut norms = ResultTable::new(
        "blowup_norms",
        &[("t", "time"), ("l2", "1"), ("sup", "1"), ("velocity_l2", "1"), ("derivative_l2", "1")],
    );
    for s in &rec.samples {
        norms.push(vec![s.t.into(), s.l2.into(), s.sup.into(), s.velocity_l2.into(), s.derivative_l2.into()])?;
    }
    norms = norms.with_plot(PlotSpec {
        x: "t".into(),
        y: vec!["sup".into(), "l2".into()],
        log_x: false,
        log_y: true,
        reference_slope: None,
        title: format!("norms, p = {}, ε = {}", params.p, cfg.epsilon),
    });

    let range = blow_up_range(&params);
    let critical = critical_exponent(&params);
    let mut summary = ResultTable::new(
        "blowup_summary",
        &[
            ("sigma", "1"),
            ("delta", "1"),
            ("n", "1"),
            ("p", "1"),
            ("epsilon", "1"),
            ("verdict", "-"),
            ("t_detect", "time"),
            ("steps", "count"),
            ("rejected_steps", "count"),
            ("under_resolved", "-"),
            ("range_lo", "1"),
            ("range_hi", "1"),
            ("critical_exponent", "1"),
        ],
    );
    let (lo, hi) = match &range {
        Ok((lo, hi)) => (Some(*lo), Some(*hi)),
        Err(_) => (None, None),
    };
    summary.push(vec![
        params.sigma.into(),
        params.delta.into(),
        params.n.into(),
        params.p.into(),
        cfg.epsilon.into(),
        rec.verdict.label().into(),
        rec.verdict.t_detect().into(),
        rec.steps.into(),
        rec.rejected_steps.into(),
        rec.under_resolved.into(),
        lo.into(),
        hi.into(),
        critical.as_ref().ok().copied().into(),
    ])?;
    if let Err(e) = &range {
        summary.note("range_error", e.to_string());
    }
    if let Err(e) = &critical {
        summary.note("critical_exponent_error", e.to_string());
    }

    let mut report = Report::new(Outcome::Pass);
    report.messages.push(format!("verdict: {}", rec.verdict.label()));
    if rec.under_resolved {
        report.messages.push("warning: spectral tail exceeded the resolution limit".into());
    }
    match cfg.expect.as_deref() {
        Some(e) if e != rec.verdict.label() => report.fail(format!("expected {e}, got {}", rec.verdict.label())),
        Some(_) => {}
        None => {
            if matches!(rec.verdict, Verdict::StepCollapse { .. }) {
                report.outcome = Outcome::NonConvergence;
            }
        }
    }
    report.artifacts.push((
        "blowup_run.json".into(),
        json!({ "config_hash": ctx.hash, "sim_config_hash": rec.config_hash, "record": rec }),
    ));
    report.tables = vec![summary, norms];
    Ok(report)
}

/// Lifespan sweep over the configured `ε` values.
pub fn lifespan(ctx: &Context) -> Result<Report, HarnessError> {
    let cfg = &ctx.config.lifespan;
    if cfg.epsilons.is_empty() {
        return Err(HarnessError::Usage("lifespan needs at least one epsilon".into()));
    }
    let params = cfg.sim.params()?;
    let sim = cfg.sim.sim_config()?;
    let grid = sim.grid.build()?;
    let profile = gaussian_bump(&grid, 1.0, cfg.sim.width);
    let sweep = lifespan_sweep(&sim, &profile, &cfg.epsilons)?;
    let expected = lifespan_exponent(&params).ok();

    let mut t = ResultTable::new(
        "lifespan",
        &[("epsilon", "1"), ("verdict", "-"), ("t_detect", "time"), ("steps", "count"), ("under_resolved", "-")],
    );
    for row in &sweep.rows {
        t.push(vec![
            row.epsilon.into(),
            row.verdict.label().into(),
            row.verdict.t_detect().into(),
            row.steps.into(),
            row.under_resolved.into(),
        ])?;
    }
    t.note("slope", sweep.slope);
    t.note("expected_slope", expected);
    t.note("monotone", sweep.monotone);
    t = t.with_plot(PlotSpec {
        x: "epsilon".into(),
        y: vec!["t_detect".into()],
        log_x: true,
        log_y: true,
        reference_slope: expected,
        title: "lifespan against data size".into(),
    });

    let mut report = Report::new(Outcome::Pass);
    if !sweep.monotone {
        report.messages.push("warning: T_ε is not monotone in ε".into());
    }
    match (sweep.slope, expected) {
        (Some(slope), Some(e)) => {
            let tol = ctx.tol(cfg.slope_tolerance);
            report.messages.push(format!("slope {slope:.4} against {e:.4}"));
            if (slope - e).abs() > tol * e.abs() {
                report.fail(format!("lifespan slope {slope:.4} is outside ±{:.0}% of {e:.4}", 100.0 * tol));
            }
        }
        (Some(slope), None) => report.messages.push(format!("slope {slope:.4}; p is not below the critical exponent")),
        (None, _) if cfg.epsilons.len() == 1 => report.messages.push("single ε: no fit".into()),
        (None, _) => report.fail("fewer than two runs blew up, no slope to compare"),
    }
    report.tables = vec![t];
    Ok(report)
}

/// Linear (`|u|^p` off) decay rates from `u₀ = 0`, `u₁ = exp(-|x|²/(2w²))`.
pub fn decay(ctx: &Context) -> Result<Report, HarnessError> {
    let cfg = &ctx.config.decay;
    let params = cfg.sim.params()?;
    let sim = cfg.sim.sim_config()?;
    let grid = sim.grid.build()?;
    let u1 = gaussian_bump(&grid, 1.0, cfg.sim.width);
    let fit = measure_linear_decay(&sim, &vec![0.0; grid.len()], &u1, cfg.window).map_err(|e| match e {
        fracwave_core::Error::OutOfRange(m) => HarnessError::Usage(m),
        other => other.into(),
    })?;
    let theory = linear_decay_exponents(&params);

    let mut norms = ResultTable::new(
        "linear_decay_norms",
        &[("t", "time"), ("l2", "1"), ("derivative_l2", "1"), ("velocity_l2", "1")],
    );
    for s in fit.samples.iter().filter(|s| s.t >= cfg.window.0 && s.t <= cfg.window.1) {
        norms.push(vec![s.t.into(), s.l2.into(), s.derivative_l2.into(), s.velocity_l2.into()])?;
    }
    norms = norms.with_plot(PlotSpec {
        x: "t".into(),
        y: vec!["l2".into(), "velocity_l2".into()],
        log_x: true,
        log_y: true,
        reference_slope: Some(theory.solution),
        title: "linear decay".into(),
    });

    let tol = ctx.tol(cfg.tolerance);
    let mut report = Report::new(Outcome::Pass);
    let mut t = ResultTable::new(
        "linear_decay_fit",
        &[("quantity", "-"), ("fitted", "1"), ("theory", "1"), ("rel_error", "1"), ("pass", "-")],
    );
    for (name, got, want) in [
        ("solution", fit.solution, theory.solution),
        ("derivative", fit.derivative, theory.derivative),
        ("velocity", fit.velocity, theory.velocity),
    ] {
        let rel = (got - want).abs() / want.abs();
        let pass = rel <= tol;
        if !pass {
            report.fail(format!("{name} decay exponent {got:.4} against {want:.4}"));
        }
        t.push(vec![name.into(), got.into(), want.into(), rel.into(), pass.into()])?;
    }
    t.note("window", cfg.window);
    t.note("wrap_time", fit.wrap_time);
    t.note("under_resolved", fit.under_resolved);
    if fit.under_resolved {
        report.messages.push("warning: spectral tail exceeded the resolution limit".into());
    }
    report.tables = vec![t, norms];
    Ok(report)
}
