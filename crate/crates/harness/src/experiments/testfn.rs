use std::sync::Arc;

use fracwave_core::fractional::{QuadratureScheme, TorusGrid};
use fracwave_core::sim::gaussian_bump;
use fracwave_core::testfn::{
    check_contradiction_bound, contradiction_slope, evaluate_ladder, spatial_weight_for, ManufacturedSolution,
};

use super::{Context, Report};
use crate::config::TestfnPreset;
use crate::outcome::{HarnessError, Outcome};
use crate::table::{PlotSpec, ResultTable};

/// Amplitude `(a, a', a'')` of the separable field for each preset.
fn amplitude(preset: TestfnPreset) -> fn(f64) -> (f64, f64, f64) {
    match preset {
        TestfnPreset::Rising => |t| {
            let e = (-t).exp();
            (1.0 - e, e, -e)
        },
        TestfnPreset::NegativeData => |t| {
            let e = (-t).exp();
            (e - 1.0, -e, e)
        },
        TestfnPreset::ZeroData => |_| (0.0, 0.0, 0.0),
    }
}

/// Weak-form functionals over the `R` ladder and the contradiction bound
/// `∫u₁φ_R` against `R^{-2σp' + n + α}`.
pub fn testfn(ctx: &Context) -> Result<Report, HarnessError> {
    let cfg = &ctx.config.testfn;
    let params = fracwave_core::testfn::ModelParams::new(cfg.sigma, cfg.delta, cfg.n, cfg.p)?;
    if cfg.scales.iter().any(|&r| !(r > 0.0)) {
        return Err(HarnessError::Usage("scales must be positive".into()));
    }
    if !(cfg.width > 0.0) {
        return Err(HarnessError::Usage("width must be positive".into()));
    }
    let grid = Arc::new(TorusGrid::new(cfg.n, cfg.half_extent, cfg.points)?);
    let profile = gaussian_bump(&grid, 1.0, cfg.width);
    let horizon = cfg.scales.iter().copied().fold(1.0f64, f64::max).powf(params.alpha());
    let m = ManufacturedSolution::separable(grid, &params, &profile, amplitude(cfg.preset), cfg.dt, horizon)?;
    let weight = spatial_weight_for(cfg.sigma, cfg.delta, cfg.n)?;
    let reports = evaluate_ladder(&m.weak_form(), &params, &weight, &cfg.scales, &QuadratureScheme::default())?;

    let exponent = params.contradiction_exponent();
    let mut t = ResultTable::new(
        "testfn",
        &[
            ("r", "length"),
            ("data_term", "1"),
            ("rhs", "1"),
            ("i_r", "1"),
            ("j1", "1"),
            ("j2", "1"),
            ("j3", "1"),
            ("u0_term", "1"),
            ("identity_residual", "1"),
            ("leakage", "1"),
        ],
    );
    for r in &reports {
        t.push(vec![
            r.r.into(),
            r.data_term.into(),
            r.r.powf(exponent).into(),
            r.i_r.into(),
            r.j1.into(),
            r.j2.into(),
            r.j3.into(),
            r.u0_term.into(),
            r.identity_residual.into(),
            r.leakage.into(),
        ])?;
    }
    t.note("preset", cfg.preset);
    t.note("exponent", exponent);
    t.note("weight_exponent", weight.q);

    let mut report = Report::new(Outcome::Pass);
    match cfg.preset {
        TestfnPreset::ZeroData => {
            let all_zero = reports.iter().all(|r| {
                [r.data_term, r.i_r, r.j1, r.j2, r.j3, r.u0_term, r.identity_residual].iter().all(|v| *v == 0.0)
            });
            if !all_zero {
                report.fail("zero data produced nonzero functionals");
            }
        }
        _ => {
            let verdicts = reports.iter().map(|r| check_contradiction_bound(r, &params)).collect::<Result<Vec<_>, _>>();
            match verdicts {
                Ok(v) => {
                    let slope = contradiction_slope(&v);
                    t.note("rhs_slope", slope);
                    let tol = ctx.tol(cfg.slope_tolerance);
                    match slope {
                        Some(s) if (s - exponent).abs() <= tol * exponent.abs().max(f64::EPSILON) => {
                            report.messages.push(format!("rhs slope {s:.4} against {exponent:.4}"))
                        }
                        Some(s) => {
                            report.fail(format!("rhs slope {s:.4} is outside ±{:.0}% of {exponent:.4}", 100.0 * tol))
                        }
                        None if cfg.scales.len() < 2 => report.messages.push("single scale: no fit".into()),
                        None => report.fail("no slope could be fitted"),
                    }
                }
                Err(e) => {
                    let e = HarnessError::from(e);
                    report.outcome = report.outcome.and(e.outcome());
                    report.messages.push(e.to_string());
                }
            }
        }
    }
    report.tables = vec![t.with_plot(PlotSpec {
        x: "r".into(),
        y: vec!["rhs".into(), "data_term".into()],
        log_x: true,
        log_y: true,
        reference_slope: Some(exponent),
        title: "contradiction bound over the R ladder".into(),
    })];
    Ok(report)
}
