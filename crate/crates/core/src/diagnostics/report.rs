use super::checks::{comparison_check, subsolution_check, unpenalization_check, Slack};
use super::concentration::{concentration_metrics, DEFAULT_OUTER_RADIUS, DEFAULT_RHO};
use super::{default_barrier_parameters, DiagnosticsReport};
use crate::error::Result;
use crate::model::{build_barrier, measure_nu, Instance, LimitingProblem, Penalization};
use crate::grid::{DecayCheck, Field};
use crate::solver::{rescaled_grid, solve_limiting, SolveOptions, SolveResult};

/// Probe radii and tolerances for the per-eps report.
#[derive(Debug, Clone)]
pub struct ReportSettings {
    pub rho: f64,
    pub outer: f64,
    pub slack: Slack,
    pub residual_tol: f64,
    /// `inf_Lambda C`, when known, for the energy gap.
    pub reference_energy: Option<f64>,
    /// Solve the limiting problem at `V(a_eps)` for the profile comparison.
    pub compare_profile: bool,
    pub limiting_opts: SolveOptions,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            outer: DEFAULT_OUTER_RADIUS,
            slack: Slack::default(),
            residual_tol: SolveOptions::default().residual_tol,
            reference_energy: None,
            compare_profile: true,
            limiting_opts: SolveOptions::default(),
        }
    }
}

/// Report of one solve with the by-products worth keeping.
#[derive(Debug, Clone)]
pub struct PenalizedReport {
    pub report: DiagnosticsReport,
    /// The penalization with its measured `nu`.
    pub penalization: Option<Penalization>,
    /// Limiting ground state at `V(a_eps)`, in rescaled units.
    pub limiting: Option<Field>,
}

/// Diagnostics of one penalized (or, with `pen = None`, original) solve.
pub fn penalized_report(
    inst: &Instance,
    pen: Option<&Penalization>,
    result: &SolveResult,
    settings: &ReportSettings,
) -> Result<PenalizedReport> {
    let params = inst.params();
    let eps = inst.eps();
    let u = &result.field;
    let mut report = DiagnosticsReport::new();
    report.eps = Some(eps);
    report.energy = Some(result.critical_value.unwrap_or(result.energy));
    report.residual_rel = Some(result.residual_rel);
    report.iterations = Some(result.iterations);

    let mut metrics = concentration_metrics(result, inst, settings.rho, settings.outer, None)?;
    let mut limiting = None;
    if !metrics.a_in_lambda {
        report.notes.push("peak lies outside lambda_region".into());
    }
    if settings.compare_profile && metrics.v_at_a > 0.0 {
        let lambda = metrics.v_at_a;
        let lgrid = rescaled_grid(inst.grid(), eps, lambda)?;
        let problem = LimitingProblem::new(lgrid, params.alpha, params.p)?.with_decay(DecayCheck::off());
        let ground = solve_limiting(lambda, &problem, &settings.limiting_opts)?;
        if !ground.converged {
            report.notes.push("limiting profile at V(a_eps) did not converge".into());
        }
        metrics = concentration_metrics(result, inst, settings.rho, settings.outer, Some(&ground.field))?;
        limiting = Some(ground.field);
    }
    if let Some(reference) = settings.reference_energy {
        report.energy_upper_gap = Some(metrics.scaled_energy - reference);
    }

    let unpen = unpenalization_check(u, pen, inst)?;
    report.unpenalized = Some(unpen.unpenalized);
    report.original_residual = Some(unpen.original_residual);

    let measured = match pen {
        None => None,
        Some(pen) => {
            let mut pen = pen.clone();
            report.hardy_kappa = pen.measured_kappa;
            report.hardy_bound = pen.measured_kappa.map(|k| params.hls().c_alpha * params.p * k);
            report.sup_h_outside = Some(pen.sup_outside(inst.in_lambda()));
            report.nu = Some(measure_nu(&mut pen, u, inst)?);
            let a = metrics.a_eps.clone();
            let sub = subsolution_check(u, &pen, inst, &a, settings.outer, pen.delta, settings.slack, settings.residual_tol)?;
            report.subsolution_violations = Some(sub.violations);
            let (r, m) = default_barrier_parameters(&pen, inst, &a, settings.outer);
            match build_barrier(&pen, inst, &a, r, m, settings.outer) {
                Ok(barrier) => {
                    let cmp = comparison_check(u, &barrier.field, &a, settings.outer, eps, settings.slack)?;
                    report.comparison_violations = Some(cmp.violations);
                    report.barrier_min_in_core = Some(barrier.min_in_core);
                    if barrier.min_in_core < 1.0 {
                        report.notes.push("barrier drops below 1 on B(a_eps, R eps)".into());
                    }
                }
                Err(e) => report.notes.push(format!("barrier not built: {e}")),
            }
            Some(pen)
        }
    };
    report.concentration = Some(metrics);
    Ok(PenalizedReport { report, penalization: measured, limiting })
}
