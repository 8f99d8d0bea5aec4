use choquard::diagnostics::{mass_identity_check, pohozaev_defect, reports_to_csv, scaling_law_check, DiagnosticsReport};
use choquard::grid::write_snapshot;
use choquard::model::LimitingProblem;
use choquard::solver::{solve_limiting, SolveResult};

use super::require_solvable;
use crate::config::RunConfig;
use crate::output::{radial_profile_csv, write};
use crate::CliError;

/// Solves the limiting problem at every configured `lambda`.
pub fn solve_limit(cfg: &RunConfig) -> Result<(), CliError> {
    require_solvable(cfg)?;
    let pr = &cfg.problem;
    if pr.lambda.is_empty() || pr.lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(CliError::Refused("problem.lambda must be a nonempty list of positive values".into()));
    }
    let problem = LimitingProblem::new(cfg.grid()?, pr.alpha, pr.p)?;
    let dir = &cfg.output.dir;
    cfg.write_resolved(dir)?;

    let mut runs: Vec<(f64, SolveResult, DiagnosticsReport)> = Vec::new();
    for &lambda in &pr.lambda {
        let r = solve_limiting(lambda, &problem, &cfg.solver)?;
        let defects = pohozaev_defect(&r.field, lambda, &problem)?;
        let mut report = DiagnosticsReport::new();
        report.lambda = Some(lambda);
        report.energy = Some(r.energy);
        report.residual_rel = Some(r.residual_rel);
        report.iterations = Some(r.iterations);
        report.pohozaev_defect_rel = Some(defects.pohozaev);
        report.nehari_defect_rel = Some(defects.nehari);
        report.mass_identity_error = mass_identity_check(&r.field, lambda, r.energy, &problem)?;
        if !r.converged {
            report.notes.push("not converged".into());
        }
        runs.push((lambda, r, report));
    }

    if let Some(one) = runs.iter().position(|(l, _, _)| *l == 1.0) {
        let base = runs[one].1.clone();
        for (lambda, r, report) in runs.iter_mut().filter(|(l, _, _)| *l != 1.0) {
            report.scaling_ratio_error = Some(scaling_law_check(&base, r, *lambda, &problem)?);
        }
    }

    for (lambda, r, report) in &runs {
        let sub = dir.join(format!("lambda-{lambda}"));
        std::fs::create_dir_all(&sub)?;
        let params = serde_json::json!({ "dim": pr.dim, "alpha": pr.alpha, "p": pr.p, "lambda": lambda });
        write_snapshot(&r.field, "limiting ground state", params, &sub.join("v"))?;
        write(&sub.join("report.json"), &report.to_json()?)?;
        let peak = r.field.grid().point(r.field.argmax());
        write(&sub.join("radial.csv"), &radial_profile_csv(&r.field, &peak[..pr.dim]))?;
        let scaling = report.scaling_ratio_error.map_or(String::new(), |e| format!(", scaling error {e:.3e}"));
        println!(
            "lambda = {lambda}: E = {:.12e}, residual {:.2e}, {} iterations, Pohozaev {:.2e}, Nehari {:.2e}{scaling}",
            r.energy, r.residual_rel, r.iterations, report.pohozaev_defect_rel.unwrap_or(f64::NAN),
            report.nehari_defect_rel.unwrap_or(f64::NAN)
        );
    }
    let reports: Vec<DiagnosticsReport> = runs.iter().map(|(_, _, r)| r.clone()).collect();
    write(&dir.join("diagnostics.csv"), &reports_to_csv(&reports))?;

    let stalled: Vec<String> = runs.iter().filter(|(_, r, _)| !r.converged).map(|(l, _, _)| l.to_string()).collect();
    if stalled.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("no convergence at lambda = {}", stalled.join(", "))))
    }
}
