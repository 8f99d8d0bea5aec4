use std::path::Path;

use choquard::diagnostics::{penalized_report, reports_to_csv, DiagnosticsReport, ReportSettings};
use choquard::grid::{read_snapshot, resample_affine, write_snapshot, DecayCheck};
use choquard::model::{Instance, LimitingProblem};
use choquard::solver::{continuation_sweep_from, rescaled_grid, solve_limiting};
use choquard::Field;
use log::{info, warn};

use super::{instance, measured_penalization, pinned, require_solvable, resolve_penalization};
use crate::config::{step_key, RunConfig};
use crate::output::{overlay_csv, OVERLAY_HEADER, sweep_table_csv, write};
use crate::CliError;

/// A completed step from an earlier run, if its directory holds every artifact.
fn load_step(dir: &Path, inst: &Instance) -> Result<Option<(DiagnosticsReport, Field)>, CliError> {
    let report_path = dir.join("report.json");
    if !report_path.exists() || !dir.join("overlay.csv").exists() {
        return Ok(None);
    }
    let Ok((field, _)) = read_snapshot(&dir.join("u")) else { return Ok(None) };
    if field.grid() != inst.grid() {
        return Ok(None);
    }
    let report = serde_json::from_str(&std::fs::read_to_string(report_path)?)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    Ok(Some((report, field)))
}

/// `inf_Lambda C = C(inf_Lambda V)`, the limit of the scaled energies.
fn reference_energy(cfg: &RunConfig, inst: &Instance, eps: f64) -> Result<f64, CliError> {
    let inf_v = inst.argmin_in_lambda().1;
    let lgrid = rescaled_grid(inst.grid(), eps, inf_v)?;
    let problem = LimitingProblem::new(lgrid, cfg.problem.alpha, cfg.problem.p)?.with_decay(DecayCheck::off());
    let r = solve_limiting(inf_v, &problem, &cfg.solver)?;
    if !r.converged {
        warn!("reference ground state at inf V = {inf_v} did not converge");
    }
    Ok(r.energy)
}

/// Runs the eps ladder, reusing every leading step already on disk.
pub fn concentrate(cfg: &RunConfig) -> Result<(), CliError> {
    require_solvable(cfg)?;
    let base = instance(cfg)?;
    let pen = resolve_penalization(cfg, &base)?;
    let cfg = pinned(cfg, pen);
    let eps_list = cfg.eps_list();
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Refused("problem.eps_list must be strictly decreasing".into()));
    }
    let dir = cfg.output.dir.clone();
    cfg.write_resolved(&dir)?;

    let fingerprint = cfg.physics_fingerprint()?;
    let keys: Vec<String> = (0..eps_list.len()).map(|k| step_key(&fingerprint, &eps_list[..=k])).collect();
    let mut reports = Vec::new();
    let mut last = None;
    for key in &keys {
        match load_step(&dir.join(key), &base)? {
            Some((report, field)) => {
                reports.push(report);
                last = Some(field);
            }
            None => break,
        }
    }
    let cached = reports.len();
    if cached > 0 {
        info!("reusing {cached} completed step(s)");
    }

    let mut failure = None;
    if cached < eps_list.len() {
        let settings = ReportSettings {
            rho: cfg.diagnostics.rho,
            outer: cfg.diagnostics.outer_radius,
            slack: cfg.diagnostics.slack(),
            residual_tol: cfg.solver.residual_tol,
            reference_energy: Some(reference_energy(&cfg, &base, *eps_list.last().unwrap())?),
            compare_profile: true,
            limiting_opts: cfg.solver.clone(),
        };
        let previous = last.as_ref().map(|f| (eps_list[cached - 1], f));
        let mut next = cached;
        let sweep = continuation_sweep_from(
            &base,
            &eps_list[cached..],
            &cfg.solver,
            previous,
            |inst, init| measured_penalization(&cfg, pen, inst, init),
            |inst, pen, result| {
                let step = penalized_report(inst, pen, result, &settings)?;
                let sub = dir.join(&keys[next]);
                next += 1;
                std::fs::create_dir_all(&sub)?;
                let params = serde_json::to_value(inst.params()).map_err(|e| choquard::Error::Io(e.to_string()))?;
                write_snapshot(&result.field, "penalized solution", params, &sub.join("u"))?;
                // header only when there is no limiting profile to compare with
                let overlay = match (&step.limiting, &step.report.concentration) {
                    (Some(v), Some(c)) => {
                        let origin = vec![0.0; inst.grid().dim()];
                        let seen = resample_affine(&result.field, v.grid(), &c.a_eps, &origin, inst.eps())?;
                        overlay_csv(&seen, v)
                    }
                    _ => OVERLAY_HEADER.to_string(),
                };
                std::fs::write(sub.join("overlay.csv"), overlay)?;
                std::fs::write(sub.join("report.json"), step.report.to_json()?)?;
                Ok(step.report)
            },
        )?;
        reports.extend(sweep.steps.into_iter().map(|s| s.report));
        failure = sweep.failure;
    }

    write(&dir.join("sweep.csv"), &sweep_table_csv(cfg.problem.dim, &reports))?;
    write(&dir.join("diagnostics.csv"), &reports_to_csv(&reports))?;
    for (r, key) in reports.iter().zip(&keys) {
        let c = r.concentration.as_ref();
        println!(
            "eps = {}: V(a) = {:.6}, scaled energy {:.6}, unpenalized {}, residual {:.2e}  [{key}]",
            r.eps.unwrap_or(f64::NAN),
            c.map_or(f64::NAN, |c| c.v_at_a),
            c.map_or(f64::NAN, |c| c.scaled_energy),
            r.unpenalized.map_or("n/a".into(), |b| b.to_string()),
            r.residual_rel.unwrap_or(f64::NAN),
        );
    }
    if let Some(bound) = reports.last().and_then(|r| r.hardy_bound) {
        if bound >= 1.0 {
            warn!("Hardy hypothesis fails at the smallest eps: C_alpha p kappa = {bound}");
        }
    }
    match failure {
        None => Ok(()),
        Some(e) => Err(CliError::Runtime(format!("sweep stopped after {} step(s): {e}", reports.len()))),
    }
}
