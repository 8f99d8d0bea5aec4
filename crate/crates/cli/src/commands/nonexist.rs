use std::fmt::Write as _;

use choquard::diagnostics::{critical_mass_bound, format_real, groundstate_transform_check, scaled_mass_in, strictly_decreasing};
use choquard::model::RegionSpec;
use choquard::solver::continuation_sweep;

use super::{instance, measured_penalization, pinned, resolve_penalization};
use crate::config::RunConfig;
use crate::output::write;
use crate::CliError;

struct Row {
    eps: f64,
    mass_in_k: f64,
    total_mass: Option<f64>,
    critical_bound: Option<f64>,
    min_margin: Option<f64>,
    negative_probes: usize,
}

fn probe_centers(k: &RegionSpec, count: usize) -> Vec<Vec<f64>> {
    let reach = k.inner_radius();
    (0..count)
        .map(|j| {
            let t = if count == 1 { 0.0 } else { -1.0 + 2.0 * j as f64 / (count - 1) as f64 };
            let mut c = k.center().to_vec();
            c[0] += t * reach;
            c
        })
        .collect()
}

/// Solves along the ladder and tracks the scaled mass on `K`, the critical mass
/// bound, and the ground-state transform inequality at probe bumps.
pub fn nonexist(cfg: &RunConfig) -> Result<(), CliError> {
    let base = instance(cfg)?;
    let pen = resolve_penalization(cfg, &base)?;
    let mut cfg = pinned(cfg, pen);
    let k = cfg.diagnostics.compact_set.clone().unwrap_or_else(|| base.params().lambda_region.clone());
    k.validate(cfg.problem.dim)?;
    cfg.diagnostics.compact_set = Some(k.clone());
    let dir = cfg.output.dir.clone();
    cfg.write_resolved(&dir)?;

    let p_is_two = cfg.problem.p == 2.0;
    let probes = probe_centers(&k, cfg.diagnostics.probe_count);
    let rho = cfg.diagnostics.probe_radius;
    let sweep = continuation_sweep(
        &base,
        &cfg.eps_list(),
        &cfg.solver,
        |inst, init| measured_penalization(&cfg, pen, inst, init),
        |inst, _, result| {
            let u = &result.field;
            let cm = critical_mass_bound(u, inst)?;
            let mut margins = Vec::new();
            if p_is_two {
                for c in &probes {
                    margins.extend(groundstate_transform_check(u, inst, c, rho)?);
                }
            }
            Ok(Row {
                eps: inst.eps(),
                mass_in_k: scaled_mass_in(u, &k, inst.eps()),
                total_mass: cm.map(|c| c.scaled_mass),
                critical_bound: cm.map(|c| c.bound),
                min_margin: margins.iter().copied().reduce(f64::min),
                negative_probes: margins.iter().filter(|&&m| m < 0.0).count(),
            })
        },
    )?;

    let na = |x: Option<f64>| x.map_or_else(|| "n/a".into(), format_real);
    let mut csv = String::from("eps,mass_in_k,scaled_mass,critical_mass_bound,min_probe_margin,negative_probes\n");
    for r in &sweep.steps {
        let r = &r.report;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            format_real(r.eps),
            format_real(r.mass_in_k),
            na(r.total_mass),
            na(r.critical_bound),
            na(r.min_margin),
            r.negative_probes
        );
    }
    write(&dir.join("nonexist.csv"), &csv)?;

    if !p_is_two {
        println!("ground-state transform check n/a (p ≠ 2)");
    }
    if sweep.steps.first().is_some_and(|s| s.report.critical_bound.is_none()) {
        println!("critical mass bound n/a (needs p = 2, α = N−2, N ≥ 3)");
    }
    for s in &sweep.steps {
        let r = &s.report;
        let mut line = format!("eps = {}: eps^-N int_K u^2 = {:.6e}", r.eps, r.mass_in_k);
        if let (Some(m), Some(b)) = (r.total_mass, r.critical_bound) {
            let _ = write!(line, ", eps^-N int u^2 = {m:.6} vs critical mass {b:.6}");
        }
        if let Some(m) = r.min_margin {
            let _ = write!(line, ", min probe margin {m:.3e} ({} negative)", r.negative_probes);
        }
        println!("{line}");
    }
    let masses: Vec<f64> = sweep.steps.iter().map(|s| s.report.mass_in_k).collect();
    if masses.len() > 1 {
        let trend = if strictly_decreasing(&masses) { "decreasing" } else { "not decreasing" };
        println!("mass on K: {trend}");
    }
    match sweep.failure {
        None => Ok(()),
        Some(e) => Err(CliError::Runtime(format!("sweep stopped after {} step(s): {e}", sweep.steps.len()))),
    }
}
