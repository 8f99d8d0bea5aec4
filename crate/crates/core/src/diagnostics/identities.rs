use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::LimitingProblem;
use crate::solver::SolveResult;
use crate::special::scaling_exponent;

/// Relative defects of the Pohozaev and Nehari identities of the limiting problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityDefects {
    pub pohozaev: f64,
    pub nehari: f64,
}

/// With `K = int |grad v|^2`, `M = int v^2`, `D = int (I_alpha * v_+^p) v_+^p`:
/// `|(N-2)K/2 + N lambda M/2 - (N+alpha)D/(2p)| / (K + lambda M + D)` and
/// `|K + lambda M - D| / (K + lambda M + D)`.
pub fn pohozaev_defect(v: &Field, lambda: f64, problem: &LimitingProblem) -> Result<IdentityDefects> {
    if v.max_abs() == 0.0 {
        return Err(Error::Degenerate("identity defects of the zero field".into()));
    }
    let parts = problem.parts(v)?;
    let n = problem.dim() as f64;
    let (k, m, d) = (parts.grad, lambda * parts.mass, parts.nonlocal);
    let p = problem.p;
    let scale = k + m + d;
    let pohozaev = ((n - 2.0) * k / 2.0 + n * m / 2.0 - (n + problem.alpha()) * d / (2.0 * p)).abs() / scale;
    let nehari = (k + m - d).abs() / scale;
    Ok(IdentityDefects { pohozaev, nehari })
}

/// `|int v^2 - 2 energy / lambda| / int v^2`, defined when `p = 2` and `alpha = N - 2`.
pub fn mass_identity_check(v: &Field, lambda: f64, energy: f64, problem: &LimitingProblem) -> Result<Option<f64>> {
    let n = problem.dim() as f64;
    if problem.p != 2.0 || (problem.alpha() - (n - 2.0)).abs() > 1e-12 {
        return Ok(None);
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let mass = v.dot(v)?;
    if !(mass > 0.0) {
        return Err(Error::Degenerate("mass identity of the zero field".into()));
    }
    Ok(Some((mass - 2.0 * energy / lambda).abs() / mass))
}

/// `|E(lambda) / E(1) - lambda^theta| / lambda^theta` for ground states at 1 and `lambda`.
pub fn scaling_law_check(
    at_one: &SolveResult,
    at_lambda: &SolveResult,
    lambda: f64,
    problem: &LimitingProblem,
) -> Result<f64> {
    if !(at_one.converged && at_lambda.converged) {
        return Err(Error::InvalidParameter("scaling check needs converged ground states".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let target = lambda.powf(scaling_exponent(problem.dim(), problem.alpha(), problem.p));
    Ok((at_lambda.energy / at_one.energy - target).abs() / target)
}

/// Scaled critical levels `c_eps / eps^N` against `inf_Lambda C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyGaps {
    pub reference: f64,
    /// `(eps, c_eps / eps^N - reference)` in sweep order.
    pub gaps: Vec<(f64, f64)>,
    /// Last gap within `tolerance * reference`.
    pub within_tolerance: bool,
    /// `|gap|` decreasing along the sweep; `None` for a single point.
    pub decreasing: Option<bool>,
}

pub fn energy_upper_bound_check(
    sweep: &[(f64, f64)],
    dim: usize,
    limiting_energy_at_min: f64,
    tolerance: f64,
) -> Result<EnergyGaps> {
    if sweep.is_empty() {
        return Err(Error::InvalidParameter("energy check needs at least one sweep point".into()));
    }
    let gaps: Vec<(f64, f64)> = sweep
        .iter()
        .map(|&(eps, c)| (eps, c / eps.powi(dim as i32) - limiting_energy_at_min))
        .collect();
    let last = gaps[gaps.len() - 1].1;
    let decreasing = (gaps.len() > 1).then(|| gaps.windows(2).all(|w| w[1].1.abs() < w[0].1.abs()));
    Ok(EnergyGaps {
        reference: limiting_energy_at_min,
        within_tolerance: last.abs() <= tolerance * limiting_energy_at_min.abs(),
        gaps,
        decreasing,
    })
}
