use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate, resample_affine, Field};
use crate::model::Instance;
use crate::solver::SolveResult;

/// Rescaled units: `rho` and `R` multiply `eps`.
pub const DEFAULT_RHO: f64 = 1.0;
pub const DEFAULT_OUTER_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationMetrics {
    /// Grid argmax of `u` (lowest index on ties).
    pub a_eps: Vec<f64>,
    pub a_in_lambda: bool,
    pub v_at_a: f64,
    /// `J_eps(u) / eps^N`.
    pub scaled_energy: f64,
    /// `eps^-N int_{B(a, rho eps)} u^2`.
    pub scaled_mass_in_ball: f64,
    /// `max u` outside `B(a, R eps)`.
    pub sup_outside: f64,
    /// Relative L2 distance between `u(a + eps y)` and the limiting ground state.
    pub profile_l2_distance: Option<f64>,
}

fn distance(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Peak location of `u` and the measures of concentration around it.
///
/// `limiting` is the ground state at `lambda = V(a_eps)` on a grid in rescaled units.
pub fn concentration_metrics(
    result: &SolveResult,
    inst: &Instance,
    rho: f64,
    outer: f64,
    limiting: Option<&Field>,
) -> Result<ConcentrationMetrics> {
    if !(rho > 0.0 && outer > 0.0) {
        return Err(Error::InvalidParameter("concentration radii must be positive".into()));
    }
    let u = &result.field;
    inst.ensure_grid(u)?;
    let grid = *inst.grid();
    let dim = grid.dim();
    let eps = inst.eps();
    let idx = u.argmax();
    let a: Vec<f64> = grid.point(idx)[..dim].to_vec();
    let params = inst.params();

    let mut in_ball = Vec::new();
    let mut sup_outside: f64 = 0.0;
    for (i, &s) in u.values().iter().enumerate() {
        let r = distance(&grid.point(i)[..dim], &a);
        if r < rho * eps {
            in_ball.push(s * s);
        } else if r >= outer * eps {
            sup_outside = sup_outside.max(s);
        }
    }
    let scaled_mass_in_ball = grid.cell_volume() * crate::grid::pairwise_sum(&in_ball) / eps.powi(dim as i32);
    let energy = result.critical_value.unwrap_or(result.energy);

    let profile_l2_distance = match limiting {
        None => None,
        Some(v) => {
            if v.grid().dim() != dim {
                return Err(Error::GridMismatch);
            }
            let origin = vec![0.0; dim];
            let seen = resample_affine(u, v.grid(), &a, &origin, eps)?;
            let diff = seen.axpy(-1.0, v)?;
            Some((integrate(&diff.map(|x| x * x)) / integrate(&v.map(|x| x * x))).sqrt())
        }
    };

    Ok(ConcentrationMetrics {
        a_in_lambda: params.lambda_region.contains(&a),
        v_at_a: inst.potential().values()[idx],
        scaled_energy: energy / eps.powi(dim as i32),
        scaled_mass_in_ball,
        sup_outside,
        profile_l2_distance,
        a_eps: a,
    })
}

/// `max u` over `region` minus `B(center, radius)`, or 0 when that set has no grid point.
pub fn sup_in_region_outside_ball(
    u: &Field,
    region: &crate::model::RegionSpec,
    center: &[f64],
    radius: f64,
) -> f64 {
    let grid = *u.grid();
    let dim = grid.dim();
    u.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let x = grid.point(*i);
            region.contains(&x[..dim]) && distance(&x[..dim], center) >= radius
        })
        .fold(0.0, |m, (_, &s)| m.max(s))
}

/// `eps^-N int_K u^2` over the grid points of `region`.
pub fn scaled_mass_in(u: &Field, region: &crate::model::RegionSpec, eps: f64) -> f64 {
    let grid = *u.grid();
    let dim = grid.dim();
    let terms: Vec<f64> = u
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| region.contains(&grid.point(*i)[..dim]))
        .map(|(_, &s)| s * s)
        .collect();
    grid.cell_volume() * crate::grid::pairwise_sum(&terms) / eps.powi(dim as i32)
}

/// Strictly decreasing series.
pub fn strictly_decreasing(series: &[f64]) -> bool {
    series.windows(2).all(|w| w[1] < w[0])
}

/// Each term at most `1 / factor` of its predecessor.
pub fn decays_by(series: &[f64], factor: f64) -> bool {
    series.windows(2).all(|w| w[1] * factor <= w[0])
}
