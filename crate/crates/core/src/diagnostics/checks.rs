use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{grad_sq_integral, integrate, laplacian, riesz_convolve, DecayCheck, Field};
use crate::model::{euler_lagrange_residual, Instance, Penalization};
use crate::special::critical_mass_constant;

/// Tolerance separating genuine inequality violations from roundoff:
/// `abs + rel * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-9 }
    }
}

impl Slack {
    pub fn allowance(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }
}

fn distance(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unpenalization {
    /// `u^(p-1) <= H` at every grid point outside `Lambda`.
    pub unpenalized: bool,
    /// Largest `u^(p-1) - H` outside `Lambda` (negative when the margin is strict).
    pub max_violation: f64,
    /// Relative residual of the original equation at `u`.
    pub original_residual: f64,
}

/// Whether the penalization is inactive at `u`, which then solves the original
/// equation; `pen = None` stands for `H = +inf` and is vacuously true.
pub fn unpenalization_check(u: &Field, pen: Option<&Penalization>, inst: &Instance) -> Result<Unpenalization> {
    inst.ensure_grid(u)?;
    let quiet = inst.clone().with_decay(DecayCheck::off());
    let residual = euler_lagrange_residual(u, None, &quiet)?;
    let original_residual = residual.norm_l2() / u.norm_l2();
    let Some(pen) = pen else {
        return Ok(Unpenalization { unpenalized: true, max_violation: f64::NEG_INFINITY, original_residual });
    };
    let p = inst.p();
    let mut max_violation = f64::NEG_INFINITY;
    for ((&s, &inside), &h) in u.values().iter().zip(inst.in_lambda()).zip(pen.h_field().values()) {
        if !inside {
            max_violation = max_violation.max(s.max(0.0).powf(p - 1.0) - h);
        }
    }
    Ok(Unpenalization { unpenalized: max_violation <= 1e-12, max_violation, original_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest excess over the allowed slack (negative when all points pass).
    pub max_excess: f64,
}

/// Counts points outside `B(a, R eps)` and the box's boundary collar where
/// `-eps^2 Delta u + (1 - delta) V u <= (p eps^-alpha I_alpha * (H u) + nu eps^(N-alpha) I_alpha) H`
/// fails, plus points of `Lambda` outside the ball where `u > 1`.
///
/// The slack scales with `max |V u|`, using the larger of `slack.rel` and `residual_tol`.
#[allow(clippy::too_many_arguments)]
pub fn subsolution_check(
    u: &Field,
    pen: &Penalization,
    inst: &Instance,
    a_eps: &[f64],
    outer: f64,
    delta: f64,
    slack: Slack,
    residual_tol: f64,
) -> Result<InequalityReport> {
    inst.ensure_grid(u)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let nu = pen.nu.ok_or_else(|| Error::InvalidParameter("measure nu before the subsolution check".into()))?;
    let grid = *inst.grid();
    let dim = grid.dim();
    let params = inst.params();
    let eps = inst.eps();
    let v = inst.potential();
    let h = pen.h_field();
    let hu = h.zip_map(u, |a, b| a * b.max(0.0))?;
    let conv = riesz_convolve(&hu, inst.kernel())?;
    let lap = laplacian(u);
    let coupling = params.p * inst.nonlocal_scale();
    let far = nu * eps.powf(dim as f64 - params.alpha);
    let scale = u.values().iter().zip(v.values()).fold(0.0f64, |m, (a, b)| m.max((a * b).abs()));
    let allowed = slack.allowance(scale).max(slack.abs + residual_tol * scale);

    let mut report = InequalityReport { checked: 0, violations: 0, max_excess: f64::NEG_INFINITY };
    for i in 0..grid.len() {
        let x = grid.point(i);
        let x = &x[..dim];
        if distance(x, a_eps) < outer * eps || grid.in_boundary_layer(i, 2) {
            continue;
        }
        report.checked += 1;
        let s = u.values()[i];
        let lhs = -eps * eps * lap.values()[i] + (1.0 - delta) * v.values()[i] * s;
        let hi = h.values()[i];
        let rhs = if hi > 0.0 {
            let r = distance(x, &pen.center);
            (coupling * conv.values()[i] + far * inst.kernel().continuum(r)) * hi
        } else {
            0.0
        };
        let mut excess = lhs - rhs - allowed;
        if inst.in_lambda()[i] {
            excess = excess.max(s - 1.0 - allowed);
        }
        report.max_excess = report.max_excess.max(excess);
        if excess > 0.0 {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Counts points outside `B(a, R eps)` where `u > barrier + slack`.
pub fn comparison_check(
    u: &Field,
    barrier: &Field,
    a_eps: &[f64],
    outer: f64,
    eps: f64,
    slack: Slack,
) -> Result<InequalityReport> {
    u.ensure_same_grid(barrier)?;
    let grid = *u.grid();
    let dim = grid.dim();
    let scale = u.max_abs();
    let allowed = slack.allowance(scale);
    let mut report = InequalityReport { checked: 0, violations: 0, max_excess: f64::NEG_INFINITY };
    for (i, (&s, &b)) in u.values().iter().zip(barrier.values()).enumerate() {
        if distance(&grid.point(i)[..dim], a_eps) < outer * eps {
            continue;
        }
        report.checked += 1;
        let excess = s - b - allowed;
        report.max_excess = report.max_excess.max(excess);
        if excess > 0.0 {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Smooth bump `exp(1 - 1/(1 - |x-c|^2/rho^2))` supported in `B(c, rho)`.
pub fn bump(grid: &crate::grid::GridSpec, center: &[f64], rho: f64) -> Field {
    Field::from_fn(*grid, |x| {
        let t = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (rho * rho);
        if t < 1.0 {
            (1.0 - 1.0 / (1.0 - t)).exp()
        } else {
            0.0
        }
    })
}

/// Margin `int (eps^2 |grad phi|^2 + V phi^2) - eps^-alpha int (I_alpha * u^2) phi^2` for a
/// bump `phi` of radius `rho` at `center`; `None` unless `p = 2`.
pub fn groundstate_transform_check(u: &Field, inst: &Instance, center: &[f64], rho: f64) -> Result<Option<f64>> {
    inst.ensure_grid(u)?;
    if inst.p() != 2.0 {
        return Ok(None);
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("bump radius must be positive, got {rho}")));
    }
    let grid = *inst.grid();
    if center.len() != grid.dim() {
        return Err(Error::InvalidParameter("bump center needs one coordinate per axis".into()));
    }
    let phi = bump(&grid, center, rho);
    let eps = inst.eps();
    let lhs = eps * eps * grad_sq_integral(&phi, &DecayCheck::off())?
        + integrate(&phi.zip_map(inst.potential(), |a, v| v * a * a)?);
    let conv = riesz_convolve(&u.map(|s| s * s), inst.kernel())?;
    let rhs = inst.nonlocal_scale() * integrate(&conv.zip_map(&phi, |c, a| c * a * a)?);
    Ok(Some(lhs - rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalMass {
    pub scaled_mass: f64,
    pub bound: f64,
    pub satisfied: bool,
    /// `R^(2-N) int_{B_2R \ B_R} V` at `R = L/8` and `R = L/4`; the hypothesis asks
    /// for this to vanish as `R` grows.
    pub annulus_ratios: (f64, f64),
    pub annulus_decreasing: bool,
}

/// `eps^-N int u^2` against the critical mass when `p = 2`, `alpha = N - 2`, `N >= 3`.
pub fn critical_mass_bound(u: &Field, inst: &Instance) -> Result<Option<CriticalMass>> {
    inst.ensure_grid(u)?;
    let params = inst.params();
    let dim = params.dim;
    if params.p != 2.0 || dim < 3 || (params.alpha - (dim as f64 - 2.0)).abs() > 1e-12 {
        return Ok(None);
    }
    let Some(bound) = critical_mass_constant(dim) else { return Ok(None) };
    let grid = *inst.grid();
    let eps = inst.eps();
    let scaled_mass = u.dot(u)? / eps.powi(dim as i32);
    let annulus = |r: f64| {
        let terms: Vec<f64> = (0..grid.len())
            .filter_map(|i| {
                let x = grid.point(i);
                let d = x[..dim].iter().map(|c| c * c).sum::<f64>().sqrt();
                (d >= r && d < 2.0 * r).then(|| inst.potential().values()[i])
            })
            .collect();
        grid.cell_volume() * crate::grid::pairwise_sum(&terms) / r.powi(dim as i32 - 2)
    };
    let l = grid.half_extent();
    let ratios = (annulus(l / 8.0), annulus(l / 4.0));
    Ok(Some(CriticalMass {
        scaled_mass,
        bound,
        satisfied: scaled_mass <= bound,
        annulus_ratios: ratios,
        annulus_decreasing: ratios.1 < ratios.0,
    }))
}
