use super::descent::{descend, Reduced};
use super::limiting::{fiber_maximum, final_decay, solve_limiting};
use super::options::{SolveOptions, SolveResult};
use crate::error::{Error, Result};
use crate::grid::{inv_helmholtz, make_grid, resample_affine, riesz_bilinear, DecayCheck, Field, GridSpec};
use crate::model::{euler_lagrange_residual, original_energy, penalized_energy, Instance, LimitingProblem, Penalization};

/// `||u||_eps` below this fraction of the initial norm counts as collapse.
const COLLAPSE_RATIO: f64 = 1e-8;
const MAX_BRACKET: usize = 200;

/// How to start a penalized solve.
#[derive(Debug, Clone)]
pub enum Init {
    /// Rescaled limiting ground state at the minimum of `V` over `Lambda`.
    Auto,
    Field(Field),
}

struct Penalized<'a> {
    inst: &'a Instance,
    pen: Option<&'a Penalization>,
    shift: f64,
}

impl Penalized<'_> {
    /// `(int (I_alpha * G) G, int (I_alpha * G) g u)` along the fiber through `u` at `t`.
    fn fiber_slope(&self, u: &Field, t: f64, quad: f64) -> Result<f64> {
        let tu = u.scaled(t);
        let (big, small) = self.inst.nonlinear_parts(&tu, self.pen)?;
        let gu = small.zip_map(u, |a, b| a * b)?;
        let b = riesz_bilinear(&big, &gu, self.inst.kernel())?;
        Ok(t * quad - self.inst.p() * self.inst.nonlocal_scale() * b)
    }

    fn inactive(&self, u: &Field, t: f64) -> bool {
        let Some(pen) = self.pen else { return true };
        let p = self.inst.p();
        u.values()
            .iter()
            .zip(self.inst.in_lambda())
            .zip(pen.h_field().values())
            .all(|((&s, &inside), &h)| inside || s <= 0.0 || (t * s).powf(p - 1.0) <= h)
    }

    fn energy(&self, u: &Field) -> Result<f64> {
        match self.pen {
            Some(pen) => penalized_energy(u, pen, self.inst),
            None => original_energy(u, self.inst),
        }
    }
}

impl Reduced for Penalized<'_> {
    fn project(&self, u: &Field) -> Result<(Field, f64, f64)> {
        let quad = self.inst.eps_norm_sq(u)?;
        let p = self.inst.p();
        let positive = match self.pen {
            Some(_) => u.positive_part(),
            None => u.map(f64::abs),
        };
        let power = positive.map(|s| s.powf(p));
        let free = self.inst.nonlocal_scale() * riesz_bilinear(&power, &power, self.inst.kernel())?;
        let (t0, e0) = fiber_maximum(quad, free, p)?;
        if self.inactive(u, t0) {
            return Ok((u.scaled(t0), e0, t0));
        }

        // the truncated nonlinearity only weakens the nonlocal term, so the
        // fiber maximum lies beyond the free one
        let slope = |t: f64| self.fiber_slope(u, t, quad);
        let (mut lo, mut hi) = (t0, 2.0 * t0);
        let (mut flo, mut fhi) = (slope(lo)?, slope(hi)?);
        let mut grown = 0;
        while fhi > 0.0 {
            grown += 1;
            if grown > MAX_BRACKET {
                return Err(Error::Collapse { iterations: 0 });
            }
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = slope(hi)?;
        }
        if flo < 0.0 {
            return Err(Error::Degenerate("fiber slope negative at the free maximizer".into()));
        }
        // Illinois variant of regula falsi
        let mut side = 0i8;
        for _ in 0..200 {
            if hi - lo <= 1e-14 * hi {
                break;
            }
            let t = (lo * fhi - hi * flo) / (fhi - flo);
            let t = if t > lo && t < hi { t } else { 0.5 * (lo + hi) };
            let ft = slope(t)?;
            if ft == 0.0 {
                lo = t;
                hi = t;
                break;
            }
            if ft > 0.0 {
                lo = t;
                flo = ft;
                if side == 1 {
                    fhi *= 0.5;
                }
                side = 1;
            } else {
                hi = t;
                fhi = ft;
                if side == -1 {
                    flo *= 0.5;
                }
                side = -1;
            }
        }
        let t = 0.5 * (lo + hi);
        let v = u.scaled(t);
        let e = self.energy(&v)?;
        Ok((v, e, t))
    }

    fn residual(&self, u: &Field) -> Result<Field> {
        euler_lagrange_residual(u, self.pen, self.inst)
    }

    fn precondition(&self, r: &Field) -> Result<Field> {
        let eps = self.inst.eps();
        inv_helmholtz(r, eps * eps, self.shift)
    }
}

/// Median of `V` over the grid points of `Lambda`.
pub(crate) fn median_in_lambda(inst: &Instance) -> f64 {
    let mut v: Vec<f64> = inst
        .potential()
        .values()
        .iter()
        .zip(inst.in_lambda())
        .filter(|(_, &m)| m)
        .map(|(&x, _)| x)
        .collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn check_hardy(pen: &Penalization, inst: &Instance) -> Result<()> {
    if (pen.eps - inst.eps()).abs() > 1e-12 * inst.eps() {
        return Err(Error::InvalidParameter(format!(
            "penalization built for eps = {} but the instance has eps = {}",
            pen.eps,
            inst.eps()
        )));
    }
    let kappa = pen
        .measured_kappa
        .ok_or_else(|| Error::InvalidParameter("measure the Hardy quotient before solving".into()))?;
    let bound = inst.params().hls().c_alpha * inst.p() * kappa;
    if bound >= 1.0 {
        return Err(Error::Hypothesis(format!("C_alpha p kappa = {bound:.6e} is not below 1")));
    }
    Ok(())
}

/// Critical point of the penalized functional `J_eps` (or, with `pen = None`, of the
/// original functional `E_eps`) by descent on its fiber maxima.
pub fn solve_penalized(
    inst: &Instance,
    pen: Option<&Penalization>,
    opts: &SolveOptions,
    init: &Init,
) -> Result<SolveResult> {
    opts.validate()?;
    if let Some(pen) = pen {
        pen.ensure_grid(inst.grid())?;
        check_hardy(pen, inst)?;
    }
    let start = match init {
        Init::Auto => auto_init(inst, opts)?,
        Init::Field(f) => {
            inst.ensure_grid(f)?;
            f.clone()
        }
    };
    let quiet = inst.clone().with_decay(DecayCheck::off());
    let start_norm = quiet.eps_norm_sq(&start)?.sqrt();
    if !(start_norm > 0.0) {
        return Err(Error::Collapse { iterations: 0 });
    }
    let shift = match opts.precondition_shift {
        Some(s) => s,
        None => median_in_lambda(inst).max(f64::MIN_POSITIVE),
    };
    let reduced = Penalized { inst: &quiet, pen, shift };
    let out = match descend(&reduced, &start, opts) {
        Err(Error::Degenerate(_)) => return Err(Error::Collapse { iterations: 0 }),
        other => other?,
    };
    if quiet.eps_norm_sq(&out.field)?.sqrt() < COLLAPSE_RATIO * start_norm {
        return Err(Error::Collapse { iterations: out.iterations });
    }
    final_decay(*inst.decay(), opts).check(&out.field)?;
    let min_before_clamp = out.field.min();
    let field = out.field.positive_part();
    let critical = reduced.energy(&field)?;
    Ok(SolveResult {
        field,
        energy: critical,
        residual_rel: out.residual_rel,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        critical_value: Some(critical),
        min_before_clamp,
    })
}

/// Limiting ground state at `lambda0 = V(x0)`, `x0` the grid argmin of `V` over
/// `Lambda`, placed at `x0` and compressed by `eps`.
pub fn auto_init(inst: &Instance, opts: &SolveOptions) -> Result<Field> {
    let grid = *inst.grid();
    let (idx, lambda0) = inst.argmin_in_lambda();
    if !(lambda0 > 0.0) {
        return Err(Error::Hypothesis("auto-init needs V > 0 at its minimum over Lambda".into()));
    }
    let eps = inst.eps();
    let params = inst.params();
    let lgrid = rescaled_grid(&grid, eps, lambda0)?;
    let problem = LimitingProblem::new(lgrid, params.alpha, params.p)?.with_decay(DecayCheck::off());
    let lopts = SolveOptions { residual_tol: opts.residual_tol.max(1e-6), precondition_shift: None, ..opts.clone() };
    let ground = solve_limiting(lambda0, &problem, &lopts)?;
    let x0 = grid.point(idx);
    let origin = vec![0.0; grid.dim()];
    resample_affine(&ground.field, &grid, &origin, &x0[..grid.dim()], 1.0 / eps)
}

/// Grid in rescaled units `y = (x - a) / eps` carrying the limiting ground state at
/// `lambda`: same resolution as `grid`, box clipped to where the profile lives.
pub fn rescaled_grid(grid: &GridSpec, eps: f64, lambda: f64) -> Result<GridSpec> {
    let half = (grid.half_extent() / eps).min(24.0 / lambda.sqrt());
    make_grid(grid.dim(), grid.points_per_axis(), half)
}

/// Previous solution at `eps_from` about `center`, compressed to the width expected at `eps_to`.
pub fn warm_start(prev: &Field, center: &[f64], eps_from: f64, eps_to: f64) -> Result<Field> {
    if !(eps_from > 0.0 && eps_to > 0.0) {
        return Err(Error::InvalidParameter("warm start needs positive eps".into()));
    }
    let grid = *prev.grid();
    resample_affine(prev, &grid, center, center, eps_from / eps_to)
}
