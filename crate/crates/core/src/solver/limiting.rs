use super::descent::{descend, Reduced};
use super::options::{SolveOptions, SolveResult};
use crate::error::{Error, Result};
use crate::grid::{inv_helmholtz, resample_affine, DecayCheck, Field};
use crate::model::{limiting_energy, limiting_residual, LimitingProblem, RegimeReason};

/// Closed-form fiber maximum of `t -> I_lambda(t v)` from the quadratic part
/// `a = int |grad v|^2 + lambda v^2` and the nonlocal part `b = D(v)`.
pub(crate) fn fiber_maximum(a: f64, b: f64, p: f64) -> Result<(f64, f64)> {
    if !(b > 0.0) {
        return Err(Error::Degenerate("field has no positive part to scale".into()));
    }
    if !(a > 0.0) {
        return Err(Error::Degenerate("quadratic part vanishes".into()));
    }
    let t = (a / b).powf(1.0 / (2.0 * p - 2.0));
    let energy = (p - 1.0) / (2.0 * p) * a.powf(p / (p - 1.0)) * b.powf(-1.0 / (p - 1.0));
    Ok((t, energy))
}

/// Scaling `t*` that moves `v` onto its Nehari manifold and the fiber maximum
/// `max_t I_lambda(t v)`.
pub fn nehari_scale(v: &Field, lambda: f64, problem: &LimitingProblem) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let parts = problem.parts(v)?;
    fiber_maximum(parts.grad + lambda * parts.mass, parts.nonlocal, problem.p)
}

struct Limiting<'a> {
    problem: &'a LimitingProblem,
    lambda: f64,
    shift: f64,
}

impl Reduced for Limiting<'_> {
    fn project(&self, v: &Field) -> Result<(Field, f64, f64)> {
        let (t, energy) = nehari_scale(v, self.lambda, self.problem)?;
        Ok((v.scaled(t), energy, t))
    }

    fn residual(&self, v: &Field) -> Result<Field> {
        limiting_residual(v, self.lambda, self.problem)
    }

    fn precondition(&self, r: &Field) -> Result<Field> {
        inv_helmholtz(r, 1.0, self.shift)
    }
}

/// Ground state of `-Delta v + lambda v = (I_alpha * v_+^p) v_+^(p-1)` by Nehari-reduced
/// descent from a centered Gaussian.
pub fn solve_limiting(lambda: f64, problem: &LimitingProblem, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let regime = crate::model::validate_params(problem.dim(), problem.alpha(), problem.p)?;
    if regime.reason != RegimeReason::Solvable {
        return Err(Error::RegimeViolation(regime.to_string()));
    }
    let width2 = 2.0 / lambda;
    let init = Field::from_fn(*problem.grid(), |x| (-x.iter().map(|c| c * c).sum::<f64>() / width2).exp());
    solve_limiting_from(lambda, problem, opts, &init)
}

pub(crate) fn solve_limiting_from(
    lambda: f64,
    problem: &LimitingProblem,
    opts: &SolveOptions,
    init: &Field,
) -> Result<SolveResult> {
    let quiet = problem.clone().with_decay(DecayCheck::off());
    let reduced = Limiting { problem: &quiet, lambda, shift: opts.precondition_shift.unwrap_or(lambda) };
    let out = descend(&reduced, init, opts)?;
    final_decay(problem.decay, opts).check(&out.field)?;
    let min_before_clamp = out.field.min();
    let field = out.field.positive_part();
    let energy = limiting_energy(&field, lambda, &quiet)?;
    Ok(SolveResult {
        field,
        energy,
        residual_rel: out.residual_rel,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        critical_value: None,
        min_before_clamp,
    })
}

pub(crate) fn final_decay(base: DecayCheck, opts: &SolveOptions) -> DecayCheck {
    DecayCheck { strict: base.strict || opts.strict_boundary, ..base }
}

/// `v_lambda(y) = lambda^((alpha+2)/(4(p-1))) v_1(sqrt(lambda) y)`, resampled onto
/// the problem grid from a ground state computed at `lambda = 1`.
pub fn rescale_limiting(v1: &SolveResult, lambda: f64, problem: &LimitingProblem) -> Result<Field> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !v1.converged {
        return Err(Error::InvalidParameter("rescaling needs a converged ground state".into()));
    }
    let dim = problem.dim();
    if v1.field.grid().dim() != dim {
        return Err(Error::GridMismatch);
    }
    let amplitude = lambda.powf((problem.alpha() + 2.0) / (4.0 * (problem.p - 1.0)));
    let origin = vec![0.0; dim];
    let moved = resample_affine(&v1.field, problem.grid(), &origin, &origin, lambda.sqrt())?;
    Ok(moved.scaled(amplitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn fiber_maximum_examples() {
        assert_eq!(fiber_maximum(1.0, 1.0, 2.0).unwrap(), (1.0, 0.25));
        let (t, e) = fiber_maximum(4.0, 1.0, 2.0).unwrap();
        assert!((t - 2.0).abs() < 1e-15 && (e - 4.0).abs() < 1e-14);
        assert!(fiber_maximum(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn nonpositive_field_cannot_be_scaled() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let problem = LimitingProblem::new(g, 0.5, 2.0).unwrap();
        let v = Field::from_fn(g, |x| -(-x[0] * x[0]).exp());
        assert!(matches!(nehari_scale(&v, 1.0, &problem), Err(Error::Degenerate(_))));
    }

    #[test]
    fn nonpositive_lambda_is_refused() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let problem = LimitingProblem::new(g, 0.5, 2.0).unwrap();
        let opts = SolveOptions::default();
        assert!(solve_limiting(0.0, &problem, &opts).is_err());
        assert!(solve_limiting(-1.0, &problem, &opts).is_err());
    }

    #[test]
    fn out_of_regime_is_refused() {
        let g = make_grid(1, 64, 8.0).unwrap();
        // lower critical exponent (N + alpha) / N = 1.5
        let problem = LimitingProblem::new(g, 0.5, 1.5).unwrap();
        assert!(matches!(
            solve_limiting(1.0, &problem, &SolveOptions::default()),
            Err(Error::RegimeViolation(_))
        ));
    }
}
