use log::debug;

use super::options::{SolveOptions, TraceRecord};
use crate::error::{Error, Result};
use crate::grid::Field;

/// A functional reduced to its fiber maxima `Phi(v) = max_t F(t v)`.
pub(crate) trait Reduced {
    /// Moves `v` to the fiber maximizer `t* v`; returns it with `Phi(v)` and `t*`.
    fn project(&self, v: &Field) -> Result<(Field, f64, f64)>;
    /// Strong-form gradient of `F` at a projected point.
    fn residual(&self, v: &Field) -> Result<Field>;
    fn precondition(&self, r: &Field) -> Result<Field>;
}

pub(crate) struct Outcome {
    pub field: Field,
    pub residual_rel: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
}

/// Function evaluations allowed per line search.
const MAX_EVALS: usize = 40;
/// Energy differences below this fraction of `|Phi|` are roundoff.
const ROUNDOFF: f64 = 1e-14;
/// Curvature condition `|phi'(s)| <= SIGMA |phi'(0)|`.
const SIGMA: f64 = 0.1;

/// Preconditioned Polak-Ribiere+ descent on the reduced functional. The line
/// search asks for Armijo decrease (up to roundoff in `Phi`) and a strong-Wolfe
/// drop of the directional derivative, which stays informative once energy
/// differences fall below machine precision. Every iterate is projected back to
/// its fiber maximum.
pub(crate) fn descend(problem: &impl Reduced, init: &Field, opts: &SolveOptions) -> Result<Outcome> {
    let (mut v, mut phi, _) = problem.project(init)?;
    let mut r = problem.residual(&v)?;
    let mut z = problem.precondition(&r)?;
    let mut rz = r.dot(&z)?;
    let mut d = z.scaled(-1.0);
    let mut step = opts.step_init;
    let mut trace = Vec::new();
    let mut iterations = 0;

    loop {
        let rel = r.norm_l2() / v.norm_l2();
        trace.push(TraceRecord { energy: phi, residual: rel });
        if rel <= opts.residual_tol {
            return Ok(Outcome { field: v, residual_rel: rel, iterations, converged: true, trace });
        }
        if iterations >= opts.max_iters {
            return Ok(Outcome { field: v, residual_rel: rel, iterations, converged: false, trace });
        }
        iterations += 1;

        let mut slope = r.dot(&d)?;
        let mut steepest = false;
        if !(slope < 0.0) {
            d = z.scaled(-1.0);
            slope = -rz;
            steepest = true;
        }
        let mut found = line_search(problem, &v, &d, phi, slope, step, opts.armijo_c)?;
        if found.is_none() && !steepest {
            d = z.scaled(-1.0);
            found = line_search(problem, &v, &d, phi, -rz, opts.step_init, opts.armijo_c)?;
        }
        let Some(Accepted { field: nv, energy: nphi, residual: nr, step: s }) = found else {
            debug!("line search stalled at iteration {iterations}, residual {rel:.3e}");
            return Ok(Outcome { field: v, residual_rel: rel, iterations, converged: false, trace });
        };
        step = s;

        let nz = problem.precondition(&nr)?;
        let nrz = nr.dot(&nz)?;
        let beta = ((nrz - nz.dot(&r)?) / rz).max(0.0);
        d = nz.axpy(-beta, &d)?.scaled(-1.0);
        v = nv;
        phi = nphi;
        r = nr;
        z = nz;
        rz = nrz;
        if !(phi.is_finite() && rz.is_finite()) {
            return Err(Error::NonFinite("descent iterate"));
        }
    }
}

struct Accepted {
    field: Field,
    energy: f64,
    residual: Field,
    step: f64,
}

/// Safeguarded secant search on `phi'(s) = t* <R(t* (v + s d)), d>`.
fn line_search(
    problem: &impl Reduced,
    v: &Field,
    d: &Field,
    phi: f64,
    slope: f64,
    guess: f64,
    c: f64,
) -> Result<Option<Accepted>> {
    let slack = ROUNDOFF * phi.abs();
    let mut lo = (0.0, slope);
    let mut hi: Option<(f64, f64)> = None;
    let mut s = guess;
    let mut best: Option<(f64, Accepted)> = None;
    for _ in 0..MAX_EVALS {
        let trial = v.axpy(s, d)?;
        let projected = match problem.project(&trial) {
            Ok(x) => Some(x),
            Err(Error::Collapse { .. }) | Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
        let evaluated = match projected {
            Some((nv, nphi, t)) if nphi.is_finite() && nphi <= phi + c * s * slope + slack => {
                let nr = problem.residual(&nv)?;
                let deriv = t * nr.dot(d)?;
                Some((Accepted { field: nv, energy: nphi, residual: nr, step: s }, deriv))
            }
            _ => None,
        };
        let Some((cand, deriv)) = evaluated else {
            // overshoot: shrink towards the last good point
            hi = Some((s, f64::NAN));
            s = lo.0 + 0.5 * (s - lo.0);
            continue;
        };
        if deriv.abs() <= SIGMA * slope.abs() {
            return Ok(Some(cand));
        }
        if best.as_ref().is_none_or(|(b, _)| deriv.abs() < *b) {
            best = Some((deriv.abs(), cand));
        }
        if deriv < 0.0 {
            lo = (s, deriv);
        } else {
            hi = Some((s, deriv));
        }
        s = match hi {
            None => {
                // extrapolate along the secant through the last two slopes
                let grow = if deriv > slope { slope / (slope - deriv) } else { 4.0 };
                s * grow.clamp(1.5, 4.0)
            }
            Some((sh, dh)) => {
                let width = sh - lo.0;
                let guess = if dh.is_finite() { lo.0 - lo.1 * width / (dh - lo.1) } else { lo.0 + 0.5 * width };
                guess.clamp(lo.0 + 0.1 * width, sh - 0.1 * width)
            }
        };
    }
    Ok(best.map(|(_, cand)| cand))
}
