use log::info;

use super::options::{SolveOptions, SolveResult};
use super::penalized::{auto_init, solve_penalized, warm_start, Init};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::{Instance, Penalization};

#[derive(Debug, Clone)]
pub struct SweepStep<D> {
    pub eps: f64,
    pub result: SolveResult,
    pub penalization: Option<Penalization>,
    pub report: D,
}

/// Outcome of an eps ladder: the completed steps and, if the ladder stopped
/// early, the reason tagged with the failing eps.
#[derive(Debug, Clone)]
pub struct Sweep<D> {
    pub steps: Vec<SweepStep<D>>,
    pub failure: Option<Error>,
}

impl<D> Sweep<D> {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

fn at(eps: f64, e: Error) -> Error {
    Error::AtEps { eps, source: Box::new(e) }
}

/// Solves along a strictly decreasing `eps_list`: auto-init at the first value,
/// then each solve starts from the previous solution compressed about its maximum.
///
/// `pen_builder` sees the instance at the current eps and the starting field and
/// returns the penalization to use (`None` solves the original problem);
/// `diagnose` turns each converged solve into a report.
pub fn continuation_sweep<D>(
    base: &Instance,
    eps_list: &[f64],
    opts: &SolveOptions,
    pen_builder: impl FnMut(&Instance, &Field) -> Result<Option<Penalization>>,
    diagnose: impl FnMut(&Instance, Option<&Penalization>, &SolveResult) -> Result<D>,
) -> Result<Sweep<D>> {
    continuation_sweep_from(base, eps_list, opts, None, pen_builder, diagnose)
}

/// As [`continuation_sweep`], continuing a ladder whose last completed step was
/// `previous = (eps, solution)`; every entry of `eps_list` must lie below it.
pub fn continuation_sweep_from<D>(
    base: &Instance,
    eps_list: &[f64],
    opts: &SolveOptions,
    previous: Option<(f64, &Field)>,
    mut pen_builder: impl FnMut(&Instance, &Field) -> Result<Option<Penalization>>,
    mut diagnose: impl FnMut(&Instance, Option<&Penalization>, &SolveResult) -> Result<D>,
) -> Result<Sweep<D>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("eps_list is empty".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("eps values must be positive".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps_list must be strictly decreasing".into()));
    }
    if let Some((prev_eps, prev)) = previous {
        base.ensure_grid(prev)?;
        if !(eps_list[0] < prev_eps) {
            return Err(Error::InvalidParameter("eps_list must continue below the previous eps".into()));
        }
    }
    opts.validate()?;

    let mut steps: Vec<SweepStep<D>> = Vec::new();
    let dim = base.grid().dim();
    for &eps in eps_list {
        let attempt = (|| -> Result<(Instance, Field)> {
            let inst = base.with_eps(eps)?;
            let last = steps.last().map(|s| (s.eps, &s.result.field)).or(previous);
            let init = match last {
                None => auto_init(&inst, opts)?,
                Some((prev_eps, prev)) => {
                    let peak = prev.grid().point(prev.argmax());
                    warm_start(prev, &peak[..dim], prev_eps, eps)?
                }
            };
            Ok((inst, init))
        })();
        let (inst, init) = match attempt {
            Ok(x) => x,
            Err(e) => return Ok(Sweep { steps, failure: Some(at(eps, e)) }),
        };
        let pen = match pen_builder(&inst, &init) {
            Ok(p) => p,
            Err(e) => return Ok(Sweep { steps, failure: Some(at(eps, e)) }),
        };
        let result = match solve_penalized(&inst, pen.as_ref(), opts, &Init::Field(init)) {
            Ok(r) => r,
            Err(e) => return Ok(Sweep { steps, failure: Some(at(eps, e)) }),
        };
        info!(
            "eps = {eps}: {} after {} iterations, residual {:.3e}",
            if result.converged { "converged" } else { "not converged" },
            result.iterations,
            result.residual_rel
        );
        if !result.converged {
            let failure = at(eps, Error::NotConverged { iterations: result.iterations, residual: result.residual_rel });
            return Ok(Sweep { steps, failure: Some(failure) });
        }
        let report = match diagnose(&inst, pen.as_ref(), &result) {
            Ok(r) => r,
            Err(e) => return Ok(Sweep { steps, failure: Some(at(eps, e)) }),
        };
        steps.push(SweepStep { eps, result, penalization: pen, report });
    }
    Ok(Sweep { steps, failure: None })
}
