mod concentrate;
mod limit;
mod nonexist;
mod validate;

pub use concentrate::concentrate;
pub use limit::solve_limit;
pub use nonexist::nonexist;
pub use validate::validate;

use choquard::diagnostics::default_penalty_rate;
use choquard::model::{
    build_penalization, hardy_quotient, validate_params, Instance, PenaltyCase, Penalization, Regime, RegimeReason,
};
use choquard::Field;

use crate::config::{CaseKeyword, CaseSetting, RateSetting, RunConfig};
use crate::CliError;

const CASES: [PenaltyCase; 3] = [PenaltyCase::Transient, PenaltyCase::SlowDecay, PenaltyCase::QuadraticDecay];

/// One-line regime verdict; for `p = 2` the upper critical exponent reads `alpha <= N - 4`.
fn regime_line(dim: usize, p: f64, regime: &Regime) -> String {
    match regime.reason {
        RegimeReason::Solvable => "solvable".into(),
        RegimeReason::AtOrAboveUpperCritical if p == 2.0 && dim >= 3 => {
            "limiting problem unsolvable (α ≤ N−4)".into()
        }
        RegimeReason::AtOrAboveUpperCritical => "limiting problem unsolvable (p ≥ (N+α)/(N−2))".into(),
        RegimeReason::AtOrBelowLowerCritical => "limiting problem unsolvable (p ≤ (N+α)/N)".into(),
    }
}

fn require_solvable(cfg: &RunConfig) -> Result<(), CliError> {
    let pr = &cfg.problem;
    let regime = validate_params(pr.dim, pr.alpha, pr.p)?;
    if regime.limiting_solvable {
        Ok(())
    } else {
        Err(CliError::Refused(regime_line(pr.dim, pr.p, &regime)))
    }
}

fn instance(cfg: &RunConfig) -> Result<Instance, CliError> {
    Ok(Instance::new(cfg.params(), cfg.grid()?)?)
}

/// The penalization case and rate a run will use, `None` for the original problem.
fn resolve_penalization(cfg: &RunConfig, inst: &Instance) -> Result<Option<(PenaltyCase, f64)>, CliError> {
    let params = inst.params();
    let case = match cfg.penalization.case {
        CaseSetting::Keyword(CaseKeyword::None) => return Ok(None),
        CaseSetting::Fixed(case) => {
            case.check_hypotheses(params)?;
            case
        }
        CaseSetting::Keyword(CaseKeyword::Auto) => {
            let mut reasons = Vec::new();
            let mut chosen = None;
            for case in CASES {
                match case.check_hypotheses(params) {
                    Ok(()) => {
                        chosen = Some(case);
                        break;
                    }
                    Err(e) => reasons.push(e.to_string()),
                }
            }
            chosen.ok_or_else(|| CliError::Refused(format!("no penalization case applies: {}", reasons.join("; "))))?
        }
    };
    let lam = match cfg.penalization.lam {
        RateSetting::Value(v) => v,
        RateSetting::Keyword(_) => default_penalty_rate(inst, cfg.penalization.delta, cfg.diagnostics.outer_radius),
    };
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(CliError::Refused(format!("penalization rate lam must be positive, got {lam}")));
    }
    Ok(Some((case, lam)))
}

/// The config with `case` and `lam` pinned to the values actually used.
fn pinned(cfg: &RunConfig, pen: Option<(PenaltyCase, f64)>) -> RunConfig {
    let mut out = cfg.clone();
    if let Some((case, lam)) = pen {
        out.penalization.case = CaseSetting::Fixed(case);
        out.penalization.lam = RateSetting::Value(lam);
    }
    out
}

/// Penalization at the instance's eps with `kappa` measured from `init`.
fn measured_penalization(
    cfg: &RunConfig,
    pen: Option<(PenaltyCase, f64)>,
    inst: &Instance,
    init: &Field,
) -> choquard::Result<Option<Penalization>> {
    let Some((case, lam)) = pen else { return Ok(None) };
    let mut built = build_penalization(case, inst, lam, cfg.penalization.delta)?;
    hardy_quotient(&mut built, inst, cfg.penalization.hardy_trials, cfg.solver.seed, Some(init))?;
    Ok(Some(built))
}
