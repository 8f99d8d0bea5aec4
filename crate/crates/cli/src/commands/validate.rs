use choquard::model::{validate_params, ProblemParams};
use choquard::special::{critical_mass_constant, hls_weighted_constant, riesz_normalization, scaling_exponent};

use super::{regime_line, CASES};
use crate::config::RunConfig;
use crate::CliError;

/// Prints the regime, which penalization constructions apply, and the constants.
pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let pr = &cfg.problem;
    let regime = validate_params(pr.dim, pr.alpha, pr.p)?;
    let verdict = regime_line(pr.dim, pr.p, &regime);

    if !(1..=3).contains(&pr.dim) {
        println!("{verdict}");
        return Err(CliError::Refused(format!("the solvers support N = 1, 2, 3; got N = {}", pr.dim)));
    }
    let params: ProblemParams = cfg.params();
    params.validate_on(&cfg.grid()?)?;

    let applicable = CASES.iter().find(|c| c.check_exponents(&params).is_ok());
    match applicable {
        Some(case) => println!("{verdict}; {case} requires {}", case.potential_requirement(&params)),
        None => println!("{verdict}; no penalization case applies to (N, alpha, p)"),
    }
    for case in CASES {
        let status = match case.check_hypotheses(&params) {
            Ok(()) => "holds".to_string(),
            Err(e) => format!("fails ({e})"),
        };
        println!("  {case}: {status}");
    }

    println!("A_alpha = {}", riesz_normalization(pr.dim, pr.alpha));
    println!("C_alpha = {}", hls_weighted_constant(pr.dim, pr.alpha));
    if regime.limiting_solvable {
        println!("theta = {}", scaling_exponent(pr.dim, pr.alpha, pr.p));
    }
    let newtonian = pr.p == 2.0 && pr.dim >= 3 && pr.alpha == pr.dim as f64 - 2.0;
    match critical_mass_constant(pr.dim).filter(|_| newtonian) {
        Some(m) => println!("critical mass bound = {m}"),
        None => println!("critical mass bound n/a (needs p = 2, α = N−2, N ≥ 3)"),
    }
    if regime.limiting_solvable {
        Ok(())
    } else {
        Err(CliError::Refused(verdict))
    }
}
