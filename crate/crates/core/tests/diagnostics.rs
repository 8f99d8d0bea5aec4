use std::f64::consts::PI;

use choquard::diagnostics::{
    bump, comparison_check, concentration_metrics, critical_mass_bound, default_barrier_parameters,
    energy_upper_bound_check, format_real, groundstate_transform_check, mass_identity_check, penalized_report,
    pohozaev_defect, reports_to_csv, scaling_law_check, subsolution_check, unpenalization_check, ReportSettings,
    Slack,
};
use choquard::grid::{grad_sq_integral, integrate, make_grid, DecayCheck, Field};
use choquard::model::{
    build_barrier, build_penalization, hardy_quotient, measure_nu, Instance, LimitingProblem, PenaltyCase,
    Penalization, PotentialSpec, ProblemParams, RegionSpec,
};
use choquard::solver::{auto_init, solve_limiting, solve_penalized, Init, SolveOptions, SolveResult};
use choquard::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn well(eps: f64) -> Instance {
    let params = ProblemParams {
        dim: 1,
        alpha: 0.5,
        p: 2.0,
        eps,
        potential: PotentialSpec::gaussian_well(2.0, 1.0, 1.0, vec![0.0]),
        lambda_region: RegionSpec::ball(vec![0.0], 1.0),
        outer_region: RegionSpec::ball(vec![0.0], 2.0),
    };
    Instance::new(params, make_grid(1, 2048, 24.0).unwrap()).unwrap()
}

fn solved(eps: f64) -> (Instance, Penalization, SolveResult) {
    let inst = well(eps);
    let opts = SolveOptions::default();
    let init = auto_init(&inst, &opts).unwrap();
    let mut pen = build_penalization(PenaltyCase::SlowDecay, &inst, 0.75, 0.5).unwrap();
    hardy_quotient(&mut pen, &inst, 64, 42, Some(&init)).unwrap();
    let r = solve_penalized(&inst, Some(&pen), &opts, &Init::Field(init)).unwrap();
    (inst, pen, r)
}

fn perturbed(v: &Field, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..v.grid().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let values = v.values().iter().zip(&noise).map(|(a, n)| a * (1.0 + 0.1 * n)).collect();
    Field::new(*v.grid(), values).unwrap()
}

#[test]
fn identity_checks_have_teeth() {
    let problem = LimitingProblem::new(make_grid(1, 1024, 24.0).unwrap(), 0.5, 2.0).unwrap();
    let r = solve_limiting(1.0, &problem, &SolveOptions::default()).unwrap();
    let exact = pohozaev_defect(&r.field, 1.0, &problem).unwrap();
    assert!(exact.pohozaev < 1e-3 && exact.nehari < 1e-6);
    let noisy = pohozaev_defect(&perturbed(&r.field, 1), 1.0, &problem).unwrap();
    assert!(noisy.pohozaev > exact.pohozaev && noisy.nehari > exact.nehari);
    assert!(noisy.pohozaev.max(noisy.nehari) > 1e-2, "{noisy:?}");
    assert!(matches!(pohozaev_defect(&Field::zeros(*problem.grid()), 1.0, &problem), Err(Error::Degenerate(_))));
}

#[test]
fn mass_identity_and_critical_mass_in_the_newtonian_regime() {
    let grid = make_grid(3, 32, 12.0).unwrap();
    let problem = LimitingProblem::new(grid, 1.0, 2.0).unwrap().with_decay(DecayCheck::off());
    let r = solve_limiting(1.0, &problem, &SolveOptions::default()).unwrap();
    let err = mass_identity_check(&r.field, 1.0, r.energy, &problem).unwrap().unwrap();
    assert!(err < 0.02, "{err}");
    // with the Nehari identity exact, the mass defect is half the gap in K = lambda M
    let parts = problem.parts(&r.field).unwrap();
    let gap = (parts.grad - parts.mass).abs() / parts.mass;
    assert!((gap - 2.0 * err).abs() < 1e-6, "{gap} vs {err}");
    let noisy = mass_identity_check(&perturbed(&r.field, 2), 1.0, r.energy, &problem).unwrap().unwrap();
    assert!(noisy > err);

    let params = ProblemParams {
        dim: 3,
        alpha: 1.0,
        p: 2.0,
        eps: 1.0,
        potential: PotentialSpec::constant(1.0),
        lambda_region: RegionSpec::ball(vec![0.0; 3], 2.0),
        outer_region: RegionSpec::ball(vec![0.0; 3], 4.0),
    };
    let inst = Instance::new(params, grid).unwrap().with_decay(DecayCheck::off());
    let cm = critical_mass_bound(&r.field, &inst).unwrap().unwrap();
    assert!((cm.bound - PI * PI / 2.0).abs() < 1e-14);
    assert!((cm.scaled_mass - r.field.dot(&r.field).unwrap()).abs() < 1e-12);
}

#[test]
fn regime_specific_checks_are_not_applicable_elsewhere() {
    let problem = LimitingProblem::new(make_grid(1, 256, 16.0).unwrap(), 0.5, 2.0).unwrap();
    let v = Field::from_fn(*problem.grid(), |x| (-x[0] * x[0]).exp());
    assert_eq!(mass_identity_check(&v, 1.0, 1.0, &problem).unwrap(), None);
    let inst = well(0.2);
    let u = Field::zeros(*inst.grid());
    assert!(critical_mass_bound(&u, &inst).unwrap().is_none());
}

#[test]
fn scaling_check_is_exact_at_lambda_one() {
    let problem = LimitingProblem::new(make_grid(1, 512, 24.0).unwrap(), 0.5, 2.0).unwrap();
    let r = solve_limiting(1.0, &problem, &SolveOptions::default()).unwrap();
    assert_eq!(scaling_law_check(&r, &r, 1.0, &problem).unwrap(), 0.0);
}

#[test]
fn single_point_energy_sweep_has_no_trend() {
    let gaps = energy_upper_bound_check(&[(0.1, 0.07)], 1, 0.65, 0.1).unwrap();
    assert_eq!(gaps.decreasing, None);
    assert!((gaps.gaps[0].1 - 0.05).abs() < 1e-12);
    assert!(gaps.within_tolerance);
    assert!(energy_upper_bound_check(&[], 1, 0.65, 0.1).is_err());
}

#[test]
fn peak_and_tail_metrics() {
    let (inst, _, r) = solved(0.05);
    let m = concentration_metrics(&r, &inst, 1.0, 10.0, None).unwrap();
    // symmetric well, symmetric start: the peak sits on the grid point at the origin
    assert_eq!(m.a_eps, vec![0.0]);
    assert!(m.sup_outside < 0.1 * r.field.max());
    let tails: Vec<f64> = [5.0, 10.0, 15.0]
        .iter()
        .map(|&big_r| concentration_metrics(&r, &inst, 1.0, big_r, None).unwrap().sup_outside)
        .collect();
    assert!(tails[1] < tails[0] && tails[2] < tails[1], "{tails:?}");
}

#[test]
fn penalization_is_inactive_at_small_eps() {
    let (inst, pen, r) = solved(0.05);
    let check = unpenalization_check(&r.field, Some(&pen), &inst).unwrap();
    assert!(check.unpenalized);
    assert!(check.original_residual < 2.0 * r.residual_rel.max(SolveOptions::default().residual_tol));
    let vacuous = unpenalization_check(&r.field, None, &inst).unwrap();
    assert!(vacuous.unpenalized);
}

#[test]
fn comparison_is_monotone_in_the_barrier() {
    let (inst, pen, r) = solved(0.05);
    let a = [0.0];
    let (rad, m) = default_barrier_parameters(&pen, &inst, &a, 10.0);
    let barrier = build_barrier(&pen, &inst, &a, rad, m, 10.0).unwrap().field;
    let slack = Slack::default();
    let base = comparison_check(&r.field, &barrier, &a, 10.0, 0.05, slack).unwrap();
    assert_eq!(base.violations, 0);
    let bigger = comparison_check(&r.field, &barrier.scaled(10.0), &a, 10.0, 0.05, slack).unwrap();
    assert_eq!(bigger.violations, 0);
    let doubled = comparison_check(&barrier.scaled(2.0), &barrier, &a, 10.0, 0.05, slack).unwrap();
    assert_eq!(doubled.violations, doubled.checked);
}

#[test]
fn subsolution_check_needs_nu_and_a_proper_delta() {
    let (inst, mut pen, r) = solved(0.05);
    let a = [0.0];
    let slack = Slack::default();
    assert!(subsolution_check(&r.field, &pen, &inst, &a, 10.0, 0.5, slack, 1e-8).is_err());
    measure_nu(&mut pen, &r.field, &inst).unwrap();
    let ok = subsolution_check(&r.field, &pen, &inst, &a, 10.0, 0.5, slack, 1e-8).unwrap();
    assert_eq!(ok.violations, 0);
    assert!(ok.checked > 0 && ok.checked < inst.grid().len());
    for delta in [0.0, 1.0] {
        let err = subsolution_check(&r.field, &pen, &inst, &a, 10.0, delta, slack, 1e-8).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }
}

#[test]
fn ground_state_transform_margin() {
    let (inst, _, r) = solved(0.05);
    let center = [0.6];
    let rho = 0.3;
    let phi = bump(inst.grid(), &center, rho);
    let lhs = 0.05f64.powi(2) * grad_sq_integral(&phi, &DecayCheck::off()).unwrap()
        + integrate(&phi.zip_map(inst.potential(), |a, v| v * a * a).unwrap());
    let empty = groundstate_transform_check(&Field::zeros(*inst.grid()), &inst, &center, rho).unwrap().unwrap();
    assert!(empty > 0.0 && (empty - lhs).abs() < 1e-12 * lhs);
    let margin = groundstate_transform_check(&r.field, &inst, &center, rho).unwrap().unwrap();
    assert!(margin >= -1e-6 * lhs, "{margin}");
}

#[test]
fn reports_are_reproducible() {
    let (inst, pen, r) = solved(0.1);
    let settings = ReportSettings::default();
    let first = penalized_report(&inst, Some(&pen), &r, &settings).unwrap();
    let (a, measured) = (first.report, first.penalization);
    let b = penalized_report(&inst, Some(&pen), &r, &settings).unwrap().report;
    assert!(first.limiting.is_some());
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert!(measured.unwrap().nu.is_some());
    let csv = reports_to_csv(&[a.clone(), b]);
    assert!(csv.starts_with("eps,check,value\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * a.rows().len());
    let back: choquard::diagnostics::DiagnosticsReport = serde_json::from_str(&a.to_json().unwrap()).unwrap();
    assert_eq!(back, a);
}

#[test]
fn reals_print_with_seventeen_significant_digits() {
    assert_eq!(format_real(0.1), "1.0000000000000001e-1");
    assert_eq!(format_real(0.1).parse::<f64>().unwrap(), 0.1);
    assert_eq!(format_real(f64::NAN), "nan");
    assert_eq!(format_real(f64::NEG_INFINITY), "-inf");
}
