//! Identity, inequality and concentration checks applied to solver output.

mod checks;
mod concentration;
mod identities;
mod report;

use serde::{Deserialize, Serialize};

pub use checks::{
    bump, comparison_check, critical_mass_bound, groundstate_transform_check, subsolution_check, unpenalization_check,
    CriticalMass, InequalityReport, Slack, Unpenalization,
};
pub use concentration::{
    concentration_metrics, decays_by, scaled_mass_in, strictly_decreasing, sup_in_region_outside_ball,
    ConcentrationMetrics, DEFAULT_OUTER_RADIUS, DEFAULT_RHO,
};
pub use identities::{
    energy_upper_bound_check, mass_identity_check, pohozaev_defect, scaling_law_check, EnergyGaps, IdentityDefects,
};

pub use report::{penalized_report, PenalizedReport, ReportSettings};

use crate::error::{Error, Result};
use crate::model::{Instance, Penalization};

pub const SCHEMA_VERSION: u32 = 1;

/// Every check evaluated for one solve; `None` marks a check that does not apply.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    pub eps: Option<f64>,
    pub lambda: Option<f64>,
    pub energy: Option<f64>,
    pub residual_rel: Option<f64>,
    pub iterations: Option<usize>,
    pub pohozaev_defect_rel: Option<f64>,
    pub nehari_defect_rel: Option<f64>,
    pub scaling_ratio_error: Option<f64>,
    pub mass_identity_error: Option<f64>,
    pub energy_upper_gap: Option<f64>,
    #[serde(flatten)]
    pub concentration: Option<ConcentrationMetrics>,
    pub unpenalized: Option<bool>,
    pub original_residual: Option<f64>,
    pub hardy_kappa: Option<f64>,
    pub hardy_bound: Option<f64>,
    pub sup_h_outside: Option<f64>,
    pub nu: Option<f64>,
    pub comparison_violations: Option<usize>,
    pub subsolution_violations: Option<usize>,
    pub barrier_min_in_core: Option<f64>,
    pub notes: Vec<String>,
}

/// Fixed-width rendering used by every CSV writer: 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), format_real)
}

impl DiagnosticsReport {
    pub fn new() -> Self {
        Self { schema_version: SCHEMA_VERSION, ..Self::default() }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// `(check, value)` pairs in a fixed order.
    pub fn rows(&self) -> Vec<(String, String)> {
        let mut rows: Vec<(String, String)> = vec![
            ("energy".into(), opt_real(self.energy)),
            ("residual_rel".into(), opt_real(self.residual_rel)),
            ("iterations".into(), self.iterations.map_or("n/a".into(), |n| n.to_string())),
            ("pohozaev_defect_rel".into(), opt_real(self.pohozaev_defect_rel)),
            ("nehari_defect_rel".into(), opt_real(self.nehari_defect_rel)),
            ("scaling_ratio_error".into(), opt_real(self.scaling_ratio_error)),
            ("mass_identity_error".into(), opt_real(self.mass_identity_error)),
            ("energy_upper_gap".into(), opt_real(self.energy_upper_gap)),
        ];
        if let Some(c) = &self.concentration {
            for (k, a) in c.a_eps.iter().enumerate() {
                rows.push((format!("a_eps_{k}"), format_real(*a)));
            }
            rows.push(("a_in_lambda".into(), c.a_in_lambda.to_string()));
            rows.push(("v_at_a".into(), format_real(c.v_at_a)));
            rows.push(("scaled_energy".into(), format_real(c.scaled_energy)));
            rows.push(("scaled_mass_in_ball".into(), format_real(c.scaled_mass_in_ball)));
            rows.push(("sup_outside".into(), format_real(c.sup_outside)));
            rows.push(("profile_l2_distance".into(), opt_real(c.profile_l2_distance)));
        }
        rows.push(("unpenalized".into(), self.unpenalized.map_or("n/a".into(), |b| b.to_string())));
        rows.push(("original_residual".into(), opt_real(self.original_residual)));
        rows.push(("hardy_kappa".into(), opt_real(self.hardy_kappa)));
        rows.push(("hardy_bound".into(), opt_real(self.hardy_bound)));
        rows.push(("sup_h_outside".into(), opt_real(self.sup_h_outside)));
        rows.push(("nu".into(), opt_real(self.nu)));
        let count = |c: Option<usize>| c.map_or("n/a".into(), |n| n.to_string());
        rows.push(("comparison_violations".into(), count(self.comparison_violations)));
        rows.push(("subsolution_violations".into(), count(self.subsolution_violations)));
        rows.push(("barrier_min_in_core".into(), opt_real(self.barrier_min_in_core)));
        rows
    }
}

/// One CSV row per (eps, check): `eps,check,value`.
pub fn reports_to_csv(reports: &[DiagnosticsReport]) -> String {
    let mut out = String::from("eps,check,value\n");
    for r in reports {
        let eps = opt_real(r.eps);
        for (check, value) in r.rows() {
            out.push_str(&format!("{eps},{check},{value}\n"));
        }
    }
    out
}

/// Barrier radius and rate for a peak at `a_eps`: `r = 0.45 dist(a, boundary of Lambda)`
/// and `m = min(sqrt((1 - delta) inf_Lambda V) / 2, ln 2 / R)`, the second bound keeping
/// the barrier at least 1 on `B(a, R eps)`.
pub fn default_barrier_parameters(pen: &Penalization, inst: &Instance, a_eps: &[f64], outer: f64) -> (f64, f64) {
    barrier_parameters(pen.delta, inst, a_eps, outer)
}

fn barrier_parameters(delta: f64, inst: &Instance, a: &[f64], outer: f64) -> (f64, f64) {
    let r = 0.45 * -inst.params().lambda_region.signed_distance(a);
    let inf_v = inst.argmin_in_lambda().1;
    let m = (0.5 * ((1.0 - delta) * inf_v).sqrt()).min(std::f64::consts::LN_2 / outer);
    (r, m)
}

/// Penalization rate `lam = m r / 2` for the barrier parameters at the minimum of
/// `V` over `Lambda`, where the peaks are expected to settle.
pub fn default_penalty_rate(inst: &Instance, delta: f64, outer: f64) -> f64 {
    let (i, _) = inst.argmin_in_lambda();
    let a = inst.grid().point(i);
    let (r, m) = barrier_parameters(delta, inst, &a[..inst.grid().dim()], outer);
    0.5 * m * r
}
