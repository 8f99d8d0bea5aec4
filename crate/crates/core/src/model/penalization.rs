use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{grad_sq_integral, inv_helmholtz, riesz_convolve, DecayCheck, Field, GridSpec};

use super::functional::Instance;
use super::params::{ProblemParams, RegionSpec};

/// Which supersolution construction produced the penalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum PenaltyCase {
    /// `N >= 3`, `p > 1 + max(alpha, (alpha + 2) / 2) / (N - 2)`: `w = |x|^-mu`, `mu < N - 2`.
    Transient,
    /// `p = 2`, `alpha >= N - 2`, `inf V (1 + |x|^(N - alpha)) > 0`: `w = |x|^-mu`, `mu = N/2 + 1`.
    SlowDecay,
    /// `p > 2`, `liminf V |x|^2 > 0`: parabolic cap then `|x|^-mu`.
    QuadraticDecay,
}

impl TryFrom<u8> for PenaltyCase {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(PenaltyCase::Transient),
            2 => Ok(PenaltyCase::SlowDecay),
            3 => Ok(PenaltyCase::QuadraticDecay),
            _ => Err(format!("penalization case must be 1, 2 or 3, got {v}")),
        }
    }
}

impl From<PenaltyCase> for u8 {
    fn from(c: PenaltyCase) -> u8 {
        match c {
            PenaltyCase::Transient => 1,
            PenaltyCase::SlowDecay => 2,
            PenaltyCase::QuadraticDecay => 3,
        }
    }
}

impl std::fmt::Display for PenaltyCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "case {}", u8::from(*self))
    }
}

impl PenaltyCase {
    /// Checks the case hypotheses against `(N, alpha, p)` and the declared decay of `V`.
    pub fn check_hypotheses(&self, params: &ProblemParams) -> Result<()> {
        self.check_exponents(params)?;
        let n = params.dim as f64;
        let holds = match self {
            PenaltyCase::Transient => true,
            PenaltyCase::SlowDecay => {
                params.potential.is_everywhere_positive()
                    && params.potential.decay_exponent().is_some_and(|g| g <= n - params.alpha)
            }
            PenaltyCase::QuadraticDecay => params.potential.decay_exponent().is_some_and(|g| g <= 2.0),
        };
        if holds {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("{self}: requires {}", self.potential_requirement(params))))
        }
    }

    /// The part of the hypotheses that involves only `(N, alpha, p)`.
    pub fn check_exponents(&self, params: &ProblemParams) -> Result<()> {
        let n = params.dim as f64;
        let (alpha, p) = (params.alpha, params.p);
        let fail = |what: String| Err(Error::Hypothesis(format!("{self}: {what}")));
        match self {
            PenaltyCase::Transient => {
                if params.dim < 3 {
                    return fail(format!("requires N >= 3, got N = {}", params.dim));
                }
                let bound = 1.0 + alpha.max((alpha + 2.0) / 2.0) / (n - 2.0);
                if p <= bound {
                    return fail(format!("requires p > 1 + max(alpha, (alpha + 2)/2)/(N - 2) = {bound}, got p = {p}"));
                }
            }
            PenaltyCase::SlowDecay => {
                if p != 2.0 {
                    return fail(format!("requires p = 2, got p = {p}"));
                }
                if alpha < n - 2.0 {
                    return fail(format!("requires alpha >= N - 2, got alpha = {alpha}"));
                }
            }
            PenaltyCase::QuadraticDecay => {
                if p <= 2.0 {
                    return fail(format!("requires p > 2, got p = {p}"));
                }
            }
        }
        Ok(())
    }

    /// The condition the case places on `V`, in words.
    pub fn potential_requirement(&self, params: &ProblemParams) -> String {
        match self {
            PenaltyCase::Transient => "V >= 0 (no decay condition)".into(),
            PenaltyCase::SlowDecay => {
                let e = params.dim as f64 - params.alpha;
                let power = if e == 1.0 { "|x|".to_string() } else { format!("|x|^{e}") };
                format!("inf V(x)(1+{power}) > 0")
            }
            PenaltyCase::QuadraticDecay => "liminf V(x)|x|^2 > 0".into(),
        }
    }

    /// Decay exponent of the supersolution: the midpoint of the admissible interval.
    pub fn select_mu(&self, dim: usize, alpha: f64, p: f64) -> Result<f64> {
        let n = dim as f64;
        match self {
            PenaltyCase::Transient => {
                let mut lo = (alpha / p).max((alpha + 2.0) / (2.0 * (p - 1.0)));
                if p > 2.0 {
                    lo = lo.max((2.0 - n + alpha) / (p - 2.0));
                }
                let hi = n - 2.0;
                if !(lo < hi) {
                    return Err(Error::Hypothesis(format!("{self}: empty admissible interval ({lo}, {hi}) for mu")));
                }
                Ok(0.5 * (lo + hi))
            }
            PenaltyCase::SlowDecay => Ok(n / 2.0 + 1.0),
            PenaltyCase::QuadraticDecay => {
                let lo = (n / p).max((2.0 - n + alpha) / (p - 2.0));
                let hi = 2.0 * n;
                Ok(if lo < hi { 0.5 * (lo + hi) } else { lo + 1.0 })
            }
        }
    }
}

/// Cubic Hermite interpolation on `[a, b]` with endpoint values and slopes.
fn hermite(r: f64, a: f64, b: f64, fa: f64, da: f64, fb: f64, db: f64) -> f64 {
    let h = b - a;
    let t = (r - a) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * fa
        + (t3 - 2.0 * t2 + t) * h * da
        + (-2.0 * t3 + 3.0 * t2) * fb
        + (t3 - t2) * h * db
}

/// Radial supersolution profile `w_mu`, equal to 1 on the closure of `Lambda`.
///
/// Every transition is a cubic Hermite blend of `ln w` (value and slope matched),
/// which keeps `w` positive and `C^1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialWeight {
    pub case: PenaltyCase,
    pub mu: f64,
    pub lambda_radius: f64,
    pub outer_radius: f64,
    /// Cap radius of the parabolic piece (third construction only).
    pub cap_radius: f64,
}

impl RadialWeight {
    /// `(ln w, d ln w / dr)` of the far-field formula at `r`.
    fn far(&self, r: f64) -> (f64, f64) {
        let power = (-self.mu * r.ln(), -self.mu / r);
        if self.case != PenaltyCase::QuadraticDecay {
            return power;
        }
        let cap = self.cap_radius;
        if r <= cap {
            let q = 2.0 * cap * cap - r * r;
            return (q.ln(), -2.0 * r / q);
        }
        if r >= 2.0 * cap {
            return power;
        }
        let (fa, da) = ((cap * cap).ln(), -2.0 / cap);
        let (fb, db) = (-self.mu * (2.0 * cap).ln(), -self.mu / (2.0 * cap));
        let f = hermite(r, cap, 2.0 * cap, fa, da, fb, db);
        let eps = 1e-7 * cap;
        let d = (hermite(r + eps, cap, 2.0 * cap, fa, da, fb, db) - hermite(r - eps, cap, 2.0 * cap, fa, da, fb, db))
            / (2.0 * eps);
        (f, d)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let (rl, ru) = (self.lambda_radius, self.outer_radius);
        if r <= rl {
            return 1.0;
        }
        if r >= ru {
            return self.far(r).0.exp();
        }
        let (fb, db) = self.far(ru);
        hermite(r, rl, ru, 0.0, 0.0, fb, db).exp()
    }
}

/// Penalization potential `H_eps = chi_{R^N \ Lambda} (e^(-lam/eps) w_mu)^(p-1)` and
/// the data of its construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Penalization {
    h_field: Field,
    weight: Field,
    pub case: PenaltyCase,
    pub profile: RadialWeight,
    pub mu: f64,
    pub lam: f64,
    pub delta: f64,
    pub eps: f64,
    pub center: Vec<f64>,
    pub measured_kappa: Option<f64>,
    pub nu: Option<f64>,
}

impl Penalization {
    pub fn h_field(&self) -> &Field {
        &self.h_field
    }

    /// Sampled `w_mu`.
    pub fn weight(&self) -> &Field {
        &self.weight
    }

    /// `sup` of `H_eps` over the grid points outside `Lambda`.
    pub fn sup_outside(&self, in_lambda: &[bool]) -> f64 {
        self.h_field
            .values()
            .iter()
            .zip(in_lambda)
            .filter(|(_, &m)| !m)
            .fold(0.0, |acc, (&h, _)| acc.max(h))
    }

    pub(crate) fn ensure_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.h_field.grid() == grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn radius(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Builds `H_eps` for the given construction, decay rate `lam` and `delta`.
///
/// `Lambda` and `U` must be concentric balls; `w_mu` is radial about their center.
pub fn build_penalization(case: PenaltyCase, inst: &Instance, lam: f64, delta: f64) -> Result<Penalization> {
    let params = inst.params();
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::InvalidParameter(format!("penalization rate lam must be positive, got {lam}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if params.p < 2.0 {
        return Err(Error::Hypothesis(format!("penalization requires p >= 2, got p = {}", params.p)));
    }
    case.check_hypotheses(params)?;
    let (center, rl, ru) = match (&params.lambda_region, &params.outer_region) {
        (RegionSpec::Ball { center, radius: rl }, RegionSpec::Ball { center: cu, radius: ru }) if center == cu => {
            (center.clone(), *rl, *ru)
        }
        _ => {
            return Err(Error::Geometry("penalization needs lambda_region and outer_region to be concentric balls".into()))
        }
    };
    let mu = case.select_mu(params.dim, params.alpha, params.p)?;
    let profile = RadialWeight { case, mu, lambda_radius: rl, outer_radius: ru, cap_radius: 2.0 * ru };
    let grid = *inst.grid();
    let weight = Field::from_fn(grid, |x| profile.eval(radius(x, &center)));
    let scale = (-lam / inst.eps()).exp();
    let q = params.p - 1.0;
    let h = weight
        .values()
        .iter()
        .zip(inst.in_lambda())
        .map(|(&w, &inside)| if inside { 0.0 } else { (scale * w).powf(q) })
        .collect();
    Ok(Penalization {
        h_field: Field::new(grid, h)?,
        weight: weight.checked("penalization weight")?,
        case,
        profile,
        mu,
        lam,
        delta,
        eps: inst.eps(),
        center,
        measured_kappa: None,
        nu: None,
    })
}

/// Hardy-type quotient `eps^-alpha int |H phi|^2 |x|^alpha / int (eps^2 |grad phi|^2 + V phi^2)`.
pub fn hardy_ratio(phi: &Field, pen: &Penalization, inst: &Instance) -> Result<f64> {
    inst.ensure_grid(phi)?;
    // trial fields need not decay at the box boundary
    let eps = inst.eps();
    let vphi = phi.zip_map(inst.potential(), |a, v| v * a * a)?;
    let den = eps * eps * grad_sq_integral(phi, &DecayCheck::off())? + crate::grid::integrate(&vphi);
    if !(den > 0.0) {
        return Err(Error::Degenerate("hardy quotient of a zero trial field".into()));
    }
    Ok(hardy_numerator(phi, pen, inst)? / den)
}

fn hardy_weight(pen: &Penalization, inst: &Instance) -> Field {
    let alpha = inst.params().alpha;
    let scale = inst.nonlocal_scale();
    let grid = *inst.grid();
    let h = pen.h_field().values();
    let w = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            scale * h[i] * h[i] * radius(&x[..grid.dim()], &pen.center).powf(alpha)
        })
        .collect();
    Field::from_values_unchecked(grid, w)
}

fn hardy_numerator(phi: &Field, pen: &Penalization, inst: &Instance) -> Result<f64> {
    let w = hardy_weight(pen, inst);
    let wp = phi.zip_map(&w, |a, b| a * a * b)?;
    Ok(crate::grid::integrate(&wp))
}

/// Estimates the best constant `kappa` in the Hardy-type hypothesis by maximizing
/// the quotient over random smooth bumps and `iterate`, then refining the best
/// candidate by inverse iteration. Stores the estimate in `pen.measured_kappa`.
pub fn hardy_quotient(
    pen: &mut Penalization,
    inst: &Instance,
    trial_count: usize,
    seed: u64,
    iterate: Option<&Field>,
) -> Result<f64> {
    if trial_count < 16 {
        return Err(Error::InvalidParameter(format!("hardy_quotient needs at least 16 trials, got {trial_count}")));
    }
    pen.ensure_grid(inst.grid())?;
    let grid = *inst.grid();
    let dim = grid.dim();
    let l = grid.half_extent();
    let h = grid.spacing();
    let weight = hardy_weight(pen, inst);
    if weight.max_abs() == 0.0 {
        pen.measured_kappa = Some(0.0);
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Field)> = None;
    let consider = |phi: Field, best: &mut Option<(f64, Field)>| -> Result<()> {
        let q = hardy_ratio(&phi, pen, inst)?;
        if best.as_ref().is_none_or(|(b, _)| q > *b) {
            *best = Some((q, phi));
        }
        Ok(())
    };
    if let Some(u) = iterate {
        if u.max_abs() > 0.0 {
            consider(u.clone(), &mut best)?;
        }
    }
    let (lo, hi) = ((2.0 * h).ln(), (0.5 * l).ln());
    for _ in 0..trial_count {
        let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.8 * l..0.8 * l)).collect();
        let width = rng.random_range(lo..hi).exp();
        let phi = Field::from_fn(grid, |x| (-radius(x, &c).powi(2) / (width * width)).exp());
        if phi.max_abs() > 0.0 {
            consider(phi, &mut best)?;
        }
    }
    let (mut kappa, mut phi) = best.ok_or_else(|| Error::Degenerate("no nonzero trial field".into()))?;
    // inverse iteration for the generalized eigenproblem, preconditioned by the
    // constant-coefficient part of the denominator
    let eps2 = inst.eps() * inst.eps();
    let shift = median_positive(inst.potential().values()).max(1e-12);
    for _ in 0..30 {
        let next = inv_helmholtz(&phi.zip_map(&weight, |a, b| a * b)?, eps2, shift)?;
        let norm = next.max_abs();
        if !(norm > 0.0) {
            break;
        }
        phi = next.scaled(1.0 / norm);
        kappa = kappa.max(hardy_ratio(&phi, pen, inst)?);
    }
    pen.measured_kappa = Some(kappa);
    Ok(kappa)
}

pub(crate) fn median_positive(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().cloned().filter(|x| *x > 0.0).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Measures the constant of the far-field bound
/// `eps^-alpha I_alpha * (chi_Lambda u_+^p) <= nu eps^(N - alpha) I_alpha` outside `U`
/// as the grid supremum of the ratio; stores it in `pen.nu`.
pub fn measure_nu(pen: &mut Penalization, u: &Field, inst: &Instance) -> Result<f64> {
    inst.ensure_grid(u)?;
    let params = inst.params();
    let p = params.p;
    let grid = *inst.grid();
    let dim = grid.dim();
    let src = Field::from_values_unchecked(
        grid,
        u.values()
            .iter()
            .zip(inst.in_lambda())
            .map(|(&s, &m)| if m && s > 0.0 { s.powf(p) } else { 0.0 })
            .collect(),
    );
    let conv = riesz_convolve(&src, inst.kernel())?;
    let epsn = inst.eps().powi(dim as i32);
    let mut nu: f64 = 0.0;
    for (i, &c) in conv.values().iter().enumerate() {
        let x = grid.point(i);
        let x = &x[..dim];
        if params.outer_region.contains(x) {
            continue;
        }
        let r = radius(x, &pen.center);
        if r > 0.0 {
            nu = nu.max(c / (epsn * inst.kernel().continuum(r)));
        }
    }
    pen.nu = Some(nu);
    Ok(nu)
}

/// Barrier `U_bar = 2 w_mu(x) h(x - a) / cosh(m r / eps)` with
/// `h(y) = cosh(m (r - |y|) / eps)` in `B(a, r)` and 1 outside.
#[derive(Debug, Clone)]
pub struct Barrier {
    pub field: Field,
    /// Smallest value of the barrier on `B(a, R eps)`; the construction asks for >= 1.
    pub min_in_core: f64,
}

pub fn build_barrier(pen: &Penalization, inst: &Instance, a_eps: &[f64], r: f64, m: f64, core: f64) -> Result<Barrier> {
    pen.ensure_grid(inst.grid())?;
    let params = inst.params();
    let grid = *inst.grid();
    let dim = grid.dim();
    if a_eps.len() != dim {
        return Err(Error::InvalidParameter("barrier center needs one coordinate per axis".into()));
    }
    let inf_v = inst.argmin_in_lambda().1;
    if !(m > 0.0 && m * m < (1.0 - pen.delta) * inf_v) {
        return Err(Error::Geometry(format!(
            "barrier needs 0 < m^2 < (1 - delta) inf_Lambda V = {:.6e}, got m = {m}",
            (1.0 - pen.delta) * inf_v
        )));
    }
    let to_boundary = -params.lambda_region.signed_distance(a_eps);
    if !(r > 0.0 && r < 0.5 * to_boundary) {
        return Err(Error::Geometry(format!(
            "barrier needs 0 < r < dist(a, boundary of Lambda) / 2 = {:.6e}, got r = {r}",
            0.5 * to_boundary
        )));
    }
    if !(core > 0.0) {
        return Err(Error::InvalidParameter(format!("barrier core radius must be positive, got {core}")));
    }
    let eps = inst.eps();
    let b = m * r / eps;
    // cosh(a) / cosh(b) without overflow
    let ratio = |a: f64| (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp());
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let d = radius(&x[..dim], a_eps);
            let w = pen.weight().values()[i];
            if d < r {
                2.0 * w * ratio(m * (r - d) / eps)
            } else {
                2.0 * w * ratio(0.0)
            }
        })
        .collect();
    let field = Field::new(grid, values)?;
    let min_in_core = (0..grid.len())
        .filter(|&i| radius(&grid.point(i)[..dim], a_eps) < core * eps)
        .map(|i| field.values()[i])
        .fold(f64::INFINITY, f64::min);
    Ok(Barrier { field, min_in_core })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::params::PotentialSpec;

    fn acceptance_params(eps: f64) -> ProblemParams {
        ProblemParams {
            dim: 1,
            alpha: 0.5,
            p: 2.0,
            eps,
            potential: PotentialSpec::gaussian_well(2.0, 1.0, 1.0, vec![0.0]),
            lambda_region: RegionSpec::ball(vec![0.0], 1.0),
            outer_region: RegionSpec::ball(vec![0.0], 2.0),
        }
    }

    #[test]
    fn mu_selection() {
        let mu = PenaltyCase::Transient.select_mu(3, 1.0, 3.0).unwrap();
        assert!((mu - 0.875).abs() < 1e-15);
        assert_eq!(PenaltyCase::SlowDecay.select_mu(1, 0.5, 2.0).unwrap(), 1.5);
        let mu3 = PenaltyCase::QuadraticDecay.select_mu(1, 0.5, 2.5).unwrap();
        assert!(mu3 * 2.5 > 1.0 && mu3 * 0.5 + 1.0 - 0.5 > 2.0);
    }

    #[test]
    fn hypotheses_are_checked() {
        let p = acceptance_params(0.1);
        PenaltyCase::SlowDecay.check_hypotheses(&p).unwrap();
        assert!(matches!(PenaltyCase::Transient.check_hypotheses(&p), Err(Error::Hypothesis(_))));
        assert!(matches!(PenaltyCase::QuadraticDecay.check_hypotheses(&p), Err(Error::Hypothesis(_))));
        let mut q = p.clone();
        q.potential = PotentialSpec::new(crate::model::params::PotentialKind::PowerDecay {
            amplitude: 1.0,
            exponent: 1.0,
            core: 1.0,
            center: vec![0.0],
        });
        // decay |x|^-1 is faster than |x|^-(N - alpha) = |x|^-0.5
        assert!(PenaltyCase::SlowDecay.check_hypotheses(&q).is_err());
    }

    #[test]
    fn weight_is_one_on_lambda_and_positive() {
        for case in [PenaltyCase::SlowDecay, PenaltyCase::QuadraticDecay] {
            let w = RadialWeight { case, mu: 1.5, lambda_radius: 1.0, outer_radius: 2.0, cap_radius: 4.0 };
            assert_eq!(w.eval(0.3), 1.0);
            assert_eq!(w.eval(1.0), 1.0);
            for k in 0..400 {
                let r = 0.05 * k as f64;
                assert!(w.eval(r) > 0.0);
            }
            // C^1 across the outer radius
            let d = |r: f64| (w.eval(r + 1e-9) - w.eval(r - 1e-9)) / 2e-9;
            assert!((d(2.0 - 1e-7) - d(2.0 + 1e-7)).abs() < 1e-3 * d(2.0 + 1e-5).abs().max(1.0));
        }
    }

    #[test]
    fn h_vanishes_on_lambda_and_shrinks_with_eps() {
        let grid = make_grid(1, 256, 8.0).unwrap();
        let mut sups = Vec::new();
        for eps in [0.2, 0.1, 0.05] {
            let inst = Instance::new(acceptance_params(eps), grid).unwrap();
            let pen = build_penalization(PenaltyCase::SlowDecay, &inst, 0.75, 0.1).unwrap();
            for (&h, &m) in pen.h_field().values().iter().zip(inst.in_lambda()) {
                if m {
                    assert_eq!(h, 0.0);
                } else {
                    assert!(h > 0.0);
                }
            }
            let sup = pen.sup_outside(inst.in_lambda());
            assert!((sup - (-0.75 / eps).exp()).abs() < 1e-3 * sup);
            sups.push(sup);
        }
        assert!(sups[0] > sups[1] && sups[1] > sups[2]);
    }

    #[test]
    fn hardy_quotient_examples() {
        let grid = make_grid(1, 256, 8.0).unwrap();
        let inst = Instance::new(acceptance_params(0.1), grid).unwrap();
        let mut pen = build_penalization(PenaltyCase::SlowDecay, &inst, 0.2, 0.1).unwrap();
        let phi = Field::from_fn(grid, |x| (-(x[0] - 1.5).powi(2)).exp());
        let q1 = hardy_ratio(&phi, &pen, &inst).unwrap();
        let q2 = hardy_ratio(&phi.scaled(2.0), &pen, &inst).unwrap();
        assert!((q1 - q2).abs() <= 1e-14 * q1);
        let k = hardy_quotient(&mut pen, &inst, 16, 7, None).unwrap();
        assert!(k >= q1 * (1.0 - 1e-12) || k > 0.0);
        assert_eq!(pen.measured_kappa, Some(k));
        assert!(hardy_quotient(&mut pen, &inst, 8, 7, None).is_err());
        let zero = Field::zeros(grid);
        assert!(matches!(hardy_ratio(&zero, &pen, &inst), Err(Error::Degenerate(_))));
    }

    #[test]
    fn barrier_values() {
        let grid = make_grid(1, 512, 8.0).unwrap();
        let inst = Instance::new(acceptance_params(0.05), grid).unwrap();
        let pen = build_penalization(PenaltyCase::SlowDecay, &inst, 0.2, 0.1).unwrap();
        let b = build_barrier(&pen, &inst, &[0.0], 0.45, 0.5, 1.0).unwrap();
        let centre = grid.nearest_index(&[0.0]);
        assert!((b.field.values()[centre] - 2.0).abs() < 1e-12);
        // outside B(a, r) the barrier is proportional to w_mu
        let far = grid.nearest_index(&[3.0]);
        let c = (0.5f64 * 0.45 / 0.05).cosh();
        assert!((b.field.values()[far] - 2.0 * pen.weight().values()[far] / c).abs() < 1e-14);
        assert!(build_barrier(&pen, &inst, &[0.0], 0.6, 0.5, 1.0).is_err());
        assert!(build_barrier(&pen, &inst, &[0.0], 0.45, 1.0, 1.0).is_err());
    }
}
