use crate::error::{Error, Result};
use crate::grid::{
    grad_sq_integral, laplacian, riesz_bilinear, riesz_convolve, DecayCheck, Field, GridSpec, RieszKernel,
};

use super::params::ProblemParams;
use super::penalization::Penalization;

/// Nonlinearity `g(x, s)`: `s_+^(p-1)` in `Lambda`, `min(s_+^(p-1), H(x))` outside.
pub fn penalized_g(s: f64, inside: bool, h: f64, p: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let free = s.powf(p - 1.0);
    if inside {
        free
    } else {
        free.min(h)
    }
}

/// Primitive `G(x, s) = int_0^s g(x, t) dt`.
#[allow(non_snake_case)]
pub fn penalized_G(s: f64, inside: bool, h: f64, p: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let free = s.powf(p) / p;
    if inside || h.is_infinite() {
        return free;
    }
    let crossover = h.powf(1.0 / (p - 1.0));
    if s <= crossover {
        free
    } else {
        h * s - (1.0 - 1.0 / p) * h.powf(p / (p - 1.0))
    }
}

/// The translation-invariant limiting problem `-Delta v + lambda v = (I_alpha * v_+^p) v_+^(p-1)`.
#[derive(Debug, Clone)]
pub struct LimitingProblem {
    pub p: f64,
    pub kernel: RieszKernel,
    pub decay: DecayCheck,
}

/// `K = int |grad v|^2`, `M = int v^2`, `D = int (I_alpha * v_+^p) v_+^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingParts {
    pub grad: f64,
    pub mass: f64,
    pub nonlocal: f64,
}

impl LimitingParts {
    pub fn energy(&self, lambda: f64, p: f64) -> f64 {
        0.5 * (self.grad + lambda * self.mass) - self.nonlocal / (2.0 * p)
    }
}

impl LimitingProblem {
    pub fn new(grid: GridSpec, alpha: f64, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("limiting problem needs p > 1, got {p}")));
        }
        Ok(Self { p, kernel: RieszKernel::new(grid, alpha)?, decay: DecayCheck::default() })
    }

    pub fn with_decay(mut self, decay: DecayCheck) -> Self {
        self.decay = decay;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        self.kernel.grid()
    }

    pub fn alpha(&self) -> f64 {
        self.kernel.alpha()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    fn power(&self, v: &Field) -> Field {
        let p = self.p;
        v.map(|s| if s > 0.0 { s.powf(p) } else { 0.0 })
    }

    pub fn parts(&self, v: &Field) -> Result<LimitingParts> {
        if v.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let grad = grad_sq_integral(v, &self.decay)?;
        let mass = v.dot(v)?;
        let vp = self.power(v);
        let nonlocal = riesz_bilinear(&vp, &vp, &self.kernel)?;
        Ok(LimitingParts { grad, mass, nonlocal })
    }
}

/// `I_lambda(v) = 1/2 int (|grad v|^2 + lambda v^2) - 1/(2p) int (I_alpha * v_+^p) v_+^p`.
pub fn limiting_energy(v: &Field, lambda: f64, problem: &LimitingProblem) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(problem.parts(v)?.energy(lambda, problem.p))
}

/// Strong-form residual `-Delta v + lambda v - (I_alpha * v_+^p) v_+^(p-1)`.
pub fn limiting_residual(v: &Field, lambda: f64, problem: &LimitingProblem) -> Result<Field> {
    check_lambda(lambda)?;
    if v.grid() != problem.grid() {
        return Err(Error::GridMismatch);
    }
    problem.decay.check(v)?;
    let p = problem.p;
    let conv = riesz_convolve(&problem.power(v), &problem.kernel)?;
    let lap = laplacian(v);
    let values = v
        .values()
        .iter()
        .zip(lap.values())
        .zip(conv.values())
        .map(|((&s, &l), &c)| -l + lambda * s - if s > 0.0 { c * s.powf(p - 1.0) } else { 0.0 })
        .collect();
    Field::new(*v.grid(), values)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")))
    }
}

/// A problem instance discretized on a grid: sampled potential, the `Lambda`
/// mask and the Riesz kernel.
#[derive(Debug, Clone)]
pub struct Instance {
    params: ProblemParams,
    kernel: RieszKernel,
    potential: Field,
    in_lambda: Vec<bool>,
    decay: DecayCheck,
}

impl Instance {
    pub fn new(params: ProblemParams, grid: GridSpec) -> Result<Self> {
        params.validate_on(&grid)?;
        let kernel = RieszKernel::new(grid, params.alpha)?;
        let potential = params.potential.sample(&grid).checked("potential")?;
        if potential.min() < 0.0 {
            return Err(Error::InvalidParameter("potential takes negative values on the grid".into()));
        }
        let in_lambda = params.lambda_region.mask(&grid);
        if !in_lambda.iter().any(|&b| b) {
            return Err(Error::Geometry("lambda_region contains no grid point".into()));
        }
        Ok(Self { params, kernel, potential, in_lambda, decay: DecayCheck::default() })
    }

    pub fn with_decay(mut self, decay: DecayCheck) -> Self {
        self.decay = decay;
        self
    }

    /// Same discretization at another `eps` (the kernel is reused).
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let params = self.params.with_eps(eps);
        params.validate()?;
        Ok(Self { params, ..self.clone() })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        self.kernel.grid()
    }

    pub fn kernel(&self) -> &RieszKernel {
        &self.kernel
    }

    pub fn potential(&self) -> &Field {
        &self.potential
    }

    pub fn in_lambda(&self) -> &[bool] {
        &self.in_lambda
    }

    pub fn decay(&self) -> &DecayCheck {
        &self.decay
    }

    pub fn eps(&self) -> f64 {
        self.params.eps
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }

    /// Prefactor `eps^-alpha` of the nonlocal term.
    pub fn nonlocal_scale(&self) -> f64 {
        self.params.eps.powf(-self.params.alpha)
    }

    /// `int eps^2 |grad u|^2 + V u^2`, the squared `eps`-norm.
    pub fn eps_norm_sq(&self, u: &Field) -> Result<f64> {
        self.ensure_grid(u)?;
        let eps = self.params.eps;
        let grad = grad_sq_integral(u, &self.decay)?;
        let vu = u.zip_map(&self.potential, |a, v| v * a * a)?;
        Ok(eps * eps * grad + crate::grid::integrate(&vu))
    }

    /// Grid minimum of `V` over `Lambda` and its location (lowest index on ties).
    pub fn argmin_in_lambda(&self) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, (&v, &m)) in self.potential.values().iter().zip(&self.in_lambda).enumerate() {
            if m && v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub(crate) fn ensure_grid(&self, u: &Field) -> Result<()> {
        if u.grid() == self.grid() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Pointwise `(G(x, u), g(x, u))`; `pen = None` is the unpenalized `(|u|^p / p, |u|^(p-2) u)`.
    pub(crate) fn nonlinear_parts(&self, u: &Field, pen: Option<&Penalization>) -> Result<(Field, Field)> {
        self.ensure_grid(u)?;
        let p = self.params.p;
        let grid = *self.grid();
        let n = u.values().len();
        let mut big = Vec::with_capacity(n);
        let mut small = Vec::with_capacity(n);
        match pen {
            None => {
                for &s in u.values() {
                    let a = s.abs();
                    big.push(a.powf(p) / p);
                    small.push(if a > 0.0 { a.powf(p - 2.0) * s } else { 0.0 });
                }
            }
            Some(pen) => {
                pen.ensure_grid(&grid)?;
                for ((&s, &inside), &h) in u.values().iter().zip(&self.in_lambda).zip(pen.h_field().values()) {
                    big.push(penalized_G(s, inside, h, p));
                    small.push(penalized_g(s, inside, h, p));
                }
            }
        }
        Ok((Field::from_values_unchecked(grid, big), Field::from_values_unchecked(grid, small)))
    }
}

fn energy_with(u: &Field, pen: Option<&Penalization>, inst: &Instance) -> Result<f64> {
    let quad = inst.eps_norm_sq(u)?;
    let (big, _) = inst.nonlinear_parts(u, pen)?;
    let nonlocal = riesz_bilinear(&big, &big, inst.kernel())?;
    let p = inst.p();
    Ok(0.5 * quad - 0.5 * p * inst.nonlocal_scale() * nonlocal)
}

/// `J_eps(u) = 1/2 int (eps^2 |grad u|^2 + V u^2) - p/(2 eps^alpha) int (I_alpha * G(u)) G(u)`.
pub fn penalized_energy(u: &Field, pen: &Penalization, inst: &Instance) -> Result<f64> {
    energy_with(u, Some(pen), inst)
}

/// `E_eps(u) = 1/2 int (eps^2 |grad u|^2 + V u^2) - 1/(2p eps^alpha) int (I_alpha * |u|^p) |u|^p`.
pub fn original_energy(u: &Field, inst: &Instance) -> Result<f64> {
    energy_with(u, None, inst)
}

/// Strong-form residual `-eps^2 Delta u + V u - p eps^-alpha (I_alpha * G(u)) g(u)`;
/// with `pen = None` the unpenalized equation.
pub fn euler_lagrange_residual(u: &Field, pen: Option<&Penalization>, inst: &Instance) -> Result<Field> {
    inst.ensure_grid(u)?;
    inst.decay().check(u)?;
    let eps2 = inst.eps() * inst.eps();
    let (big, small) = inst.nonlinear_parts(u, pen)?;
    let conv = riesz_convolve(&big, inst.kernel())?;
    let coupling = inst.p() * inst.nonlocal_scale();
    let lap = laplacian(u);
    let values = u
        .values()
        .iter()
        .zip(lap.values())
        .zip(inst.potential().values())
        .zip(conv.values().iter().zip(small.values()))
        .map(|(((&s, &l), &v), (&c, &g))| -eps2 * l + v * s - coupling * c * g)
        .collect();
    Field::new(*u.grid(), values)
}
