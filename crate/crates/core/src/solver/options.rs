use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;

/// Descent controls shared by the limiting and penalized solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once `||R||_2 / ||u||_2` drops below this.
    pub residual_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    /// Shift of the `(-eps^2 Delta + shift)^-1` preconditioner; `None` picks
    /// `lambda` for the limiting problem and the median of `V` over `Lambda` otherwise.
    pub precondition_shift: Option<f64>,
    pub strict_boundary: bool,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            residual_tol: 1e-8,
            step_init: 1.0,
            armijo_c: 1e-4,
            precondition_shift: None,
            strict_boundary: false,
            seed: 42,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("solver option {what}")));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return bad("residual_tol must be positive");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if let Some(s) = self.precondition_shift {
            if !(s > 0.0 && s.is_finite()) {
                return bad("precondition_shift must be positive");
            }
        }
        Ok(())
    }
}

/// One accepted iterate: reduced energy and relative residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    /// Nonnegative solution.
    pub field: Field,
    pub energy: f64,
    pub residual_rel: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
    /// `J_eps(u_eps)` for penalized solves.
    pub critical_value: Option<f64>,
    /// Minimum of the iterate before the positive part was taken.
    pub min_before_clamp: f64,
}
