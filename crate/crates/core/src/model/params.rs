use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::special::{hls_weighted_constant, riesz_normalization};

fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

fn check_point(name: &str, c: &[f64], dim: usize) -> Result<()> {
    if c.len() != dim {
        return Err(Error::InvalidParameter(format!("{name} has {} coordinates, expected {dim}", c.len())));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} has non-finite coordinates")));
    }
    Ok(())
}

/// Multiplicative modifier `min(1, (|x - center| / radius)^exponent)` that makes
/// the potential vanish at `center` at a prescribed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VanishingZero {
    pub center: Vec<f64>,
    pub radius: f64,
    pub exponent: f64,
}

/// Closed-form external potential `V >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialKind {
    /// `V = value`.
    Constant { value: f64 },
    /// `V = floor - depth exp(-|x - center|^2 / width^2)`.
    GaussianWell { floor: f64, depth: f64, width: f64, center: Vec<f64> },
    /// `V = amplitude (1 + |x - center|^2 / core^2)^(-exponent / 2)`.
    PowerDecay { amplitude: f64, exponent: f64, core: f64, center: Vec<f64> },
    /// `V = amplitude (1 - |x - center|^2 / radius^2)_+^2`.
    CompactSupport { amplitude: f64, radius: f64, center: Vec<f64> },
    /// Radial table `r -> V`, linear in between, constant past the last radius.
    /// Continuity and nonnegativity of the table are the caller's responsibility.
    CustomTable { center: Vec<f64>, radii: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanishing: Option<VanishingZero>,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind) -> Self {
        Self { kind, vanishing: None }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(PotentialKind::Constant { value })
    }

    pub fn gaussian_well(floor: f64, depth: f64, width: f64, center: Vec<f64>) -> Self {
        Self::new(PotentialKind::GaussianWell { floor, depth, width, center })
    }

    pub fn with_vanishing(mut self, zero: VanishingZero) -> Self {
        self.vanishing = Some(zero);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("potential {name} must be positive, got {v}")))
            }
        };
        match &self.kind {
            PotentialKind::Constant { value } => {
                if !(*value >= 0.0 && value.is_finite()) {
                    return Err(Error::InvalidParameter(format!("constant potential must be >= 0, got {value}")));
                }
            }
            PotentialKind::GaussianWell { floor, depth, width, center } => {
                check_point("well center", center, dim)?;
                positive("width", *width)?;
                if !(*depth >= 0.0 && floor - depth >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian well needs 0 <= depth <= floor (floor {floor}, depth {depth})"
                    )));
                }
            }
            PotentialKind::PowerDecay { amplitude, exponent, core, center } => {
                check_point("decay center", center, dim)?;
                positive("amplitude", *amplitude)?;
                positive("core", *core)?;
                if !(*exponent >= 0.0 && exponent.is_finite()) {
                    return Err(Error::InvalidParameter(format!("decay exponent must be >= 0, got {exponent}")));
                }
            }
            PotentialKind::CompactSupport { amplitude, radius, center } => {
                check_point("support center", center, dim)?;
                positive("amplitude", *amplitude)?;
                positive("radius", *radius)?;
            }
            PotentialKind::CustomTable { center, radii, values } => {
                check_point("table center", center, dim)?;
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::InvalidParameter("potential table needs matching nonempty radii and values".into()));
                }
                if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
                    return Err(Error::InvalidParameter("potential table radii must increase from >= 0".into()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidParameter("potential table values must be finite and >= 0".into()));
                }
            }
        }
        if let Some(z) = &self.vanishing {
            check_point("vanishing center", &z.center, dim)?;
            positive("vanishing radius", z.radius)?;
            positive("vanishing exponent", z.exponent)?;
        }
        Ok(())
    }

    fn base(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Constant { value } => *value,
            PotentialKind::GaussianWell { floor, depth, width, center } => {
                let r = dist(x, center);
                floor - depth * (-(r * r) / (width * width)).exp()
            }
            PotentialKind::PowerDecay { amplitude, exponent, core, center } => {
                let r = dist(x, center);
                amplitude * (1.0 + r * r / (core * core)).powf(-exponent / 2.0)
            }
            PotentialKind::CompactSupport { amplitude, radius, center } => {
                let t = (1.0 - dist(x, center).powi(2) / (radius * radius)).max(0.0);
                amplitude * t * t
            }
            PotentialKind::CustomTable { center, radii, values } => {
                let r = dist(x, center);
                let k = radii.partition_point(|&q| q <= r);
                if k == 0 {
                    values[0]
                } else if k == radii.len() {
                    values[k - 1]
                } else {
                    let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                    values[k - 1] + t * (values[k] - values[k - 1])
                }
            }
        }
    }

    /// `V(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = self.base(x);
        match &self.vanishing {
            Some(z) => v * (dist(x, &z.center) / z.radius).powf(z.exponent).min(1.0),
            None => v,
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Field {
        Field::from_fn(*grid, |x| self.eval(x))
    }

    /// Exponent `gamma` of the slowest admissible decay: `liminf V |x|^gamma > 0`
    /// holds exactly for `gamma >= decay_exponent()`. `None` when `V` is
    /// eventually zero.
    pub fn decay_exponent(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Constant { value } => (*value > 0.0).then_some(0.0),
            PotentialKind::GaussianWell { floor, .. } => (*floor > 0.0).then_some(0.0),
            PotentialKind::PowerDecay { exponent, .. } => Some(*exponent),
            PotentialKind::CompactSupport { .. } => None,
            PotentialKind::CustomTable { values, .. } => (*values.last().unwrap_or(&0.0) > 0.0).then_some(0.0),
        }
    }

    /// True when `V > 0` at every point of `R^N`.
    pub fn is_everywhere_positive(&self) -> bool {
        if self.vanishing.is_some() {
            return false;
        }
        match &self.kind {
            PotentialKind::Constant { value } => *value > 0.0,
            PotentialKind::GaussianWell { floor, depth, .. } => floor - depth > 0.0,
            PotentialKind::PowerDecay { .. } => true,
            PotentialKind::CompactSupport { .. } => false,
            PotentialKind::CustomTable { values, .. } => values.iter().all(|&v| v > 0.0),
        }
    }
}

/// Ball or axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { center: Vec<f64>, half_widths: Vec<f64> },
}

impl RegionSpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        RegionSpec::Ball { center, radius }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            RegionSpec::Ball { center, .. } | RegionSpec::Box { center, .. } => center,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        check_point("region center", self.center(), dim)?;
        let sizes: &[f64] = match self {
            RegionSpec::Ball { radius, .. } => std::slice::from_ref(radius),
            RegionSpec::Box { half_widths, .. } => {
                if half_widths.len() != dim {
                    return Err(Error::InvalidParameter("box region needs one half width per axis".into()));
                }
                half_widths
            }
        };
        if sizes.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter("region sizes must be positive".into()));
        }
        Ok(())
    }

    /// Signed distance to the boundary: negative inside (box: Chebyshev-type
    /// distance to the faces).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            RegionSpec::Ball { center, radius } => dist(x, center) - radius,
            RegionSpec::Box { center, half_widths } => x
                .iter()
                .zip(center)
                .zip(half_widths)
                .map(|((xi, ci), w)| (xi - ci).abs() - w)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Open region membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) < 0.0
    }

    /// Grid mask of the region.
    pub fn mask(&self, grid: &GridSpec) -> Vec<bool> {
        (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                self.contains(&p[..grid.dim()])
            })
            .collect()
    }

    /// Largest distance from the center to a point of the region.
    pub fn outer_radius(&self) -> f64 {
        match self {
            RegionSpec::Ball { radius, .. } => *radius,
            RegionSpec::Box { half_widths, .. } => half_widths.iter().map(|w| w * w).sum::<f64>().sqrt(),
        }
    }

    /// Smallest distance from the center to the boundary.
    pub fn inner_radius(&self) -> f64 {
        match self {
            RegionSpec::Ball { radius, .. } => *radius,
            RegionSpec::Box { half_widths, .. } => half_widths.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Why the limiting problem does or does not have a ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeReason {
    Solvable,
    /// `p <= (N + alpha) / N`.
    AtOrBelowLowerCritical,
    /// `p >= (N + alpha) / (N - 2)`.
    AtOrAboveUpperCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub limiting_solvable: bool,
    pub reason: RegimeReason,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.reason {
            RegimeReason::Solvable => write!(f, "solvable"),
            RegimeReason::AtOrBelowLowerCritical => write!(f, "unsolvable: p <= (N + alpha) / N"),
            RegimeReason::AtOrAboveUpperCritical => write!(f, "unsolvable: p >= (N + alpha) / (N - 2)"),
        }
    }
}

/// Existence regime of the limiting problem: a ground state exists iff
/// `(N + alpha) / N < p < (N + alpha) / (N - 2)_+`.
pub fn validate_params(dim: usize, alpha: f64, p: f64) -> Result<Regime> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    let n = dim as f64;
    if !(alpha > 0.0 && alpha < n) {
        return Err(Error::AlphaOutOfRange { alpha, dim });
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent p must be >= 1, got {p}")));
    }
    let reason = if p * n <= n + alpha {
        RegimeReason::AtOrBelowLowerCritical
    } else if dim > 2 && p * (n - 2.0) >= n + alpha {
        RegimeReason::AtOrAboveUpperCritical
    } else {
        RegimeReason::Solvable
    };
    Ok(Regime { limiting_solvable: reason == RegimeReason::Solvable, reason })
}

/// Sharp weighted HLS constant and Riesz normalization for `(N, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlsConstants {
    pub c_alpha: f64,
    pub a_alpha: f64,
}

impl HlsConstants {
    pub fn new(dim: usize, alpha: f64) -> Self {
        Self { c_alpha: hls_weighted_constant(dim, alpha), a_alpha: riesz_normalization(dim, alpha) }
    }
}

/// One Choquard problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub alpha: f64,
    pub p: f64,
    pub eps: f64,
    pub potential: PotentialSpec,
    pub lambda_region: RegionSpec,
    pub outer_region: RegionSpec,
}

impl ProblemParams {
    /// Parameter checks that do not depend on a grid.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidDimension(self.dim));
        }
        validate_params(self.dim, self.alpha, self.p)?;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {}", self.eps)));
        }
        self.potential.validate(self.dim)?;
        self.lambda_region.validate(self.dim)?;
        self.outer_region.validate(self.dim)?;
        Ok(())
    }

    /// Grid-dependent checks: both regions fit in the box with a two-cell margin
    /// and `Lambda` sits inside `U` with at least one cell to spare.
    pub fn validate_on(&self, grid: &GridSpec) -> Result<()> {
        self.validate()?;
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch);
        }
        let h = grid.spacing();
        let l = grid.half_extent();
        for (name, region) in [("lambda_region", &self.lambda_region), ("outer_region", &self.outer_region)] {
            let c = region.center();
            let reach = match region {
                RegionSpec::Ball { radius, .. } => vec![*radius; self.dim],
                RegionSpec::Box { half_widths, .. } => half_widths.clone(),
            };
            let inside = (0..self.dim).all(|a| c[a] - reach[a] >= -l + 2.0 * h && c[a] + reach[a] <= l - 2.0 * h);
            if !inside {
                return Err(Error::Geometry(format!("{name} does not fit in the box with a two-cell margin")));
            }
        }
        let margin = self.lambda_margin();
        if !(margin >= h) {
            return Err(Error::Geometry(format!(
                "closure of lambda_region must lie inside outer_region (margin {margin:.3e} < one cell {h:.3e})"
            )));
        }
        Ok(())
    }

    /// Distance between the boundary of `Lambda` and the boundary of `U`
    /// (negative when `Lambda` is not contained in `U`).
    pub fn lambda_margin(&self) -> f64 {
        let dc = dist(self.lambda_region.center(), self.outer_region.center());
        match (&self.lambda_region, &self.outer_region) {
            (_, RegionSpec::Ball { radius, .. }) => radius - dc - self.lambda_region.outer_radius(),
            (RegionSpec::Ball { center, radius }, RegionSpec::Box { center: cu, half_widths }) => (0..self.dim)
                .map(|a| half_widths[a] - (center[a] - cu[a]).abs() - radius)
                .fold(f64::INFINITY, f64::min),
            (RegionSpec::Box { center, half_widths: wl }, RegionSpec::Box { center: cu, half_widths: wu }) => (0..self.dim)
                .map(|a| wu[a] - (center[a] - cu[a]).abs() - wl[a])
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn hls(&self) -> HlsConstants {
        HlsConstants::new(self.dim, self.alpha)
    }

    pub fn regime(&self) -> Result<Regime> {
        validate_params(self.dim, self.alpha, self.p)
    }

    /// Copy with a different `eps`.
    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn regime_examples() {
        assert!(validate_params(3, 2.0, 2.0).unwrap().limiting_solvable);
        let r = validate_params(5, 1.0, 2.0).unwrap();
        assert_eq!(r.reason, RegimeReason::AtOrAboveUpperCritical);
        let r = validate_params(3, 2.0, 5.0 / 3.0).unwrap();
        assert_eq!(r.reason, RegimeReason::AtOrBelowLowerCritical);
        assert!(validate_params(1, 0.5, 2.0).unwrap().limiting_solvable);
        assert!(validate_params(2, 1.0, 100.0).unwrap().limiting_solvable);
        assert_eq!(validate_params(3, 3.0, 2.0), Err(Error::AlphaOutOfRange { alpha: 3.0, dim: 3 }));
    }

    #[test]
    fn p_two_reduces_to_alpha_above_n_minus_four() {
        for dim in 1..=7usize {
            for k in 1..40 {
                let alpha = dim as f64 * k as f64 / 40.0;
                let r = validate_params(dim, alpha, 2.0).unwrap();
                assert_eq!(r.limiting_solvable, alpha > dim as f64 - 4.0, "N={dim} alpha={alpha}");
            }
        }
    }

    #[test]
    fn hls_constants() {
        let c = HlsConstants::new(3, 2.0);
        assert_relative_eq!(c.c_alpha, 4.0, max_relative = 1e-15);
        assert_relative_eq!(c.a_alpha, 1.0 / (4.0 * std::f64::consts::PI), max_relative = 1e-15);
    }

    #[test]
    fn well_potential_is_a_well() {
        let v = PotentialSpec::gaussian_well(2.0, 1.0, 1.0, vec![0.0]);
        assert_eq!(v.eval(&[0.0]), 1.0);
        assert!(v.eval(&[1.0]) > v.eval(&[0.5]));
        let g = crate::grid::make_grid(1, 256, 8.0).unwrap();
        let lam = RegionSpec::ball(vec![0.0], 1.0);
        let s = v.sample(&g);
        let mask = lam.mask(&g);
        let inf_in = s.values().iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
        let inf_bd = v.eval(&[1.0]).min(v.eval(&[-1.0]));
        assert!(0.0 < inf_in && inf_in < inf_bd);
        assert!(s.min() >= 0.0);
    }

    #[test]
    fn vanishing_modifier_hits_zero() {
        let v = PotentialSpec::gaussian_well(2.0, 1.0, 1.0, vec![0.0])
            .with_vanishing(VanishingZero { center: vec![3.0], radius: 1.0, exponent: 2.0 });
        assert_eq!(v.eval(&[3.0]), 0.0);
        assert_relative_eq!(v.eval(&[3.5]), 0.25 * (2.0 - (-12.25f64).exp()));
        assert_eq!(v.eval(&[0.0]), 1.0);
        assert!(!v.is_everywhere_positive());
    }

    #[test]
    fn table_interpolates() {
        let v = PotentialSpec::new(PotentialKind::CustomTable {
            center: vec![0.0, 0.0],
            radii: vec![0.0, 1.0, 2.0],
            values: vec![1.0, 2.0, 4.0],
        });
        v.validate(2).unwrap();
        assert_relative_eq!(v.eval(&[0.5, 0.0]), 1.5);
        assert_relative_eq!(v.eval(&[0.0, 10.0]), 4.0);
    }

    #[test]
    fn region_margin_and_grid_fit() {
        let params = ProblemParams {
            dim: 1,
            alpha: 0.5,
            p: 2.0,
            eps: 0.1,
            potential: PotentialSpec::constant(1.0),
            lambda_region: RegionSpec::ball(vec![0.0], 1.0),
            outer_region: RegionSpec::ball(vec![0.0], 2.0),
        };
        assert_relative_eq!(params.lambda_margin(), 1.0);
        let g = crate::grid::make_grid(1, 64, 4.0).unwrap();
        params.validate_on(&g).unwrap();
        let tight = crate::grid::make_grid(1, 64, 2.1).unwrap();
        assert!(matches!(params.validate_on(&tight), Err(Error::Geometry(_))));
        let mut bad = params.clone();
        bad.outer_region = RegionSpec::ball(vec![0.0], 1.0);
        assert!(matches!(bad.validate_on(&g), Err(Error::Geometry(_))));
    }
}
