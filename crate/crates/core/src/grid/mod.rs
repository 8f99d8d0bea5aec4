//! Uniform tensor grids on `[-L, L)^N`, sampled fields, quadrature, Fourier
//! multipliers and the free-space Riesz convolution.

mod fft;
mod resample;
mod riesz;
mod snapshot;

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use fft::CubicFft;
pub use resample::{resample_affine, spectral_tail};
pub use riesz::{riesz_bilinear, riesz_convolve, riesz_convolve_pair, RieszKernel};
pub use snapshot::{encode_payload, read_snapshot, write_snapshot, SnapshotHeader};

/// Uniform grid with `n` points per axis on `[-L, L)^N`; point `i` sits at `-L + i h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    half_extent: f64,
}

/// Validated grid constructor.
pub fn make_grid(dim: usize, points_per_axis: usize, half_extent: f64) -> Result<GridSpec> {
    GridSpec::new(dim, points_per_axis, half_extent)
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, half_extent: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::NonPositiveExtent(half_extent));
        }
        Ok(Self { dim, n, half_extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    /// Volume of one cell, `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing()
    }

    /// Per-axis indices of flat index `idx` (row-major, last axis fastest).
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        multi.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical position of flat index `idx`; unused axes are zero.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.unravel(idx);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(m[axis]);
        }
        x
    }

    /// Flat index of the grid point nearest to `x` (clamped to the box).
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let h = self.spacing();
        let mut multi = [0usize; 3];
        for axis in 0..self.dim {
            let k = ((x[axis] + self.half_extent) / h).round();
            multi[axis] = k.clamp(0.0, (self.n - 1) as f64) as usize;
        }
        self.ravel(&multi[..self.dim])
    }

    /// Angular frequency of FFT slot `k` on the periodic box of length `2L`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * fft::signed_index(k, self.n) as f64 / (2.0 * self.half_extent)
    }

    /// `|xi|^2` for every FFT slot, row-major.
    pub fn wavenumber_sq(&self) -> Vec<f64> {
        let k1: Vec<f64> = (0..self.n).map(|k| self.wavenumber(k).powi(2)).collect();
        (0..self.len())
            .map(|idx| {
                let m = self.unravel(idx);
                (0..self.dim).map(|a| k1[m[a]]).sum()
            })
            .collect()
    }

    /// True when `idx` lies within `width` cells of the box boundary.
    pub fn in_boundary_layer(&self, idx: usize, width: usize) -> bool {
        let m = self.unravel(idx);
        (0..self.dim).any(|a| m[a] < width || m[a] + width >= self.n)
    }
}

/// Real scalar function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Field::new"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at every grid point; `f` receives the first `dim` coordinates.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|idx| {
                let x = grid.point(idx);
                f(&x[..dim])
            })
            .collect();
        Self { grid, values }
    }

    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_values_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field::from_values_unchecked(self.grid, values))
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn positive_part(&self) -> Field {
        self.map(|v| v.max(0.0))
    }

    /// `int f g` by the rectangle rule.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let prods: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(self.grid.cell_volume() * pairwise_sum(&prods))
    }

    /// Continuum L2 norm `(int f^2)^(1/2)`.
    pub fn norm_l2(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (self.grid.cell_volume() * pairwise_sum(&sq)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest value; the lowest row-major index wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn checked(self, what: &'static str) -> Result<Field> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }
}

/// Sum with pairwise (cascade) reduction; deterministic and independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 32;
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `h^N * sum(values)`.
pub fn integrate(f: &Field) -> f64 {
    f.grid.cell_volume() * pairwise_sum(&f.values)
}

/// How to react when a field is not small near the box boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    /// Allowed ratio of the boundary-layer maximum to the global maximum.
    pub threshold: f64,
    /// Number of cells forming the boundary layer.
    pub layer: usize,
    /// Escalate the warning to an error.
    pub strict: bool,
}

impl Default for DecayCheck {
    fn default() -> Self {
        Self { threshold: 1e-5, layer: 2, strict: false }
    }
}

impl DecayCheck {
    pub fn strict(strict: bool) -> Self {
        Self { strict, ..Self::default() }
    }

    /// Never warns; used inside iterations where the final iterate is checked instead.
    pub fn off() -> Self {
        Self { threshold: f64::INFINITY, layer: 0, strict: false }
    }

    /// Ratio of the boundary-layer maximum to the global maximum of `|f|`.
    pub fn boundary_ratio(&self, f: &Field) -> f64 {
        let total = f.max_abs();
        if total == 0.0 {
            return 0.0;
        }
        let edge = f
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| f.grid.in_boundary_layer(*i, self.layer))
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        edge / total
    }

    pub fn check(&self, f: &Field) -> Result<()> {
        if self.threshold.is_infinite() {
            return Ok(());
        }
        let ratio = self.boundary_ratio(f);
        if ratio > self.threshold {
            if self.strict {
                return Err(Error::BoundaryDecay { ratio, threshold: self.threshold });
            }
            log::warn!("field not decayed at box boundary: ratio {ratio:.3e} > {:.3e}", self.threshold);
        }
        Ok(())
    }
}

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Applies a real multiplier `m(|xi|^2)` on the periodic box.
pub(crate) fn apply_multiplier(f: &Field, m: impl Fn(f64) -> f64) -> Field {
    let grid = f.grid;
    let plan = CubicFft::new(grid.dim(), grid.points_per_axis());
    let mut data = to_complex(&f.values);
    plan.forward(&mut data);
    let k2 = grid.wavenumber_sq();
    for (d, &q) in data.iter_mut().zip(&k2) {
        *d *= m(q);
    }
    plan.inverse(&mut data);
    let scale = 1.0 / grid.len() as f64;
    Field::from_values_unchecked(grid, data.iter().map(|c| c.re * scale).collect())
}

/// `int |grad f|^2` via the multiplier `|xi|^2` (Parseval on the periodic box).
pub fn grad_sq_integral(f: &Field, decay: &DecayCheck) -> Result<f64> {
    decay.check(f)?;
    let grid = f.grid;
    let plan = CubicFft::new(grid.dim(), grid.points_per_axis());
    let mut data = to_complex(&f.values);
    plan.forward(&mut data);
    let k2 = grid.wavenumber_sq();
    let terms: Vec<f64> = data.iter().zip(&k2).map(|(c, &q)| q * c.norm_sqr()).collect();
    let value = grid.cell_volume() / grid.len() as f64 * pairwise_sum(&terms);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite("grad_sq_integral"))
    }
}

/// Spectral Laplacian on the periodic box.
pub fn laplacian(f: &Field) -> Field {
    apply_multiplier(f, |q| -q)
}

/// `(-eps2 Delta + shift)^-1 f` via the multiplier `1/(eps2 |xi|^2 + shift)`.
pub fn inv_helmholtz(f: &Field, eps2: f64, shift: f64) -> Result<Field> {
    if !(eps2 > 0.0) || !(shift > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inv_helmholtz needs eps2 > 0 and shift > 0 (got {eps2}, {shift})"
        )));
    }
    apply_multiplier(f, |q| 1.0 / (eps2 * q + shift)).checked("inv_helmholtz")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_spacing_examples() {
        assert_eq!(make_grid(1, 256, 16.0).unwrap().spacing(), 0.125);
        assert_eq!(make_grid(2, 64, 8.0).unwrap().spacing(), 0.25);
        assert_eq!(make_grid(3, 7, 4.0), Err(Error::NotPowerOfTwo(7)));
        assert_eq!(make_grid(3, 4, 4.0), Err(Error::NotPowerOfTwo(4)));
        assert_eq!(make_grid(4, 8, 4.0), Err(Error::InvalidDimension(4)));
        assert_eq!(make_grid(1, 8, 0.0), Err(Error::NonPositiveExtent(0.0)));
        let g = make_grid(2, 32, 3.0).unwrap();
        assert_eq!(g.spacing() * 32.0, 6.0);
    }

    #[test]
    fn ravel_roundtrip() {
        let g = make_grid(3, 8, 1.0).unwrap();
        for idx in [0, 7, 8, 63, 64, 511] {
            let m = g.unravel(idx);
            assert_eq!(g.ravel(&m[..3]), idx);
        }
        assert_eq!(g.nearest_index(&[0.0, 0.0, 0.0]), g.ravel(&[4, 4, 4]));
    }

    #[test]
    fn integrate_examples() {
        let g = make_grid(1, 64, 1.0).unwrap();
        assert_relative_eq!(integrate(&Field::constant(g, 1.0)), 2.0, max_relative = 1e-12);
        assert_eq!(integrate(&Field::zeros(g)), 0.0);
        let g = make_grid(1, 512, 16.0).unwrap();
        let f = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        assert!((integrate(&f) - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn grad_sq_examples() {
        let l = 4.0;
        let g = make_grid(1, 64, l).unwrap();
        let f = Field::from_fn(g, |x| (PI * x[0] / l).sin());
        let v = grad_sq_integral(&f, &DecayCheck::default()).unwrap();
        assert!((v - (PI / l).powi(2) * l).abs() < 1e-8);
        assert!(grad_sq_integral(&Field::constant(g, 3.0), &DecayCheck::default()).unwrap().abs() < 1e-12);
        let g = make_grid(1, 512, 16.0).unwrap();
        let f = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
        let v = grad_sq_integral(&f, &DecayCheck::strict(true)).unwrap();
        assert!((v - (PI / 2.0).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn strict_decay_rejects_undecayed_fields() {
        let g = make_grid(1, 64, 4.0).unwrap();
        let f = Field::constant(g, 1.0);
        assert!(matches!(grad_sq_integral(&f, &DecayCheck::strict(true)), Err(Error::BoundaryDecay { .. })));
        assert!(grad_sq_integral(&f, &DecayCheck::strict(false)).is_ok());
    }

    #[test]
    fn inv_helmholtz_examples() {
        let g = make_grid(2, 16, 2.0).unwrap();
        let z = inv_helmholtz(&Field::zeros(g), 0.5, 2.0).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let c = inv_helmholtz(&Field::constant(g, 3.0), 0.5, 2.0).unwrap();
        assert!(c.values().iter().all(|v| (v - 1.5).abs() < 1e-14));
        // plane mode k = (2, 1)
        let xi = [2.0 * PI * 2.0 / 4.0, 2.0 * PI * 1.0 / 4.0];
        let mode = Field::from_fn(g, |x| (xi[0] * x[0] + xi[1] * x[1]).cos());
        let out = inv_helmholtz(&mode, 0.5, 2.0).unwrap();
        let factor = 1.0 / (0.5 * (xi[0] * xi[0] + xi[1] * xi[1]) + 2.0);
        for (o, m) in out.values().iter().zip(mode.values()) {
            assert!((o - factor * m).abs() < 1e-13);
        }
        assert!(inv_helmholtz(&mode, 0.0, 1.0).is_err());
        assert!(inv_helmholtz(&mode, 1.0, -1.0).is_err());
    }

    #[test]
    fn laplacian_matches_energy() {
        let g = make_grid(2, 32, 6.0).unwrap();
        let f = Field::from_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * (1.0 + x[0]));
        let k = grad_sq_integral(&f, &DecayCheck::default()).unwrap();
        let lap = laplacian(&f);
        assert_relative_eq!(-f.dot(&lap).unwrap(), k, max_relative = 1e-12);
    }

    #[test]
    fn field_rejects_nonfinite() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert_eq!(Field::new(g, v), Err(Error::NonFinite("Field::new")));
    }

    #[test]
    fn argmax_ties_prefer_lowest_index() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let f = Field::new(g, vec![0.0, 2.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.argmax(), 1);
    }
}
