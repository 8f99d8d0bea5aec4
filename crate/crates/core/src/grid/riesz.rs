use rustfft::num_complex::Complex64;

use super::{CubicFft, Field, GridSpec};
use crate::error::{Error, Result};
use crate::special::{epstein_zeta, riesz_normalization};

/// Sampled Riesz kernel `I_alpha(x) = A_alpha |x|^(alpha - N)` on the doubled
/// (zero-padding) grid, with its discrete spectrum precomputed.
///
/// The singular cell carries the lattice-regularized value
/// `-A_alpha h^(alpha - N) Z_N(N - alpha)`, where `Z_N` is the Epstein zeta
/// function of the cubic lattice, and the nearest neighbours carry the next
/// correction `-A_alpha h^(alpha - N) Z_N(N - alpha - 2) / 2N` as a discrete
/// Laplacian stencil. With these weights the lattice sum of the kernel against
/// a smooth field reproduces the integral up to `O(h^(alpha + 4))`.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    alpha: f64,
    normalization: f64,
    grid: GridSpec,
    self_cell_weight: f64,
    sampled: Field,
    spectrum: Vec<f64>,
    plan: CubicFft,
}

impl RieszKernel {
    pub fn new(grid: GridSpec, alpha: f64) -> Result<Self> {
        let dim = grid.dim();
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::AlphaOutOfRange { alpha, dim });
        }
        let n = grid.points_per_axis();
        let h = grid.spacing();
        let normalization = riesz_normalization(dim, alpha);
        let s = dim as f64 - alpha;
        let scale = normalization * h.powf(-s);
        // second correction acts through the 2N-neighbour Laplacian stencil
        let stencil = -scale * epstein_zeta(dim, s - 2.0) / (2 * dim) as f64;
        let self_cell_weight = -scale * epstein_zeta(dim, s) - (2 * dim) as f64 * stencil;

        let m = 2 * n;
        let padded = GridSpec::new(dim, m, 2.0 * grid.half_extent())?;
        let value = |offsets: &[i64]| -> f64 {
            let r2: i64 = offsets.iter().map(|d| d * d).sum();
            match r2 {
                0 => self_cell_weight,
                1 => scale + stencil,
                _ => scale * (r2 as f64).powf(-s / 2.0),
            }
        };
        // natural order: slot j holds offset j - n
        let mut sampled = vec![0.0; padded.len()];
        // wrap order: slot j holds offset j (j < n) or j - 2n
        let mut wrapped = vec![Complex64::default(); padded.len()];
        for (idx, (s, w)) in sampled.iter_mut().zip(wrapped.iter_mut()).enumerate() {
            let multi = padded.unravel(idx);
            let natural: Vec<i64> = (0..dim).map(|a| multi[a] as i64 - n as i64).collect();
            *s = value(&natural);
            // offset -n is never reached by a box convolution; mirroring keeps
            // the wrapped kernel exactly even
            let wrap: Vec<i64> = (0..dim)
                .map(|a| {
                    let k = multi[a] as i64;
                    if k <= n as i64 {
                        k
                    } else {
                        k - m as i64
                    }
                })
                .collect();
            *w = Complex64::new(value(&wrap), 0.0);
        }
        let plan = CubicFft::new(dim, m);
        plan.forward(&mut wrapped);
        let spectrum = wrapped.iter().map(|c| c.re).collect();
        Ok(Self {
            alpha,
            normalization,
            grid,
            self_cell_weight,
            sampled: Field::from_values_unchecked(padded, sampled),
            spectrum,
            plan,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `A_alpha`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn self_cell_weight(&self) -> f64 {
        self.self_cell_weight
    }

    /// Kernel samples on the doubled grid `[-2L, 2L)^N`, natural ordering.
    pub fn sampled_kernel(&self) -> &Field {
        &self.sampled
    }

    /// Kernel sample at integer lattice offset `offsets` (each in `-n..n`).
    pub fn value_at_offset(&self, offsets: &[i64]) -> f64 {
        let n = self.grid.points_per_axis() as i64;
        let multi: Vec<usize> = offsets.iter().map(|&d| (d + n) as usize).collect();
        self.sampled.values()[self.sampled.grid().ravel(&multi)]
    }

    /// Continuum kernel `A_alpha |x|^(alpha - N)` at a nonzero point.
    pub fn continuum(&self, r: f64) -> f64 {
        self.normalization * r.powf(self.alpha - self.grid.dim() as f64)
    }

    fn embed(&self, f: &[f64], g: Option<&[f64]>) -> Vec<Complex64> {
        let n = self.grid.points_per_axis();
        let dim = self.grid.dim();
        let mut out = vec![Complex64::default(); self.plan.len()];
        let m = 2 * n;
        for idx in 0..f.len() {
            let multi = self.grid.unravel(idx);
            let target = (0..dim).fold(0, |acc, a| acc * m + multi[a]);
            out[target] = Complex64::new(f[idx], g.map_or(0.0, |g| g[idx]));
        }
        out
    }

    fn convolve_raw(&self, f: &[f64], g: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.points_per_axis();
        let dim = self.grid.dim();
        let m = 2 * n;
        let mut data = self.embed(f, g);
        self.plan.forward(&mut data);
        for (d, &s) in data.iter_mut().zip(&self.spectrum) {
            *d *= s;
        }
        self.plan.inverse(&mut data);
        let scale = self.grid.cell_volume() / self.plan.len() as f64;
        let mut re = vec![0.0; self.grid.len()];
        let mut im = if g.is_some() { vec![0.0; self.grid.len()] } else { Vec::new() };
        for idx in 0..self.grid.len() {
            let multi = self.grid.unravel(idx);
            let source = (0..dim).fold(0, |acc, a| acc * m + multi[a]);
            re[idx] = data[source].re * scale;
            if g.is_some() {
                im[idx] = data[source].im * scale;
            }
        }
        (re, im)
    }
}

/// Free-space convolution `(I_alpha * f)(x) = sum_y h^N K(x - y) f(y)` over the box,
/// evaluated through a zero-padded FFT on the doubled grid.
pub fn riesz_convolve(f: &Field, kernel: &RieszKernel) -> Result<Field> {
    if f.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let (re, _) = kernel.convolve_raw(f.values(), None);
    Field::from_values_unchecked(*f.grid(), re).checked("riesz_convolve")
}

/// Two convolutions for the price of one complex transform.
pub fn riesz_convolve_pair(f: &Field, g: &Field, kernel: &RieszKernel) -> Result<(Field, Field)> {
    if f.grid() != kernel.grid() || g.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let (re, im) = kernel.convolve_raw(f.values(), Some(g.values()));
    Ok((
        Field::from_values_unchecked(*f.grid(), re).checked("riesz_convolve")?,
        Field::from_values_unchecked(*f.grid(), im).checked("riesz_convolve")?,
    ))
}

/// `int (I_alpha * f) g`.
pub fn riesz_bilinear(f: &Field, g: &Field, kernel: &RieszKernel) -> Result<f64> {
    f.ensure_same_grid(g)?;
    let conv = riesz_convolve(f, kernel)?;
    conv.dot(g)
}
