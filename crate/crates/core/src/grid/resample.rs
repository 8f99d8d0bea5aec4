use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{pairwise_sum, CubicFft, Field, GridSpec};
use crate::error::{Error, Result};

/// Largest tolerated fraction of spectral energy lost to the target grid.
const NYQUIST_TOL: f64 = 1e-10;

/// Fraction of the spectral energy of `f` carried by modes whose largest
/// per-axis frequency exceeds `cutoff` times the Nyquist frequency.
pub fn spectral_tail(f: &Field, cutoff: f64) -> f64 {
    if cutoff >= 1.0 {
        return 0.0;
    }
    let grid = *f.grid();
    let n = grid.points_per_axis();
    let plan = CubicFft::new(grid.dim(), n);
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.forward(&mut data);
    let nyquist = (n / 2) as f64;
    let mut total = Vec::with_capacity(data.len());
    let mut tail = Vec::new();
    for (idx, c) in data.iter().enumerate() {
        let e = c.norm_sqr();
        total.push(e);
        let m = grid.unravel(idx);
        let top = (0..grid.dim())
            .map(|a| super::fft::signed_index(m[a], n).unsigned_abs() as f64)
            .fold(0.0, f64::max);
        if top > cutoff * nyquist {
            tail.push(e);
        }
    }
    let total = pairwise_sum(&total);
    if total == 0.0 {
        0.0
    } else {
        pairwise_sum(&tail) / total
    }
}

/// Weights of the even-length trigonometric interpolant on one axis:
/// row `t` holds the coefficients of every source sample at target point `y_t`.
fn axis_weights(src: &GridSpec, targets: &[f64]) -> Vec<f64> {
    let n = src.points_per_axis();
    let l = src.half_extent();
    let h = src.spacing();
    let mut w = vec![0.0; targets.len() * n];
    for (t, &y) in targets.iter().enumerate() {
        if !(y >= -l && y < l) {
            continue;
        }
        let row = &mut w[t * n..(t + 1) * n];
        let s = (y + l) / h;
        let nearest = s.round();
        if (s - nearest).abs() < 1e-12 {
            row[nearest as usize % n] = 1.0;
            continue;
        }
        // sin(n theta / 2) = (-1)^j sin(pi s) for theta = pi (y - x_j) / L
        let base = (PI * s).sin() / n as f64;
        for (j, wj) in row.iter_mut().enumerate() {
            let half = PI * (y - src.coordinate(j)) / (2.0 * l);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *wj = sign * base / half.tan();
        }
    }
    w
}

/// Band-limited resampling under the similarity map `y = src_center + stretch (x - tgt_center)`:
/// the result at target point `x` is the trigonometric interpolant of `f` at `y`,
/// or zero when `y` leaves the source box.
///
/// Fails with [`Error::Nyquist`] when the stretched profile carries more than a
/// negligible share of its energy above the target grid's Nyquist frequency.
pub fn resample_affine(
    f: &Field,
    target: &GridSpec,
    src_center: &[f64],
    tgt_center: &[f64],
    stretch: f64,
) -> Result<Field> {
    let src = *f.grid();
    let dim = src.dim();
    if target.dim() != dim {
        return Err(Error::GridMismatch);
    }
    if !(stretch > 0.0 && stretch.is_finite()) {
        return Err(Error::InvalidParameter(format!("resampling stretch must be positive, got {stretch}")));
    }
    if src_center.len() < dim || tgt_center.len() < dim {
        return Err(Error::InvalidParameter("resampling centers need one coordinate per axis".into()));
    }
    let tail = spectral_tail(f, src.spacing() / (target.spacing() * stretch));
    if tail > NYQUIST_TOL {
        return Err(Error::Nyquist { tail });
    }

    let ns = src.points_per_axis();
    let nt = target.points_per_axis();
    let weights: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            let ys: Vec<f64> = (0..nt)
                .map(|i| src_center[a] + stretch * (target.coordinate(i) - tgt_center[a]))
                .collect();
            axis_weights(&src, &ys)
        })
        .collect();

    // contract one axis at a time; `shape` tracks the current extents
    let mut data = f.values().to_vec();
    let mut shape = vec![ns; dim];
    for axis in 0..dim {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let w = &weights[axis];
        let mut out = vec![0.0; outer * nt * inner];
        for o in 0..outer {
            for t in 0..nt {
                let row = &w[t * ns..(t + 1) * ns];
                if row.iter().all(|&c| c == 0.0) {
                    continue;
                }
                let dst = &mut out[(o * nt + t) * inner..(o * nt + t + 1) * inner];
                for (j, &c) in row.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let srow = &data[(o * ns + j) * inner..(o * ns + j + 1) * inner];
                    for (d, &s) in dst.iter_mut().zip(srow) {
                        *d += c * s;
                    }
                }
            }
        }
        data = out;
        shape[axis] = nt;
    }
    Field::from_values_unchecked(*target, data).checked("resample_affine")
}
