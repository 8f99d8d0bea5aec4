use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for a cubic array of side `m` in `dim` dimensions,
/// stored row-major (last axis fastest).
#[derive(Clone)]
pub(crate) struct CubicFft {
    dim: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CubicFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CubicFft").field("dim", &self.dim).field("m", &self.m).finish()
    }
}

impl CubicFft {
    pub(crate) fn new(dim: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Unnormalized inverse; callers divide by `len()`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        let m = self.m;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // last axis is contiguous
        for line in data.chunks_exact_mut(m) {
            plan.process_with_scratch(line, &mut scratch);
        }
        if self.dim == 1 {
            return;
        }
        let mut buf = vec![Complex64::default(); m];
        for axis in 0..self.dim - 1 {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            let block = stride * m;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (k, b) in buf.iter_mut().enumerate() {
                        *b = data[start + k * stride];
                    }
                    plan.process_with_scratch(&mut buf, &mut scratch);
                    for (k, b) in buf.iter().enumerate() {
                        data[start + k * stride] = *b;
                    }
                }
            }
        }
    }
}

/// Signed frequency index of slot `k` in an FFT of length `m`.
pub(crate) fn signed_index(k: usize, m: usize) -> i64 {
    if k < m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}
