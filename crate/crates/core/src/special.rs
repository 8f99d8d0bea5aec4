//! Closed-form constants: Gamma ratios, Riesz normalization, the sharp weighted
//! HLS constant, lattice (Epstein) zeta values and the critical mass bound.

use std::f64::consts::PI;

use statrs::function::gamma as sg;

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0
}

/// Gamma function, exact (up to rounding) at positive integers and half-integers.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 && x <= 40.0 && is_integer(2.0 * x) {
        let twice = (2.0 * x) as u64;
        if twice.is_multiple_of(2) {
            return (1..(twice / 2)).fold(1.0, |acc, k| acc * k as f64);
        }
        // Gamma(k + 1/2) = sqrt(pi) * prod_{j=0}^{k-1} (j + 1/2)
        let k = twice / 2;
        return (0..k).fold(PI.sqrt(), |acc, j| acc * (j as f64 + 0.5));
    }
    sg::gamma(x)
}

/// Gamma(a) / Gamma(b). When a - b is an integer the ratio is formed by the
/// recurrence Gamma(x + 1) = x Gamma(x), which keeps it accurate to a few ulps.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    let d = a - b;
    if is_integer(d) && d.abs() <= 64.0 {
        let k = d as i64;
        if k >= 0 {
            (0..k).fold(1.0, |acc, j| acc * (b + j as f64))
        } else {
            1.0 / (0..-k).fold(1.0, |acc, j| acc * (a + j as f64))
        }
    } else {
        gamma(a) / gamma(b)
    }
}

/// `pi^(n/2)` with the half power split off so integer powers stay exact.
pub fn pi_half_power(n: usize) -> f64 {
    let base = PI.powi((n / 2) as i32);
    if n % 2 == 1 {
        base * PI.sqrt()
    } else {
        base
    }
}

/// Normalization `A_alpha` of the Riesz potential `A_alpha / |x|^(N - alpha)`.
pub fn riesz_normalization(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    gamma_ratio((n - alpha) / 2.0, alpha / 2.0) / (pi_half_power(dim) * 2f64.powf(alpha))
}

/// Sharp constant of the weighted Hardy-Littlewood-Sobolev inequality
/// `int |I_{alpha/2} * phi|^2 <= C_alpha int |phi|^2 |x|^alpha`.
pub fn hls_weighted_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    let r = gamma_ratio((n - alpha) / 4.0, (n + alpha) / 4.0);
    r * r / 2f64.powf(alpha)
}

/// Upper bound on `eps^-N int u^2` for positive solutions in the borderline
/// case `p = 2`, `alpha = N - 2`, `N >= 3`.
pub fn critical_mass_constant(dim: usize) -> Option<f64> {
    if dim < 3 {
        return None;
    }
    let half = (dim as f64 - 2.0) / 2.0;
    Some(gamma(half) * pi_half_power(dim) * 2f64.powi(dim as i32 - 2) * half * half)
}

/// Upper incomplete gamma `Gamma(a, x)` for `x > 0` and any non-integer or
/// positive `a`, extended below zero by `Gamma(a, x) = (Gamma(a + 1, x) - x^a e^-x) / a`.
fn upper_gamma(a: f64, x: f64) -> f64 {
    if a > 0.0 {
        return sg::gamma_ui(a, x);
    }
    (upper_gamma(a + 1.0, x) - x.powf(a) * (-x).exp()) / a
}

/// Analytic continuation of the Epstein zeta function of the cubic lattice,
/// `Z_N(s) = sum_{j in Z^N \ 0} |j|^-s`, for `s < N`.
///
/// Evaluated by the theta-function splitting at `t = 1`; the incomplete gamma
/// terms decay like `exp(-pi |j|^2)` so shells up to `|j|_inf = 6` suffice.
pub fn epstein_zeta(dim: usize, s: f64) -> f64 {
    assert!(s < dim as f64, "epstein_zeta: s must be below N");
    if s == 0.0 {
        return -1.0;
    }
    assert!(!(s < 0.0 && is_integer(s / 2.0)), "epstein_zeta: trivial zero");
    const SHELL: i64 = 6;
    let n = dim as f64;
    // multiplicity of each squared norm
    let max_sq = (SHELL * SHELL) as usize * dim;
    let mut counts = vec![0u64; max_sq + 1];
    let side = (2 * SHELL + 1) as usize;
    let total = side.pow(dim as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut sq = 0i64;
        for _ in 0..dim {
            let c = (rem % side) as i64 - SHELL;
            rem /= side;
            sq += c * c;
        }
        counts[sq as usize] += 1;
    }
    let a1 = s / 2.0;
    let a2 = (n - s) / 2.0;
    let mut terms = Vec::with_capacity(max_sq);
    for (sq, &c) in counts.iter().enumerate().skip(1) {
        if c == 0 {
            continue;
        }
        let x = PI * sq as f64;
        let t = x.powf(-a1) * upper_gamma(a1, x) + x.powf(-a2) * upper_gamma(a2, x);
        terms.push(c as f64 * t);
    }
    // smallest terms first
    terms.reverse();
    let sum: f64 = terms.iter().sum();
    PI.powf(a1) / sg::gamma(a1) * (sum + 2.0 / (s - n) - 2.0 / s)
}

/// Exponent `theta` in `E(lambda) = E(1) lambda^theta`.
pub fn scaling_exponent(dim: usize, alpha: f64, p: f64) -> f64 {
    (alpha + 2.0) / (2.0 * (p - 1.0)) - (dim as f64 - 2.0) / 2.0
}

/// Amplitude exponent in `v_lambda(y) = lambda^a v(sqrt(lambda) y)`.
pub fn amplitude_exponent(alpha: f64, p: f64) -> f64 {
    (alpha + 2.0) / (4.0 * (p - 1.0))
}
