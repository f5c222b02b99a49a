//! Independent closed-form oracles, coded directly from the single-atom
//! amplitude formulas and the Gaussian characteristic function. None of this
//! goes through the propagator or quadrature code under test.

#![allow(dead_code)]

use photon_echo::Complex64 as C64;

pub const I: C64 = C64::new(0.0, 1.0);

/// `⟨e^{iΔτ}⟩` over the unit-width Gaussian.
pub fn char_fn(tau: f64) -> f64 {
    (-tau * tau / 2.0).exp()
}

/// Two-level amplitudes right after the second pulse, for storage area
/// `theta1`, rephasing area `theta2` and separation `sep = t2 - t1`.
pub fn two_level_amplitudes_t2(theta1: f64, theta2: f64, delta: f64, sep: f64) -> (C64, C64) {
    let (s1, c1) = (theta1 / 2.0).sin_cos();
    let (s2, c2) = (theta2 / 2.0).sin_cos();
    let ph = C64::from_polar(1.0, -delta * sep);
    let a = c1 * c2 - s1 * s2 * ph;
    let b = -I * c1 * s2 - I * s1 * c2 * ph;
    (a, b)
}

/// `⟨1|ρ(t)|2⟩` of a single two-level atom at time `t3 + tau`, built from the
/// dephased mixture with weights `|a(t2)|²`, `|b(t2)|²` of the states
/// `U^Δ U^θ₃|1⟩` and `U^Δ U^θ₃|2⟩`.
pub fn two_level_coherence_after_t3(theta1: f64, theta2: f64, theta3: f64, delta: f64, sep: f64, tau: f64) -> C64 {
    let (a, b) = two_level_amplitudes_t2(theta1, theta2, delta, sep);
    let (s3, c3) = (theta3 / 2.0).sin_cos();
    let ph = C64::from_polar(1.0, -delta * tau);
    // mixture components as amplitude pairs
    let psi1 = (C64::new(c3, 0.0), -I * s3 * ph);
    let psi2 = (-I * s3, c3 * ph);
    a.norm_sqr() * psi1.0 * psi1.1.conj() + b.norm_sqr() * psi2.0 * psi2.1.conj()
}

/// Closed-form ensemble average of the part of
/// [`two_level_coherence_after_t3`] linear in `theta1`, times `n`:
/// `-(iNε/2)·sinθ₂·sinθ₃·(e^{-(τ-T)²/2} + e^{-(τ+T)²/2})` with `θ₁ = 2ε`.
pub fn two_level_leading_polarization(n: f64, eps: f64, theta2: f64, theta3: f64, sep: f64, tau: f64) -> C64 {
    -I * n * eps / 2.0 * theta2.sin() * theta3.sin() * (char_fn(tau - sep) + char_fn(tau + sep))
}

/// Three-level amplitudes after the Raman pulse at `t2`, given the stored
/// amplitudes `a1` on `|1⟩` and `c1` on `|3⟩` (the weak-pulse result is
/// `a1 = 1, c1 = -ε` to first order; `a1 = cos ε, c1 = -sin ε` exactly).
pub fn three_level_amplitudes_t2(a1: f64, c1: f64, theta2_r: f64, delta_r: f64, sep: f64) -> [C64; 3] {
    let (s, c) = (theta2_r / 2.0).sin_cos();
    let ph = C64::from_polar(1.0, -delta_r * sep);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [
        (1.0 + c) / 2.0 * a1 + (c - 1.0) / 2.0 * c1 * ph,
        -I * r * s * a1 - I * r * s * c1 * ph,
        (c - 1.0) / 2.0 * a1 + (1.0 + c) / 2.0 * c1 * ph,
    ]
}

/// Midpoint Riemann sum of `∫φ(x) f(x) dx` over `[-lim, lim]` with `n`
/// cells.
pub fn riemann_gaussian<F: Fn(f64) -> C64>(f: F, lim: f64, n: usize) -> C64 {
    let h = 2.0 * lim / n as f64;
    let norm = h / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        let x = -lim + (k as f64 + 0.5) * h;
        acc += norm * (-x * x / 2.0).exp() * f(x);
    }
    acc
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

pub fn crel_err(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm()
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
