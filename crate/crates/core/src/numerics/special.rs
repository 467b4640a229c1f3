//! Special functions: Gaussian tail, scaled complementary error function,
//! digamma at the integers, binary entropy.

use crate::error::{domain, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `sqrt(2 pi e)`, the entropy-power constant of a unit Gaussian.
pub const SQRT_2PI_E: f64 = 4.132_731_354_122_493;

/// `e / (2 pi)`, the exponential-to-Gaussian entropy-power ratio.
pub const E_OVER_2PI: f64 = std::f64::consts::E / (2.0 * std::f64::consts::PI);

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
///
/// Far in the upper tail the true value drops below the smallest subnormal;
/// there the result is pinned to that subnormal so it stays strictly positive.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("Q(x) needs finite x, got {x}"));
    }
    Ok(q_unchecked(x))
}

/// Unchecked `Q(x)` for internal hot loops.
#[inline]
pub(crate) fn q_unchecked(x: f64) -> f64 {
    let q = 0.5 * libm::erfc(x / std::f64::consts::SQRT_2);
    if q == 0.0 && x > 0.0 {
        f64::from_bits(1)
    } else {
        q
    }
}

/// Scaled complementary error function `erfcx(x) = exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 4.0 {
        (x * x).exp() * libm::erfc(x)
    } else {
        // Continued fraction erfc(x) e^{x^2} sqrt(pi) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let mut tail = x;
        for k in (1..=60).rev() {
            tail = x + (k as f64 * 0.5) / tail;
        }
        1.0 / (tail * std::f64::consts::PI.sqrt())
    }
}

/// Digamma at a positive integer: `psi(k) = H_{k-1} - gamma`.
pub fn digamma_int(k: u64) -> Result<f64> {
    if k == 0 {
        return domain("digamma is undefined at 0");
    }
    Ok(harmonic(k - 1) - EULER_GAMMA)
}

/// Harmonic number `H_n`, summed in increasing order.
pub(crate) fn harmonic(n: u64) -> f64 {
    let mut h = 0.0;
    for j in 1..=n {
        h += 1.0 / j as f64;
    }
    h
}

/// `ln((k)!)` by direct summation; exact enough for the small `k` used here.
pub fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Binary entropy in nats with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.ln() };
    term(p) + term(1.0 - p)
}

/// Standard normal density.
#[inline]
pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}
