//! Special functions: modified Struve and Bessel functions of order two, the
//! friction kernel, the upper incomplete gamma function of order zero and the
//! Bose occupation.

use crate::error::{domain, Error, Result};
use crate::quad;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest argument accepted by the power series (e^x stays finite).
pub const SERIES_OVERFLOW_GUARD: f64 = 700.0;
/// Above this kernel argument `2v|τ|` the asymptotic series replaces everything else.
pub const X_SWITCH: f64 = 25.0;
/// Below this kernel argument the Struve/Bessel difference is used directly.
pub const X_SERIES_MAX: f64 = 8.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Struve function L₂(x), power series.
pub fn struve_l2(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("struve_l2", format!("x = {x} must be nonnegative")));
    }
    if x > SERIES_OVERFLOW_GUARD {
        return Err(domain("struve_l2", format!("x = {x} beyond series range")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let h = 0.5 * x;
    let h2 = h * h;
    // Γ(3/2)Γ(7/2) = 15π/16
    let mut term = h * h2 / (15.0 * PI / 16.0);
    let mut sum = term;
    let mut k = 0.0;
    while term > 1e-17 * sum {
        term *= h2 / ((k + 1.5) * (k + 3.5));
        sum += term;
        k += 1.0;
    }
    Ok(sum)
}

/// Modified Bessel function I₂(x), power series.
pub fn bessel_i2(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("bessel_i2", format!("x = {x} must be nonnegative")));
    }
    if x > SERIES_OVERFLOW_GUARD {
        return Err(domain("bessel_i2", format!("x = {x} beyond series range")));
    }
    let h2 = 0.25 * x * x;
    let mut term = 0.5 * h2;
    let mut sum = term;
    let mut k = 0.0;
    while term > 1e-17 * sum {
        term *= h2 / ((k + 1.0) * (k + 3.0));
        sum += term;
        k += 1.0;
    }
    Ok(sum)
}

/// Array velocity and inverse RC time entering the friction kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub v: f64,
    pub gamma0: f64,
}

impl KernelParams {
    pub fn new(v: f64, gamma0: f64) -> Result<Self> {
        if !(v > 0.0) || !(gamma0 >= 0.0) {
            return Err(domain(
                "KernelParams",
                format!("v = {v}, gamma0 = {gamma0}"),
            ));
        }
        Ok(Self { v, gamma0 })
    }

    /// True when the array cutoff is not well separated from Γ₀.
    pub fn weak_separation(&self) -> bool {
        self.v < 10.0 * self.gamma0
    }

    /// K(0) = 4v²Γ₀/(3π).
    pub fn k_zero(&self) -> f64 {
        4.0 * self.v * self.v * self.gamma0 / (3.0 * PI)
    }
}

/// Friction kernel K(τ) = vΓ₀[(L₂(2v|τ|) − I₂(2v|τ|))/|τ| + 4v/(3π)].
pub fn kernel_k(tau: f64, p: KernelParams) -> f64 {
    let t = tau.abs();
    let x = 2.0 * p.v * t;
    if x == 0.0 {
        return p.k_zero();
    }
    if x <= X_SERIES_MAX {
        let diff = struve_l2(x).expect("x in range") - bessel_i2(x).expect("x in range");
        p.v * p.gamma0 * (diff / t + 4.0 * p.v / (3.0 * PI))
    } else if x <= X_SWITCH {
        p.k_zero() * 3.0 * kernel_moment(x)
    } else {
        p.gamma0 / (PI * t * t) * kernel_asymptotic_factor(x)
    }
}

/// ∫₀¹ s√(1−s²) e^{−xs} ds, via s = 1 − u² which removes the endpoint branch point.
fn kernel_moment(x: f64) -> f64 {
    const EDGES: [f64; 8] = [0.0, 0.5, 0.75, 0.875, 0.9375, 0.968_75, 0.984_375, 1.0];
    let rule = quad::gauss_legendre(16);
    EDGES
        .windows(2)
        .map(|w| {
            rule.integrate(
                |u| {
                    let s = 1.0 - u * u;
                    2.0 * u * u * s * (2.0 - u * u).sqrt() * (-x * s).exp()
                },
                w[0],
                w[1],
            )
        })
        .sum()
}

/// 1 − 3/x² − 15/x⁴ − 315/x⁶ − …, truncated at its smallest term.
fn kernel_asymptotic_factor(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut m = 0.0;
    loop {
        // a_{m+1}/a_m = (2m − 1)(2m + 3)/x², starting from a_0 = 1
        let next = term * (2.0 * m - 1.0) * (2.0 * m + 3.0) * inv2;
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            break;
        }
        sum += next;
        term = next;
        m += 1.0;
    }
    sum
}

/// Independent evaluation of K(τ) = (Γ₀/π)∫₀^{2v} ω√(1−(ω/2v)²) e^{−ω|τ|} dω
/// by adaptive Gauss–Kronrod. `n_points` bounds the number of kernel evaluations.
pub fn kernel_k_quadrature_oracle(tau: f64, p: KernelParams, n_points: usize) -> Result<f64> {
    if n_points < 1000 {
        return Err(domain(
            "kernel_k_quadrature_oracle",
            "n_points must be >= 1000",
        ));
    }
    let t = tau.abs();
    let top = 2.0 * p.v;
    let f = |w: f64| w * (1.0 - (w / top).powi(2)).max(0.0).sqrt() * (-w * t).exp();
    let est = quad::adaptive(f, 0.0, top, 0.0, 1e-13, n_points / 15)?;
    Ok(p.gamma0 / PI * est.value)
}

/// Upper incomplete gamma function Γ(0, z) = E₁(z), principal branch.
pub fn incomplete_gamma0(z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(domain("incomplete_gamma0", "z = 0"));
    }
    if z.norm() <= 2.0 {
        Ok(e1_series(z))
    } else {
        e1_continued_fraction(z)
    }
}

fn e1_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        power *= -z / kf;
        let term = power / kf;
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn e1_continued_fraction(z: Complex64) -> Result<Complex64> {
    let tiny = 1e-300;
    let one = Complex64::new(1.0, 0.0);
    let mut b = z + one;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 1..200_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = one / (d * an + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - one).norm() < 1e-16 {
            return Ok(h * (-z).exp());
        }
    }
    Err(Error::Quadrature { estimate: f64::NAN })
}

/// Bose–Einstein occupation 1/(e^{ω/T} − 1); exactly zero at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(domain(
            "bose_occupation",
            format!("omega = {omega} must be positive"),
        ));
    }
    if !(temperature >= 0.0) {
        return Err(domain(
            "bose_occupation",
            format!("T = {temperature} must be nonnegative"),
        ));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}
