//! Closed-form deviation of the linearized equation of motion, used as an oracle.

use super::bath::{sine_panel, SECH_CUTOFF_OMEGA0};
use super::{Method, TimeGrid, Trajectory};
use crate::device::CircuitParams;
use crate::quad::SineTransform;
use num_complex::Complex64;
use std::f64::consts::PI;

/// −Γ₀|ω|/(ω² + Γ₀|ω| + ω₀²) · φ₀⁽⁰⁾(iω), purely imaginary and odd.
pub fn linearized_matsubara(omega: f64, params: &CircuitParams) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (w0, g) = (params.omega0, params.gamma0);
    let denom = omega * omega + g * omega.abs() + w0 * w0;
    // −Γ₀|ω|/den · (−iπ/(ω cosh)) = iπΓ₀ sgn(ω)/(den cosh)
    let im = PI * g * omega.signum() / (denom * (PI * omega / (2.0 * w0)).cosh());
    Complex64::new(0.0, im)
}

/// δφ₀(τ) = −Γ₀∫₀^∞ sin(ωτ)/((ω² + Γ₀ω + ω₀²)cosh(πω/2ω₀)) dω on the grid.
pub fn linearized_trajectory(params: &CircuitParams, grid: TimeGrid) -> Trajectory {
    if params.gamma0 == 0.0 {
        return Trajectory::zero(grid, Method::Linearized);
    }
    let (w0, g) = (params.omega0, params.gamma0);
    let st = SineTransform::new(
        |w| -g / ((w * w + g * w + w0 * w0) * (PI * w / (2.0 * w0)).cosh()),
        SECH_CUTOFF_OMEGA0 * w0,
        sine_panel(&grid, w0),
    );
    let half: Vec<f64> = grid.half_taus().iter().map(|&t| st.eval(t)).collect();
    Trajectory::from_half(grid, &half, 0.0, 0, Method::Linearized)
}
