//! Frequency response of the array and the forcing it exerts on the bare kink.

use super::TimeGrid;
use crate::device::CircuitParams;
use crate::quad::SineTransform;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Upper frequency cutoff (in ω₀) for transforms weighted by 1/cosh(πω/2ω₀).
pub(crate) const SECH_CUTOFF_OMEGA0: f64 = 30.0;

/// Friction response R(ω) acting on the phase in Matsubara space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathResponse {
    /// vΓ₀ − K̂(ω) of the finite-bandwidth array, Γ₀|ω|(√(1+a²) − a) with a = |ω|/2v.
    #[default]
    Exact,
    /// Ohmic Γ₀|ω|, the v → ∞ limit.
    Linear,
}

impl BathResponse {
    pub fn eval(self, omega: f64, v: f64, gamma0: f64) -> f64 {
        let w = omega.abs();
        match self {
            Self::Linear => gamma0 * w,
            Self::Exact => {
                let a = w / (2.0 * v);
                // √(1+a²) − a = 1/(√(1+a²) + a), stable for large a
                gamma0 * w / ((1.0 + a * a).sqrt() + a)
            }
        }
    }
}

/// Panel width for sine transforms out to τ_max.
pub(crate) fn sine_panel(grid: &TimeGrid, omega0: f64) -> f64 {
    (PI / grid.tau_max).min(0.25 * omega0)
}

/// F(τ) = ∫₀^∞ (R(ω)/ω)·sin(ωτ)/cosh(πω/2ω₀) dω on the half grid.
/// Large-τ behaviour is Γ₀/τ.
pub fn forcing_term(grid: &TimeGrid, params: &CircuitParams, bath: BathResponse) -> Vec<f64> {
    if params.gamma0 == 0.0 {
        return vec![0.0; grid.half() + 1];
    }
    let w0 = params.omega0;
    let g = |w: f64| {
        let r_over_w = if w == 0.0 {
            params.gamma0
        } else {
            bath.eval(w, params.v, params.gamma0) / w
        };
        r_over_w / (PI * w / (2.0 * w0)).cosh()
    };
    let st = SineTransform::new(g, SECH_CUTOFF_OMEGA0 * w0, sine_panel(grid, w0));
    grid.half_taus().iter().map(|&t| st.eval(t)).collect()
}
