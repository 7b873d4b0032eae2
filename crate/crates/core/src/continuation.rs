//! Analytic continuation of Matsubara data to real mode frequencies and the
//! per-mode overlap factors built from it.
//!
//! Fits are done in x = ω/ω₀ for ω > 0. Powers of |ω| continue as
//! |ω| → −iω_k, so even terms pick up (−1)^{l/2} and odd terms become
//! imaginary. The overlap factors use the modulus of the continued value.

use crate::device::{CircuitParams, ModeGrid};
use crate::error::{Error, Result};
use crate::solver::{phi0_bare_matsubara, BathResponse, SpectralFunction};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

pub const DEFAULT_ORDER: usize = 6;
pub const DEFAULT_WINDOW: (f64, f64) = (0.05, 3.0);
/// Points per fit window when sampling the Matsubara axis.
pub const FIT_SAMPLES: usize = 150;
/// Half-width (in ω₀) of the band where the removable 0/0 of f^apprx is expanded.
/// Window (in ω₀) for the generic-route rational fit. Wider windows pull the
/// fit toward the sech tail and degrade the continuation near 2ω₀.
pub const GENERIC_WINDOW: (f64, f64) = (0.05, 2.0);
pub const RESONANCE_GUARD: f64 = 1e-3;
const RATIO_IMAG_TOL: f64 = 1e-6;

/// Which powers of x enter the polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitBasis {
    /// x⁰, x², …, x^p.
    Even,
    /// x⁰, x², x³, …, x^p. The x¹ term is absent because the 1/τ tail of the
    /// deviation cancels it exactly; the odd terms absorb the |ω|³ structure
    /// that the even basis otherwise aliases into its coefficients.
    #[default]
    Mixed,
}

impl FitBasis {
    pub fn powers(self, order: usize) -> Vec<i32> {
        let order = order as i32;
        match self {
            Self::Even => (0..=order).step_by(2).collect(),
            Self::Mixed => (0..=order).filter(|&l| l != 1).collect(),
        }
    }
}

/// Polynomial Σ α_l x^l in x = |ω|/ω₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationFit {
    pub basis: FitBasis,
    pub order: usize,
    pub powers: Vec<i32>,
    pub coefficients: Vec<f64>,
    pub omega0: f64,
    /// Fit window in units of ω₀.
    pub window: (f64, f64),
    /// RMS residual divided by the mean |B| on the window.
    pub rms_residual: f64,
}

impl ContinuationFit {
    pub fn matsubara(&self, omega: f64) -> f64 {
        let x = omega.abs() / self.omega0;
        self.powers
            .iter()
            .zip(&self.coefficients)
            .map(|(&l, a)| a * x.powi(l))
            .sum()
    }

    /// Value continued to real frequency ω_k.
    pub fn continued(&self, omega_k: f64) -> Complex64 {
        let x = Complex64::new(0.0, -omega_k / self.omega0);
        self.powers
            .iter()
            .zip(&self.coefficients)
            .map(|(&l, a)| a * x.powi(l))
            .sum()
    }

    /// Sanity checks expected of a bracket fit.
    pub fn validate_bracket(&self) -> Result<()> {
        if !(0.5..=1.5).contains(&self.coefficients[0]) {
            return Err(Error::Fit(format!(
                "alpha_0 = {:.4} outside [0.5, 1.5]",
                self.coefficients[0]
            )));
        }
        if !(self.rms_residual < 1e-3) {
            return Err(Error::Fit(format!(
                "relative rms residual {:.2e} above 1e-3",
                self.rms_residual
            )));
        }
        Ok(())
    }
}

/// (p₀ + p₂x² + p₄x⁴)/(1 + q₂x² + q₄x⁴), a cross-check allowing poles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalFit {
    pub numerator: [f64; 3],
    pub denominator: [f64; 2],
    pub omega0: f64,
    pub rms_residual: f64,
}

impl RationalFit {
    fn eval_x2(&self, x2: f64) -> f64 {
        let [p0, p2, p4] = self.numerator;
        let [q2, q4] = self.denominator;
        (p0 + x2 * (p2 + x2 * p4)) / (1.0 + x2 * (q2 + x2 * q4))
    }

    pub fn matsubara(&self, omega: f64) -> f64 {
        self.eval_x2((omega / self.omega0).powi(2))
    }

    pub fn continued(&self, omega_k: f64) -> Complex64 {
        self.eval_x2(-(omega_k / self.omega0).powi(2)).into()
    }
}

/// Something that can be continued to real frequency.
pub trait Continuation {
    fn continued(&self, omega_k: f64) -> Complex64;

    fn magnitude(&self, omega_k: f64) -> f64 {
        self.continued(omega_k).norm()
    }
}

impl Continuation for ContinuationFit {
    fn continued(&self, omega_k: f64) -> Complex64 {
        ContinuationFit::continued(self, omega_k)
    }
}

impl Continuation for RationalFit {
    fn continued(&self, omega_k: f64) -> Complex64 {
        RationalFit::continued(self, omega_k)
    }
}

/// Evenly spaced Matsubara sample points over `window` (in ω₀).
pub fn fit_grid(omega0: f64, window: (f64, f64), samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| omega0 * (window.0 + (window.1 - window.0) * i as f64 / (samples - 1) as f64))
        .collect()
}

/// δφ₀(iω)/φ₀⁽⁰⁾(iω), checked to be real.
fn real_ratio(dphi: Complex64, omega: f64, omega0: f64) -> Result<f64> {
    let ratio = dphi / phi0_bare_matsubara(omega, omega0)?;
    if ratio.im.abs() > RATIO_IMAG_TOL * ratio.re.abs().max(1.0) {
        return Err(Error::Parity(format!(
            "ratio at omega = {omega} has imaginary part {:.3e}",
            ratio.im
        )));
    }
    Ok(ratio.re)
}

/// B(ω) = (ω² + Γ₀ω + ω₀²)/(ω² + ω₀²)·(1 + δφ₀/φ₀⁽⁰⁾) at each ω > 0 of `spectral`.
pub fn bracket_series(spectral: &SpectralFunction, params: &CircuitParams) -> Result<Vec<f64>> {
    let (w0, g) = (params.omega0, params.gamma0);
    spectral
        .omegas
        .iter()
        .zip(&spectral.values)
        .map(|(&w, &z)| {
            let r = real_ratio(z, w, w0)?;
            Ok((w * w + g * w + w0 * w0) / (w * w + w0 * w0) * (1.0 + r))
        })
        .collect()
}

fn in_window<'a>(
    omegas: &'a [f64],
    values: &'a [f64],
    omega0: f64,
    window: (f64, f64),
) -> Vec<(f64, f64)> {
    let slack = 1e-9;
    omegas
        .iter()
        .zip(values)
        .map(|(&w, &b)| (w / omega0, b))
        .filter(|&(x, _)| x >= window.0 - slack && x <= window.1 + slack)
        .collect()
}

fn relative_rms(points: &[(f64, f64)], model: impl Fn(f64) -> f64) -> f64 {
    let n = points.len() as f64;
    let rms = (points
        .iter()
        .map(|&(x, b)| (model(x) - b).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let mean = points.iter().map(|&(_, b)| b.abs()).sum::<f64>() / n;
    rms / mean
}

/// Least-squares fit of Σ α_l x^l (powers from `basis`, l ≤ p) to `values` over `window` (in ω₀).
pub fn fit_continuation(
    omegas: &[f64],
    values: &[f64],
    basis: FitBasis,
    order: usize,
    window: (f64, f64),
    omega0: f64,
) -> Result<ContinuationFit> {
    if !order.is_multiple_of(2) || !(4..=10).contains(&order) {
        return Err(Error::Fit(format!(
            "order {order} must be even and in [4, 10]"
        )));
    }
    let points = in_window(omegas, values, omega0, window);
    let powers = basis.powers(order);
    let cols = powers.len();
    if points.len() < 2 * cols {
        return Err(Error::Fit(format!(
            "only {} samples in the window",
            points.len()
        )));
    }
    let a = DMatrix::from_fn(points.len(), cols, |i, j| points[i].0.powi(powers[j]));
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::Fit(format!(
            "ill-conditioned fit (condition {:.2e})",
            smax / smin
        )));
    }
    let coef = svd.solve(&b, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    let mut fit = ContinuationFit {
        basis,
        order,
        powers,
        coefficients: coef.iter().copied().collect(),
        omega0,
        window,
        rms_residual: 0.0,
    };
    fit.rms_residual = relative_rms(&points, |x| fit.matsubara(x * omega0));
    Ok(fit)
}

/// Linearized least-squares fit of a (4/4) even rational function.
pub fn fit_rational(
    omegas: &[f64],
    values: &[f64],
    window: (f64, f64),
    omega0: f64,
) -> Result<RationalFit> {
    let points = in_window(omegas, values, omega0, window);
    if points.len() < 10 {
        return Err(Error::Fit("too few samples for a rational fit".into()));
    }
    // p₀ + p₂x² + p₄x⁴ − B(q₂x² + q₄x⁴) = B
    let a = DMatrix::from_fn(points.len(), 5, |i, j| {
        let (x, b) = points[i];
        let x2 = x * x;
        match j {
            0 => 1.0,
            1 => x2,
            2 => x2 * x2,
            3 => -b * x2,
            _ => -b * x2 * x2,
        }
    });
    let rhs = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let coef = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let mut fit = RationalFit {
        numerator: [coef[0], coef[1], coef[2]],
        denominator: [coef[3], coef[4]],
        omega0,
        rms_residual: 0.0,
    };
    fit.rms_residual = relative_rms(&points, |x| fit.matsubara(x * omega0));
    Ok(fit)
}

/// √(2Δ/(zω_k))·(ω₀² − ω_k²)/(cos(πω_k/2ω₀)·√((ω₀² − ω_k²)² + (Γ₀ω_k)²)).
pub fn f_apprx(omega_k: f64, params: &CircuitParams) -> f64 {
    let (w0, g) = (params.omega0, params.gamma0);
    if g == 0.0 {
        return 0.0;
    }
    let eps = omega_k - w0;
    let ratio = if eps.abs() < RESONANCE_GUARD * w0 {
        // (ω₀² − ω²)/cos(πω/2ω₀) = (2ω₀ + ε)(2ω₀/π)·u/sin u with u = πε/2ω₀
        let u = PI * eps / (2.0 * w0);
        (2.0 * w0 + eps) * (2.0 * w0 / PI) * (1.0 + u * u / 6.0)
    } else {
        (w0 * w0 - omega_k * omega_k) / (PI * omega_k / (2.0 * w0)).cos()
    };
    let lorentz = ((w0 * w0 - omega_k * omega_k).powi(2) + (g * omega_k).powi(2)).sqrt();
    (2.0 * params.delta / (params.z * omega_k)).sqrt() * ratio / lorentz
}

/// √(2Δ/(zω_k))/cosh(πω_k/2ω₀).
pub fn f_tilde_apprx(omega_k: f64, params: &CircuitParams) -> f64 {
    (2.0 * params.delta / (params.z * omega_k)).sqrt()
        / (PI * omega_k / (2.0 * params.omega0)).cosh()
}

/// f_k = f_k^apprx · |B| continued to ω_k.
pub fn f_factors(fit: &impl Continuation, omegas: &[f64], params: &CircuitParams) -> Vec<f64> {
    omegas
        .iter()
        .map(|&w| f_apprx(w, params) * fit.magnitude(w))
        .collect()
}

/// f̃² = (2Δ/(π²zΓ₀))·[R(ω)|φ₀|² + (ω² + ω₀²)|δφ₀|²] from raw Matsubara magnitudes.
/// With the Ohmic response this is the closed form in terms of δφ₀/φ₀⁽⁰⁾.
pub fn f_tilde_generic(
    omega: f64,
    phi0_abs2: f64,
    dphi0_abs2: f64,
    params: &CircuitParams,
    bath: BathResponse,
) -> f64 {
    let (w0, g) = (params.omega0, params.gamma0);
    let r = bath.eval(omega, params.v, g);
    let pref = 2.0 * params.delta / (PI * PI * params.z * g);
    (pref * (r * phi0_abs2 + (omega * omega + w0 * w0) * dphi0_abs2)).sqrt()
}

/// f̃_k = f̃_k^apprx·√[((ω_k² + ω₀²)/(Γ₀ω_k))·r² + (1 + r)²], r = δφ₀/φ₀⁽⁰⁾ at iω_k.
pub fn f_tilde_specialized(omega: f64, ratio: f64, params: &CircuitParams) -> f64 {
    let (w0, g) = (params.omega0, params.gamma0);
    f_tilde_apprx(omega, params)
        * ((omega * omega + w0 * w0) / (g * omega) * ratio * ratio + (1.0 + ratio).powi(2)).sqrt()
}

/// δφ₀(iω) at each ω, taken directly when the grids coincide and by cubic spline otherwise.
fn spectral_at(spectral: &SpectralFunction, omegas: &[f64]) -> Result<Vec<Complex64>> {
    if spectral.omegas.len() == omegas.len()
        && spectral.omegas.iter().zip(omegas).all(|(a, b)| a == b)
    {
        return Ok(spectral.values.clone());
    }
    spectral.interpolate_many(omegas)
}

/// f̃_k on `omegas` from δφ₀(iω); `bath` selects the friction response in the first term.
pub fn f_tilde_factors(
    spectral: &SpectralFunction,
    omegas: &[f64],
    params: &CircuitParams,
    bath: BathResponse,
) -> Result<Vec<f64>> {
    if params.gamma0 == 0.0 {
        return Ok(omegas.iter().map(|&w| f_tilde_apprx(w, params)).collect());
    }
    let values = spectral_at(spectral, omegas)?;
    omegas
        .iter()
        .zip(values)
        .map(|(&w, d)| {
            let phi_bare = phi0_bare_matsubara(w, params.omega0)?;
            Ok(f_tilde_generic(
                w,
                (phi_bare + d).norm_sqr(),
                d.norm_sqr(),
                params,
                bath,
            ))
        })
        .collect()
}

/// Y(ω) = (ω² + Γ₀ω + ω₀²)·iωφ₀(iω)/(πω₀²), from the bare pulse transform iωφ₀⁽⁰⁾(iω)
/// (real) and δφ₀(iω) on the same ω grid.
pub fn generic_series(
    pulse: &[f64],
    spectral: &SpectralFunction,
    params: &CircuitParams,
) -> Vec<f64> {
    let (w0, g) = (params.omega0, params.gamma0);
    spectral
        .omegas
        .iter()
        .zip(pulse)
        .zip(&spectral.values)
        .map(|((&w, &p), d)| {
            // iω·δφ₀(iω) with δφ₀ = i·Im
            let full = p - w * d.im;
            (w * w + g * w + w0 * w0) * full / (PI * w0 * w0)
        })
        .collect()
}

/// f_k = √(2Δ/(zω_k))·ω₀²·Y(ω_k)/√((ω₀² − ω_k²)² + (Γ₀ω_k)²) with Y continued.
pub fn f_factors_generic(
    fit: &impl Continuation,
    omegas: &[f64],
    params: &CircuitParams,
) -> Vec<f64> {
    let (w0, g) = (params.omega0, params.gamma0);
    omegas
        .iter()
        .map(|&w| {
            let lorentz = ((w0 * w0 - w * w).powi(2) + (g * w).powi(2)).sqrt();
            (2.0 * params.delta / (params.z * w)).sqrt() * w0 * w0 * fit.magnitude(w) / lorentz
        })
        .collect()
}

/// Per-mode factors. `f` and `f_apprx` cover the first `f.len()` modes (those
/// below the rate cutoff); the f̃ columns cover every entry of `omegas`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeFactors {
    pub omegas: Vec<f64>,
    pub f: Vec<f64>,
    pub f_apprx: Vec<f64>,
    pub f_tilde: Vec<f64>,
    pub f_tilde_apprx: Vec<f64>,
}

impl ModeFactors {
    pub fn build(
        modes: &ModeGrid,
        rate_cutoff: f64,
        fit: &impl Continuation,
        spectral_at_modes: &SpectralFunction,
        params: &CircuitParams,
        bath: BathResponse,
    ) -> Result<Self> {
        let omegas = modes.omegas.clone();
        let rate_modes: Vec<f64> = omegas
            .iter()
            .copied()
            .take_while(|&w| w <= rate_cutoff)
            .collect();
        let factors = Self {
            f: f_factors(fit, &rate_modes, params),
            f_apprx: rate_modes.iter().map(|&w| f_apprx(w, params)).collect(),
            f_tilde: f_tilde_factors(spectral_at_modes, &omegas, params, bath)?,
            f_tilde_apprx: omegas.iter().map(|&w| f_tilde_apprx(w, params)).collect(),
            omegas,
        };
        factors.check_finite()?;
        Ok(factors)
    }

    pub fn check_finite(&self) -> Result<()> {
        for (name, col) in [("f", &self.f), ("f_tilde", &self.f_tilde)] {
            if let Some(i) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::Fit(format!(
                    "{name} not finite at omega = {}",
                    self.omegas[i]
                )));
            }
        }
        Ok(())
    }

    /// Columnar text: ω_k, f_k, f̃_k, f_k^apprx, f̃_k^apprx (empty f cells above the rate cutoff).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega_k,f,f_tilde,f_apprx,f_tilde_apprx\n");
        for (i, w) in self.omegas.iter().enumerate() {
            let f = self
                .f
                .get(i)
                .map(|x| format!("{x:.12e}"))
                .unwrap_or_default();
            let fa = self
                .f_apprx
                .get(i)
                .map(|x| format!("{x:.12e}"))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{w:.12e},{f},{:.12e},{fa},{:.12e}",
                self.f_tilde[i], self.f_tilde_apprx[i]
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ArrayScales, Coupling};
    use crate::solver::{linearized_matsubara, Parity};

    fn params(ratio: f64) -> CircuitParams {
        CircuitParams::with_ej(
            8.0,
            1.6,
            5.0,
            Coupling::InverseRc(8.0 * ratio),
            ArrayScales::default_for(8.0),
            0.0,
        )
        .unwrap()
    }

    fn analytic_spectral(p: &CircuitParams, omegas: &[f64]) -> SpectralFunction {
        SpectralFunction {
            omegas: omegas.to_vec(),
            values: omegas.iter().map(|&w| linearized_matsubara(w, p)).collect(),
            parity: Parity::Odd,
            tail_corrected: true,
            tail_coefficient: 0.0,
        }
    }

    #[test]
    fn bracket_is_unity_for_linearized_solution() {
        let p = params(0.3);
        let omegas = fit_grid(8.0, DEFAULT_WINDOW, FIT_SAMPLES);
        let b = bracket_series(&analytic_spectral(&p, &omegas), &p).unwrap();
        assert!(b.iter().all(|x| (x - 1.0).abs() < 1e-12));
        for basis in [FitBasis::Even, FitBasis::Mixed] {
            let fit = fit_continuation(&omegas, &b, basis, 6, DEFAULT_WINDOW, 8.0).unwrap();
            assert!((fit.coefficients[0] - 1.0).abs() < 1e-10);
            assert!(fit.coefficients[1..].iter().all(|a| a.abs() < 1e-10));
            fit.validate_bracket().unwrap();
        }
    }

    #[test]
    fn polynomial_recovery() {
        let omegas = fit_grid(8.0, DEFAULT_WINDOW, 80);
        let b: Vec<f64> = omegas
            .iter()
            .map(|w| 1.0 + 0.2 * (w / 8.0).powi(2))
            .collect();
        let fit = fit_continuation(&omegas, &b, FitBasis::Even, 4, DEFAULT_WINDOW, 8.0).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-11);
        assert!((fit.coefficients[1] - 0.2).abs() < 1e-11);
        assert!(fit.coefficients[2].abs() < 1e-11);
        assert!((fit.continued(8.0) - 0.8).norm() < 1e-10);
        assert!(fit_continuation(&omegas, &b, FitBasis::Even, 5, DEFAULT_WINDOW, 8.0).is_err());
    }

    #[test]
    fn odd_powers_continue_to_imaginary_parts() {
        let omegas = fit_grid(8.0, DEFAULT_WINDOW, 80);
        let b: Vec<f64> = omegas
            .iter()
            .map(|w| 1.0 - 0.1 * (w / 8.0).powi(2) + 0.03 * (w / 8.0).powi(3))
            .collect();
        let fit = fit_continuation(&omegas, &b, FitBasis::Mixed, 4, DEFAULT_WINDOW, 8.0).unwrap();
        assert_eq!(fit.powers, vec![0, 2, 3, 4]);
        // x → −ix at x = 1: 1 + 0.1 + 0.03i
        assert!((fit.continued(8.0) - Complex64::new(1.1, 0.03)).norm() < 1e-10);
    }

    #[test]
    fn rational_recovers_rational() {
        let omegas = fit_grid(8.0, DEFAULT_WINDOW, 80);
        let truth = |x2: f64| (1.0 + 0.3 * x2) / (1.0 + 0.1 * x2 + 0.02 * x2 * x2);
        let b: Vec<f64> = omegas.iter().map(|w| truth((w / 8.0).powi(2))).collect();
        let fit = fit_rational(&omegas, &b, DEFAULT_WINDOW, 8.0).unwrap();
        assert!((fit.continued(4.0).re - truth(-0.25)).abs() < 1e-9);
    }

    #[test]
    fn resonance_guard_is_continuous() {
        let p = params(0.2);
        let on = f_apprx(8.0, &p);
        let expect = 4.0 * 8.0 / (PI * p.gamma0) * (2.0 * p.delta / (p.z * 8.0)).sqrt();
        assert!((on / expect - 1.0).abs() < 1e-12);
        for s in [1.0 - 1e-6, 1.0 + 1e-6] {
            assert!((f_apprx(8.0 * s, &p) / on - 1.0).abs() < 1e-5);
        }
        let inside = f_apprx(8.0 * (1.0 + 0.999e-3), &p);
        let outside = f_apprx(8.0 * (1.0 + 1.001e-3), &p);
        assert!((inside / outside - 1.0).abs() < 1e-5);
    }

    #[test]
    fn low_frequency_limit() {
        let p = params(0.3);
        for w in [0.08, 0.4, 0.79] {
            let f2 = f_apprx(w, &p).powi(2);
            let expect = 2.0 * p.delta / (p.z * w);
            assert!((f2 / expect - 1.0).abs() < 0.1, "w={w}");
        }
    }

    #[test]
    fn f_tilde_forms_agree() {
        let p = params(0.3);
        let omegas: Vec<f64> = (1..60).map(|k| 0.3 * k as f64).collect();
        let spec = analytic_spectral(&p, &omegas);
        let generic = f_tilde_factors(&spec, &omegas, &p, BathResponse::Linear).unwrap();
        for (i, &w) in omegas.iter().enumerate() {
            let r = real_ratio(spec.values[i], w, 8.0).unwrap();
            let special = f_tilde_specialized(w, r, &p);
            assert!((generic[i] / special - 1.0).abs() < 1e-10);
            let closed =
                f_tilde_apprx(w, &p) * ((w * w + 64.0) / (w * w + p.gamma0 * w + 64.0)).sqrt();
            assert!((generic[i] / closed - 1.0).abs() < 1e-10);
        }
        let zero = SpectralFunction {
            values: vec![Complex64::new(0.0, 0.0); omegas.len()],
            ..spec
        };
        let bare = f_tilde_factors(&zero, &omegas, &p, BathResponse::Linear).unwrap();
        assert!(omegas
            .iter()
            .zip(&bare)
            .all(|(&w, &f)| (f / f_tilde_apprx(w, &p) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn generic_route_matches_for_linearized_input() {
        let p = params(0.3);
        let omegas = fit_grid(8.0, GENERIC_WINDOW, FIT_SAMPLES);
        let spec = analytic_spectral(&p, &omegas);
        let pulse: Vec<f64> = omegas
            .iter()
            .map(|&w| PI / (PI * w / 16.0).cosh())
            .collect();
        let y = generic_series(&pulse, &spec, &p);
        let rational = fit_rational(&omegas, &y, GENERIC_WINDOW, 8.0).unwrap();
        let poly = fit_continuation(&omegas, &y, FitBasis::Even, 10, GENERIC_WINDOW, 8.0).unwrap();
        let modes: Vec<f64> = (0..=90).map(|k| 8.0 * (0.2 + 0.02 * k as f64)).collect();
        let worst = |f: Vec<f64>| {
            f.iter()
                .zip(&modes)
                .map(|(g, &w)| (g / f_apprx(w, &p) - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let rational_err = worst(f_factors_generic(&rational, &modes, &p));
        assert!(rational_err < 5e-3, "rational {rational_err}");
        // the polynomial cannot follow the pole at 3ω₀
        assert!(worst(f_factors_generic(&poly, &modes, &p)) > rational_err);
    }
}
