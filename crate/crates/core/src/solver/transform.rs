//! Matsubara transform δφ₀(iω) = ∫ e^{−iωτ} δφ₀(τ) dτ of a solved trajectory.
//!
//! The grid part integrates the piecewise-linear interpolant exactly (Filon
//! weights); beyond τ_max the c/τ continuation contributes −2ic[π/2 − Si(ωτ_max)].

use super::Trajectory;
use crate::error::{domain, Error, Result};
use crate::special::incomplete_gamma0;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Log-slope of |δφ₀| over the last decade must lie within this of −1.
pub const TAIL_SLOPE_TOLERANCE: f64 = 0.15;
const TAIL_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailCorrection {
    #[default]
    Applied,
    Omitted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub parity: Parity,
    pub tail_corrected: bool,
    pub tail_coefficient: f64,
}

impl SpectralFunction {
    /// Cubic-spline interpolation of the imaginary part (real part is zero by parity).
    pub fn interpolate(&self, omega: f64) -> Result<Complex64> {
        let ims: Vec<f64> = self.values.iter().map(|z| z.im).collect();
        let spline = NaturalSpline::new(&self.omegas, &ims)?;
        Ok(Complex64::new(0.0, spline.eval(omega)?))
    }

    pub fn interpolate_many(&self, omegas: &[f64]) -> Result<Vec<Complex64>> {
        let ims: Vec<f64> = self.values.iter().map(|z| z.im).collect();
        let spline = NaturalSpline::new(&self.omegas, &ims)?;
        omegas
            .iter()
            .map(|&w| Ok(Complex64::new(0.0, spline.eval(w)?)))
            .collect()
    }

    /// max|Re| / max|Im|.
    pub fn real_leakage(&self) -> f64 {
        let re = self.values.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
        let im = self.values.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        if im == 0.0 {
            0.0
        } else {
            re / im
        }
    }
}

/// Natural cubic spline on strictly increasing knots.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain(
                "NaturalSpline",
                "need >= 3 strictly increasing knots",
            ));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let k = n - 2;
        let sub: Vec<f64> = (0..k).map(|i| if i == 0 { 0.0 } else { h[i] }).collect();
        let diag: Vec<f64> = (0..k).map(|i| 2.0 * (h[i] + h[i + 1])).collect();
        let sup: Vec<f64> = (0..k)
            .map(|i| if i + 1 == k { 0.0 } else { h[i + 1] })
            .collect();
        let rhs: Vec<f64> = (0..k)
            .map(|i| 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]))
            .collect();
        let inner = super::local::solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let m = std::iter::once(0.0)
            .chain(inner)
            .chain(std::iter::once(0.0))
            .collect();
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.x[0], *self.x.last().expect("non-empty"));
        let slack = 1e-12 * (hi - lo);
        if t < lo - slack || t > hi + slack {
            return Err(domain(
                "NaturalSpline::eval",
                format!("{t} outside [{lo}, {hi}]"),
            ));
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        Ok(a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0)
    }
}

/// π/2 − Si(x) for x ≥ 0.
fn sine_integral_complement(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    Ok(incomplete_gamma0(Complex64::new(0.0, -x))?.im)
}

/// Verify the 1/τ regime over the last decade of the grid.
pub fn check_tail_regime(traj: &Trajectory) -> Result<()> {
    let half = traj.half();
    if half.iter().all(|&x| x == 0.0) {
        return Ok(());
    }
    let n = traj.grid.half();
    let h = traj.grid.step();
    let start = (n / 10).max(1);
    let idx: Vec<usize> = (0..TAIL_SAMPLES)
        .map(|k| {
            let f = k as f64 / (TAIL_SAMPLES - 1) as f64;
            ((start as f64) * 10f64.powf(f)).round().min(n as f64) as usize
        })
        .collect();
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        if i == j {
            continue;
        }
        if half[i] == 0.0 || half[j] == 0.0 || half[i].signum() != half[j].signum() {
            return Err(Error::TailRegime(
                "trajectory changes sign in the last decade; increase tau_max".into(),
            ));
        }
        let slope = (half[j].abs() / half[i].abs()).ln() / ((j as f64 * h) / (i as f64 * h)).ln();
        if (slope + 1.0).abs() > TAIL_SLOPE_TOLERANCE {
            return Err(Error::TailRegime(format!(
                "log-slope {slope:.3} at tau = {:.3e} is not within {TAIL_SLOPE_TOLERANCE} of -1; increase tau_max",
                i as f64 * h
            )));
        }
    }
    Ok(())
}

/// ∫₀^{τ_max} sin(ωτ) δ(τ) dτ for the piecewise-linear interpolant.
fn grid_sine_integral(half: &[f64], h: f64, omega: f64) -> f64 {
    let n = half.len() - 1;
    let tau_max = n as f64 * h;
    if omega == 0.0 {
        return 0.0;
    }
    let x = 0.5 * omega * h;
    let sinc2 = if x.abs() < 1e-4 {
        1.0 - x * x / 3.0
    } else {
        (x.sin() / x).powi(2)
    };
    let interior: f64 = (1..n)
        .map(|i| half[i] * (omega * i as f64 * h).sin())
        .sum::<f64>()
        * h
        * sinc2;
    // half-hat on [τ_max − h, τ_max] rising to 1
    let (st, ct) = (omega * tau_max).sin_cos();
    let wh = omega * h;
    let end = if wh.abs() < 1e-2 {
        // Taylor expansion about τ_max; the closed form cancels for small ωh
        h * (st / 2.0 - wh * ct / 6.0 - wh * wh * st / 24.0 + wh.powi(3) * ct / 120.0)
    } else {
        (-h * ct / omega + (st - (omega * (tau_max - h)).sin()) / (omega * omega)) / h
    };
    interior + half[n] * end
}

pub fn matsubara_transform(traj: &Trajectory, omegas: &[f64]) -> Result<SpectralFunction> {
    matsubara_transform_with(traj, omegas, TailCorrection::Applied)
}

pub fn matsubara_transform_with(
    traj: &Trajectory,
    omegas: &[f64],
    tail: TailCorrection,
) -> Result<SpectralFunction> {
    if tail == TailCorrection::Applied {
        check_tail_regime(traj)?;
    }
    let half = traj.half();
    let h = traj.grid.step();
    let c = traj.tail_coefficient();
    let values = omegas
        .iter()
        .map(|&w| {
            let a = w.abs();
            let mut s = grid_sine_integral(half, h, a);
            if tail == TailCorrection::Applied && c != 0.0 && a > 0.0 {
                s += c * sine_integral_complement(a * traj.grid.tau_max)?;
            }
            Ok(Complex64::new(0.0, -2.0 * s * w.signum()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralFunction {
        omegas: omegas.to_vec(),
        values,
        parity: Parity::Odd,
        tail_corrected: tail == TailCorrection::Applied,
        tail_coefficient: c,
    })
}
