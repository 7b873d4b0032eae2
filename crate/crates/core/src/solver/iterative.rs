//! Outer fixed-point route: the array response is lagged by one sweep and
//! applied spectrally, the local equation is solved by Newton each sweep.

use super::bath::{sine_panel, BathResponse};
use super::local::LocalOperator;
use super::{check_tail, sup, sup_diff, Method, Problem, SolverOptions, TimeGrid, Trajectory};
use crate::device::CircuitParams;
use crate::error::{Error, Result};
use crate::quad::SineTransform;
use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

/// Inner Newton tolerance (residual in units of ω₀²).
pub(crate) const NEWTON_TOL: f64 = 1e-12;
/// Width of the analytic tail subtracted before the FFT, in units of τ_max.
const TAIL_WIDTH: f64 = 0.1;
/// The padded periodic box is at least this many times τ_max.
const PADDING: usize = 4;

/// Acceleration of the outer fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mixing {
    Plain,
    Linear { alpha: f64 },
    Anderson { depth: usize },
}

impl Default for Mixing {
    fn default() -> Self {
        Self::Anderson { depth: 6 }
    }
}

/// Stateful mixer: given the current iterate x and its image G(x), proposes the next x.
pub(crate) struct Mixer {
    kind: Mixing,
    xs: VecDeque<Vec<f64>>,
    gs: VecDeque<Vec<f64>>,
}

impl Mixer {
    pub fn new(kind: Mixing) -> Self {
        Self {
            kind,
            xs: VecDeque::new(),
            gs: VecDeque::new(),
        }
    }

    pub fn next(&mut self, x: &[f64], g: &[f64]) -> Vec<f64> {
        match self.kind {
            Mixing::Plain => g.to_vec(),
            Mixing::Linear { alpha } => x
                .iter()
                .zip(g)
                .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
                .collect(),
            Mixing::Anderson { depth } => self.anderson(x, g, depth),
        }
    }

    fn anderson(&mut self, x: &[f64], g: &[f64], depth: usize) -> Vec<f64> {
        self.xs.push_back(x.to_vec());
        self.gs.push_back(g.to_vec());
        if self.xs.len() > depth + 1 {
            self.xs.pop_front();
            self.gs.pop_front();
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return g.to_vec();
        }
        let n = x.len();
        let f = |k: usize, i: usize| self.gs[k][i] - self.xs[k][i];
        let df = DMatrix::from_fn(n, m, |i, j| f(j + 1, i) - f(j, i));
        let fk = DVector::from_fn(n, |i, _| f(m, i));
        let gamma = match df
            .clone()
            .svd(true, true)
            .solve(&fk, 1e-12 * fk.amax().max(1e-300))
        {
            Ok(gm) => gm,
            Err(_) => return g.to_vec(),
        };
        (0..n)
            .map(|i| {
                let corr: f64 = (0..m)
                    .map(|j| gamma[j] * (self.gs[j + 1][i] - self.gs[j][i]))
                    .sum();
                g[i] - corr
            })
            .collect()
    }
}

/// R̂ applied to an odd function given on the half grid with a c/τ continuation.
/// The continuation is carried by T(τ) = cτ/(τ² + b²), whose response is known
/// in closed form up to one sine transform; the remainder decays as τ⁻³ and is
/// handled by a padded FFT.
pub(crate) struct SpectralResponse {
    n: usize,
    h: f64,
    tau_max: f64,
    b: f64,
    n_fft: usize,
    response: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    unit_tail_response: Vec<f64>,
}

impl SpectralResponse {
    pub fn new(grid: &TimeGrid, params: &CircuitParams, bath: BathResponse) -> Self {
        let n = grid.half();
        let h = grid.step();
        let n_fft = (2 * PADDING * n + 2).next_power_of_two();
        let dw = 2.0 * PI / (n_fft as f64 * h);
        let response = (0..n_fft)
            .map(|k| {
                let kk = if k <= n_fft / 2 { k } else { n_fft - k };
                bath.eval(kk as f64 * dw, params.v, params.gamma0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let b = TAIL_WIDTH * grid.tau_max;
        let st = SineTransform::new(
            |w| bath.eval(w, params.v, params.gamma0) * (-b * w).exp(),
            40.0 / b,
            sine_panel(grid, params.omega0),
        );
        let unit_tail_response = grid.half_taus().iter().map(|&t| st.eval(t)).collect();
        Self {
            n,
            h,
            tau_max: grid.tau_max,
            b,
            n_fft,
            response,
            forward: planner.plan_fft_forward(n_fft),
            inverse: planner.plan_fft_inverse(n_fft),
            unit_tail_response,
        }
    }

    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        let c = self.tau_max * d[self.n];
        let b2 = self.b * self.b;
        let half = self.n_fft / 2;
        let mut buf = vec![Complex::new(0.0, 0.0); self.n_fft];
        for j in 1..half {
            let t = j as f64 * self.h;
            let val = if j <= self.n {
                d[j] - c * t / (t * t + b2)
            } else {
                c * b2 / (t * (t * t + b2))
            };
            buf[j] = Complex::new(val, 0.0);
            buf[self.n_fft - j] = Complex::new(-val, 0.0);
        }
        self.forward.process(&mut buf);
        for (z, r) in buf.iter_mut().zip(&self.response) {
            *z *= r / self.n_fft as f64;
        }
        self.inverse.process(&mut buf);
        (0..=self.n)
            .map(|j| {
                if j == 0 {
                    0.0
                } else {
                    buf[j].re + c * self.unit_tail_response[j]
                }
            })
            .collect()
    }
}

/// Fixed-point route: each sweep solves D₂δ − NL(δ) − vΓ₀δ = F − (vΓ₀ − R̂)δ_prev.
pub fn solve_iterative(
    params: &CircuitParams,
    grid: TimeGrid,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if params.gamma0 == 0.0 {
        return Ok(Trajectory::zero(grid, Method::Iterative));
    }
    let problem = Problem::new(params, grid, opts.bath);
    let op = LocalOperator {
        h: grid.step(),
        tau_max: grid.tau_max,
        omega0: params.omega0,
        sin2: &problem.sin2,
        cos2: &problem.cos2,
    };
    let response = SpectralResponse::new(&grid, params, opts.bath);
    let sigma = params.v * params.gamma0;
    let mut mixer = Mixer::new(opts.mixing);
    let mut d = vec![0.0; grid.half() + 1];
    for it in 1..=opts.max_iter {
        let rd = response.apply(&d);
        let g: Vec<f64> = (0..d.len())
            .map(|i| problem.forcing[i] - sigma * d[i] + rd[i])
            .collect();
        let (image, _) = op.newton(d.clone(), sigma, &g, NEWTON_TOL)?;
        let change = sup_diff(&image, &d);
        if change < opts.tol {
            let residual = full_residual(&op, &response, &problem.forcing, &image);
            check_tail(&image)?;
            return Ok(Trajectory::from_half(
                grid,
                &image,
                residual,
                it,
                Method::Iterative,
            ));
        }
        d = mixer.next(&d, &image);
        if !d.iter().all(|x| x.is_finite()) {
            return Err(Error::NewtonDiverged { residual: f64::NAN });
        }
    }
    let rd = response.apply(&d);
    let g: Vec<f64> = (0..d.len())
        .map(|i| problem.forcing[i] - sigma * d[i] + rd[i])
        .collect();
    let (image, _) = op.newton(d.clone(), sigma, &g, NEWTON_TOL)?;
    Err(Error::NotConverged {
        method: "iterative",
        iterations: opts.max_iter,
        residual: sup_diff(&image, &d),
    })
}

/// sup|D₂δ − NL(δ) − R̂δ − F| / ω₀².
fn full_residual(
    op: &LocalOperator,
    response: &SpectralResponse,
    forcing: &[f64],
    d: &[f64],
) -> f64 {
    let rd = response.apply(d);
    let g: Vec<f64> = forcing.iter().zip(&rd).map(|(f, r)| f + r).collect();
    sup(&op.residual(d, 0.0, &g)) / (op.omega0 * op.omega0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ArrayScales, Coupling};

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

    #[test]
    fn spectral_response_of_lorentzian() {
        // Ohmic R̂[τ/(τ²+a²)] = 2Γ₀aτ/(τ²+a²)²
        let p = params(0.3);
        let grid = TimeGrid::default_for(8.0);
        let resp = SpectralResponse::new(&grid, &p, BathResponse::Linear);
        let a = 0.05;
        let taus = grid.half_taus();
        let d: Vec<f64> = taus.iter().map(|&t| t / (t * t + a * a)).collect();
        let out = resp.apply(&d);
        let peak = p.gamma0 / (a * a);
        for (i, &t) in taus.iter().enumerate().skip(1).step_by(37) {
            let exact = 2.0 * p.gamma0 * a * t / (t * t + a * a).powi(2);
            assert!(
                (out[i] - exact).abs() < 1e-6 * peak,
                "t={t} {} {}",
                out[i],
                exact
            );
        }
    }

    #[test]
    fn spectral_response_of_gaussian_derivative() {
        // δ = τe^{−τ²/2s²}: R̂δ for Ohmic R by direct quadrature of its transform
        let p = params(0.3);
        let grid = TimeGrid::default_for(8.0);
        let resp = SpectralResponse::new(&grid, &p, BathResponse::Linear);
        let s = 0.3;
        let d: Vec<f64> = grid
            .half_taus()
            .iter()
            .map(|&t| t * (-t * t / (2.0 * s * s)).exp())
            .collect();
        let out = resp.apply(&d);
        // transform: −i√(2π) s³ ω e^{−s²ω²/2}; response = (1/π)∫₀^∞ Γ₀ω·√(2π)s³ω e^{…} sin(ωτ) dω
        for i in [20usize, 120, 300, 2000] {
            let t = grid.tau(i);
            let q = crate::quad::adaptive(
                |w| {
                    p.gamma0
                        * w
                        * (2.0 * PI).sqrt()
                        * s.powi(3)
                        * w
                        * (-s * s * w * w / 2.0).exp()
                        * (w * t).sin()
                },
                0.0,
                40.0 / s,
                1e-14,
                1e-12,
                5000,
            )
            .unwrap()
            .value
                / PI;
            assert!((out[i] - q).abs() < 1e-7, "i={i} {} {q}", out[i]);
        }
    }

    #[test]
    fn decoupled_limit() {
        let p = params(0.0);
        let t = solve_iterative(&p, TimeGrid::default_for(8.0), &SolverOptions::default()).unwrap();
        assert_eq!(t.iterations, 1);
        assert_eq!(t.sup_norm(), 0.0);
    }

    #[test]
    fn mixing_schemes_agree() {
        let p = params(0.1);
        let grid = TimeGrid::for_omega0(8.0, 80.0, 0.04).unwrap();
        let mut sols = Vec::new();
        for mixing in [Mixing::Anderson { depth: 6 }, Mixing::Linear { alpha: 0.5 }] {
            let opts = SolverOptions {
                tol: 1e-10,
                max_iter: 2000,
                mixing,
                ..Default::default()
            };
            sols.push(solve_iterative(&p, grid, &opts).unwrap());
        }
        assert!(sols[0].iterations < sols[1].iterations);
        assert!(sup_diff(&sols[0].dphi0, &sols[1].dphi0) < 1e-8);
    }

    #[test]
    fn sign_symmetry_and_tail() {
        let p = params(0.3);
        let t = solve_iterative(&p, TimeGrid::default_for(8.0), &SolverOptions::default()).unwrap();
        assert!(t.antisymmetry_error() < 1e-8);
        assert!(t.half()[1..].iter().all(|&x| x < 0.0));
        assert!(t.residual < 1e-8, "residual {}", t.residual);
        assert!(t.iterations < 100, "iterations {}", t.iterations);
    }
}
