//! Kernel route: the array enters through the explicit friction kernel,
//! D₂δ − NL(δ) − vΓ₀δ + K*δ = F, solved by damped Newton.
//!
//! K is narrower than a grid step, so the convolution integrates K exactly
//! against the piecewise-cubic Lagrange interpolant of δ (product integration).

use super::iterative::Mixer;
use super::local::LocalOperator;
use super::{check_tail, sup, Method, Mixing, Problem, SolverOptions, TimeGrid, Trajectory};
use crate::device::CircuitParams;
use crate::error::{Error, Result};
use crate::quad::{adaptive, adaptive_semi_infinite, gauss_legendre};
use crate::special::{kernel_k, KernelParams};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Product weights switch from adaptive to fixed Gauss–Legendre once 2v|τ| exceeds this.
const NEAR_FIELD_X: f64 = 40.0;
const MAX_NEWTON: usize = 40;
const MAX_INNER: usize = 400;

/// Cubic Lagrange basis on nodes {−1, 0, 1, 2}.
fn lagrange(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Discrete K* for odd functions on the half grid with a c/τ continuation.
pub(crate) struct KernelConvolution {
    n: usize,
    h: f64,
    tau_max: f64,
    /// A_r[k] for k ∈ [−N−2, 2N+3], stored at k + N + 2.
    a: [Vec<f64>; 4],
    w_hat: Vec<Complex<f64>>,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// ∫_{τ_max}^∞ [K(s−τ) − K(s+τ)]/s ds on the half grid.
    exterior: Vec<f64>,
}

impl KernelConvolution {
    pub fn new(grid: &TimeGrid, kp: KernelParams) -> Result<Self> {
        let n = grid.half();
        let h = grid.step();
        let ks: Vec<i64> = (-(n as i64) - 2..=2 * n as i64 + 3).collect();
        let mut a: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; ks.len()]);
        let near = (NEAR_FIELD_X / (2.0 * kp.v * h)).ceil() as i64 + 1;
        let scale = kp.k_zero() * h;
        for (idx, &k) in ks.iter().enumerate() {
            let kf = k as f64;
            if k.abs() <= near {
                for (r, ar) in a.iter_mut().enumerate() {
                    let f = |t: f64| kernel_k((kf - t) * h, kp) * lagrange(t)[r];
                    ar[idx] = h * adaptive(f, 0.0, 1.0, 1e-15 * scale, 1e-13, 400)?.value;
                }
            } else {
                let mut acc = [0.0; 4];
                for (t, wt) in gauss_legendre(16).mapped(0.0, 1.0) {
                    let kv = kernel_k((kf - t) * h, kp) * wt;
                    for (slot, l) in acc.iter_mut().zip(lagrange(t)) {
                        *slot += kv * l;
                    }
                }
                for r in 0..4 {
                    a[r][idx] = h * acc[r];
                }
            }
        }
        // combined Toeplitz weights w[d] = Σ_r A_r[d + r], d ∈ [−N−1, 2N+1]
        let off = n as i64 + 2;
        let w: Vec<f64> = (-(n as i64) - 1..=2 * n as i64 + 1)
            .map(|d| {
                (0..4)
                    .map(|r| a[r][(d + r as i64 - 1 + off) as usize])
                    .sum()
            })
            .collect();
        let len = (w.len() + 2 * n + 3).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut w_hat: Vec<Complex<f64>> = w.iter().map(|&x| Complex::new(x, 0.0)).collect();
        w_hat.resize(len, Complex::new(0.0, 0.0));
        forward.process(&mut w_hat);

        let tau_max = grid.tau_max;
        let exterior = grid
            .half_taus()
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    return Ok(0.0);
                }
                let f = |s: f64| (kernel_k(s - t, kp) - kernel_k(s + t, kp)) / s;
                Ok(adaptive_semi_infinite(f, tau_max, 1e-16 * kp.k_zero(), 1e-11)?.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            h,
            tau_max,
            a,
            w_hat,
            len,
            forward,
            inverse,
            exterior,
        })
    }

    fn a_at(&self, r: usize, k: i64) -> f64 {
        self.a[r][(k + self.n as i64 + 2) as usize]
    }

    /// Convolution of the cubic interpolant of `e` (nodes m ∈ [−N−1, N+1],
    /// stored at m + N + 1) over [−τ_max, τ_max], evaluated at nodes 0..=N.
    pub fn convolve_extended(&self, e: &[f64]) -> Vec<f64> {
        let n = self.n as i64;
        let mut buf: Vec<Complex<f64>> = e.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(self.len, Complex::new(0.0, 0.0));
        self.forward.process(&mut buf);
        for (z, w) in buf.iter_mut().zip(&self.w_hat) {
            *z *= w / self.len as f64;
        }
        self.inverse.process(&mut buf);
        let mut out: Vec<f64> = (0..=n).map(|i| buf[(i + 2 * n + 2) as usize].re).collect();
        // remove node/basis pairs whose interval j = m − r lies outside [−N, N−1]
        for m in [-n - 1, -n, -n + 1, n - 1, n, n + 1] {
            let em = e[(m + n + 1) as usize];
            if em == 0.0 {
                continue;
            }
            for r in 0..4i64 {
                let j = m - (r - 1);
                if (-n..n).contains(&j) {
                    continue;
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o -= self.a_at(r as usize, i as i64 - j) * em;
                }
            }
        }
        out
    }

    /// (K*δ)(τ_i) for odd δ given on the half grid, including the c/τ exterior.
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        let n = self.n;
        let c = self.tau_max * d[n];
        let ghost = c / (self.tau_max + self.h);
        let e: Vec<f64> = (0..2 * n + 3)
            .map(|p| {
                let m = p as i64 - n as i64 - 1;
                let (s, k) = (m.signum() as f64, m.unsigned_abs() as usize);
                if k > n {
                    s * ghost
                } else {
                    s * d[k]
                }
            })
            .collect();
        let mut out = self.convolve_extended(&e);
        out[0] = 0.0;
        for (o, x) in out.iter_mut().zip(&self.exterior).skip(1) {
            *o += c * x;
        }
        out
    }
}

struct KernelSystem<'a> {
    op: LocalOperator<'a>,
    conv: KernelConvolution,
    forcing: &'a [f64],
    mass: f64,
}

impl KernelSystem<'_> {
    /// Nonlocal linear part −vΓ₀x + K*x.
    fn nonlocal(&self, x: &[f64]) -> Vec<f64> {
        self.conv
            .apply(x)
            .iter()
            .zip(x)
            .map(|(k, v)| k - self.mass * v)
            .collect()
    }

    fn residual(&self, d: &[f64]) -> Vec<f64> {
        let lx = self.nonlocal(d);
        let g: Vec<f64> = self.forcing.iter().zip(&lx).map(|(f, l)| f - l).collect();
        self.op.residual(d, 0.0, &g)
    }

    /// Solve (P′ + L)Δ = rhs by preconditioned Richardson with Anderson acceleration,
    /// where P′ = D₂ − diag(q) is the local Jacobian.
    fn newton_step(&self, q: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let mut mixer = Mixer::new(Mixing::Anderson { depth: 8 });
        let mut x = self.op.linear_solve(q, 0.0, rhs);
        let target = 1e-14 * sup(&x).max(1e-300);
        for _ in 0..MAX_INNER {
            let lx = self.nonlocal(&x);
            let g: Vec<f64> = rhs.iter().zip(&lx).map(|(r, l)| r - l).collect();
            let image = self.op.linear_solve(q, 0.0, &g);
            if super::sup_diff(&image, &x) < target {
                return Ok(image);
            }
            x = mixer.next(&x, &image);
        }
        Err(Error::NotConverged {
            method: "integro_differential (linear)",
            iterations: MAX_INNER,
            residual: f64::NAN,
        })
    }
}

pub fn solve_integro_differential(
    params: &CircuitParams,
    grid: TimeGrid,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if params.gamma0 == 0.0 {
        return Ok(Trajectory::zero(grid, Method::IntegroDifferential));
    }
    let problem = Problem::new(params, grid, opts.bath);
    let system = KernelSystem {
        op: LocalOperator {
            h: grid.step(),
            tau_max: grid.tau_max,
            omega0: params.omega0,
            sin2: &problem.sin2,
            cos2: &problem.cos2,
        },
        conv: KernelConvolution::new(&grid, params.kernel())?,
        forcing: &problem.forcing,
        mass: params.v * params.gamma0,
    };
    let scale = params.omega0 * params.omega0;
    let mut d = vec![0.0; grid.half() + 1];
    let mut r = system.residual(&d);
    let mut rn = sup(&r) / scale;
    for it in 1..=MAX_NEWTON.min(opts.max_iter) {
        let q: Vec<f64> = d
            .iter()
            .enumerate()
            .map(|(i, &x)| system.op.nonlinear(x, i).1)
            .collect();
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let step = system.newton_step(&q, &neg)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = d.iter().zip(&step).map(|(x, s)| x + lambda * s).collect();
            let tr = system.residual(&trial);
            let tn = sup(&tr) / scale;
            if tn < rn || lambda < 1e-6 {
                d = trial;
                r = tr;
                rn = tn;
                break;
            }
            lambda *= 0.5;
        }
        if lambda * sup(&step) < opts.tol {
            check_tail(&d)?;
            return Ok(Trajectory::from_half(
                grid,
                &d,
                rn,
                it,
                Method::IntegroDifferential,
            ));
        }
        if lambda < 1e-6 {
            return Err(Error::NewtonDiverged { residual: rn });
        }
    }
    Err(Error::NotConverged {
        method: "integro_differential",
        iterations: MAX_NEWTON,
        residual: rn,
    })
}
