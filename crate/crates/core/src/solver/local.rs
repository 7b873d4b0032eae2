//! Local part of the trajectory equation on the half grid:
//! D₂δ − (ω₀²/2)[sin(2φ⁰ + 2δ) − sin 2φ⁰] − σδ = g,
//! with δ(0) = 0 and the Robin condition δ' = −δ/τ at τ_max.

use super::sup;
use crate::error::{Error, Result};

const MAX_NEWTON: usize = 60;
const MAX_HALVINGS: usize = 30;

/// Solve a tridiagonal system in place (Thomas algorithm).
/// `sub[i]` couples row i to i−1, `sup[i]` to i+1.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

pub(crate) struct LocalOperator<'a> {
    pub h: f64,
    pub tau_max: f64,
    pub omega0: f64,
    pub sin2: &'a [f64],
    pub cos2: &'a [f64],
}

impl LocalOperator<'_> {
    fn n(&self) -> usize {
        self.sin2.len() - 1
    }

    /// D₂δ at node i ≥ 1, using the Robin ghost at the far end.
    pub fn second_difference(&self, d: &[f64], i: usize) -> f64 {
        let n = self.n();
        let right = if i == n {
            d[n - 1] - 2.0 * self.h * d[n] / self.tau_max
        } else {
            d[i + 1]
        };
        (right - 2.0 * d[i] + d[i - 1]) / (self.h * self.h)
    }

    /// (ω₀²/2)[sin(2φ⁰ + 2δ) − sin 2φ⁰] and its derivative ω₀²cos(2φ⁰ + 2δ).
    pub fn nonlinear(&self, d: f64, i: usize) -> (f64, f64) {
        let w2 = self.omega0 * self.omega0;
        let (s, c) = (2.0 * d).sin_cos();
        let cos_full = self.cos2[i] * c - self.sin2[i] * s;
        // sin(a+b) − sin a = sin a (cos b − 1) + cos a sin b, with cos b − 1 = −2sin²(b/2)
        let diff = -2.0 * self.sin2[i] * d.sin().powi(2) + self.cos2[i] * s;
        (0.5 * w2 * diff, w2 * cos_full)
    }

    /// Residual D₂δ − NL(δ) − σδ − g at nodes 1..=N (index 0 unused).
    pub fn residual(&self, d: &[f64], sigma: f64, g: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; d.len()];
        for i in 1..d.len() {
            r[i] = self.second_difference(d, i) - self.nonlinear(d[i], i).0 - sigma * d[i] - g[i];
        }
        r
    }

    /// Solve (D₂ − diag(q) − σ)x = rhs with x₀ = 0; `q` holds the potential curvature per node.
    pub fn linear_solve(&self, q: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.n();
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut sub = vec![inv_h2; n];
        let mut sup = vec![inv_h2; n];
        let mut diag: Vec<f64> = (1..=n).map(|i| -2.0 * inv_h2 - q[i] - sigma).collect();
        sub[0] = 0.0;
        sub[n - 1] = 2.0 * inv_h2;
        sup[n - 1] = 0.0;
        diag[n - 1] -= 2.0 / (self.h * self.tau_max);
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs[1..]);
        std::iter::once(0.0).chain(x).collect()
    }

    /// Damped Newton for D₂δ − NL(δ) − σδ = g starting from `d`.
    /// Stops when the residual is below `tol·ω₀²` or the update is below `1e-15`.
    pub fn newton(
        &self,
        mut d: Vec<f64>,
        sigma: f64,
        g: &[f64],
        tol: f64,
    ) -> Result<(Vec<f64>, f64)> {
        let scale = self.omega0 * self.omega0;
        let mut r = self.residual(&d, sigma, g);
        let mut rn = sup(&r) / scale;
        for _ in 0..MAX_NEWTON {
            if rn < tol {
                return Ok((d, rn));
            }
            let q: Vec<f64> = d
                .iter()
                .enumerate()
                .map(|(i, &x)| self.nonlinear(x, i).1)
                .collect();
            let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
            let step = self.linear_solve(&q, sigma, &neg_r);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_HALVINGS {
                let trial: Vec<f64> = d.iter().zip(&step).map(|(x, s)| x + lambda * s).collect();
                let tr = self.residual(&trial, sigma, g);
                let tn = sup(&tr) / scale;
                if tn < rn || tn < tol {
                    d = trial;
                    r = tr;
                    rn = tn;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted || lambda * sup(&step) < 1e-15 {
                break;
            }
        }
        if rn < tol.max(1e-11) {
            Ok((d, rn))
        } else {
            Err(Error::NewtonDiverged { residual: rn })
        }
    }
}
