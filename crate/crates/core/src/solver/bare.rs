//! Uncoupled instanton: the sine-Gordon kink and a generic double-well path.

use super::TimeGrid;
use crate::error::{domain, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// 2·arctan(e^{ω₀τ}).
pub fn phi0_bare(tau: f64, omega0: f64) -> f64 {
    2.0 * (omega0 * tau).exp().atan()
}

/// dφ/dτ = ω₀/cosh(ω₀τ).
pub fn phi0_bare_derivative(tau: f64, omega0: f64) -> f64 {
    omega0 / (omega0 * tau).cosh()
}

/// π/(iω cosh(πω/2ω₀)).
pub fn phi0_bare_matsubara(omega: f64, omega0: f64) -> Result<Complex64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(domain("phi0_bare_matsubara", format!("omega = {omega}")));
    }
    let denom = omega * (PI * omega / (2.0 * omega0)).cosh();
    Ok(Complex64::new(0.0, -PI / denom))
}

/// Zero-energy path between two degenerate minima, sampled on a full grid.
#[derive(Debug, Clone)]
pub struct BarePath {
    pub grid: TimeGrid,
    pub phi: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl BarePath {
    /// ∫ e^{−iωτ} dφ/dτ dτ on the grid (trapezoid; the integrand decays exponentially).
    pub fn velocity_transform(&self, omega: f64) -> Complex64 {
        let h = self.grid.step();
        self.grid
            .full_taus()
            .iter()
            .zip(&self.velocity)
            .map(|(&t, &v)| Complex64::from_polar(v, -omega * t))
            .sum::<Complex64>()
            * h
    }
}

const RK_SUBSTEPS: usize = 8;

/// Bare instanton of `potential` between `phi_a` < `phi_b` for charging
/// capacitance `c0`. Integrates dφ/dτ = √(2(V − V_a)/C₀) outward from the
/// midpoint, which sits at τ = 0.
pub fn solve_bare_generic<V: Fn(f64) -> f64>(
    potential: V,
    phi_a: f64,
    phi_b: f64,
    c0: f64,
    grid: TimeGrid,
) -> Result<BarePath> {
    if !(phi_b > phi_a) || !(c0 > 0.0) {
        return Err(domain(
            "solve_bare_generic",
            "need phi_a < phi_b and C0 > 0",
        ));
    }
    let va = potential(phi_a);
    let vb = potential(phi_b);
    let scale = (0..=64)
        .map(|k| (potential(phi_a + (phi_b - phi_a) * k as f64 / 64.0) - va).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 || (va - vb).abs() > 1e-10 * scale {
        return Err(domain(
            "solve_bare_generic",
            format!("minima not degenerate: V_a = {va}, V_b = {vb}"),
        ));
    }
    if (1..64).any(|k| potential(phi_a + (phi_b - phi_a) * k as f64 / 64.0) <= va) {
        return Err(domain(
            "solve_bare_generic",
            "potential must exceed V_a strictly between the minima",
        ));
    }
    let speed = |phi: f64| {
        if phi <= phi_a || phi >= phi_b {
            0.0
        } else {
            (2.0 * (potential(phi) - va).max(0.0) / c0).sqrt()
        }
    };
    let n = grid.half();
    let h = grid.step() / RK_SUBSTEPS as f64;
    let rk4 = |mut phi: f64, dir: f64| {
        for _ in 0..RK_SUBSTEPS {
            let k1 = speed(phi);
            let k2 = speed(phi + 0.5 * dir * h * k1);
            let k3 = speed(phi + 0.5 * dir * h * k2);
            let k4 = speed(phi + dir * h * k3);
            phi += dir * h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        phi
    };
    let mid = 0.5 * (phi_a + phi_b);
    let mut phi = vec![mid; 2 * n + 1];
    for i in 1..=n {
        phi[n + i] = rk4(phi[n + i - 1], 1.0);
        phi[n - i] = rk4(phi[n - i + 1], -1.0);
    }
    let velocity = phi.iter().map(|&p| speed(p)).collect();
    Ok(BarePath {
        grid,
        phi,
        velocity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_limits() {
        let w0 = 8.0;
        assert!((phi0_bare(0.0, w0) - PI / 2.0).abs() < 1e-15);
        assert!(phi0_bare(-10.0, w0) < 1e-30);
        assert!((phi0_bare(10.0, w0) - PI).abs() < 1e-15);
        let h = 1e-6;
        let slope = (phi0_bare(h, w0) - phi0_bare(-h, w0)) / (2.0 * h);
        assert!((slope - w0).abs() < 1e-6);
        assert_eq!(phi0_bare_derivative(0.0, w0), w0);
    }

    #[test]
    fn kink_transform() {
        let w0 = 8.0;
        let v = phi0_bare_matsubara(w0, w0).unwrap();
        assert_eq!(v.re, 0.0);
        assert!((v.im + PI / (w0 * (PI / 2.0).cosh())).abs() < 1e-15);
        let m = phi0_bare_matsubara(-3.0, w0).unwrap();
        assert_eq!(m, -phi0_bare_matsubara(3.0, w0).unwrap());
        assert!(phi0_bare_matsubara(0.0, w0).is_err());
        assert!(phi0_bare_matsubara(40.0 * w0, w0).unwrap().norm() < 1e-20);
    }

    #[test]
    fn generic_reproduces_cosine_kink() {
        let (w0, ec) = (8.0, 1.6);
        let ej = w0 * w0 / (8.0 * ec);
        let grid = TimeGrid::for_omega0(w0, 20.0, 0.02).unwrap();
        let path =
            solve_bare_generic(|p| ej * (1.0 - (2.0 * p).cos()), 0.0, PI, 0.5 / ec, grid).unwrap();
        let err = grid
            .full_taus()
            .iter()
            .zip(&path.phi)
            .map(|(&t, &p)| (p - phi0_bare(t, w0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "err {err}");
        let vt = path.velocity_transform(w0);
        assert!((vt.re - PI / (PI / 2.0).cosh()).abs() < 1e-6);
        assert!(vt.im.abs() < 1e-9);
    }

    #[test]
    fn generic_quartic_well() {
        let (lam, a, c0) = (3.0, 1.2, 0.4);
        let grid = TimeGrid::new(4.0, 4001).unwrap();
        let path = solve_bare_generic(|p| lam * (p * p - a * a).powi(2), -a, a, c0, grid).unwrap();
        let rate = (2.0 * lam / c0).sqrt() * a;
        let err = grid
            .full_taus()
            .iter()
            .zip(&path.phi)
            .map(|(&t, &p)| (p - a * (rate * t).tanh()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "err {err}");
    }

    #[test]
    fn heavier_charge_mass_slows_tunneling() {
        let grid = TimeGrid::new(6.0, 6001).unwrap();
        let v = |p: f64| 1.0 - (2.0 * p).cos();
        let light = solve_bare_generic(v, 0.0, PI, 0.5, grid).unwrap();
        let heavy = solve_bare_generic(v, 0.0, PI, 2.0, grid).unwrap();
        let crossing = |path: &BarePath| {
            let n = grid.half();
            let i = (n..grid.n_points)
                .find(|&i| path.phi[i] > 3.0 * PI / 4.0)
                .unwrap();
            grid.full_taus()[i]
        };
        let ratio = crossing(&heavy) / crossing(&light);
        assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn rejects_non_degenerate_minima() {
        let grid = TimeGrid::new(2.0, 201).unwrap();
        assert!(
            solve_bare_generic(|p| p * p * (p - 1.0).powi(2) + 0.1 * p, 0.0, 1.0, 1.0, grid)
                .is_err()
        );
    }
}
