//! Euclidean instanton trajectory of the transmon coupled to the array.
//!
//! All solvers work with the deviation δφ₀ = φ₀ − φ₀⁽⁰⁾ on the half grid
//! τ ∈ [0, τ_max]; the full trajectory is its odd extension. Beyond τ_max
//! the deviation is continued as c/τ with c = τ_max·δφ₀(τ_max).

pub mod bare;
pub mod bath;
pub mod integro;
pub mod iterative;
pub mod linearized;
pub mod local;
pub mod transform;

use crate::device::CircuitParams;
use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub use bare::{phi0_bare, phi0_bare_matsubara, solve_bare_generic, BarePath};
pub use bath::{forcing_term, BathResponse};
pub use integro::solve_integro_differential;
pub use iterative::{solve_iterative, Mixing};
pub use linearized::{linearized_matsubara, linearized_trajectory};
pub use transform::{check_tail_regime, matsubara_transform, Parity, SpectralFunction};

/// Symmetric imaginary-time grid with τ = 0 on a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub tau_max: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub const DEFAULT_TAU_MAX_OMEGA0: f64 = 100.0;
    pub const DEFAULT_STEP_OMEGA0: f64 = 0.02;

    pub fn new(tau_max: f64, n_points: usize) -> Result<Self> {
        if !(tau_max > 0.0) || n_points < 5 || n_points.is_multiple_of(2) {
            return Err(domain(
                "TimeGrid",
                format!("tau_max = {tau_max}, n_points = {n_points}"),
            ));
        }
        Ok(Self { tau_max, n_points })
    }

    /// Grid with half-width `tau_max_omega0/ω₀` and spacing at most `step_omega0/ω₀`.
    pub fn for_omega0(omega0: f64, tau_max_omega0: f64, step_omega0: f64) -> Result<Self> {
        let half = (tau_max_omega0 / step_omega0).round() as usize;
        Self::new(tau_max_omega0 / omega0, 2 * half + 1)
    }

    pub fn default_for(omega0: f64) -> Self {
        Self::for_omega0(
            omega0,
            Self::DEFAULT_TAU_MAX_OMEGA0,
            Self::DEFAULT_STEP_OMEGA0,
        )
        .expect("defaults are valid")
    }

    /// Number of intervals on the half grid.
    pub fn half(&self) -> usize {
        (self.n_points - 1) / 2
    }

    pub fn step(&self) -> f64 {
        2.0 * self.tau_max / (self.n_points - 1) as f64
    }

    /// τ of half-grid node `i`.
    pub fn tau(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn half_taus(&self) -> Vec<f64> {
        (0..=self.half()).map(|i| self.tau(i)).collect()
    }

    pub fn full_taus(&self) -> Vec<f64> {
        let n = self.half() as i64;
        let h = self.step();
        (-n..=n).map(|i| i as f64 * h).collect()
    }

    pub fn refined(&self) -> Self {
        Self {
            tau_max: self.tau_max,
            n_points: 2 * self.n_points - 1,
        }
    }

    pub fn extended(&self) -> Self {
        Self {
            tau_max: 2.0 * self.tau_max,
            n_points: 2 * self.n_points - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Iterative,
    IntegroDifferential,
    Linearized,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Iterative => "iterative",
            Self::IntegroDifferential => "integro_differential",
            Self::Linearized => "linearized",
        }
    }
}

/// Solved deviation δφ₀ on the full symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub dphi0: Vec<f64>,
    /// Sup-norm of the discrete equation residual, in units of ω₀².
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
}

impl Trajectory {
    pub(crate) fn from_half(
        grid: TimeGrid,
        half: &[f64],
        residual: f64,
        iterations: usize,
        method: Method,
    ) -> Self {
        let n = grid.half();
        debug_assert_eq!(half.len(), n + 1);
        let dphi0 = (0..grid.n_points)
            .map(|k| if k >= n { half[k - n] } else { -half[n - k] })
            .collect();
        Self {
            grid,
            dphi0,
            residual,
            iterations,
            method,
        }
    }

    pub fn zero(grid: TimeGrid, method: Method) -> Self {
        Self {
            grid,
            dphi0: vec![0.0; grid.n_points],
            residual: 0.0,
            iterations: 1,
            method,
        }
    }

    /// δφ₀ on τ ≥ 0.
    pub fn half(&self) -> &[f64] {
        &self.dphi0[self.grid.half()..]
    }

    /// Coefficient of the 1/τ continuation.
    pub fn tail_coefficient(&self) -> f64 {
        self.grid.tau_max * self.dphi0[self.grid.n_points - 1]
    }

    pub fn antisymmetry_error(&self) -> f64 {
        let n = self.dphi0.len();
        (0..n / 2)
            .map(|k| (self.dphi0[k] + self.dphi0[n - 1 - k]).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.dphi0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Linear interpolation on the half grid, continued as c/τ outside.
    pub fn at(&self, tau: f64) -> f64 {
        let sign = tau.signum();
        let t = tau.abs();
        if t >= self.grid.tau_max {
            return sign * self.tail_coefficient() / t;
        }
        let h = self.grid.step();
        let half = self.half();
        let i = (t / h).floor() as usize;
        let f = t / h - i as f64;
        sign * (half[i] * (1.0 - f) + half[i + 1] * f)
    }

    /// Columnar text: a `#` header followed by `tau dphi0` rows.
    pub fn to_text(&self, params_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# params_hash {params_hash}");
        let _ = writeln!(s, "# method {}", self.method.name());
        let _ = writeln!(s, "# residual {:e}", self.residual);
        let _ = writeln!(s, "# iterations {}", self.iterations);
        let _ = writeln!(s, "# tau_max {:e}", self.grid.tau_max);
        let _ = writeln!(s, "# n_points {}", self.grid.n_points);
        let _ = writeln!(s, "tau,dphi0");
        for (t, d) in self.grid.full_taus().iter().zip(&self.dphi0) {
            let _ = writeln!(s, "{t:.17e},{d:.17e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut values = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                if let Some((k, v)) = rest.split_once(' ') {
                    header.insert(k.to_string(), v.to_string());
                }
            } else if line.starts_with("tau") || line.is_empty() {
                continue;
            } else {
                let (_, d) = line
                    .split_once(',')
                    .ok_or_else(|| domain("Trajectory::from_text", "bad row"))?;
                values.push(
                    d.trim()
                        .parse::<f64>()
                        .map_err(|e| domain("Trajectory::from_text", e.to_string()))?,
                );
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| domain("Trajectory::from_text", format!("missing {k}")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse::<f64>()
                .map_err(|e| domain("Trajectory::from_text", e.to_string()))
        };
        let grid = TimeGrid::new(num("tau_max")?, num("n_points")? as usize)?;
        let method = match get("method")?.as_str() {
            "iterative" => Method::Iterative,
            "integro_differential" => Method::IntegroDifferential,
            _ => Method::Linearized,
        };
        if values.len() != grid.n_points {
            return Err(domain("Trajectory::from_text", "row count mismatch"));
        }
        Ok(Self {
            grid,
            dphi0: values,
            residual: num("residual")?,
            iterations: num("iterations")? as usize,
            method,
        })
    }
}

/// Controls shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on the sup-norm update (radians).
    pub tol: f64,
    pub max_iter: usize,
    pub bath: BathResponse,
    pub mixing: Mixing,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 400,
            bath: BathResponse::Exact,
            mixing: Mixing::default(),
        }
    }
}

/// Boundary-regime check shared by the solvers.
pub(crate) fn check_tail(half: &[f64]) -> Result<()> {
    let last = *half.last().expect("non-empty");
    if last.abs() >= 0.05 {
        return Err(crate::error::Error::TailRegime(format!(
            "|dphi0(tau_max)| = {:.3e} is not small",
            last.abs()
        )));
    }
    Ok(())
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Discretization inputs common to both solvers.
pub(crate) struct Problem {
    /// sin(2φ₀⁽⁰⁾), cos(2φ₀⁽⁰⁾) on the half grid.
    pub sin2: Vec<f64>,
    pub cos2: Vec<f64>,
    pub forcing: Vec<f64>,
}

impl Problem {
    pub fn new(params: &CircuitParams, grid: TimeGrid, bath: BathResponse) -> Self {
        let taus = grid.half_taus();
        let (sin2, cos2) = taus
            .iter()
            .map(|&t| {
                let p = 2.0 * phi0_bare(t, params.omega0);
                (p.sin(), p.cos())
            })
            .unzip();
        let forcing = forcing_term(&grid, params, bath);
        Self {
            sin2,
            cos2,
            forcing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = TimeGrid::default_for(8.0);
        assert_eq!(g.n_points, 10001);
        assert!((g.step() * 8.0 - 0.02).abs() < 1e-12);
        assert_eq!(g.full_taus()[g.half()], 0.0);
        assert!(TimeGrid::new(1.0, 10).is_err());
        assert_eq!(g.refined().step(), 0.5 * g.step());
        assert_eq!(g.extended().step(), g.step());
    }

    #[test]
    fn text_round_trip() {
        let g = TimeGrid::new(2.0, 9).unwrap();
        let t = Trajectory::from_half(
            g,
            &[0.0, -0.1, -0.2, -0.15, -0.1],
            1e-9,
            3,
            Method::Iterative,
        );
        assert_eq!(t.antisymmetry_error(), 0.0);
        let back = Trajectory::from_text(&t.to_text("abc")).unwrap();
        assert_eq!(back, t);
        assert!((t.at(-0.75) - 0.15).abs() < 1e-15);
        assert!((t.at(4.0) - t.tail_coefficient() / 4.0).abs() < 1e-15);
    }
}
