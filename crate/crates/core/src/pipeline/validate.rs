//! Invariant suite run by the `validate` command.

use super::commands::Emitter;
use super::config::RunConfig;
use super::engine::{evaluate_resonance, Settings};
use crate::continuation::{bracket_series, fit_continuation, fit_grid, FIT_SAMPLES};
use crate::error::Result;
use crate::rates::{self_energy_im, sinh_resummation_identity, Bath, RateOptions, Scheme};
use crate::solver::{
    check_tail_regime, linearized_trajectory, matsubara_transform, solve_integro_differential,
    solve_iterative, SpectralFunction, Trajectory,
};
use crate::special::{kernel_k, kernel_k_quadrature_oracle};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn below(id: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            id,
            measured,
            tolerance,
            passed: measured < tolerance,
            detail: String::new(),
        }
    }

    fn failed(id: &'static str, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            id,
            measured: f64::NAN,
            tolerance,
            passed: false,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config_hash: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("config_hash {}\n", self.config_hash);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {:<22} measured {:.3e} tolerance {:.1e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.measured,
                c.tolerance,
                c.detail
            );
        }
        s
    }
}

fn max_relative(a: &SpectralFunction, b: &SpectralFunction) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| ((x - y).norm() / y.norm()).abs())
        .fold(0.0, f64::max)
}

fn spectral_on(traj: &Trajectory, omega0: f64) -> Result<SpectralFunction> {
    let omegas: Vec<f64> = (0..=56).map(|k| omega0 * (0.2 + 0.05 * k as f64)).collect();
    matsubara_transform(traj, &omegas)
}

pub fn run_checks(config: &RunConfig) -> Result<ValidationReport> {
    config.validate()?;
    let params = config.circuit_params()?;
    let settings = Settings::from(config);
    let w0 = params.omega0;
    let grid = config.grid.time_grid(w0)?;
    let opts = config.solver.options();
    let mut checks = Vec::new();

    // kernel against direct quadrature on a fixed log-spaced sweep
    let kp = params.kernel();
    let kernel_err = (0..12)
        .map(|i| {
            let vt = 1e-3 * 10f64.powf(i as f64 * (50e3f64).log10() / 11.0);
            let tau = vt / kp.v;
            let exact = kernel_k_quadrature_oracle(tau, kp, 60_000)?;
            Ok((kernel_k(tau, kp) / exact - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::below("kernel_oracle", kernel_err, 1e-8));

    let iterative = solve_iterative(&params, grid, &opts);
    let traj = match iterative {
        Ok(t) => t,
        Err(e) => {
            checks.push(Check::failed("solver_converged", 0.0, e.to_string()));
            return Ok(ValidationReport {
                config_hash: config.hash(),
                checks,
            });
        }
    };
    match solve_integro_differential(&params, grid, &opts) {
        Ok(other) => {
            let d = traj
                .dphi0
                .iter()
                .zip(&other.dphi0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            checks.push(Check::below("solver_agreement", d, 1e-4 * PI));
        }
        Err(e) => checks.push(Check::failed("solver_agreement", 1e-4 * PI, e.to_string())),
    }
    checks.push(Check::below(
        "antisymmetry",
        traj.antisymmetry_error(),
        1e-8,
    ));
    let tail = check_tail_regime(&traj);
    checks.push(Check {
        id: "tail_regime",
        measured: 0.0,
        tolerance: crate::solver::transform::TAIL_SLOPE_TOLERANCE,
        passed: tail.is_ok(),
        detail: tail.err().map(|e| e.to_string()).unwrap_or_default(),
    });

    // the closed-form linearized deviation must continue to B ≡ 1
    let lin = linearized_trajectory(&params, grid);
    let xs = fit_grid(w0, config.fit.window, FIT_SAMPLES);
    let lin_fit = matsubara_transform(&lin, &xs)
        .and_then(|s| bracket_series(&s, &params))
        .and_then(|b| {
            fit_continuation(
                &xs,
                &b,
                config.fit.basis,
                config.fit.order,
                config.fit.window,
                w0,
            )
        });
    match lin_fit {
        Ok(f) => {
            let dev = [0.2, 0.5, 1.0, 1.5, 2.0]
                .iter()
                .map(|x| (f.continued(x * w0).norm() - 1.0).abs())
                .fold(0.0, f64::max);
            checks.push(Check::below("linearized_recovery", dev, 1e-3));
        }
        Err(e) => checks.push(Check::failed("linearized_recovery", 1e-3, e.to_string())),
    }

    let sinh_err = [(0.3, 0.1), (0.7, -0.4), (-0.2, 0.9), (0.05, 0.02)]
        .iter()
        .map(|&(a, b)| {
            let (l, r) = sinh_resummation_identity(Complex64::new(a, b), Complex64::new(b, -a), 40);
            (l - r).norm() / r.norm()
        })
        .fold(0.0, f64::max);
    checks.push(Check::below("sinh_identity", sinh_err, 1e-10));

    let base = spectral_on(&traj, w0)?;
    for (id, refined) in [
        ("grid_step_convergence", grid.refined()),
        ("box_convergence", grid.extended()),
    ] {
        match solve_iterative(&params, refined, &opts).and_then(|t| spectral_on(&t, w0)) {
            Ok(s) => checks.push(Check::below(id, max_relative(&base, &s), 5e-3)),
            Err(e) => checks.push(Check::failed(id, 5e-3, e.to_string())),
        }
    }

    let point = evaluate_resonance(&params, &settings, None)?;
    let central = point.resonance().gamma_over_delta;
    let n = point.factors.f.len();
    let bath = Bath::new(
        &point.factors.omegas[..n],
        &point.factors.f,
        params.delta,
        0.0,
    )?;
    let probe = 0.6 * w0;
    let direct = self_energy_im(
        probe,
        &bath,
        0.0,
        &RateOptions {
            scheme: Scheme::Direct,
            ..config.rates
        },
    );
    let stab = self_energy_im(
        probe,
        &bath,
        0.0,
        &RateOptions {
            scheme: Scheme::Stabilized,
            ..config.rates
        },
    );
    match (direct, stab) {
        (Ok(d), Ok(s)) => checks.push(Check::below(
            "scheme_equivalence",
            (d / s - 1.0).abs(),
            1e-2,
        )),
        (d, s) => checks.push(Check::failed(
            "scheme_equivalence",
            1e-2,
            format!(
                "{:?} / {:?}",
                d.err().map(|e| e.to_string()),
                s.err().map(|e| e.to_string())
            ),
        )),
    }

    for (id, scale_v, scale_delta) in [
        ("spacing_convergence", 1.0, 0.5),
        ("velocity_convergence", 2.0, 1.0),
    ] {
        let scales = crate::device::ArrayScales {
            v: params.v * scale_v,
            delta: params.delta * scale_delta,
        };
        let shifted = params
            .rescaled(scales)
            .and_then(|p| evaluate_resonance(&p, &settings, None));
        match shifted {
            Ok(r) => checks.push(Check::below(
                id,
                (r.resonance().gamma_over_delta / central - 1.0).abs(),
                2e-2,
            )),
            Err(e) => checks.push(Check::failed(id, 2e-2, e.to_string())),
        }
    }
    Ok(ValidationReport {
        config_hash: config.hash(),
        checks,
    })
}

pub fn cmd_validate(config: &RunConfig) -> Result<ValidationReport> {
    let pool = super::commands::thread_pool(config.workers)?;
    let report = pool.install(|| run_checks(config))?;
    let mut out = Emitter::new(&config.output_dir)?;
    out.write("validate.txt", &report.to_text())?;
    out.finish("validate", config)?;
    Ok(report)
}
