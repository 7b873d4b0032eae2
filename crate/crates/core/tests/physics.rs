//! Cross-module physical invariants on solved trajectories.

use phaseslip::continuation::{
    bracket_series, f_factors, fit_continuation, fit_grid, fit_rational, FitBasis, DEFAULT_ORDER,
    DEFAULT_WINDOW, FIT_SAMPLES,
};
use phaseslip::device::{ArrayScales, CircuitParams, Coupling, DeviceTable};
use phaseslip::pipeline::{evaluate, Settings};
use phaseslip::rates::{self_energy_im, Bath, RateOptions, Scheme};
use phaseslip::solver::{
    matsubara_transform, solve_iterative, SolverOptions, TimeGrid, Trajectory,
};

fn params(ratio: f64) -> CircuitParams {
    CircuitParams::new(
        8.0,
        1.6,
        Coupling::InverseRc(8.0 * ratio),
        ArrayScales::default_for(8.0),
        0.0,
    )
    .unwrap()
}

fn solve(ratio: f64) -> (CircuitParams, Trajectory) {
    let p = params(ratio);
    let t = solve_iterative(&p, TimeGrid::default_for(8.0), &SolverOptions::default()).unwrap();
    (p, t)
}

#[test]
fn deviation_grows_with_coupling() {
    let sups: Vec<f64> = [0.05, 0.1, 0.2, 0.3, 0.5]
        .iter()
        .map(|&g| solve(g).1.sup_norm())
        .collect();
    assert!(sups.windows(2).all(|w| w[1] > w[0]), "{sups:?}");
}

#[test]
fn bundled_devices_construct() {
    let table = DeviceTable::bundled();
    assert_eq!(table.device.len(), 8);
    for d in &table.device {
        let p = d.params(7.0, ArrayScales::default_for(7.0), 0.0).unwrap();
        assert!((p.gamma0 / d.gamma0_ghz - 1.0).abs() < 0.03, "{}", d.name);
    }
    let a = table.get("1a").unwrap();
    assert_eq!((a.z, a.e_c_ghz, a.gamma0_ghz), (0.81, 0.66, 1.03));
}

/// f_k on [0.1, 2]ω₀ for a fit with the given window and basis.
fn factors_with(p: &CircuitParams, traj: &Trajectory, window: (f64, f64)) -> Vec<f64> {
    let xs = fit_grid(8.0, window, FIT_SAMPLES);
    let b = bracket_series(&matsubara_transform(traj, &xs).unwrap(), p).unwrap();
    let fit = fit_continuation(&xs, &b, FitBasis::default(), DEFAULT_ORDER, window, 8.0).unwrap();
    f_factors(&fit, &modes(), p)
}

fn modes() -> Vec<f64> {
    (1..=20).map(|k| 0.8 * k as f64).collect()
}

fn worst_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / y - 1.0).abs())
        .fold(0.0, f64::max)
}

#[test]
fn fit_window_robustness() {
    for ratio in [0.1, 0.3] {
        let (p, traj) = solve(ratio);
        let narrow = factors_with(&p, &traj, (0.05, 2.5));
        let wide = factors_with(&p, &traj, (0.05, 3.5));
        let change = worst_change(&narrow, &wide);
        assert!(
            change < 0.01,
            "Gamma0/omega0 = {ratio}: f_k moves by {change:.4}"
        );
    }
}

#[test]
fn rational_fit_cross_check() {
    for ratio in [0.1, 0.3] {
        let (p, traj) = solve(ratio);
        let xs = fit_grid(8.0, DEFAULT_WINDOW, FIT_SAMPLES);
        let b = bracket_series(&matsubara_transform(&traj, &xs).unwrap(), &p).unwrap();
        let rational = fit_rational(&xs, &b, DEFAULT_WINDOW, 8.0).unwrap();
        let poly = factors_with(&p, &traj, DEFAULT_WINDOW);
        let change = worst_change(&f_factors(&rational, &modes(), &p), &poly);
        assert!(
            change < 0.02,
            "Gamma0/omega0 = {ratio}: rational differs by {change:.4}"
        );
    }
}

#[test]
fn grid_convergence_of_transform() {
    let (p, traj) = solve(0.3);
    let omegas: Vec<f64> = (0..=28).map(|k| 8.0 * (0.2 + 0.1 * k as f64)).collect();
    let base = matsubara_transform(&traj, &omegas).unwrap();
    let grid = traj.grid;
    for refined in [grid.refined(), grid.extended()] {
        let t = solve_iterative(&p, refined, &SolverOptions::default()).unwrap();
        let s = matsubara_transform(&t, &omegas).unwrap();
        let worst = base
            .values
            .iter()
            .zip(&s.values)
            .map(|(a, b)| (a - b).norm() / b.norm())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "{worst}");
    }
}

#[test]
fn rates_nonnegative_for_both_schemes() {
    let p = params(0.2);
    let probes: Vec<f64> = (1..=15).map(|k| 1.0 * k as f64).collect();
    let point = evaluate(&p, &Settings::default(), &probes, None).unwrap();
    assert!(point
        .rates
        .gamma_in
        .iter()
        .chain(&point.rates.gamma_in_apprx)
        .all(|&g| g >= 0.0));
    let n = point.factors.f.len();
    let bath = Bath::new(&point.factors.omegas[..n], &point.factors.f, p.delta, 0.0).unwrap();
    for w in probes {
        let opts = RateOptions {
            scheme: Scheme::Direct,
            ..Default::default()
        };
        if let Ok(v) = self_energy_im(w, &bath, point.actions.total(), &opts) {
            assert!(v >= 0.0, "direct at {w}: {v}");
        }
    }
}
