//! Acceptance suite. One line per criterion; the process exits nonzero if any fails.
//!
//! Every threshold is a named constant below. Runtime budgets count as part
//! of each criterion; the workspace test profile is optimized.

use num_complex::Complex64;
use phaseslip::continuation::{
    bracket_series, f_apprx, f_factors, fit_continuation, fit_grid, FitBasis, DEFAULT_ORDER,
    DEFAULT_WINDOW, FIT_SAMPLES,
};
use phaseslip::device::{
    ej_from_omega0, lambda0, omega0_from_ej, ArrayScales, CircuitParams, Coupling, Lambda0Method,
};
use phaseslip::pipeline::{cmd_devices, evaluate, evaluate_resonance, RunConfig, Settings};
use phaseslip::rates::{
    delta_s2, self_energy_im, sinh_resummation_identity, Bath, RateOptions, Scheme,
};
use phaseslip::solver::{
    linearized_matsubara, solve_integro_differential, solve_iterative, Method, Parity,
    SolverOptions, SpectralFunction, TimeGrid, Trajectory,
};
use phaseslip::special::{kernel_k, kernel_k_quadrature_oracle, KernelParams};
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const OMEGA0: f64 = 8.0;
const E_C: f64 = 1.6;

const KERNEL_REL: f64 = 1e-8;
const KERNEL_TAIL_REL: f64 = 0.01;
const KERNEL_PAIRS: usize = 20;
const SOLVER_SUP: f64 = 1e-4 * PI;
const ANTISYMMETRY: f64 = 1e-8;
const TAIL_SPREAD: f64 = 0.15;
const BRACKET_UNITY: f64 = 1e-6;
const F_LINEARIZED_REL: f64 = 5e-3;
const WEAK_COUPLING_REL: f64 = 0.05;
const NEIGHBOR_FACTOR: f64 = 3.0;
const SINH_REL: f64 = 1e-10;
const SINH_PAIRS: usize = 50;
const SCHEME_REL: f64 = 1e-2;
const CUTOFF_REL: f64 = 5e-3;
const SPECTRUM_REL: f64 = 1e-2;
const ROUND_TRIP_REL: f64 = 1e-6;
const DISCRETIZATION_REL: f64 = 2e-2;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

type Criterion = fn() -> phaseslip::Result<Outcome>;

fn params(gamma_ratio: f64) -> CircuitParams {
    CircuitParams::new(
        OMEGA0,
        E_C,
        Coupling::InverseRc(gamma_ratio * OMEGA0),
        ArrayScales::default_for(OMEGA0),
        0.0,
    )
    .expect("valid parameters")
}

fn kernel_exactness() -> phaseslip::Result<Outcome> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut worst_tail = 0.0f64;
    for _ in 0..KERNEL_PAIRS {
        let kp = KernelParams::new(rng.gen_range(5.0..800.0), rng.gen_range(0.05..5.0))?;
        for i in 0..25 {
            let vt = 1e-3 * (5e4f64).powf(i as f64 / 24.0);
            let tau = vt / kp.v;
            let k = kernel_k(tau, kp);
            worst = worst.max((k / kernel_k_quadrature_oracle(tau, kp, 60_000)? - 1.0).abs());
            if vt > 20.0 {
                worst_tail = worst_tail.max((k / (kp.gamma0 / (PI * tau * tau)) - 1.0).abs());
            }
        }
    }
    Ok(Outcome::new(
        worst < KERNEL_REL && worst_tail < KERNEL_TAIL_REL,
        format!(
            "oracle {worst:.2e} (< {KERNEL_REL:.0e}), tail {worst_tail:.2e} (< {KERNEL_TAIL_REL})"
        ),
    ))
}

fn solver_pair(ratio: f64) -> phaseslip::Result<(Trajectory, Trajectory)> {
    let p = params(ratio);
    let grid = TimeGrid::default_for(OMEGA0);
    let opts = SolverOptions::default();
    Ok((
        solve_iterative(&p, grid, &opts)?,
        solve_integro_differential(&p, grid, &opts)?,
    ))
}

fn solver_cross_validation() -> phaseslip::Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for ratio in [0.1, 0.3, 0.5] {
        let (a, b) = solver_pair(ratio)?;
        let d = a
            .dphi0
            .iter()
            .zip(&b.dphi0)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        ok &= d < SOLVER_SUP;
        parts.push(format!("{ratio}: {d:.2e}"));
    }
    Ok(Outcome::new(
        ok,
        format!("sup-norm {} (< {SOLVER_SUP:.2e})", parts.join(", ")),
    ))
}

fn antisymmetry_and_tail() -> phaseslip::Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for ratio in [0.1, 0.3, 0.5] {
        let traj = solve_iterative(
            &params(ratio),
            TimeGrid::default_for(OMEGA0),
            &SolverOptions::default(),
        )?;
        let anti = traj.antisymmetry_error();
        let n = traj.grid.half();
        let h = traj.grid.step();
        let scaled: Vec<f64> = traj.half()[n / 10..]
            .iter()
            .enumerate()
            .map(|(i, d)| (n / 10 + i) as f64 * h * d)
            .collect();
        let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = (hi - lo) / hi.abs().max(lo.abs());
        ok &= anti < ANTISYMMETRY && spread < TAIL_SPREAD;
        parts.push(format!("{ratio}: anti {anti:.1e}, spread {spread:.3}"));
    }
    Ok(Outcome::new(
        ok,
        format!(
            "{} (< {ANTISYMMETRY:.0e}, < {TAIL_SPREAD})",
            parts.join("; ")
        ),
    ))
}

fn linearized_recovery() -> phaseslip::Result<Outcome> {
    let mut worst_b = 0.0f64;
    let mut worst_f = 0.0f64;
    for ratio in [0.1, 0.3, 0.5] {
        let p = params(ratio);
        let xs = fit_grid(OMEGA0, DEFAULT_WINDOW, FIT_SAMPLES);
        let spectral = SpectralFunction {
            values: xs.iter().map(|&w| linearized_matsubara(w, &p)).collect(),
            omegas: xs.clone(),
            parity: Parity::Odd,
            tail_corrected: true,
            tail_coefficient: 0.0,
        };
        let bracket = bracket_series(&spectral, &p)?;
        let fit = fit_continuation(
            &xs,
            &bracket,
            FitBasis::default(),
            DEFAULT_ORDER,
            DEFAULT_WINDOW,
            OMEGA0,
        )?;
        let modes: Vec<f64> = (0..=180)
            .map(|k| OMEGA0 * (0.2 + 0.01 * k as f64))
            .collect();
        for &w in &modes {
            worst_b = worst_b.max((fit.continued(w) - Complex64::new(1.0, 0.0)).norm());
        }
        let f = f_factors(&fit, &modes, &p);
        for (fk, &w) in f.iter().zip(&modes) {
            worst_f = worst_f.max((fk / f_apprx(w, &p) - 1.0).abs());
        }
    }
    let p = params(0.3);
    let ds2 = delta_s2(
        &Trajectory::zero(TimeGrid::default_for(OMEGA0), Method::Iterative),
        &p,
    );
    Ok(Outcome::new(
        worst_b < BRACKET_UNITY && worst_f < F_LINEARIZED_REL && ds2 == 0.0,
        format!("|B - 1| {worst_b:.1e} (< {BRACKET_UNITY:.0e}), f/f_apprx {worst_f:.1e} (< {F_LINEARIZED_REL}), dS2(0) = {ds2}"),
    ))
}

fn weak_coupling() -> phaseslip::Result<Outcome> {
    let r = evaluate_resonance(&params(0.01), &Settings::default(), None)?.resonance();
    Ok(Outcome::new(
        (r.ratio - 1.0).abs() < WEAK_COUPLING_REL,
        format!("ratio {:.4} at 0.01 (within {WEAK_COUPLING_REL})", r.ratio),
    ))
}

fn enhancement_trend() -> phaseslip::Result<Outcome> {
    let rs = [0.1, 0.25, 0.5]
        .iter()
        .map(|&g| Ok(evaluate_resonance(&params(g), &Settings::default(), None)?.resonance()))
        .collect::<phaseslip::Result<Vec<_>>>()?;
    let increasing = rs[0].ratio > 1.0 && rs.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let last = rs[2];
    Ok(Outcome::new(
        increasing && last.f2_ratio > 1.0 && last.action_ratio > 1.0,
        format!(
            "ratios {:.3}, {:.3}, {:.3}; at 0.5 f2 {:.3}, action {:.3}",
            rs[0].ratio, rs[1].ratio, rs[2].ratio, last.f2_ratio, last.action_ratio
        ),
    ))
}

fn resonance_behavior() -> phaseslip::Result<Outcome> {
    let p = params(0.1);
    let probes: Vec<f64> = (0..=100)
        .map(|k| OMEGA0 * (0.8 + 0.004 * k as f64))
        .collect();
    let point = evaluate(&p, &Settings::default(), &probes, None)?;
    let scan: Vec<f64> = (-50..=50)
        .map(|j| OMEGA0 * (1.0 + 1e-4 * j as f64))
        .collect();
    let f = f_factors(&point.fit, &scan, &p);
    let smooth = f.iter().all(|x| x.is_finite())
        && f.windows(3)
            .all(|w| w[1] <= NEIGHBOR_FACTOR * w[0] && w[1] <= NEIGHBOR_FACTOR * w[2]);
    let (i, _) = point
        .rates
        .gamma_in
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("probes");
    let offset = (probes[i] - OMEGA0).abs();
    Ok(Outcome::new(
        smooth && offset < p.gamma0 / 2.0,
        format!(
            "f smooth: {smooth}; peak offset {offset:.3} GHz (< {:.3})",
            p.gamma0 / 2.0
        ),
    ))
}

fn resummation_identity() -> phaseslip::Result<Outcome> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let worst = (0..SINH_PAIRS)
        .map(|_| {
            let (l, r) = sinh_resummation_identity(c(), c(), 60);
            (l - r).norm() / r.norm()
        })
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        worst < SINH_REL,
        format!("{worst:.2e} (< {SINH_REL:.0e})"),
    ))
}

fn scheme_equivalence() -> phaseslip::Result<Outcome> {
    let p = params(0.2);
    let point = evaluate_resonance(&p, &Settings::default(), None)?;
    let n = point.factors.f.len();
    let bath = Bath::new(&point.factors.omegas[..n], &point.factors.f, p.delta, 0.0)?;
    let probe = 0.6 * OMEGA0;
    let action = point.actions.total();
    let with = |scheme, cutoff_fraction| {
        self_energy_im(
            probe,
            &bath,
            action,
            &RateOptions {
                scheme,
                cutoff_fraction,
                ..Default::default()
            },
        )
    };
    let direct = with(Scheme::Direct, 0.75)?;
    let stab = with(Scheme::Stabilized, 0.75)?;
    let lo = with(Scheme::Stabilized, 0.6)?;
    let hi = with(Scheme::Stabilized, 0.9)?;
    let agree = (direct / stab - 1.0).abs();
    let cut = (hi / lo - 1.0).abs();
    Ok(Outcome::new(
        agree < SCHEME_REL && cut < CUTOFF_REL,
        format!("direct/stabilized {agree:.2e} (< {SCHEME_REL}), cutoff 0.6 vs 0.9 {cut:.2e} (< {CUTOFF_REL})"),
    ))
}

fn spectrum() -> phaseslip::Result<Outcome> {
    let e_j = 50.0 * E_C;
    let w0 = omega0_from_ej(e_j, E_C)?;
    let harmonic = (8.0 * e_j * E_C).sqrt() - E_C;
    let rel = (w0 / harmonic - 1.0).abs();
    let back = (ej_from_omega0(w0, E_C)? / e_j - 1.0).abs();
    let wkb_gap = |ratio: f64| -> phaseslip::Result<f64> {
        let e_j = ratio * E_C;
        Ok(
            (lambda0(e_j, E_C, Lambda0Method::Wkb)? / lambda0(e_j, E_C, Lambda0Method::Exact)?
                - 1.0)
                .abs(),
        )
    };
    let (g25, g10) = (wkb_gap(25.0)?, wkb_gap(10.0)?);
    Ok(Outcome::new(
        rel < SPECTRUM_REL && back < ROUND_TRIP_REL && g25 < g10,
        format!("harmonic {rel:.2e}, round trip {back:.1e}, |WKB/exact - 1| {g25:.3} at 25 vs {g10:.3} at 10"),
    ))
}

fn discretization_robustness() -> phaseslip::Result<Outcome> {
    let p = params(0.3);
    let base_settings = Settings::default();
    let central = evaluate_resonance(&p, &base_settings, None)?
        .resonance()
        .gamma_over_delta;
    let scales = p.scales();
    let mut variants: Vec<(&str, CircuitParams, Settings)> = vec![
        (
            "delta/2",
            p.rescaled(ArrayScales {
                delta: scales.delta / 2.0,
                ..scales
            })?,
            base_settings,
        ),
        (
            "2v",
            p.rescaled(ArrayScales {
                v: scales.v * 2.0,
                ..scales
            })?,
            base_settings,
        ),
    ];
    let mut fine = base_settings;
    fine.grid.step_omega0 /= 2.0;
    variants.push(("dtau/2", p.clone(), fine));
    let mut long = base_settings;
    long.grid.tau_max_omega0 *= 2.0;
    variants.push(("2 tau_max", p.clone(), long));
    for order in [4, 8] {
        let mut s = base_settings;
        s.fit.order = order;
        variants.push((if order == 4 { "p=4" } else { "p=8" }, p.clone(), s));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, q, s) in variants {
        let g = evaluate_resonance(&q, &s, None)?
            .resonance()
            .gamma_over_delta;
        let change = g / central - 1.0;
        ok &= change.abs() < DISCRETIZATION_REL;
        parts.push(format!("{name} {:+.2}%", 100.0 * change));
    }
    Ok(Outcome::new(
        ok,
        format!("Gamma/Delta changes: {} (< 2%)", parts.join(", ")),
    ))
}

fn device_pipeline() -> phaseslip::Result<Outcome> {
    let config = RunConfig {
        output_dir: std::env::temp_dir()
            .join(format!("phaseslip-acceptance-{}", std::process::id())),
        cache: false,
        ..RunConfig::default()
    };
    let sweeps = cmd_devices(&config)?;
    let _ = std::fs::remove_dir_all(&config.output_dir);
    let mut finite = sweeps.len() == 8;
    let mut deviation = [(0.0, 0usize); 2];
    let mut flagged = Vec::new();
    for s in &sweeps {
        finite &= s.rows.iter().all(|r| {
            r.outcome.as_ref().is_ok_and(|p| {
                p.resonance.gamma_over_delta.is_finite()
                    && p.band
                        .is_some_and(|(lo, hi)| lo.is_finite() && hi.is_finite())
            })
        });
        let series = usize::from(s.label.ends_with('b'));
        for (_, p) in s.points() {
            deviation[series].0 += p.resonance.ratio.ln().abs();
            deviation[series].1 += 1;
        }
        if !s.warnings.is_empty() {
            flagged.push(s.label.clone());
        }
    }
    let mean = |(sum, n): (f64, usize)| sum / n.max(1) as f64;
    let (a, b) = (mean(deviation[0]), mean(deviation[1]));
    Ok(Outcome::new(
        finite && b < a && flagged.iter().any(|l| l == "4a"),
        format!("finite: {finite}; mean |ln ratio| a {a:.3}, b {b:.3}; flagged {flagged:?}"),
    ))
}

fn main() {
    let criteria: [(&str, Criterion, u64); 12] = [
        ("kernel exactness", kernel_exactness, 10),
        ("solver cross-validation", solver_cross_validation, 300),
        ("antisymmetry and 1/tau tail", antisymmetry_and_tail, 300),
        ("linearized-limit recovery", linearized_recovery, 60),
        ("weak-coupling limit", weak_coupling, 120),
        ("enhancement trend", enhancement_trend, 300),
        ("resonance behavior", resonance_behavior, 300),
        ("resummation identity", resummation_identity, 1),
        ("scheme equivalence", scheme_equivalence, 300),
        ("transmon spectrum", spectrum, 60),
        ("discretization robustness", discretization_robustness, 1200),
        ("device pipeline", device_pipeline, 1800),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (passed, detail) = match result {
            Ok(o) => (o.passed && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!(
            "{} {:>2} {name}: {detail} [{:.1} s of {budget} s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
