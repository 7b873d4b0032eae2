//! One parameter point: trajectory, continuation, factors, actions, rates.

use super::cache::TrajectoryCache;
use super::config::{FitConfig, GridConfig, RunConfig, SolverConfig, SolverMethod};
use crate::continuation::{
    bracket_series, fit_continuation, fit_grid, ContinuationFit, ModeFactors, FIT_SAMPLES,
};
use crate::device::{build_mode_grid, CircuitParams};
use crate::error::Result;
use crate::rates::{action_correction, decay_rate, ActionCorrection, RateOptions, RateResult};
use crate::solver::{
    matsubara_transform, solve_integro_differential, solve_iterative, Method, SpectralFunction,
    TimeGrid, Trajectory,
};
use serde::Serialize;

/// Modes entering the rate, in units of ω₀. The baseline factor has poles
/// at odd multiples of ω₀ from 3ω₀ on, and at T = 0 only modes below the
/// probe contribute.
pub const RATE_CUTOFF_OMEGA0: f64 = 2.0;
/// Modes entering δS₁, in units of ω₀; f̃² falls off as e^{−πω/ω₀}.
pub const ACTION_CUTOFF_OMEGA0: f64 = 30.0;

/// Numerical settings shared by every point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub fit: FitConfig,
    pub rates: RateOptions,
}

impl From<&RunConfig> for Settings {
    fn from(c: &RunConfig) -> Self {
        Self {
            grid: c.grid,
            solver: c.solver,
            fit: c.fit,
            rates: c.rates,
        }
    }
}

impl Default for Settings {
    fn default() -> Self {
        Self::from(&RunConfig::default())
    }
}

/// Trajectory for `params`, from the cache when possible. The flag reports a hit.
pub fn solve_trajectory(
    params: &CircuitParams,
    grid: TimeGrid,
    solver: &SolverConfig,
    cache: Option<&TrajectoryCache>,
) -> Result<(Trajectory, bool)> {
    let key = cache.map(|c| c.key(params, grid, solver));
    if let (Some(c), Some(k)) = (cache, &key) {
        if let Some(t) = c.load(k) {
            return Ok((t, true));
        }
    }
    let traj = if params.gamma0 == 0.0 {
        Trajectory::zero(grid, Method::Iterative)
    } else {
        match solver.method {
            SolverMethod::Iterative => solve_iterative(params, grid, &solver.options())?,
            SolverMethod::IntegroDifferential => {
                solve_integro_differential(params, grid, &solver.options())?
            }
        }
    };
    if let (Some(c), Some(k)) = (cache, &key) {
        c.store(k, &traj)?;
    }
    Ok((traj, false))
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub params: CircuitParams,
    pub trajectory: Trajectory,
    pub cache_hit: bool,
    /// δφ₀(iω) and B(ω) on the fit samples.
    pub fit_samples: SpectralFunction,
    pub bracket: Vec<f64>,
    pub fit: ContinuationFit,
    pub factors: ModeFactors,
    pub actions: ActionCorrection,
    pub rates: RateResult,
}

/// On-resonance comparison with the baseline, split into its three factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub gamma_in: f64,
    pub gamma_in_apprx: f64,
    pub gamma_over_delta: f64,
    pub gamma_over_delta_apprx: f64,
    pub ratio: f64,
    pub f2_ratio: f64,
    pub action_ratio: f64,
    pub integral_ratio: f64,
}

impl PointResult {
    pub fn resonance(&self) -> Resonance {
        let w0 = self.params.omega0;
        let i = self
            .rates
            .omegas
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - w0).abs().total_cmp(&(b.1 - w0).abs()))
            .map(|(i, _)| i)
            .expect("probes include the resonance");
        let r = &self.rates;
        let a = &self.actions;
        let action_ratio = (-2.0 * (a.total() - a.ds_apprx)).exp();
        let ratio = r.gamma_in[i] / r.gamma_in_apprx[i];
        let f2_ratio = r.f2[i] / r.f2_apprx[i];
        let delta = self.params.delta;
        Resonance {
            gamma_in: r.gamma_in[i],
            gamma_in_apprx: r.gamma_in_apprx[i],
            gamma_over_delta: r.gamma_in[i] / delta,
            gamma_over_delta_apprx: r.gamma_in_apprx[i] / delta,
            ratio,
            f2_ratio,
            action_ratio,
            integral_ratio: ratio / (f2_ratio * action_ratio),
        }
    }
}

/// Full chain at `params` for the given probe frequencies.
pub fn evaluate(
    params: &CircuitParams,
    settings: &Settings,
    probes: &[f64],
    cache: Option<&TrajectoryCache>,
) -> Result<PointResult> {
    let w0 = params.omega0;
    let grid = settings.grid.time_grid(w0)?;
    let (trajectory, cache_hit) = solve_trajectory(params, grid, &settings.solver, cache)?;

    let samples = fit_grid(w0, settings.fit.window, FIT_SAMPLES);
    let fit_samples = matsubara_transform(&trajectory, &samples)?;
    let bracket = bracket_series(&fit_samples, params)?;
    let fit = fit_continuation(
        &samples,
        &bracket,
        settings.fit.basis,
        settings.fit.order,
        settings.fit.window,
        w0,
    )?;
    fit.validate_bracket()?;

    let modes = build_mode_grid(params).below(ACTION_CUTOFF_OMEGA0 * w0);
    let spectral = matsubara_transform(&trajectory, &modes.omegas)?;
    let bath = settings.solver.bath;
    let factors = ModeFactors::build(
        &modes,
        RATE_CUTOFF_OMEGA0 * w0,
        &fit,
        &spectral,
        params,
        bath,
    )?;
    let actions = action_correction(&trajectory, &factors, params);
    let rates = decay_rate(probes, &factors, &fit, &actions, params, &settings.rates)?;
    Ok(PointResult {
        params: params.clone(),
        trajectory,
        cache_hit,
        fit_samples,
        bracket,
        fit,
        factors,
        actions,
        rates,
    })
}

/// On-resonance evaluation only.
pub fn evaluate_resonance(
    params: &CircuitParams,
    settings: &Settings,
    cache: Option<&TrajectoryCache>,
) -> Result<PointResult> {
    evaluate(params, settings, &[params.omega0], cache)
}
