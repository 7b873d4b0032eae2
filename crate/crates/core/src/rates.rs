//! Action corrections and the inelastic decay rate.
//!
//! With discrete modes at odd multiples of Δ/2, the time-dependent factor
//! G(t) = exp(σ(t) − Σf²) is periodic with period 4π/Δ. Its Fourier
//! coefficients c_j at Ω_j = jΔ/2 follow from two FFTs. Each energy delta
//! is binned with a unit-area hat of half-width Δ, which interpolates both
//! photon-number parity sublattices linearly, so the rate is the smooth
//! density of the comb and no time cutoff enters.

use crate::continuation::{Continuation, ModeFactors};
use crate::device::{lambda_star, CircuitParams, Lambda0Method};
use crate::error::{Error, Result};
use crate::solver::{phi0_bare, Trajectory};
use crate::special::bose_occupation;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Largest ratio between the integrand peak and the comb weight at the probe
/// that the direct scheme accepts. The round-off floor ε·range stays below
/// 2e-3 inside it; measured errors are far smaller.
pub const DIRECT_DYNAMIC_RANGE: f64 = 1e13;
const COMB_TOL: f64 = 1e-9;
const MAX_COMB_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionCorrection {
    pub ds1: f64,
    pub ds2: f64,
    pub ds_apprx: f64,
    pub s0: f64,
}

impl ActionCorrection {
    pub fn total(&self) -> f64 {
        self.ds1 + self.ds2
    }
}

/// δS₁ = ½Σf̃².
pub fn delta_s1(f_tilde: &[f64]) -> f64 {
    0.5 * f_tilde.iter().map(|f| f * f).sum::<f64>()
}

/// Σ_k (Δ/(zω_k))/cosh²(πω_k/2ω₀) over the given modes.
pub fn delta_s_apprx(omegas: &[f64], params: &CircuitParams) -> f64 {
    omegas
        .iter()
        .map(|&w| params.delta / (params.z * w) / (PI * w / (2.0 * params.omega0)).cosh().powi(2))
        .sum()
}

/// −E_J∫[cos2φ₀ − cos2φ₀⁽⁰⁾ + 2sin(2φ₀⁽⁰⁾)δφ₀ + 2δφ₀²]dτ with E_J = ω₀²/(8E_C).
/// Trapezoid on the grid; beyond τ_max the integrand is (2/3)c⁴/τ⁴.
pub fn delta_s2(traj: &Trajectory, params: &CircuitParams) -> f64 {
    let w0 = params.omega0;
    let integrand: Vec<f64> = traj
        .grid
        .full_taus()
        .iter()
        .zip(&traj.dphi0)
        .map(|(&t, &d)| {
            let bare = phi0_bare(t, w0);
            let (s, c) = (2.0 * bare).sin_cos();
            (2.0 * (bare + d)).cos() - c + 2.0 * s * d + 2.0 * d * d
        })
        .collect();
    let c = traj.tail_coefficient();
    let tail = 2.0 * (2.0 / 3.0) * c.powi(4) / (3.0 * traj.grid.tau_max.powi(3));
    -params.e_j_dynamic() * (trapezoid(&integrand, traj.grid.step()) + tail)
}

/// ∫[V(φ₀) − V(φ₀⁽⁰⁾) − V'(φ₀⁽⁰⁾)δφ₀ − (C₀ω₀²/2)δφ₀²]dτ for a generic potential.
/// `bare` is φ₀⁽⁰⁾ on the trajectory's full grid.
pub fn delta_s2_generic(
    traj: &Trajectory,
    bare: &[f64],
    potential: impl Fn(f64) -> f64,
    potential_slope: impl Fn(f64) -> f64,
    stiffness: f64,
) -> f64 {
    let integrand: Vec<f64> = bare
        .iter()
        .zip(&traj.dphi0)
        .map(|(&p, &d)| {
            potential(p + d) - potential(p) - potential_slope(p) * d - 0.5 * stiffness * d * d
        })
        .collect();
    // beyond ±τ_max the bare path sits in its minima and δφ₀ = ±c/τ
    let c = traj.tail_coefficient();
    let tau_max = traj.grid.tau_max;
    let ends = [
        (bare[0], -c / tau_max),
        (*bare.last().expect("non-empty"), c / tau_max),
    ];
    let rule = crate::quad::gauss_legendre(16);
    let tail: f64 = ends
        .iter()
        .map(|&(minimum, edge)| {
            // δφ₀ = edge·τ_max/τ maps [τ_max, ∞) onto (0, edge]
            let g = |u: f64| {
                if u == 0.0 {
                    return 0.0;
                }
                (potential(minimum + u)
                    - potential(minimum)
                    - potential_slope(minimum) * u
                    - 0.5 * stiffness * u * u)
                    / (u * u)
            };
            edge * tau_max * rule.integrate(g, 0.0, edge)
        })
        .sum();
    trapezoid(&integrand, traj.grid.step()) + tail
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1]))
}

pub fn action_correction(
    traj: &Trajectory,
    factors: &ModeFactors,
    params: &CircuitParams,
) -> ActionCorrection {
    ActionCorrection {
        ds1: delta_s1(&factors.f_tilde),
        ds2: delta_s2(traj, params),
        ds_apprx: delta_s_apprx(&factors.omegas, params),
        s0: params.s0(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Direct,
    #[default]
    Stabilized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateOptions {
    pub scheme: Scheme,
    /// ω_c/ω for the stabilized split, in (0.5, 1).
    pub cutoff_fraction: f64,
    /// Terms kept in the expansion of the above-cutoff exponential at T > 0.
    pub expansion_terms: usize,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Stabilized,
            cutoff_fraction: 0.75,
            expansion_terms: 5,
        }
    }
}

/// Modes entering the self-energy with their f², sharing the spacing Δ.
#[derive(Debug, Clone)]
pub struct Bath {
    pub omegas: Vec<f64>,
    pub f2: Vec<f64>,
    pub occupation: Vec<f64>,
    pub spacing: f64,
}

impl Bath {
    pub fn new(omegas: &[f64], f: &[f64], spacing: f64, temperature: f64) -> Result<Self> {
        let occupation = omegas
            .iter()
            .map(|&w| bose_occupation(w, temperature))
            .collect::<Result<_>>()?;
        Ok(Self {
            omegas: omegas[..f.len()].to_vec(),
            f2: f.iter().map(|x| x * x).collect(),
            occupation,
            spacing,
        })
    }

    /// Comb index of each mode: ω = jΔ/2 with j odd.
    fn index(&self, i: usize) -> usize {
        (2.0 * self.omegas[i] / self.spacing).round() as usize
    }
}

/// Hat of half-width Δ with area π.
fn line_shape(eps: f64, spacing: f64) -> f64 {
    let a = eps.abs();
    if a >= spacing {
        0.0
    } else {
        PI * (spacing - a) / (spacing * spacing)
    }
}

/// Im Π_R(ω) divided by λ₀², with e^{−2δS} supplied by the caller as `action`.
pub fn self_energy_im(omega: f64, bath: &Bath, action: f64, opts: &RateOptions) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(crate::error::domain(
            "self_energy_im",
            format!("omega = {omega} must be positive"),
        ));
    }
    if bath.f2.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let thermal = bath.occupation.iter().any(|&n| n > 0.0);
    let cutoff = opts.cutoff_fraction * omega;
    if opts.scheme == Scheme::Stabilized
        && !(opts.cutoff_fraction > 0.5 && opts.cutoff_fraction < 1.0)
    {
        return Err(crate::error::domain(
            "self_energy_im",
            "cutoff fraction must lie in (1/2, 1)",
        ));
    }
    let below = |i: usize| opts.scheme == Scheme::Direct || bath.omegas[i] < cutoff;
    let log_pref = -2.0 * action
        + (0..bath.f2.len())
            .filter(|&i| below(i))
            .map(|i| bath.f2[i])
            .sum::<f64>();

    // photon-number spread bounds the comb bandwidth
    let spread = (0..bath.f2.len())
        .filter(|&i| below(i))
        .map(|i| bath.f2[i])
        .sum::<f64>();
    let max_index = (0..bath.f2.len()).map(|i| bath.index(i)).max().unwrap_or(1) as f64;
    let band = (2.0 * omega / bath.spacing).max(max_index) * (spread + 10.0 * spread.sqrt() + 12.0);
    let mut n_t = (4.0 * band).max(1024.0).min(MAX_COMB_POINTS as f64) as usize;
    n_t = n_t.next_power_of_two();
    let (mut last, peak) = comb_sum(omega, bath, opts, thermal, &below, n_t)?;
    // peak|G| = 1 for the direct form, so this is the ratio of the largest
    // binned weight 2π/Δ to the one at the probe
    let range = peak * 2.0 * PI / bath.spacing / last.abs().max(f64::MIN_POSITIVE);
    if opts.scheme == Scheme::Direct && range > DIRECT_DYNAMIC_RANGE {
        return Err(Error::DynamicRange {
            range,
            bound: DIRECT_DYNAMIC_RANGE,
        });
    }
    // the exponent carries absolute round-off ε·Σf²(1 + 2n) into every phase
    let exponent: f64 = bath
        .f2
        .iter()
        .zip(&bath.occupation)
        .map(|(f2, n)| f2 * (1.0 + 2.0 * n))
        .sum();
    let tol = COMB_TOL.max(16.0 * f64::EPSILON * (1.0 + exponent) * range);
    let mut change = f64::INFINITY;
    while change >= tol {
        let doubled = 2 * n_t;
        if doubled > MAX_COMB_POINTS {
            return Err(Error::TimeIntegral { change, n_t });
        }
        let (next, _) = comb_sum(omega, bath, opts, thermal, &below, doubled)?;
        change = (next - last).abs() / next.abs().max(f64::MIN_POSITIVE);
        n_t = doubled;
        last = next;
    }
    Ok(0.5 * log_pref.exp() * last)
}

/// Σ_j c_j[K(ω − Ω_j) − K(ω + Ω_j)] for one comb resolution, with max|G|.
fn comb_sum(
    omega: f64,
    bath: &Bath,
    opts: &RateOptions,
    thermal: bool,
    below: &dyn Fn(usize) -> bool,
    n_t: usize,
) -> Result<(f64, f64)> {
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n_t);
    let inverse = planner.plan_fft_inverse(n_t);
    let zero = Complex64::new(0.0, 0.0);
    let place = |buf: &mut Vec<Complex64>, j: i64, value: f64| {
        let k = j.rem_euclid(n_t as i64) as usize;
        buf[k] += value;
    };

    // exponent of the resummed factor: emission at +Ω, absorption at −Ω
    let mut low = vec![zero; n_t];
    let mut high = vec![zero; n_t];
    for i in 0..bath.f2.len() {
        let j = bath.index(i) as i64;
        let (f2, n) = (bath.f2[i], bath.occupation[i]);
        let target = if below(i) { &mut low } else { &mut high };
        place(target, j, f2);
        if below(i) {
            place(&mut low, 0, -f2);
        }
        if thermal {
            place(&mut low, j, f2 * n);
            place(&mut low, -j, f2 * n);
            place(&mut low, 0, -2.0 * f2 * n);
        }
    }
    // `high` carries the above-cutoff emission terms without their −f² constant
    forward.process(&mut low);
    if opts.scheme == Scheme::Stabilized {
        forward.process(&mut high);
    }
    let mut g: Vec<Complex64> = (0..n_t)
        .map(|k| {
            let lo = low[k].exp();
            match opts.scheme {
                Scheme::Direct => lo,
                Scheme::Stabilized if !thermal => lo * (1.0 + high[k]),
                Scheme::Stabilized => {
                    // Σ_{m≤M} σ_>^m/m!
                    let mut term = Complex64::new(1.0, 0.0);
                    let mut acc = term;
                    for m in 1..=opts.expansion_terms {
                        term *= high[k] / m as f64;
                        acc += term;
                    }
                    lo * acc
                }
            }
        })
        .collect();
    let peak = g.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    inverse.process(&mut g);
    let scale = 1.0 / n_t as f64;
    let coefficient = |j: i64| g[j.rem_euclid(n_t as i64) as usize].re * scale;
    // only lattice points within Δ of ±ω carry weight
    let centre = (2.0 * omega / bath.spacing).round() as i64;
    let sum = (centre - 3..=centre + 3)
        .map(|j| {
            let big_omega = j as f64 * 0.5 * bath.spacing;
            coefficient(j) * line_shape(omega - big_omega, bath.spacing)
                - coefficient(-j) * line_shape(omega - big_omega, bath.spacing)
        })
        .sum();
    Ok((sum, peak))
}

/// Per-probe validity markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RateFlags {
    /// max{ω_k, T, Γ₀} < 10λ★: inside the nonperturbative regime.
    pub near_lambda_star: bool,
    /// Γ^in ≥ Δ: modes no longer resolved.
    pub exceeds_spacing: bool,
}

impl RateFlags {
    pub fn code(&self) -> String {
        match (self.near_lambda_star, self.exceeds_spacing) {
            (false, false) => "ok".into(),
            (true, false) => "lambda_star".into(),
            (false, true) => "gamma_over_delta".into(),
            (true, true) => "lambda_star|gamma_over_delta".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateResult {
    pub omegas: Vec<f64>,
    pub gamma_in: Vec<f64>,
    pub gamma_in_apprx: Vec<f64>,
    pub im_pi: Vec<f64>,
    pub im_pi_apprx: Vec<f64>,
    /// f² at each probe for the solved and baseline routes.
    pub f2: Vec<f64>,
    pub f2_apprx: Vec<f64>,
    pub flags: Vec<RateFlags>,
}

impl RateResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega_k,gamma_in,gamma_in_apprx,im_pi_r,flags\n");
        for i in 0..self.omegas.len() {
            let _ = writeln!(
                s,
                "{:.12e},{:.12e},{:.12e},{:.12e},{}",
                self.omegas[i],
                self.gamma_in[i],
                self.gamma_in_apprx[i],
                self.im_pi[i],
                self.flags[i].code()
            );
        }
        s
    }
}

/// Γ_k^in = 2f_k²·Im Π_R(ω_k) for each probe, with the baseline built from
/// f^apprx and δS^apprx through the same evaluation.
pub fn decay_rate(
    probes: &[f64],
    factors: &ModeFactors,
    fit: &(impl Continuation + Sync),
    actions: &ActionCorrection,
    params: &CircuitParams,
    opts: &RateOptions,
) -> Result<RateResult> {
    use rayon::prelude::*;
    let n = factors.f.len();
    let rate_modes = &factors.omegas[..n];
    let bath = Bath::new(rate_modes, &factors.f, params.delta, params.temperature)?;
    let baseline = Bath::new(
        rate_modes,
        &factors.f_apprx,
        params.delta,
        params.temperature,
    )?;
    let lambda0 = params.lambda0(Lambda0Method::Exact)?;
    let lam2 = lambda0 * lambda0;
    let star = lambda_star(lambda0, params.omega0, params.z);
    let top = rate_modes.last().copied().unwrap_or(0.0);
    if let Some(&w) = probes.iter().find(|&&w| w > top + 0.5 * params.delta) {
        return Err(crate::error::domain(
            "decay_rate",
            format!("probe {w} above the rate mode cutoff {top}"),
        ));
    }
    let rows = probes
        .par_iter()
        .map(|&w| -> Result<_> {
            let pi = lam2 * self_energy_im(w, &bath, actions.total(), opts)?;
            let pi_a = lam2 * self_energy_im(w, &baseline, actions.ds_apprx, opts)?;
            let f2 = crate::continuation::f_apprx(w, params).powi(2) * fit.magnitude(w).powi(2);
            let f2a = crate::continuation::f_apprx(w, params).powi(2);
            Ok((pi, pi_a, f2, f2a))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = RateResult {
        omegas: probes.to_vec(),
        gamma_in: Vec::new(),
        gamma_in_apprx: Vec::new(),
        im_pi: Vec::new(),
        im_pi_apprx: Vec::new(),
        f2: Vec::new(),
        f2_apprx: Vec::new(),
        flags: Vec::new(),
    };
    for (&w, (pi, pi_a, f2, f2a)) in probes.iter().zip(rows) {
        let gamma = 2.0 * f2 * pi;
        let scale = w.max(params.temperature).max(params.gamma0);
        out.flags.push(RateFlags {
            near_lambda_star: star.is_some_and(|s| scale < 10.0 * s),
            exceeds_spacing: gamma >= params.delta,
        });
        out.gamma_in.push(gamma);
        out.gamma_in_apprx.push(2.0 * f2a * pi_a);
        out.im_pi.push(pi);
        out.im_pi_apprx.push(pi_a);
        out.f2.push(f2);
        out.f2_apprx.push(f2a);
    }
    Ok(out)
}

/// Truncated Σ_{N_out+N_in odd ≥ 3} σ_out^{N_out}σ_in^{N_in}/(N_out!N_in!)
/// against sinh(σ_out + σ_in) − σ_out − σ_in.
pub fn sinh_resummation_identity(
    sigma_out: Complex64,
    sigma_in: Complex64,
    n_max: usize,
) -> (Complex64, Complex64) {
    let powers = |s: Complex64| {
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for n in 1..=n_max {
            let prev = v[n - 1];
            v.push(prev * s / n as f64);
        }
        v
    };
    let (po, pi) = (powers(sigma_out), powers(sigma_in));
    let mut lhs = Complex64::new(0.0, 0.0);
    for (no, a) in po.iter().enumerate() {
        for (ni, b) in pi.iter().enumerate() {
            let total = no + ni;
            if total >= 3 && total % 2 == 1 {
                lhs += a * b;
            }
        }
    }
    let s = sigma_out + sigma_in;
    (lhs, s.sinh() - s)
}
