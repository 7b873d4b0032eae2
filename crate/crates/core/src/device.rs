//! Circuit parameters, transmon spectrum, phase shifts and mode grids.
//!
//! Units: ħ = e = 1, lattice spacing 1, frequencies in GHz, times in ns.
//! In these units the resistance quantum is R_Q = π/2 and C₀ = 1/(2E_C).

use crate::error::{domain, Error, Result};
use crate::mathieu::{mathieu_pair, OffsetCharge};
use crate::special::KernelParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// k_B/h in GHz per kelvin.
pub const KB_GHZ_PER_K: f64 = 20.836_619;
/// Superconducting resistance quantum h/(4e²) in kΩ.
pub const R_Q_KOHM: f64 = 6.4532;

pub fn millikelvin_to_ghz(mk: f64) -> f64 {
    mk * 1e-3 * KB_GHZ_PER_K
}

/// How the array coupling is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Normalized impedance z = Z/R_Q.
    Impedance(f64),
    /// Inverse RC time Γ₀ in GHz.
    InverseRc(f64),
}

/// Array velocity and mode spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayScales {
    pub v: f64,
    pub delta: f64,
}

impl ArrayScales {
    pub const V_OVER_OMEGA0: f64 = 50.0;
    pub const OMEGA0_OVER_DELTA: f64 = 50.0;

    pub fn default_for(omega0: f64) -> Self {
        Self {
            v: Self::V_OVER_OMEGA0 * omega0,
            delta: omega0 / Self::OMEGA0_OVER_DELTA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitParams {
    pub omega0: f64,
    pub e_c: f64,
    pub e_j: f64,
    pub gamma0: f64,
    pub z: f64,
    pub v: f64,
    pub delta: f64,
    pub temperature: f64,
    pub n_modes: usize,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl CircuitParams {
    /// Build from the measured resonance ω₀, E_C and the array coupling.
    /// E_J follows from inverting the averaged Mathieu gap.
    pub fn new(
        omega0: f64,
        e_c: f64,
        coupling: Coupling,
        scales: ArrayScales,
        temperature: f64,
    ) -> Result<Self> {
        let e_j = ej_from_omega0(omega0, e_c)?;
        Self::with_ej(omega0, e_c, e_j, coupling, scales, temperature)
    }

    /// Build with an explicitly supplied E_J (no consistency check against ω₀).
    pub fn with_ej(
        omega0: f64,
        e_c: f64,
        e_j: f64,
        coupling: Coupling,
        scales: ArrayScales,
        temperature: f64,
    ) -> Result<Self> {
        for (name, val) in [
            ("omega0", omega0),
            ("E_C", e_c),
            ("v", scales.v),
            ("delta", scales.delta),
        ] {
            if !(val > 0.0) || !val.is_finite() {
                return Err(domain(
                    "CircuitParams",
                    format!("{name} = {val} must be positive"),
                ));
            }
        }
        if !(temperature >= 0.0) {
            return Err(domain(
                "CircuitParams",
                format!("T = {temperature} must be nonnegative"),
            ));
        }
        if !(e_j >= 0.0) {
            return Err(domain(
                "CircuitParams",
                format!("E_J = {e_j} must be nonnegative"),
            ));
        }
        let (gamma0, z) = match coupling {
            Coupling::Impedance(z) if z > 0.0 => (4.0 * e_c / (PI * z), z),
            Coupling::InverseRc(g) if g > 0.0 => (g, 4.0 * e_c / (PI * g)),
            Coupling::InverseRc(0.0) => (0.0, f64::INFINITY),
            other => {
                return Err(domain(
                    "CircuitParams",
                    format!("invalid coupling {other:?}"),
                ))
            }
        };
        let n_modes = (PI * scales.v / scales.delta).round() as usize;
        let mut warnings = Vec::new();
        if gamma0 > 0.0 && scales.delta >= gamma0 {
            warnings.push(format!(
                "mode spacing {:.4} GHz is not below Gamma0 = {:.4} GHz",
                scales.delta, gamma0
            ));
        }
        if scales.delta >= omega0 {
            warnings.push(format!(
                "mode spacing {:.4} GHz is not below omega0",
                scales.delta
            ));
        }
        if e_j < e_c {
            warnings.push(format!(
                "E_J = {e_j:.3} GHz below E_C = {e_c:.3} GHz (outside the transmon regime)"
            ));
        }
        if scales.v < 10.0 * gamma0 {
            warnings.push("array velocity below 10 Gamma0".to_string());
        }
        Ok(Self {
            omega0,
            e_c,
            e_j,
            gamma0,
            z,
            v: scales.v,
            delta: scales.delta,
            temperature,
            n_modes,
            warnings,
        })
    }

    pub fn scales(&self) -> ArrayScales {
        ArrayScales {
            v: self.v,
            delta: self.delta,
        }
    }

    pub fn kernel(&self) -> KernelParams {
        KernelParams {
            v: self.v,
            gamma0: self.gamma0,
        }
    }

    /// C₀ = 1/(2E_C).
    pub fn c0(&self) -> f64 {
        0.5 / self.e_c
    }

    /// Josephson energy consistent with the harmonic frequency, ω₀²/(8E_C).
    /// The equations of motion and the action use this value.
    pub fn e_j_dynamic(&self) -> f64 {
        self.omega0 * self.omega0 / (8.0 * self.e_c)
    }

    /// Isolated instanton action √(8E_J/E_C) with the spectroscopic E_J.
    pub fn s0(&self) -> f64 {
        (8.0 * self.e_j / self.e_c).sqrt()
    }

    pub fn lambda0(&self, method: Lambda0Method) -> Result<f64> {
        lambda0(self.e_j, self.e_c, method)
    }

    /// Same physical point with different array scales.
    pub fn rescaled(&self, scales: ArrayScales) -> Result<Self> {
        Self::with_ej(
            self.omega0,
            self.e_c,
            self.e_j,
            Coupling::InverseRc(self.gamma0),
            scales,
            self.temperature,
        )
    }
}

fn gap(chi: f64, qg: OffsetCharge) -> Result<(f64, f64)> {
    let e = mathieu_pair(chi, qg, 2)?;
    Ok((e[0], e[1] - e[0]))
}

/// ω₀ as the average of the E₁ − E₀ gaps at offset charges 0 and 1.
pub fn omega0_from_ej(e_j: f64, e_c: f64) -> Result<f64> {
    if !(e_j >= 0.0) || !(e_c > 0.0) {
        return Err(domain(
            "omega0_from_ej",
            format!("E_J = {e_j}, E_C = {e_c}"),
        ));
    }
    let chi = e_j / (2.0 * e_c);
    let (_, g0) = gap(chi, OffsetCharge::Zero)?;
    let (_, g1) = gap(chi, OffsetCharge::One)?;
    Ok(0.5 * e_c * (g0 + g1))
}

/// Invert [`omega0_from_ej`] by bisection.
pub fn ej_from_omega0(omega0: f64, e_c: f64) -> Result<f64> {
    if !(omega0 > 0.0) || !(e_c > 0.0) {
        return Err(domain(
            "ej_from_omega0",
            format!("omega0 = {omega0}, E_C = {e_c}"),
        ));
    }
    let floor = 2.0 * e_c;
    if omega0 <= floor {
        return Err(Error::NoBracket { omega0, floor });
    }
    let mut lo = 0.0;
    let mut hi = (omega0 + e_c).powi(2) / (8.0 * e_c);
    while omega0_from_ej(hi, e_c)? < omega0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if omega0_from_ej(mid, e_c)? < omega0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda0Method {
    Exact,
    Wkb,
}

/// Charge dispersion of the lowest band.
pub fn lambda0(e_j: f64, e_c: f64, method: Lambda0Method) -> Result<f64> {
    if !(e_j >= 0.0) || !(e_c > 0.0) {
        return Err(domain("lambda0", format!("E_J = {e_j}, E_C = {e_c}")));
    }
    match method {
        Lambda0Method::Exact => {
            let chi = e_j / (2.0 * e_c);
            let (e0, _) = gap(chi, OffsetCharge::Zero)?;
            let (e1, _) = gap(chi, OffsetCharge::One)?;
            Ok(0.5 * e_c * (e1 - e0))
        }
        Lambda0Method::Wkb => Ok(8.0 / PI.sqrt()
            * (8.0 * e_j.powi(3) * e_c).powf(0.25)
            * (-(8.0 * e_j / e_c).sqrt()).exp()),
    }
}

/// Emergent scale (λ₀/ω₀^{1/z})^{1/(1−1/z)}; `None` when z ≤ 1.
pub fn lambda_star(lambda0: f64, omega0: f64, z: f64) -> Option<f64> {
    if !(z > 1.0) {
        return None;
    }
    if z.is_infinite() {
        return Some(lambda0);
    }
    Some((lambda0 / omega0.powf(1.0 / z)).powf(1.0 / (1.0 - 1.0 / z)))
}

fn check_band(op: &'static str, omega: f64, v: f64) -> Result<()> {
    if !(omega > 0.0) || omega > 2.0 * v {
        return Err(domain(op, format!("omega = {omega} outside (0, 2v]")));
    }
    Ok(())
}

/// Phase shift of the full-system modes, in (0, π).
pub fn phase_shift_full(omega: f64, p: &CircuitParams) -> Result<f64> {
    check_band("phase_shift_full", omega, p.v)?;
    let band = (1.0 - (omega / (2.0 * p.v)).powi(2)).max(0.0).sqrt();
    let num = omega * p.gamma0 * band;
    let den = p.omega0 * p.omega0 - (1.0 - p.gamma0 / (2.0 * p.v)) * omega * omega;
    Ok(num.atan2(den))
}

/// Phase shift of the bulk (transmon-free) array modes, in (0, π).
pub fn phase_shift_bulk(omega: f64, p: &CircuitParams) -> Result<f64> {
    check_band("phase_shift_bulk", omega, p.v)?;
    let band = (1.0 - (omega / (2.0 * p.v)).powi(2)).max(0.0).sqrt();
    Ok((omega * p.v * band).atan2(p.v * p.v - 0.5 * omega * omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeKind {
    Full,
    Bulk,
}

/// Uniformly spaced modes (m + ½)Δ up to the band edge 2v.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub omegas: Vec<f64>,
    pub spacing: f64,
    pub kind: ModeKind,
}

impl ModeGrid {
    pub fn new(delta: f64, v: f64, kind: ModeKind) -> Self {
        let count = (2.0 * v / delta).floor() as usize;
        let omegas = (0..count)
            .map(|m| (m as f64 + 0.5) * delta)
            .take_while(|&w| w <= 2.0 * v)
            .collect();
        Self {
            omegas,
            spacing: delta,
            kind,
        }
    }

    /// Modes at or below `max`.
    pub fn below(&self, max: f64) -> Self {
        Self {
            omegas: self
                .omegas
                .iter()
                .copied()
                .take_while(|&w| w <= max)
                .collect(),
            spacing: self.spacing,
            kind: self.kind,
        }
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

pub fn build_mode_grid(p: &CircuitParams) -> ModeGrid {
    ModeGrid::new(p.delta, p.v, ModeKind::Full)
}

/// One row of the nominal device table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceRecord {
    pub name: String,
    #[serde(rename = "Z_kOhm")]
    pub z_kohm: f64,
    pub z: f64,
    #[serde(rename = "E_C_GHz")]
    pub e_c_ghz: f64,
    #[serde(rename = "Gamma0_GHz")]
    pub gamma0_ghz: f64,
}

impl DeviceRecord {
    /// Γ₀ implied by z and E_C.
    pub fn derived_gamma0(&self) -> f64 {
        4.0 * self.e_c_ghz / (PI * self.z)
    }

    /// z implied by the impedance column.
    pub fn derived_z(&self) -> f64 {
        self.z_kohm / R_Q_KOHM
    }

    pub fn params(
        &self,
        omega0: f64,
        scales: ArrayScales,
        temperature: f64,
    ) -> Result<CircuitParams> {
        CircuitParams::new(
            omega0,
            self.e_c_ghz,
            Coupling::Impedance(self.z),
            scales,
            temperature,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceTable {
    pub device: Vec<DeviceRecord>,
}

impl DeviceTable {
    pub fn bundled() -> Self {
        Self::from_toml_str(include_str!("../data/devices.toml")).expect("bundled table parses")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&DeviceRecord> {
        self.device.iter().find(|d| d.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma_ratio: f64) -> CircuitParams {
        CircuitParams::with_ej(
            8.0,
            1.6,
            6.0,
            Coupling::InverseRc(gamma_ratio * 8.0),
            ArrayScales::default_for(8.0),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn consistency_relation_holds() {
        let p = CircuitParams::with_ej(
            5.0,
            0.9,
            10.0,
            Coupling::Impedance(1.7),
            ArrayScales::default_for(5.0),
            0.0,
        )
        .unwrap();
        assert!((p.gamma0 * p.z * PI / (4.0 * p.e_c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_rotor_limits() {
        assert!((omega0_from_ej(0.0, 1.3).unwrap() - 2.6).abs() < 1e-12);
        assert!((lambda0(0.0, 1.3, Lambda0Method::Exact).unwrap() - 0.65).abs() < 1e-12);
    }

    #[test]
    fn omega0_transmon_limit_and_round_trip() {
        let w = omega0_from_ej(50.0, 1.0).unwrap();
        assert!((w / 19.0 - 1.0).abs() < 0.01);
        for ratio in [5.0, 20.0, 50.0] {
            let ej = ratio * 0.8;
            let w = omega0_from_ej(ej, 0.8).unwrap();
            let back = ej_from_omega0(w, 0.8).unwrap();
            assert!((back / ej - 1.0).abs() < 1e-6);
        }
        assert!(matches!(
            ej_from_omega0(1.0, 0.8),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn lambda_star_limits() {
        assert!(lambda_star(0.1, 8.0, 0.9).is_none());
        assert!((lambda_star(0.1, 8.0, 1e9).unwrap() - 0.1).abs() < 1e-6);
        assert_eq!(lambda_star(0.0, 8.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn phase_shift_limits() {
        let p = params(0.2);
        assert!(phase_shift_full(1e-6, &p).unwrap() < 1e-6);
        // the residual Γ₀/2v term in the denominator tilts the crossing by ~ω₀/2v
        let on = phase_shift_full(p.omega0, &p).unwrap();
        assert!((on - PI / 2.0).abs() < p.omega0 / p.v);
        let cos_approx = |w: f64| {
            let d = p.omega0.powi(2) - w * w;
            d / (d * d + (p.gamma0 * w).powi(2)).sqrt()
        };
        for w in [0.3 * p.omega0, 1.7 * p.omega0] {
            let c = phase_shift_full(w, &p).unwrap().cos();
            assert!((c - cos_approx(w)).abs() < 5.0 * w / p.v);
        }
        assert!(phase_shift_full(0.0, &p).is_err());
        assert!(phase_shift_full(2.0 * p.v * 1.001, &p).is_err());
        let q = phase_shift_bulk(2f64.sqrt() * p.v, &p).unwrap();
        assert!((q - PI / 2.0).abs() < 1e-12);
        let w = 0.01 * p.v;
        let s2 = phase_shift_bulk(w, &p).unwrap().sin().powi(2);
        let expected = (w / p.v).powi(2) * (1.0 - (w / (2.0 * p.v)).powi(2));
        assert!((s2 / expected - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mode_grid_counts() {
        let g = ModeGrid::new(0.2, 100.0, ModeKind::Full);
        assert!((g.omegas[0] - 0.1).abs() < 1e-15);
        assert!(*g.omegas.last().unwrap() <= 200.0);
        assert_eq!(g.len(), 1000);
        let h = ModeGrid::new(0.1, 100.0, ModeKind::Full);
        assert!((h.len() as i64 - 2 * g.len() as i64).abs() <= 1);
    }

    #[test]
    fn bundled_table_matches_relation() {
        let t = DeviceTable::bundled();
        assert_eq!(t.device.len(), 8);
        for d in &t.device {
            assert!(
                (d.derived_gamma0() / d.gamma0_ghz - 1.0).abs() < 0.03,
                "{}",
                d.name
            );
            assert!((d.derived_z() / d.z - 1.0).abs() < 0.03, "{}", d.name);
        }
        let d = t.get("1a").unwrap();
        assert_eq!((d.z, d.e_c_ghz, d.gamma0_ghz), (0.81, 0.66, 1.03));
    }
}
