//! Run configuration: TOML with defaults for every field, environment
//! overrides, and a content hash of the physics-relevant part.

use crate::continuation::{FitBasis, DEFAULT_ORDER, DEFAULT_WINDOW};
use crate::device::{millikelvin_to_ghz, ArrayScales, CircuitParams, Coupling, DeviceTable};
use crate::error::{Error, Result};
use crate::rates::RateOptions;
use crate::solver::{BathResponse, Mixing, SolverOptions, TimeGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// Prefix of environment overrides: `PHASESLIP_GRID__TAU_MAX_OMEGA0=120`
/// sets `grid.tau_max_omega0`.
pub const ENV_PREFIX: &str = "PHASESLIP_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    Iterative,
    IntegroDifferential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    /// Row of the device table; overrides `e_c` and the coupling when set.
    pub device: Option<String>,
    pub omega0: f64,
    pub e_c: f64,
    /// Γ₀/ω₀; ignored when `z` is set.
    pub gamma_ratio: f64,
    pub z: Option<f64>,
    /// Explicit E_J; derived from ω₀ when absent.
    pub e_j: Option<f64>,
    pub temperature_mk: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            device: None,
            omega0: 8.0,
            e_c: 1.6,
            gamma_ratio: 0.1,
            z: None,
            e_j: None,
            temperature_mk: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub tau_max_omega0: f64,
    pub step_omega0: f64,
    pub v_over_omega0: f64,
    pub omega0_over_delta: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            tau_max_omega0: TimeGrid::DEFAULT_TAU_MAX_OMEGA0,
            step_omega0: TimeGrid::DEFAULT_STEP_OMEGA0,
            v_over_omega0: ArrayScales::V_OVER_OMEGA0,
            omega0_over_delta: ArrayScales::OMEGA0_OVER_DELTA,
        }
    }
}

impl GridConfig {
    pub fn time_grid(&self, omega0: f64) -> Result<TimeGrid> {
        TimeGrid::for_omega0(omega0, self.tau_max_omega0, self.step_omega0)
    }

    pub fn scales(&self, omega0: f64) -> ArrayScales {
        ArrayScales {
            v: self.v_over_omega0 * omega0,
            delta: omega0 / self.omega0_over_delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub order: usize,
    pub basis: FitBasis,
    pub window: (f64, f64),
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            basis: FitBasis::default(),
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub bath: BathResponse,
    pub mixing: Mixing,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            method: SolverMethod::default(),
            tol: o.tol,
            max_iter: o.max_iter,
            bath: o.bath,
            mixing: o.mixing,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            bath: self.bath,
            mixing: self.mixing,
        }
    }
}

/// Probe frequencies in units of ω₀; the resonance is always included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            from: 0.5,
            to: 1.5,
            count: 21,
        }
    }
}

impl ProbeConfig {
    pub fn frequencies(&self, omega0: f64) -> Vec<f64> {
        let mut out: Vec<f64> = match self.count {
            0 => Vec::new(),
            1 => vec![self.from * omega0],
            n => (0..n)
                .map(|i| omega0 * (self.from + (self.to - self.from) * i as f64 / (n - 1) as f64))
                .collect(),
        };
        if !out.iter().any(|&w| (w - omega0).abs() < 1e-12 * omega0) {
            out.push(omega0);
            out.sort_by(f64::total_cmp);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub gamma_ratios: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            gamma_ratios: vec![0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSweepConfig {
    /// Empty means every row of the table.
    pub names: Vec<String>,
    pub omega0_range: (f64, f64),
    pub omega0_points: usize,
    pub temperature_mk: f64,
    /// Relative perturbation of Z and E_C for the band corners.
    pub band: f64,
    /// Optional replacement table (TOML with `[[device]]` rows).
    pub table: Option<PathBuf>,
}

impl Default for DeviceSweepConfig {
    fn default() -> Self {
        Self {
            names: Vec::new(),
            omega0_range: (4.0, 10.0),
            omega0_points: 13,
            temperature_mk: 40.0,
            band: 0.1,
            table: None,
        }
    }
}

impl DeviceSweepConfig {
    pub fn omega0_values(&self) -> Vec<f64> {
        let (a, b) = self.omega0_range;
        match self.omega0_points {
            0 => Vec::new(),
            1 => vec![a],
            n => (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    pub fn load_table(&self) -> Result<DeviceTable> {
        match &self.table {
            Some(path) => DeviceTable::from_toml_str(&std::fs::read_to_string(path)?),
            None => Ok(DeviceTable::bundled()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: CircuitConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub fit: FitConfig,
    pub rates: RateOptions,
    pub probes: ProbeConfig,
    pub scan: ScanConfig,
    pub devices: DeviceSweepConfig,
    pub output_dir: PathBuf,
    pub cache: bool,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            circuit: CircuitConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            fit: FitConfig::default(),
            rates: RateOptions::default(),
            probes: ProbeConfig::default(),
            scan: ScanConfig::default(),
            devices: DeviceSweepConfig::default(),
            output_dir: PathBuf::from("phaseslip-out"),
            cache: true,
            workers: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Apply `KEY=value` overrides where KEY is `SECTION__FIELD` (case-insensitive)
    /// and value is a TOML literal, falling back to a bare string.
    pub fn with_overrides<'a>(
        self,
        vars: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut doc = toml::Value::try_from(&self).map_err(|e| Error::Config(e.to_string()))?;
        for (key, raw) in vars {
            let path: Vec<String> = key.split("__").map(str::to_ascii_lowercase).collect();
            let value = parse_literal(raw);
            set_path(&mut doc, &path, value)
                .map_err(|m| Error::Config(format!("override {key}: {m}")))?;
        }
        doc.try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// Overrides from the process environment.
    pub fn with_env(self) -> Result<Self> {
        let vars: Vec<(String, String)> = std::env::vars()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|rest| (rest.to_string(), v)))
            .collect();
        self.with_overrides(vars.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// SHA-256 over the physics-relevant sections, hex encoded.
    pub fn hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.output_dir = PathBuf::new();
        hashed.cache = true;
        hashed.workers = 0;
        format!("{:x}", Sha256::digest(hashed.to_toml().as_bytes()))
    }

    /// Circuit parameters for the configured device or explicit block.
    pub fn circuit_params(&self) -> Result<CircuitParams> {
        let c = &self.circuit;
        let scales = self.grid.scales(c.omega0);
        let temperature = millikelvin_to_ghz(c.temperature_mk);
        if let Some(name) = &c.device {
            let table = self.devices.load_table()?;
            let row = table
                .get(name)
                .ok_or_else(|| Error::Config(format!("unknown device {name}")))?;
            return row.params(c.omega0, scales, temperature);
        }
        let coupling = match c.z {
            Some(z) => Coupling::Impedance(z),
            None => Coupling::InverseRc(c.gamma_ratio * c.omega0),
        };
        match c.e_j {
            Some(e_j) => {
                CircuitParams::with_ej(c.omega0, c.e_c, e_j, coupling, scales, temperature)
            }
            None => CircuitParams::new(c.omega0, c.e_c, coupling, scales, temperature),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self
            .scan
            .gamma_ratios
            .iter()
            .any(|&r| !(r > 0.0 && r <= 0.7))
        {
            return bad("scan.gamma_ratios must lie in (0, 0.7]".into());
        }
        if !(self.rates.cutoff_fraction > 0.5 && self.rates.cutoff_fraction < 1.0) {
            return bad(format!(
                "rates.cutoff_fraction = {} must lie in (0.5, 1)",
                self.rates.cutoff_fraction
            ));
        }
        if self.fit.window.0 >= self.fit.window.1 || self.fit.window.0 <= 0.0 {
            return bad(format!(
                "fit.window {:?} is not an increasing positive pair",
                self.fit.window
            ));
        }
        if !(self.devices.band >= 0.0 && self.devices.band < 1.0) {
            return bad(format!(
                "devices.band = {} must lie in [0, 1)",
                self.devices.band
            ));
        }
        self.grid.time_grid(self.circuit.omega0)?;
        Ok(())
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("x = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(
    doc: &mut toml::Value,
    path: &[String],
    value: toml::Value,
) -> std::result::Result<(), String> {
    let (last, parents) = path.split_last().ok_or("empty key")?;
    let mut node = doc;
    for p in parents {
        node = node
            .get_mut(p.as_str())
            .ok_or_else(|| format!("no section {p}"))?;
    }
    let table = node.as_table_mut().ok_or("not a section")?;
    if !table.contains_key(last.as_str())
        && !matches!(last.as_str(), "device" | "z" | "e_j" | "table")
    {
        return Err(format!("no field {last}"));
    }
    table.insert(last.clone(), value);
    Ok(())
}
