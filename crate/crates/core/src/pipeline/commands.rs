//! The four user-facing commands. Points run in parallel; every file is
//! written afterwards, in axis order, through one [`Emitter`].

use super::cache::TrajectoryCache;
use super::config::RunConfig;
use super::engine::{evaluate, evaluate_resonance, PointResult, Resonance, Settings};
use crate::device::{ej_from_omega0, millikelvin_to_ghz, CircuitParams, Coupling, DeviceRecord};
use crate::error::{Error, Result};
use crate::rates::{ActionCorrection, RateFlags};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Devices with E_J/E_C below this at the sweep midpoint carry a validity warning.
pub const EJ_OVER_EC_WARNING: f64 = 3.0;

/// Serialized writer for one command's output directory.
#[derive(Debug)]
pub struct Emitter {
    dir: PathBuf,
    written: Vec<String>,
}

impl Emitter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.written.push(name.to_string());
        Ok(path)
    }

    /// Sidecar with the effective config, its hash and the files written.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Meta<'a> {
            command: &'a str,
            version: &'a str,
            config_hash: String,
            files: &'a [String],
            config: &'a RunConfig,
        }
        let files = std::mem::take(&mut self.written);
        let meta = Meta {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: config.hash(),
            files: &files,
            config,
        };
        let text = toml::to_string_pretty(&meta).map_err(|e| Error::Config(e.to_string()))?;
        self.write("metadata.toml", &text)
    }
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn cache_for(config: &RunConfig) -> Result<Option<TrajectoryCache>> {
    if config.cache {
        Ok(Some(TrajectoryCache::new(config.output_dir.join("cache"))?))
    } else {
        Ok(None)
    }
}

/// Single-point run with every intermediate artifact on disk.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub point: PointResult,
    pub files: Vec<PathBuf>,
}

pub fn cmd_solve(config: &RunConfig) -> Result<SolveReport> {
    config.validate()?;
    let params = config.circuit_params()?;
    let cache = cache_for(config)?;
    let settings = Settings::from(config);
    let probes = config.probes.frequencies(params.omega0);
    let pool = thread_pool(config.workers)?;
    let point = pool.install(|| evaluate(&params, &settings, &probes, cache.as_ref()))?;

    let hash = config.hash();
    let mut out = Emitter::new(&config.output_dir)?;
    let mut files = vec![
        out.write("trajectory.csv", &point.trajectory.to_text(&hash))?,
        out.write("matsubara.csv", &matsubara_csv(&point))?,
        out.write(
            "fit.toml",
            &toml::to_string_pretty(&point.fit).map_err(|e| Error::Config(e.to_string()))?,
        )?,
        out.write("factors.csv", &point.factors.to_csv())?,
        out.write("rates.csv", &point.rates.to_csv())?,
        out.write("summary.txt", &summary(&point, &hash))?,
    ];
    files.push(out.finish("solve", config)?);
    Ok(SolveReport { point, files })
}

fn matsubara_csv(p: &PointResult) -> String {
    let mut s = String::from("omega,im_dphi0,bracket,bracket_fit\n");
    for ((w, z), b) in p
        .fit_samples
        .omegas
        .iter()
        .zip(&p.fit_samples.values)
        .zip(&p.bracket)
    {
        let _ = writeln!(
            s,
            "{w:.12e},{:.12e},{b:.12e},{:.12e}",
            z.im,
            p.fit.matsubara(*w)
        );
    }
    s
}

fn summary(p: &PointResult, hash: &str) -> String {
    let mut s = String::new();
    let par = &p.params;
    let _ = writeln!(s, "config_hash      {hash}");
    let _ = writeln!(s, "omega0           {:.6} GHz", par.omega0);
    let _ = writeln!(s, "E_C, E_J         {:.6}, {:.6} GHz", par.e_c, par.e_j);
    let _ = writeln!(s, "Gamma0, z        {:.6} GHz, {:.6}", par.gamma0, par.z);
    let _ = writeln!(s, "method           {}", p.trajectory.method.name());
    let _ = writeln!(s, "residual         {:.3e}", p.trajectory.residual);
    let _ = writeln!(s, "iterations       {}", p.trajectory.iterations);
    let _ = writeln!(s, "cache hit        {}", p.cache_hit);
    let _ = writeln!(s, "fit basis/order  {:?}/{}", p.fit.basis, p.fit.order);
    let _ = writeln!(s, "fit rms          {:.3e}", p.fit.rms_residual);
    for (l, a) in p.fit.powers.iter().zip(&p.fit.coefficients) {
        let _ = writeln!(s, "  alpha_{l:<2}       {a:+.10e}");
    }
    let a = &p.actions;
    let _ = writeln!(s, "dS1, dS2         {:.8}, {:.3e}", a.ds1, a.ds2);
    let _ = writeln!(s, "dS_apprx, S0     {:.8}, {:.6}", a.ds_apprx, a.s0);
    let r = p.resonance();
    let _ = writeln!(
        s,
        "Gamma_in/Delta   {:.6e} (baseline {:.6e})",
        r.gamma_over_delta, r.gamma_over_delta_apprx
    );
    let _ = writeln!(
        s,
        "ratio            {:.6} = {:.6} * {:.6} * {:.6}",
        r.ratio, r.f2_ratio, r.action_ratio, r.integral_ratio
    );
    for w in &par.warnings {
        let _ = writeln!(s, "warning          {w}");
    }
    s
}

/// One scan or sweep point that evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub gamma0: f64,
    pub z: f64,
    pub e_j: f64,
    pub resonance: Resonance,
    pub actions: ActionCorrection,
    pub flags: RateFlags,
    /// Envelope of Γ^in/Δ over the ±band corners, including the central value.
    pub band: Option<(f64, f64)>,
}

impl SweepPoint {
    fn from_result(r: &PointResult) -> Self {
        let i = r
            .rates
            .omegas
            .iter()
            .position(|&w| (w - r.params.omega0).abs() < 1e-12 * r.params.omega0)
            .unwrap_or(0);
        Self {
            gamma0: r.params.gamma0,
            z: r.params.z,
            e_j: r.params.e_j,
            resonance: r.resonance(),
            actions: r.actions,
            flags: r.rates.flags[i],
            band: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: f64,
    pub outcome: std::result::Result<SweepPoint, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis_name: &'static str,
    pub label: String,
    pub warnings: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn points(&self) -> impl Iterator<Item = (f64, &SweepPoint)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|p| (r.axis, p)))
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "{},gamma0,z,e_j,gamma_in,gamma_in_apprx,gamma_over_delta,gamma_over_delta_apprx,band_low,band_high,\
             ratio,f2_ratio,action_ratio,integral_ratio,ds1,ds2,ds_apprx,flags,error\n",
            self.axis_name
        );
        for row in &self.rows {
            match &row.outcome {
                Ok(p) => {
                    let r = &p.resonance;
                    let (lo, hi) = p
                        .band
                        .map(|(a, b)| (format!("{a:.10e}"), format!("{b:.10e}")))
                        .unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{:.6},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{lo},{hi},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{},",
                        row.axis,
                        p.gamma0,
                        p.z,
                        p.e_j,
                        r.gamma_in,
                        r.gamma_in_apprx,
                        r.gamma_over_delta,
                        r.gamma_over_delta_apprx,
                        r.ratio,
                        r.f2_ratio,
                        r.action_ratio,
                        r.integral_ratio,
                        p.actions.ds1,
                        p.actions.ds2,
                        p.actions.ds_apprx,
                        p.flags.code()
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        s,
                        "{:.6}{}{}",
                        row.axis,
                        ",".repeat(18),
                        e.replace([',', '\n'], ";")
                    );
                }
            }
        }
        s
    }
}

/// On-resonance ratio against the baseline over Γ₀/ω₀ at the configured ω₀, E_C and T.
pub fn cmd_ratio_scan(config: &RunConfig) -> Result<SweepResult> {
    config.validate()?;
    let c = &config.circuit;
    let settings = Settings::from(config);
    let cache = cache_for(config)?;
    let scales = config.grid.scales(c.omega0);
    let temperature = millikelvin_to_ghz(c.temperature_mk);
    let pool = thread_pool(config.workers)?;
    let rows: Vec<SweepRow> = pool.install(|| {
        config
            .scan
            .gamma_ratios
            .par_iter()
            .map(|&ratio| {
                let outcome = CircuitParams::new(
                    c.omega0,
                    c.e_c,
                    Coupling::InverseRc(ratio * c.omega0),
                    scales,
                    temperature,
                )
                .and_then(|p| evaluate_resonance(&p, &settings, cache.as_ref()))
                .map(|r| SweepPoint::from_result(&r))
                .map_err(|e| e.to_string());
                SweepRow {
                    axis: ratio,
                    outcome,
                }
            })
            .collect()
    });
    let result = SweepResult {
        axis_name: "gamma_ratio",
        label: "ratio_scan".into(),
        warnings: Vec::new(),
        rows,
    };
    let mut out = Emitter::new(&config.output_dir)?;
    out.write("ratio_scan.csv", &result.to_csv())?;
    out.finish("ratio-scan", config)?;
    Ok(result)
}

/// E_J/E_C warning for a device at the sweep midpoint.
pub fn regime_warning(device: &DeviceRecord, omega0_mid: f64) -> Option<String> {
    let e_j = ej_from_omega0(omega0_mid, device.e_c_ghz).ok()?;
    let ratio = e_j / device.e_c_ghz;
    (ratio < EJ_OVER_EC_WARNING).then(|| {
        format!(
            "E_J/E_C = {ratio:.2} at omega0 = {omega0_mid:.2} GHz: E_C/E_J is large and fluctuation corrections beyond this treatment may matter"
        )
    })
}

/// ω₀ sweep per device with the ±band corner envelope.
pub fn cmd_devices(config: &RunConfig) -> Result<Vec<SweepResult>> {
    config.validate()?;
    let d = &config.devices;
    let table = d.load_table()?;
    let selected: Vec<DeviceRecord> = if let Some(name) = &config.circuit.device {
        vec![table
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("unknown device {name}")))?]
    } else if d.names.is_empty() {
        table.device.clone()
    } else {
        d.names
            .iter()
            .map(|n| {
                table
                    .get(n)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("unknown device {n}")))
            })
            .collect::<Result<_>>()?
    };
    let settings = Settings::from(config);
    let cache = cache_for(config)?;
    let temperature = millikelvin_to_ghz(d.temperature_mk);
    let omegas = d.omega0_values();
    let b = d.band;
    let corners = [
        (1.0, 1.0),
        (1.0 - b, 1.0 - b),
        (1.0 - b, 1.0 + b),
        (1.0 + b, 1.0 - b),
        (1.0 + b, 1.0 + b),
    ];
    let jobs: Vec<(usize, f64, (f64, f64))> = (0..selected.len())
        .flat_map(|i| {
            omegas
                .iter()
                .flat_map(move |&w| corners.into_iter().map(move |c| (i, w, c)))
        })
        .collect();
    let pool = thread_pool(config.workers)?;
    let values: Vec<Result<SweepPoint>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, w, (zf, ecf))| {
                let dev = &selected[i];
                let scales = config.grid.scales(w);
                let p = CircuitParams::new(
                    w,
                    dev.e_c_ghz * ecf,
                    Coupling::Impedance(dev.z * zf),
                    scales,
                    temperature,
                )?;
                evaluate_resonance(&p, &settings, cache.as_ref())
                    .map(|r| SweepPoint::from_result(&r))
            })
            .collect()
    });
    let mid = 0.5 * (d.omega0_range.0 + d.omega0_range.1);
    let mut results = Vec::with_capacity(selected.len());
    let mut chunks = values.into_iter();
    for dev in &selected {
        let mut rows = Vec::with_capacity(omegas.len());
        for &w in &omegas {
            let group: Vec<Result<SweepPoint>> = chunks.by_ref().take(corners.len()).collect();
            let mut it = group.into_iter();
            let outcome = match it.next().expect("central job") {
                Ok(mut centre) => {
                    let mut lo = centre.resonance.gamma_over_delta;
                    let mut hi = lo;
                    for corner in it.flatten() {
                        lo = lo.min(corner.resonance.gamma_over_delta);
                        hi = hi.max(corner.resonance.gamma_over_delta);
                    }
                    centre.band = Some((lo, hi));
                    Ok(centre)
                }
                Err(e) => Err(e.to_string()),
            };
            rows.push(SweepRow { axis: w, outcome });
        }
        let warnings = regime_warning(dev, mid).into_iter().collect();
        results.push(SweepResult {
            axis_name: "omega0",
            label: dev.name.clone(),
            warnings,
            rows,
        });
    }
    let mut out = Emitter::new(&config.output_dir)?;
    for r in &results {
        let mut text = String::new();
        for w in &r.warnings {
            let _ = writeln!(text, "# warning: {w}");
        }
        text.push_str(&r.to_csv());
        out.write(&format!("device_{}.csv", r.label), &text)?;
    }
    out.finish("devices", config)?;
    Ok(results)
}
