use clap::{Parser, Subcommand};
use phaseslip::pipeline::{self, RunConfig};
use phaseslip::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Instanton-induced inelastic photon decay in transmon-terminated arrays.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// TOML run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recompute trajectories instead of reading the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Device table row to use.
    #[arg(long, global = true)]
    device: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one parameter point and write every intermediate artifact.
    Solve,
    /// On-resonance rate ratio against the baseline over Γ₀/ω₀.
    RatioScan,
    /// ω₀ sweeps with uncertainty bands for the device table.
    Devices,
    /// Run the invariant suite.
    Validate,
    /// Print the effective configuration.
    Config,
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let base = match &cli.config {
        Some(path) => RunConfig::from_toml_str(
            &std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        )?,
        None => RunConfig::default(),
    };
    let mut config = base.with_env()?;
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if cli.no_cache {
        config.cache = false;
    }
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    if let Some(d) = &cli.device {
        config.circuit.device = Some(d.clone());
    }
    config.validate()?;
    Ok(config)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

fn write_error_record(config: &RunConfig, e: &Error) {
    let kind = format!("{e:?}")
        .split(['{', '(', ' '])
        .next()
        .unwrap_or("Error")
        .to_string();
    let record = format!(
        "kind = {kind:?}\nmessage = {:?}\nconfig_hash = {:?}\n",
        e.to_string(),
        config.hash()
    );
    let _ = std::fs::create_dir_all(&config.output_dir);
    let _ = std::fs::write(config.output_dir.join("error.toml"), record);
}

fn run(cli: &Cli, config: &RunConfig) -> Result<bool, Error> {
    match cli.command {
        Command::Config => {
            print!("{}", config.to_toml());
            println!("# hash {}", config.hash());
        }
        Command::Solve => {
            let report = pipeline::cmd_solve(config)?;
            let r = report.point.resonance();
            println!(
                "residual {:.3e} after {} iterations{}; Gamma_in/Delta {:.6e}, ratio {:.4}",
                report.point.trajectory.residual,
                report.point.trajectory.iterations,
                if report.point.cache_hit {
                    " (cached)"
                } else {
                    ""
                },
                r.gamma_over_delta,
                r.ratio
            );
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::RatioScan => {
            let scan = pipeline::cmd_ratio_scan(config)?;
            for row in &scan.rows {
                match &row.outcome {
                    Ok(p) => println!(
                        "Gamma0/omega0 = {:.3}: ratio {:.4} (f2 {:.4}, action {:.4}, integral {:.4})",
                        row.axis, p.resonance.ratio, p.resonance.f2_ratio, p.resonance.action_ratio, p.resonance.integral_ratio
                    ),
                    Err(e) => println!("Gamma0/omega0 = {:.3}: failed: {e}", row.axis),
                }
            }
            return Ok(scan.rows.iter().all(|r| r.outcome.is_ok()));
        }
        Command::Devices => {
            let sweeps = pipeline::cmd_devices(config)?;
            let mut all_ok = true;
            for s in &sweeps {
                let ok = s.rows.iter().filter(|r| r.outcome.is_ok()).count();
                all_ok &= ok == s.rows.len();
                println!("device {}: {ok}/{} points", s.label, s.rows.len());
                for w in &s.warnings {
                    println!("  warning: {w}");
                }
            }
            return Ok(all_ok);
        }
        Command::Validate => {
            let report = pipeline::cmd_validate(config)?;
            print!("{}", report.to_text());
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match run(&cli, &config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            write_error_record(&config, &e);
            ExitCode::from(exit_code(&e))
        }
    }
}
