//! ω₀ sweep for one row of the bundled device table, with the corner band.

use phaseslip::pipeline::{cmd_devices, RunConfig};

fn main() -> phaseslip::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "2b".into());
    let mut config = RunConfig::default();
    config.circuit.device = Some(name);
    config.devices.omega0_points = 5;
    config.output_dir = std::env::temp_dir().join("phaseslip-device-example");
    for sweep in cmd_devices(&config)? {
        println!("device {}", sweep.label);
        for w in &sweep.warnings {
            println!("  warning: {w}");
        }
        for (omega0, p) in sweep.points() {
            let (lo, hi) = p.band.unwrap_or((f64::NAN, f64::NAN));
            println!(
                "  omega0 {omega0:>5.2}: Gamma/Delta {:.4e} in [{lo:.4e}, {hi:.4e}], baseline {:.4e}",
                p.resonance.gamma_over_delta, p.resonance.gamma_over_delta_apprx
            );
        }
    }
    Ok(())
}
