//! Inelastic decay rate across the resonance, numerical and baseline.

use phaseslip::device::{millikelvin_to_ghz, ArrayScales, CircuitParams, Coupling};
use phaseslip::pipeline::{evaluate, Settings};

fn main() -> phaseslip::Result<()> {
    let temperature = millikelvin_to_ghz(40.0);
    let p = CircuitParams::new(
        8.0,
        1.6,
        Coupling::InverseRc(0.8),
        ArrayScales::default_for(8.0),
        temperature,
    )?;
    let probes: Vec<f64> = (0..=20).map(|k| 8.0 * (0.5 + 0.05 * k as f64)).collect();
    let point = evaluate(&p, &Settings::default(), &probes, None)?;
    let a = point.actions;
    println!(
        "dS1 = {:.4}, dS2 = {:.4}, dS_apprx = {:.4}",
        a.ds1, a.ds2, a.ds_apprx
    );
    print!("{}", point.rates.to_csv());
    Ok(())
}
