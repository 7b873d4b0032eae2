//! On-resonance ratio to the baseline and its three factors over Γ₀/ω₀.

use phaseslip::device::{ArrayScales, CircuitParams, Coupling};
use phaseslip::pipeline::{evaluate_resonance, Settings};

fn main() -> phaseslip::Result<()> {
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8}",
        "G0/w0", "ratio", "f2", "action", "ImPi"
    );
    for g in [0.01, 0.1, 0.2, 0.3, 0.5] {
        let p = CircuitParams::new(
            8.0,
            1.6,
            Coupling::InverseRc(8.0 * g),
            ArrayScales::default_for(8.0),
            0.0,
        )?;
        let r = evaluate_resonance(&p, &Settings::default(), None)?.resonance();
        println!(
            "{g:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            r.ratio, r.f2_ratio, r.action_ratio, r.integral_ratio
        );
    }
    Ok(())
}
