//! Transmon spectrum from the Mathieu problem: ω₀ ↔ E_J, charge dispersion,
//! and the emergent scale of the coupled array.

use phaseslip::device::{ej_from_omega0, lambda0, lambda_star, omega0_from_ej, Lambda0Method};

fn main() -> phaseslip::Result<()> {
    let e_c = 1.6;
    println!(
        "{:>6} {:>10} {:>12} {:>12} {:>12}",
        "EJ/EC", "omega0", "harmonic", "lambda0", "wkb/exact"
    );
    for ratio in [5.0, 10.0, 25.0, 50.0] {
        let e_j = ratio * e_c;
        let w0 = omega0_from_ej(e_j, e_c)?;
        let exact = lambda0(e_j, e_c, Lambda0Method::Exact)?;
        let wkb = lambda0(e_j, e_c, Lambda0Method::Wkb)?;
        println!(
            "{ratio:>6} {w0:>10.5} {:>12.5} {exact:>12.4e} {:>12.5}",
            (8.0 * e_j * e_c).sqrt() - e_c,
            wkb / exact
        );
    }
    let e_j = ej_from_omega0(8.0, e_c)?;
    let l0 = lambda0(e_j, e_c, Lambda0Method::Exact)?;
    println!("omega0 = 8 GHz needs E_J = {e_j:.6} GHz; lambda0 = {l0:.4e} GHz");
    for z in [0.8, 1.2, 2.0] {
        match lambda_star(l0, 8.0, z) {
            Some(s) => println!("z = {z}: lambda* = {s:.4e} GHz"),
            None => println!("z = {z}: no emergent scale (z <= 1)"),
        }
    }
    Ok(())
}
