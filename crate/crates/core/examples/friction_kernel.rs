//! Friction kernel of a semi-infinite array: closed form against quadrature,
//! and the approach to the Ohmic 1/τ² tail.

use phaseslip::special::{kernel_k, kernel_k_quadrature_oracle, KernelParams};
use std::f64::consts::PI;

fn main() -> phaseslip::Result<()> {
    let kp = KernelParams::new(400.0, 0.8)?;
    println!("K(0) = {:.6e}", kp.k_zero());
    println!(
        "{:>10} {:>14} {:>10} {:>10}",
        "v|tau|", "K", "oracle", "K/ohmic"
    );
    for vt in [1e-3, 0.1, 1.0, 4.0, 10.0, 20.0, 50.0] {
        let tau = vt / kp.v;
        let k = kernel_k(tau, kp);
        let oracle = kernel_k_quadrature_oracle(tau, kp, 60_000)?;
        let ohmic = kp.gamma0 / (PI * tau * tau);
        println!(
            "{vt:>10} {k:>14.6e} {:>10.1e} {:>10.4}",
            k / oracle - 1.0,
            k / ohmic
        );
    }
    Ok(())
}
