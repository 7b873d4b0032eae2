//! Bare instanton of a non-cosine well and the generic nonlinear action.

use phaseslip::solver::{solve_bare_generic, TimeGrid};

fn main() -> phaseslip::Result<()> {
    // double well λ(φ² − a²)² with a = π/2, curvature matched to ω₀ = 8 at C₀ = 1/3.2
    let (a, c0) = (std::f64::consts::FRAC_PI_2, 1.0 / 3.2);
    let lam = 64.0 * c0 / (8.0 * a * a);
    let grid = TimeGrid::new(2.0, 4001)?;
    let path = solve_bare_generic(|p| lam * (p * p - a * a).powi(2), -a, a, c0, grid)?;
    let rate = (2.0 * lam / c0).sqrt() * a;
    let err = grid
        .full_taus()
        .iter()
        .zip(&path.phi)
        .map(|(&t, &p)| (p - a * (rate * t).tanh()).abs())
        .fold(0.0, f64::max);
    println!("kink rate {rate:.4} per ns, max deviation from a*tanh {err:.2e}");
    for w in [1.0, 4.0, 8.0, 16.0] {
        let v = path.velocity_transform(w);
        println!(
            "omega = {w:>4}: velocity transform {:.6} {:+.2e}i",
            v.re, v.im
        );
    }
    Ok(())
}
