//! Dressed instanton deviation from both solvers at one coupling.

use phaseslip::device::{ArrayScales, CircuitParams, Coupling};
use phaseslip::solver::{
    check_tail_regime, solve_integro_differential, solve_iterative, SolverOptions, TimeGrid,
};

fn main() -> phaseslip::Result<()> {
    let ratio: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.3);
    let p = CircuitParams::new(
        8.0,
        1.6,
        Coupling::InverseRc(8.0 * ratio),
        ArrayScales::default_for(8.0),
        0.0,
    )?;
    let grid = TimeGrid::default_for(p.omega0);
    let opts = SolverOptions::default();
    let it = solve_iterative(&p, grid, &opts)?;
    let id = solve_integro_differential(&p, grid, &opts)?;
    check_tail_regime(&it)?;
    let gap = it
        .dphi0
        .iter()
        .zip(&id.dphi0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("Gamma0/omega0 = {ratio}, E_J = {:.4} GHz", p.e_j);
    println!(
        "iterative: {} iterations, residual {:.2e}",
        it.iterations, it.residual
    );
    println!(
        "integro:   {} steps, residual {:.2e}",
        id.iterations, id.residual
    );
    println!(
        "sup|dphi0| = {:.5}, tail coefficient {:.5}, solver gap {gap:.2e}",
        it.sup_norm(),
        it.tail_coefficient()
    );
    for t in [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        println!(
            "tau = {t:>5} ns  dphi0 = {:+.6e}  tau*dphi0 = {:+.5}",
            it.at(t),
            t * it.at(t)
        );
    }
    Ok(())
}
