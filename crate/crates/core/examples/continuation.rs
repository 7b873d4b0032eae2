//! Matsubara bracket fit and its continuation to real mode frequencies,
//! with the rational cross-check.

use phaseslip::continuation::{
    bracket_series, f_apprx, f_factors, fit_continuation, fit_grid, fit_rational, FitBasis,
    DEFAULT_WINDOW, FIT_SAMPLES,
};
use phaseslip::device::{ArrayScales, CircuitParams, Coupling};
use phaseslip::solver::{matsubara_transform, solve_iterative, SolverOptions, TimeGrid};

fn main() -> phaseslip::Result<()> {
    let p = CircuitParams::new(
        8.0,
        1.6,
        Coupling::InverseRc(0.3 * 8.0),
        ArrayScales::default_for(8.0),
        0.0,
    )?;
    let traj = solve_iterative(&p, TimeGrid::default_for(8.0), &SolverOptions::default())?;
    let xs = fit_grid(8.0, DEFAULT_WINDOW, FIT_SAMPLES);
    let bracket = bracket_series(&matsubara_transform(&traj, &xs)?, &p)?;
    let rational = fit_rational(&xs, &bracket, DEFAULT_WINDOW, 8.0)?;
    for order in [4, 6, 8] {
        let fit = fit_continuation(&xs, &bracket, FitBasis::Mixed, order, DEFAULT_WINDOW, 8.0)?;
        println!(
            "p = {order}: rms {:.2e}, coefficients {:?}",
            fit.rms_residual, fit.coefficients
        );
        let modes = [2.0, 4.0, 8.0, 12.0];
        let f = f_factors(&fit, &modes, &p);
        for (w, fk) in modes.iter().zip(f) {
            println!(
                "  omega_k = {w:>4}: |B| = {:.5} (rational {:.5}), f/f_apprx = {:.5}",
                fit.continued(*w).norm(),
                rational.continued(*w).norm(),
                fk / f_apprx(*w, &p)
            );
        }
    }
    Ok(())
}
