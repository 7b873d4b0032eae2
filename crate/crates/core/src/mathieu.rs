//! Transmon spectrum in the charge basis.

use crate::error::{domain, Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

const N_CUT_START: usize = 10;
const N_CUT_STEP: usize = 5;
const N_CUT_MAX: usize = 400;
const LEVEL_TOL: f64 = 1e-10;

/// Offset charge at the two extremes of the charge dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetCharge {
    Zero,
    One,
}

impl OffsetCharge {
    fn value(self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::One => 1.0,
        }
    }
}

fn lowest_levels(chi: f64, qg: f64, n_cut: usize, n_levels: usize) -> Vec<f64> {
    let dim = 2 * n_cut + 1;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let n = i as f64 - n_cut as f64;
        h[(i, i)] = (2.0 * n - qg).powi(2);
        if i + 1 < dim {
            h[(i, i + 1)] = -chi;
            h[(i + 1, i)] = -chi;
        }
    }
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e.truncate(n_levels);
    e
}

/// Lowest `n_levels` eigenvalues, in units of E_C, of E_C(Q − q_g)² − E_J cos 2φ
/// with χ = E_J/(2E_C). The charge cutoff grows until the highest requested
/// level moves by less than 1e-10.
pub fn mathieu_pair(chi: f64, qg: OffsetCharge, n_levels: usize) -> Result<Vec<f64>> {
    if !(chi >= 0.0) {
        return Err(domain(
            "mathieu_pair",
            format!("chi = {chi} must be nonnegative"),
        ));
    }
    if n_levels < 2 {
        return Err(domain("mathieu_pair", "need at least two levels"));
    }
    let mut n_cut = N_CUT_START.max(n_levels);
    let mut prev = lowest_levels(chi, qg.value(), n_cut, n_levels);
    while n_cut < N_CUT_MAX {
        n_cut += N_CUT_STEP;
        let next = lowest_levels(chi, qg.value(), n_cut, n_levels);
        if (next[n_levels - 1] - prev[n_levels - 1]).abs() < LEVEL_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Diagonalization { n_cut })
}
