use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("quadrature did not converge: estimated error {estimate:.3e}")]
    Quadrature { estimate: f64 },

    #[error("charge-basis diagonalization did not converge by n_cut = {n_cut}")]
    Diagonalization { n_cut: usize },

    #[error("no bracket: omega0 = {omega0} GHz is below the E_J = 0 value {floor} GHz")]
    NoBracket { omega0: f64, floor: f64 },

    #[error(
        "{method} solver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("Newton iteration diverged (residual {residual:.3e})")]
    NewtonDiverged { residual: f64 },

    #[error("trajectory tail not in the 1/tau regime: {0}; increase tau_max")]
    TailRegime(String),

    #[error("continuation fit failed: {0}")]
    Fit(String),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("direct scheme refused: integrand dynamic range {range:.2e} exceeds {bound:.1e}; use the stabilized scheme")]
    DynamicRange { range: f64, bound: f64 },

    #[error("time integral not converged: relative change {change:.3e} at {n_t} samples")]
    TimeIntegral { change: f64, n_t: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}
