//! Run orchestration: configuration, per-point evaluation, caching and output.

pub mod cache;
pub mod commands;
pub mod config;
pub mod engine;
pub mod validate;

pub use cache::TrajectoryCache;
pub use commands::{
    cmd_devices, cmd_ratio_scan, cmd_solve, Emitter, SolveReport, SweepPoint, SweepResult, SweepRow,
};
pub use config::RunConfig;
pub use engine::{evaluate, evaluate_resonance, PointResult, Resonance, Settings};
pub use validate::{cmd_validate, Check, ValidationReport};
