//! On-disk trajectory cache keyed by a hash of everything the solve depends on.

use super::config::SolverConfig;
use crate::device::CircuitParams;
use crate::error::Result;
use crate::solver::{TimeGrid, Trajectory};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Clone)]
pub struct TrajectoryCache {
    dir: PathBuf,
}

#[derive(Serialize)]
struct Key<'a> {
    omega0: f64,
    e_c: f64,
    e_j: f64,
    gamma0: f64,
    v: f64,
    grid: TimeGrid,
    solver: &'a SolverConfig,
}

impl TrajectoryCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// The temperature and mode spacing do not enter the trajectory.
    pub fn key(&self, p: &CircuitParams, grid: TimeGrid, solver: &SolverConfig) -> String {
        let key = Key {
            omega0: p.omega0,
            e_c: p.e_c,
            e_j: p.e_j,
            gamma0: p.gamma0,
            v: p.v,
            grid,
            solver,
        };
        let text = toml::to_string(&key).expect("key serializes");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.traj"))
    }

    pub fn load(&self, key: &str) -> Option<Trajectory> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        Trajectory::from_text(&text).ok()
    }

    pub fn store(&self, key: &str, traj: &Trajectory) -> Result<()> {
        // write then rename so concurrent readers never see a partial file
        static SERIAL: AtomicU64 = AtomicU64::new(0);
        let n = SERIAL.fetch_add(1, Ordering::Relaxed);
        let tmp = self
            .dir
            .join(format!("{key}.{}-{n}.tmp", std::process::id()));
        std::fs::write(&tmp, traj.to_text(key))?;
        std::fs::rename(tmp, self.path(key))?;
        Ok(())
    }
}
