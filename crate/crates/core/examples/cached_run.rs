//! Config overrides, the trajectory cache and the per-point artifacts.

use phaseslip::pipeline::{cmd_solve, RunConfig};

fn main() -> phaseslip::Result<()> {
    let dir = std::env::temp_dir().join("phaseslip-cache-example");
    let _ = std::fs::remove_dir_all(&dir);
    let mut config = RunConfig::default().with_overrides([("circuit__gamma_ratio", "0.2")])?;
    config.output_dir = dir.clone();
    println!("config hash {}", config.hash());
    for pass in ["first", "second"] {
        let start = std::time::Instant::now();
        let report = cmd_solve(&config)?;
        println!(
            "{pass} run: cache hit {}, {:.2} s, {} files",
            report.point.cache_hit,
            start.elapsed().as_secs_f64(),
            report.files.len()
        );
    }
    Ok(())
}
