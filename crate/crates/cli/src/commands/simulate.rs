use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use qse_sim::config::load_scenario;
use qse_sim::simulate;

pub fn run(config_path: &Path, seed_override: Option<u64>, out: &Path) -> Result<()> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let scenario = load_scenario(&text, seed_override)?;
    let (trace, metrics) = simulate(&scenario)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("trace.log"), trace.to_text())?;
    fs::write(out.join("metrics.csv"), metrics.to_csv())?;
    let classified = metrics.get("requests", "classified").unwrap_or("0");
    let arrived = metrics.get("requests", "arrived").unwrap_or("0");
    println!(
        "simulate: {arrived} arrivals, {classified} classified, trace -> {}",
        out.join("trace.log").display()
    );
    Ok(())
}
