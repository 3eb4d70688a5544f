//! CSV files with a provenance header, and the content-addressed cache.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// Bumped whenever a change can alter numeric output.
pub const CODE_VERSION: &str = concat!("isac-", env!("CARGO_PKG_VERSION"), "-r1");

/// One output file: name inside the output directory and full content.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

pub fn header(cfg: &RunConfig) -> String {
    format!("# seed={} config_hash={}\n", cfg.mc.seed, cfg.hash())
}

/// A CSV body prefixed with the header line.
pub fn csv(cfg: &RunConfig, body: String) -> String {
    header(cfg) + &body
}

pub fn cache_key(cfg: &RunConfig, command: &str) -> String {
    let mut h = Sha256::new();
    for part in [CODE_VERSION, command, &cfg.hash()] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn entry_dir(cache: &Path, key: &str) -> PathBuf {
    cache.join(key)
}

fn read_cached(dir: &Path) -> Option<Vec<Artifact>> {
    let index = fs::read_to_string(dir.join("index")).ok()?;
    index
        .lines()
        .map(|name| Some(Artifact { name: name.to_string(), content: fs::read_to_string(dir.join(name)).ok()? }))
        .collect()
}

fn store(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for a in artifacts {
        let p = dir.join(&a.name);
        fs::write(&p, &a.content).map_err(|e| io_err(&p, e))?;
    }
    let names: Vec<&str> = artifacts.iter().map(|a| a.name.as_str()).collect();
    let p = dir.join("index");
    fs::write(&p, names.join("\n")).map_err(|e| io_err(&p, e))
}

/// Runs `compute` unless a cache entry for `(cfg, command)` exists.
/// Returns the artifacts and whether they came from the cache.
pub fn cached(
    cfg: &RunConfig,
    command: &str,
    compute: impl FnOnce() -> Result<Vec<Artifact>, CliError>,
) -> Result<(Vec<Artifact>, bool), CliError> {
    let Some(cache) = &cfg.cache_dir else {
        return Ok((compute()?, false));
    };
    let dir = entry_dir(cache, &cache_key(cfg, command));
    if let Some(hit) = read_cached(&dir) {
        return Ok((hit, true));
    }
    let fresh = compute()?;
    store(&dir, &fresh)?;
    Ok((fresh, false))
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    artifacts
        .iter()
        .map(|a| {
            let p = dir.join(&a.name);
            fs::write(&p, &a.content).map_err(|e| io_err(&p, e))?;
            Ok(p)
        })
        .collect()
}

/// Float in the shortest round-trip scientific form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
