//! Report assembly: per-check results, config hashing, CSV companions.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    /// SHA-256 of the exact config bytes.
    pub config_hash: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(config_bytes: &[u8], checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "aniso-hardy",
            tool_version: env!("CARGO_PKG_VERSION"),
            config_hash: config_hash(config_bytes),
            passed,
            checks,
        }
    }

    /// Canonical JSON bytes (struct field order, sorted object keys inside
    /// `details`): identical runs produce identical bytes.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One row per frequency point: coordinates, |F|, the bound it is compared
/// against, and the frequency-side quasi-norm.
pub fn write_spectrum_csv(
    path: &Path,
    points: &[Vec<f64>],
    abs_f: &[f64],
    bound: &[f64],
    rho: &[f64],
) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    let dim = points.first().map(|p| p.len()).unwrap_or(0);
    let mut header: Vec<String> = (0..dim).map(|a| format!("xi_{a}")).collect();
    header.push("abs_f".into());
    header.push("bound".into());
    header.push("rho_astar".into());
    writeln!(file, "{}", header.join(","))?;
    for i in 0..points.len() {
        let mut row: Vec<String> = points[i].iter().map(|v| format!("{v:.17e}")).collect();
        row.push(format!("{:.17e}", abs_f[i]));
        row.push(format!("{:.17e}", bound[i]));
        row.push(format!("{:.17e}", rho[i]));
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}
