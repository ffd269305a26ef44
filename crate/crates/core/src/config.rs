//! Shared numeric configuration.
//!
//! Every tolerance, precision and budget knob used by the library and the
//! CLI lives in one struct so that defaults are stated exactly once.

use serde::{Deserialize, Serialize};

/// Numeric knobs shared across the analysis pipeline.
///
/// The defaults are the ones the acceptance suite and the CLI use:
///
/// | field            | default   | role                                          |
/// |------------------|-----------|-----------------------------------------------|
/// | `precision_bits` | 128       | scaling / acceptance threshold for LLL relation detection |
/// | `tol`            | 1e-8      | float-tier clustering and rank thresholds      |
/// | `height_bound`   | 10^4      | max absolute coefficient for heuristic relations |
/// | `n_max`          | 10^6      | power-scan budget for witnesses and torus search |
/// | `grid`           | 256       | torus occupancy grid resolution per axis       |
/// | `seed`           | 0xC0FFEE  | RNG seed for sample vectors                    |
/// | `max_dim`        | 64        | structure-extraction dimension bound           |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub precision_bits: u32,
    pub tol: f64,
    pub height_bound: u64,
    pub n_max: u64,
    pub grid: u32,
    pub seed: u64,
    pub max_dim: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision_bits: 128,
            tol: 1e-8,
            height_bound: 10_000,
            n_max: 1_000_000,
            grid: 256,
            seed: 0xC0FFEE,
            max_dim: 64,
        }
    }
}

impl Config {
    /// Validates that every knob is strictly positive.
    pub fn validate(&self) -> Result<(), String> {
        if self.precision_bits == 0 {
            return Err("precision_bits must be positive".into());
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err("tol must be a positive finite number".into());
        }
        if self.height_bound == 0 {
            return Err("height_bound must be positive".into());
        }
        if self.n_max == 0 {
            return Err("n_max must be positive".into());
        }
        if self.grid == 0 {
            return Err("grid must be positive".into());
        }
        if self.max_dim == 0 {
            return Err("max_dim must be positive".into());
        }
        Ok(())
    }
}
