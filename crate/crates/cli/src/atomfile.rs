//! The versioned `atom.json` file format: grid metadata, samples, and the
//! context (matrix, exponent) needed to reinterpret them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use aniso_hardy_core::atoms::Atom;
use aniso_hardy_core::dilation::DilatedBall;
use aniso_hardy_core::grid::{BoundingBox, GriddedFunction};

use crate::config::{ExponentSpec, QSpec};
use crate::{CliError, Result};

pub const ATOM_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub schema_version: u32,
    /// Dilation matrix the ball geometry refers to (row-major rows).
    pub matrix: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub exponent: ExponentSpec,
    pub center: Vec<f64>,
    pub level: i32,
    pub q: QSpec,
    pub s: u32,
    pub seed: u64,
    pub grid_lo: Vec<f64>,
    pub grid_hi: Vec<f64>,
    pub resolution: usize,
    pub values: Vec<f64>,
    pub lq_norm: f64,
    pub size_budget: f64,
}

impl AtomFile {
    pub fn from_atom(
        atom: &Atom,
        matrix: Vec<Vec<f64>>,
        epsilon: f64,
        exponent: ExponentSpec,
        seed: u64,
    ) -> Self {
        let profile = atom.profile();
        Self {
            schema_version: ATOM_SCHEMA_VERSION,
            matrix,
            epsilon,
            exponent,
            center: atom.ball().center.clone(),
            level: atom.ball().level,
            q: QSpec::from_value(atom.q()),
            s: atom.s(),
            seed,
            grid_lo: profile.bbox().lo().to_vec(),
            grid_hi: profile.bbox().hi().to_vec(),
            resolution: profile.resolution(),
            values: profile.values().to_vec(),
            lq_norm: atom.lq_norm_value(),
            size_budget: atom.size_budget(),
        }
    }

    pub fn into_atom(self) -> Result<(Atom, Vec<Vec<f64>>, f64, ExponentSpec)> {
        if self.schema_version != ATOM_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported atom schema version {}",
                self.schema_version
            )));
        }
        let bbox = BoundingBox::new(self.grid_lo, self.grid_hi)?;
        let profile = GriddedFunction::from_values(bbox, self.resolution, self.values)?;
        let atom = Atom::from_profile_unchecked(
            DilatedBall::new(self.center, self.level),
            self.q.value()?,
            self.s,
            profile,
            self.lq_norm,
            self.size_budget,
        );
        Ok((atom, self.matrix, self.epsilon, self.exponent))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let file: AtomFile = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("invalid atom file: {e}")))?;
        Ok(file)
    }
}
