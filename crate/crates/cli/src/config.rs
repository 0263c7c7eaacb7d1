//! The run-configuration schema (version 1) and the small structured-text
//! specs used by the one-shot subcommands.

use serde::{Deserialize, Serialize};

use crate::builtins;
use crate::CliError;

/// Top-level run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Schema version; must be 1.
    pub version: u32,
    /// Builtin name or explicit rows (row-major).
    pub matrix: MatrixSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub exponent: ExponentSpec,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    /// One weight per atom; required by the decomposition checks.
    #[serde(default)]
    pub lambdas: Vec<LambdaSpec>,
    #[serde(default)]
    pub grids: GridSpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    pub checks: Vec<CheckName>,
}

pub fn default_epsilon() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Name(String),
    Rows(Vec<Vec<f64>>),
}

impl MatrixSpec {
    pub fn rows(&self) -> Result<Vec<Vec<f64>>, CliError> {
        match self {
            MatrixSpec::Rows(rows) => Ok(rows.clone()),
            MatrixSpec::Name(name) => builtins::matrix_rows(name)
                .ok_or_else(|| CliError::Config(format!("unknown builtin matrix '{name}'"))),
        }
    }
}

/// Exponent families exposed to configs and flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExponentSpec {
    Constant { p: f64 },
    LogSmooth {
        p_infty: f64,
        c: f64,
        #[serde(default = "default_c_log")]
        c_log: f64,
    },
    Step { p_low: f64, p_high: f64, threshold: f64 },
}

fn default_c_log() -> f64 {
    4.0
}

impl ExponentSpec {
    /// Parse the flag form: `constant:P`, `log-smooth:P_INF,C[,C_LOG]`,
    /// `step:P_LOW,P_HIGH,THRESHOLD`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let (family, rest) = text
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("exponent spec '{text}' missing ':'")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad number '{t}' in '{text}'")))
            })
            .collect::<Result<_, _>>()?;
        match (family, nums.as_slice()) {
            ("constant", [p]) => Ok(Self::Constant { p: *p }),
            ("log-smooth", [p_infty, c]) => {
                Ok(Self::LogSmooth { p_infty: *p_infty, c: *c, c_log: default_c_log() })
            }
            ("log-smooth", [p_infty, c, c_log]) => {
                Ok(Self::LogSmooth { p_infty: *p_infty, c: *c, c_log: *c_log })
            }
            ("step", [p_low, p_high, threshold]) => {
                Ok(Self::Step { p_low: *p_low, p_high: *p_high, threshold: *threshold })
            }
            _ => Err(CliError::Config(format!("unrecognized exponent spec '{text}'"))),
        }
    }
}

/// `q` index: a number or the string `"inf"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSpec {
    Number(f64),
    Text(String),
}

impl QSpec {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            QSpec::Number(v) => Ok(*v),
            QSpec::Text(t) if t == "inf" => Ok(f64::INFINITY),
            QSpec::Text(t) => Err(CliError::Config(format!("bad q '{t}': number or \"inf\""))),
        }
    }

    pub fn from_value(q: f64) -> Self {
        if q.is_infinite() {
            QSpec::Text("inf".into())
        } else {
            QSpec::Number(q)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub center: Vec<f64>,
    pub level: i32,
    pub q: QSpec,
    pub s: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Real(f64),
    Complex([f64; 2]),
}

impl LambdaSpec {
    pub fn value(&self) -> num_complex::Complex64 {
        match self {
            LambdaSpec::Real(re) => num_complex::Complex64::new(*re, 0.0),
            LambdaSpec::Complex([re, im]) => num_complex::Complex64::new(*re, *im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Per-axis resolution for atom profiles (defaults by dimension).
    #[serde(default)]
    pub atom_resolution: Option<usize>,
    /// Per-axis resolution of the decomposition-quantity grid.
    #[serde(default)]
    pub quantity_resolution: Option<usize>,
    /// Shell range `[m_min, m_max]` of the log-radial frequency grid.
    #[serde(default = "default_freq_shells")]
    pub freq_shells: [i32; 2],
    #[serde(default = "default_freq_directions")]
    pub freq_directions: usize,
    /// Number of radii `2^{-m}` in the origin-convergence ladder.
    #[serde(default = "default_radii_count")]
    pub radii_count: usize,
    /// Shell range for the weighted-integral check.
    #[serde(default = "default_shell_range")]
    pub shell_range: [i32; 2],
    #[serde(default = "default_shell_directions")]
    pub shell_directions: usize,
    #[serde(default = "default_radial_divisions")]
    pub radial_divisions: usize,
    /// Dilation step used by the commutation check.
    #[serde(default = "default_commutation_j")]
    pub commutation_j: i32,
}

fn default_freq_shells() -> [i32; 2] {
    [-6, 6]
}
fn default_freq_directions() -> usize {
    32
}
fn default_radii_count() -> usize {
    12
}
fn default_shell_range() -> [i32; 2] {
    [-16, 8]
}
fn default_shell_directions() -> usize {
    16
}
fn default_radial_divisions() -> usize {
    6
}
fn default_commutation_j() -> i32 {
    1
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            atom_resolution: None,
            quantity_resolution: None,
            freq_shells: default_freq_shells(),
            freq_directions: default_freq_directions(),
            radii_count: default_radii_count(),
            shell_range: default_shell_range(),
            shell_directions: default_shell_directions(),
            radial_divisions: default_radial_divisions(),
            commutation_j: default_commutation_j(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "default_luxemburg_tol")]
    pub luxemburg_tol: f64,
    #[serde(default = "default_containment_trials")]
    pub containment_trials: usize,
    #[serde(default = "default_log_holder_pairs")]
    pub log_holder_pairs: usize,
    #[serde(default = "default_sigma_samples")]
    pub sigma_samples: usize,
}

fn default_luxemburg_tol() -> f64 {
    1e-13
}
fn default_containment_trials() -> usize {
    2000
}
fn default_log_holder_pairs() -> usize {
    1000
}
fn default_sigma_samples() -> usize {
    2048
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            luxemburg_tol: default_luxemburg_tol(),
            containment_trials: default_containment_trials(),
            log_holder_pairs: default_log_holder_pairs(),
            sigma_samples: default_sigma_samples(),
        }
    }
}

/// The checks a run can execute, in dependency order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Dilation,
    Exponent,
    Atoms,
    Commutation,
    Lemma32,
    Lemma34,
    Thm31,
    Thm41,
    Thm42,
}

impl CheckName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Dilation => "dilation",
            CheckName::Exponent => "exponent",
            CheckName::Atoms => "atoms",
            CheckName::Commutation => "commutation",
            CheckName::Lemma32 => "lemma32",
            CheckName::Lemma34 => "lemma34",
            CheckName::Thm31 => "thm31",
            CheckName::Thm41 => "thm41",
            CheckName::Thm42 => "thm42",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        serde_json::from_value(serde_json::Value::String(name.to_string()))
            .map_err(|_| CliError::Config(format!("unknown check '{name}'")))
    }

    /// Does the check need a decomposition (atoms with weights)?
    pub fn needs_decomposition(&self) -> bool {
        matches!(
            self,
            CheckName::Lemma34 | CheckName::Thm31 | CheckName::Thm41 | CheckName::Thm42
        )
    }

    /// Does the check need at least one atom?
    pub fn needs_atoms(&self) -> bool {
        self.needs_decomposition()
            || matches!(self, CheckName::Atoms | CheckName::Commutation | CheckName::Lemma32)
    }
}

/// Parse a run config from JSON bytes with schema validation.
pub fn parse_config(bytes: &[u8]) -> Result<RunConfig, CliError> {
    let config: RunConfig = serde_json::from_slice(bytes)
        .map_err(|e| CliError::Config(format!("invalid run config: {e}")))?;
    validate(&config)?;
    Ok(config)
}

/// Structural validation ahead of any computation.
pub fn validate(config: &RunConfig) -> Result<(), CliError> {
    if config.version != 1 {
        return Err(CliError::Config(format!(
            "unsupported config version {} (expected 1)",
            config.version
        )));
    }
    if config.checks.is_empty() {
        return Err(CliError::Config("no checks requested".into()));
    }
    let rows = config.matrix.rows()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("matrix must be square and nonempty".into()));
    }
    if !(config.epsilon > 0.0 && config.epsilon < 0.5) {
        return Err(CliError::Config(format!("epsilon {} not in (0, 0.5)", config.epsilon)));
    }
    let (p_minus, p_plus) = exponent_bounds(&config.exponent);
    if !(p_minus > 0.0 && p_minus <= p_plus && p_plus.is_finite()) {
        return Err(CliError::Config(format!(
            "exponent bounds [{p_minus}, {p_plus}] are not admissible"
        )));
    }
    for (i, atom) in config.atoms.iter().enumerate() {
        if atom.center.len() != n {
            return Err(CliError::Config(format!(
                "atom {i}: center has dimension {} but the matrix is {n}x{n}",
                atom.center.len()
            )));
        }
        let q = atom.q.value()?;
        if !(q > p_plus.max(1.0)) {
            return Err(CliError::Config(format!(
                "atom {i}: q = {q} violates the precondition q > max(p_plus, 1) = {}",
                p_plus.max(1.0)
            )));
        }
    }
    let needs_dec = config.checks.iter().any(|c| c.needs_decomposition());
    if needs_dec && config.lambdas.len() != config.atoms.len() {
        return Err(CliError::Config(format!(
            "decomposition checks need one lambda per atom: {} lambdas, {} atoms",
            config.lambdas.len(),
            config.atoms.len()
        )));
    }
    if config.checks.iter().any(|c| c.needs_atoms()) && config.atoms.is_empty() {
        return Err(CliError::Config("requested checks need at least one atom".into()));
    }
    let range_checks: &[(&str, [i32; 2])] = &[
        ("grids.freq_shells", config.grids.freq_shells),
        ("grids.shell_range", config.grids.shell_range),
    ];
    for (name, [lo, hi]) in range_checks {
        if lo >= hi {
            return Err(CliError::Config(format!("{name} must satisfy lo < hi")));
        }
    }
    Ok(())
}

/// Declared essential bounds of an exponent spec.
pub fn exponent_bounds(spec: &ExponentSpec) -> (f64, f64) {
    match spec {
        ExponentSpec::Constant { p } => (*p, *p),
        ExponentSpec::LogSmooth { p_infty, c, .. } => (*p_infty, *p_infty + *c),
        ExponentSpec::Step { p_low, p_high, .. } => {
            (p_low.min(*p_high), p_low.max(*p_high))
        }
    }
}
