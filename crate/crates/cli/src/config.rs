//! Run configuration file (`--config path.json`).
//!
//! Every key is optional; a flag given on the command line wins over the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use qslkit::config::Tolerances;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalChoice {
    /// Central moment `G_p` of the reference state.
    Gp,
    /// Spectral spread `G_op`.
    Opnorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundChoice {
    /// Gate time under a functional constraint.
    Theorem1,
    /// Closed-form swap-family time `pi / (kappa 2^{1/p})`.
    ClosedForm,
    /// Margolus-Levitin mean-energy bound for a Hamiltonian and state.
    Ml,
    /// Time-energy bound for a Hamiltonian and state.
    Te,
    /// Spectral-spread bound for a Hamiltonian.
    Opnorm,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub kind: Option<BoundChoice>,
    pub gate: Option<String>,
    pub dim: Option<usize>,
    pub theta: Option<f64>,
    pub functional: Option<FunctionalChoice>,
    pub p: Option<f64>,
    pub kappa: Option<f64>,
    pub state: Option<PathBuf>,
    pub hamiltonian: Option<PathBuf>,
    pub horizon: Option<f64>,
    pub grid_step: Option<f64>,
    pub tol: Option<f64>,
    pub bound_kind: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub horizon_multiplier: Option<f64>,
    pub restarts: Option<usize>,
    pub budget: Option<usize>,
    pub csv: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub tolerances: Option<Tolerances>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn check_command(&self, invoked: &str) -> Result<()> {
        match &self.command {
            Some(c) if c != invoked => bail!("config is for command `{c}`, not `{invoked}`"),
            _ => Ok(()),
        }
    }
}

/// File tolerances (or defaults), with `QSLKIT_TOL` applied on top as the
/// input-validation threshold.
pub fn resolve_tolerances(file: Option<Tolerances>, env: Option<&str>) -> Result<Tolerances> {
    let mut t = file.unwrap_or_default();
    if let Some(raw) = env {
        let tol: f64 = raw.trim().parse().with_context(|| format!("QSLKIT_TOL is not a number: `{raw}`"))?;
        if !(tol.is_finite() && tol > 0.0) {
            bail!("QSLKIT_TOL must be positive and finite, got {tol}");
        }
        let v = Tolerances::with_validation(tol);
        t.hermitian = v.hermitian;
        t.unitary = v.unitary;
        t.norm = v.norm;
        t.orthogonal = v.orthogonal;
    }
    Ok(t)
}

pub fn positive(name: &str, value: f64) -> Result<f64> {
    if !(value.is_finite() && value > 0.0) {
        bail!("{name} must be positive and finite, got {value}");
    }
    Ok(value)
}
