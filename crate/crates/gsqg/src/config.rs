//! Run configuration: JSON schema with unknown keys rejected, defaults
//! resolved explicitly so outputs can echo the effective configuration.

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::solver::SolverOptions;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rotate,
    Translate,
    Sweep,
    Oracle,
}

/// Vorticity profile selection: a named builtin or a tabulated CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProfileChoice {
    Named(String),
    Csv { csv: String },
}

impl Default for ProfileChoice {
    fn default() -> Self {
        ProfileChoice::Named("patch".into())
    }
}

impl ProfileChoice {
    pub fn build(&self) -> Result<Profile> {
        match self {
            ProfileChoice::Named(name) => match name.as_str() {
                "patch" => Ok(Profile::patch()),
                "parabolic" => Ok(Profile::parabolic()),
                other => Err(Error::Config(format!(
                    "profile: unknown name {other:?}, expected \"patch\", \"parabolic\", or {{\"csv\": path}}"
                ))),
            },
            ProfileChoice::Csv { csv } => Profile::from_csv(Path::new(csv)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub coarse_nr: usize,
    pub coarse_nt: usize,
    pub coarse_n: usize,
    pub refined_n: usize,
    pub window_factor: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        GridConfig {
            coarse_nr: o.coarse_nr,
            coarse_nt: o.coarse_nt,
            coarse_n: o.coarse_n,
            refined_n: o.refined_n,
            window_factor: o.window_factor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub energy: f64,
    pub momentum: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        ToleranceConfig {
            energy: o.tol_energy,
            momentum: o.tol_momentum,
        }
    }
}

/// Full run configuration. Every field has a default so a partial file is
/// accepted, but the resolved struct (defaults included) is what outputs
/// embed.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub s: f64,
    pub n_fold: Option<u32>,
    pub travel_speed: Option<f64>,
    pub epsilon: Option<f64>,
    pub epsilon_list: Option<Vec<f64>>,
    pub profile: ProfileChoice,
    pub grid: GridConfig,
    pub tolerances: ToleranceConfig,
    pub max_iters: usize,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: None,
            s: 1.0,
            n_fold: None,
            travel_speed: None,
            epsilon: None,
            epsilon_list: None,
            profile: ProfileChoice::default(),
            grid: GridConfig::default(),
            tolerances: ToleranceConfig::default(),
            max_iters: SolverOptions::default().max_iters,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Validate the mode-specific field combination. The mode must already
    /// be resolved (from file or flag).
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.s) {
            return Err(Error::Config(format!(
                "s: {} outside the supported range [0.5, 1]",
                self.s
            )));
        }
        if let Some(n) = self.n_fold {
            if n < 2 {
                return Err(Error::Config(format!("n_fold: {n} must be at least 2")));
            }
        }
        if let Some(w) = self.travel_speed {
            if w <= 0.0 {
                return Err(Error::Config(format!(
                    "travel_speed: {w} must be positive"
                )));
            }
        }
        if let Some(e) = self.epsilon {
            if e <= 0.0 {
                return Err(Error::Config(format!("epsilon: {e} must be positive")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters: must be positive".into()));
        }
        if self.grid.refined_n < 16 || self.grid.coarse_nr < 8 || self.grid.coarse_nt < 8 || self.grid.coarse_n < 16 {
            return Err(Error::Config(
                "grid: resolutions too low (need coarse_nr/coarse_nt >= 8, coarse_n >= 16, refined_n >= 16)"
                    .into(),
            ));
        }
        let mode = self
            .mode
            .ok_or_else(|| Error::Config("mode: missing (set in config or via --mode)".into()))?;
        match mode {
            Mode::Rotate => {
                if self.n_fold.is_none() {
                    return Err(Error::Config("n_fold: required for rotate mode".into()));
                }
                if self.epsilon.is_none() {
                    return Err(Error::Config("epsilon: required for rotate mode".into()));
                }
            }
            Mode::Translate => {
                if self.travel_speed.is_none() {
                    return Err(Error::Config(
                        "travel_speed: required for translate mode".into(),
                    ));
                }
                if self.epsilon.is_none() {
                    return Err(Error::Config("epsilon: required for translate mode".into()));
                }
            }
            Mode::Sweep => {
                if self.epsilon_list.is_none() {
                    return Err(Error::Config("epsilon_list: required for sweep mode".into()));
                }
                if self.n_fold.is_none() && self.travel_speed.is_none() {
                    return Err(Error::Config(
                        "sweep mode needs n_fold (rotating) or travel_speed (translating)".into(),
                    ));
                }
                if self.n_fold.is_some() && self.travel_speed.is_some() {
                    return Err(Error::Config(
                        "sweep mode takes n_fold or travel_speed, not both".into(),
                    ));
                }
            }
            Mode::Oracle => {
                if self.n_fold.is_none() && self.travel_speed.is_none() {
                    return Err(Error::Config(
                        "oracle mode needs n_fold and/or travel_speed".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol_energy: self.tolerances.energy,
            tol_momentum: self.tolerances.momentum,
            max_iters: self.max_iters,
            coarse_nr: self.grid.coarse_nr,
            coarse_nt: self.grid.coarse_nt,
            coarse_n: self.grid.coarse_n,
            refined_n: self.grid.refined_n,
            window_factor: self.grid.window_factor,
            ..SolverOptions::default()
        }
    }
}
