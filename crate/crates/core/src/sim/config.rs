use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::bdot::BdotConfig;
use crate::dynamics::InertiaTensor;
use crate::error::{Error, Result};
use crate::magnetics::IgrfCoefficients;
use crate::nmpc::NmpcConfig;
use crate::orbit::OrbitElements;
use crate::DEG;

/// Directory holding an IGRF coefficient file, overriding the embedded table.
pub const IGRF_DIR_ENV: &str = "DETUMBLE_IGRF_DIR";
/// File name looked up inside [`IGRF_DIR_ENV`].
pub const DEFAULT_IGRF_FILE: &str = "igrf13coeffs.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    Bdot,
    Nmpc,
    None,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Bdot => "bdot",
            ControllerKind::Nmpc => "nmpc",
            ControllerKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TruthModel {
    #[default]
    Igrf,
    Dipole,
}

impl TruthModel {
    pub fn as_str(self) -> &'static str {
        match self {
            TruthModel::Igrf => "igrf",
            TruthModel::Dipole => "dipole",
        }
    }
}

/// Settings for the controllability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankConfig {
    pub samples: usize,
    pub tol: f64,
    /// Field model used by the analyzer.
    pub field_model: TruthModel,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            samples: 360,
            tol: crate::controllability::DEFAULT_RANK_TOL,
            field_model: TruthModel::Dipole,
        }
    }
}

fn default_name() -> String {
    "run".to_string()
}
fn default_plant_step() -> f64 {
    0.1
}
fn default_control_period() -> f64 {
    1.0
}
fn default_max_duration() -> f64 {
    150.0 * 60.0
}
fn default_termination() -> f64 {
    0.10
}
fn default_epoch() -> f64 {
    2020.0
}
fn default_degree() -> usize {
    13
}
fn default_attitude() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "OrbitElements::aeolus")]
    pub orbit: OrbitElements,
    #[serde(default = "InertiaTensor::asymmetric_reference")]
    pub inertia: InertiaTensor,
    pub controller: ControllerKind,
    #[serde(default)]
    pub truth_model: TruthModel,
    /// Initial body rate, deg/s.
    pub initial_omega_dps: [f64; 3],
    /// Initial body-to-inertial attitude `[w, x, y, z]`.
    #[serde(default = "default_attitude")]
    pub initial_attitude: [f64; 4],
    /// Plant integration step, s.
    #[serde(default = "default_plant_step")]
    pub plant_step: f64,
    /// Controller sampling period, s.
    #[serde(default = "default_control_period")]
    pub control_period: f64,
    /// s.
    #[serde(default = "default_max_duration")]
    pub max_duration: f64,
    /// deg/s, applied to every axis.
    #[serde(default = "default_termination")]
    pub termination_dps: f64,
    #[serde(default)]
    pub seed: u64,
    /// Decimal year at t = 0.
    #[serde(default = "default_epoch")]
    pub epoch_year: f64,
    #[serde(default = "default_degree")]
    pub igrf_degree: usize,
    /// Coefficient file; relative paths resolve against the config file.
    #[serde(default)]
    pub igrf_file: Option<PathBuf>,
    #[serde(default)]
    pub bdot: BdotConfig,
    #[serde(default)]
    pub nmpc: NmpcConfig,
    #[serde(default)]
    pub rank: RankConfig,
}

impl RunConfig {
    /// A config with every default and the given controller and initial rate.
    pub fn new(name: impl Into<String>, controller: ControllerKind, initial_omega_dps: [f64; 3]) -> Self {
        RunConfig {
            name: name.into(),
            orbit: OrbitElements::aeolus(),
            inertia: InertiaTensor::asymmetric_reference(),
            controller,
            truth_model: TruthModel::Igrf,
            initial_omega_dps,
            initial_attitude: default_attitude(),
            plant_step: default_plant_step(),
            control_period: default_control_period(),
            max_duration: default_max_duration(),
            termination_dps: default_termination(),
            seed: 0,
            epoch_year: default_epoch(),
            igrf_degree: default_degree(),
            igrf_file: None,
            bdot: BdotConfig::default(),
            nmpc: NmpcConfig::default(),
            rank: RankConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (&cfg.igrf_file, path.parent()) {
            if file.is_relative() {
                cfg.igrf_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.orbit.validate()?;
        self.inertia.validate()?;
        self.bdot.validate()?;
        self.nmpc.validate()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.plant_step > 0.0) || !(self.control_period > 0.0) {
            return bad("plant_step and control_period must be positive".into());
        }
        let ratio = self.control_period / self.plant_step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return bad(format!(
                "control_period {} is not an integer multiple of plant_step {}",
                self.control_period, self.plant_step
            ));
        }
        if !(self.max_duration >= 0.0) || !self.max_duration.is_finite() {
            return bad(format!(
                "max_duration must be a non-negative number, got {}",
                self.max_duration
            ));
        }
        if !(self.termination_dps > 0.0) {
            return bad("termination_dps must be positive".into());
        }
        if !self.initial_omega_dps.iter().all(|x| x.is_finite()) {
            return bad("initial_omega_dps must be finite".into());
        }
        let q = Vector3::new(
            self.initial_attitude[1],
            self.initial_attitude[2],
            self.initial_attitude[3],
        );
        let norm = (self.initial_attitude[0].powi(2) + q.norm_squared()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return bad("initial_attitude must be a non-zero quaternion".into());
        }
        if self.rank.samples < 2 {
            return bad("rank.samples must be at least 2".into());
        }
        Ok(())
    }

    pub fn steps_per_control(&self) -> usize {
        (self.control_period / self.plant_step).round() as usize
    }

    pub fn initial_omega(&self) -> Vector3<f64> {
        Vector3::from(self.initial_omega_dps) * DEG
    }

    pub fn initial_attitude(&self) -> UnitQuaternion<f64> {
        let [w, x, y, z] = self.initial_attitude;
        UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z))
    }

    pub fn termination(&self) -> f64 {
        self.termination_dps * DEG
    }
}

/// Coefficients from `igrf_file`, else from `$DETUMBLE_IGRF_DIR`, else the
/// embedded IGRF-13 table.
pub fn resolve_igrf(cfg: &RunConfig) -> Result<Arc<IgrfCoefficients>> {
    if let Some(file) = &cfg.igrf_file {
        return Ok(Arc::new(IgrfCoefficients::load(file)?));
    }
    if let Some(dir) = std::env::var_os(IGRF_DIR_ENV) {
        return Ok(Arc::new(IgrfCoefficients::load(
            Path::new(&dir).join(DEFAULT_IGRF_FILE),
        )?));
    }
    Ok(Arc::new(IgrfCoefficients::embedded()))
}
