//! Experiment configuration: a TOML file naming the plant parameter file,
//! component map files, cycle phase windows, controller selection, agent
//! hyperparameters, and evaluation settings. Relative paths resolve against
//! the config file's directory.

use crate::baselines::{EcmsConfig, RuleBasedConfig};
use crate::coordinator::{ControlMode, Mg2Policy, SocRefPolicy, UpdateCadence};
use crate::cycles::{DriveCycle, PhaseLabel, PhaseSpec};
use crate::ddpg::AgentConfig;
use crate::env::{EnvConfig, SocBoundPolicy};
use crate::plant::{EfficiencyMap, EngineSpeedSchedule, PlantModel, PlantParameters};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    RuleBased,
    Ecms,
    SingleAgent,
    MultiAgent,
}

impl ControllerKind {
    pub fn is_learning(self) -> bool {
        matches!(self, ControllerKind::SingleAgent | ControllerKind::MultiAgent)
    }

    pub fn mode(self) -> Option<ControlMode> {
        match self {
            ControllerKind::SingleAgent => Some(ControlMode::Single),
            ControllerKind::MultiAgent => Some(ControlMode::Multi),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::RuleBased => "rule-based",
            ControllerKind::Ecms => "ecms",
            ControllerKind::SingleAgent => "single-agent",
            ControllerKind::MultiAgent => "multi-agent",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantSection {
    pub params: PathBuf,
    pub engine_map: PathBuf,
    pub mg1_map: PathBuf,
    pub mg2_map: PathBuf,
    #[serde(default)]
    pub series_speed_schedule: ScheduleSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleSection {
    /// "bsfc_optimal" or "fixed".
    pub kind: String,
    /// Required when kind = "fixed".
    pub rpm: Option<f64>,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self { kind: "bsfc_optimal".into(), rpm: None }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhaseWindow {
    pub file_index: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CyclesSection {
    /// The source trace files, referenced by the phase windows.
    pub files: Vec<PathBuf>,
    pub phase1: PhaseWindow,
    pub phase2: PhaseWindow,
    pub phase3: PhaseWindow,
    pub phase4: PhaseWindow,
    #[serde(default = "default_bridge")]
    pub bridge_s: usize,
}

fn default_bridge() -> usize {
    crate::cycles::DEFAULT_BRIDGE_S
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub controllers: Vec<ControllerKind>,
    pub episodes: u32,
    pub seeds: Vec<u64>,
    pub initial_soc: Vec<f64>,
    /// Initial SoC used during training episodes.
    #[serde(default = "default_train_soc")]
    pub train_initial_soc: f64,
    #[serde(default = "default_relevance")]
    pub relevance_ratio: f64,
    pub out_dir: PathBuf,
    /// Evaluation cycles: "learning" for the identity-order composite, or a
    /// trace file path.
    pub eval_cycles: Vec<String>,
    #[serde(default = "default_saving_baseline")]
    pub saving_baseline: ControllerKind,
}

fn default_relevance() -> f64 {
    0.2
}

fn default_train_soc() -> f64 {
    0.28
}

fn default_saving_baseline() -> ControllerKind {
    ControllerKind::RuleBased
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardSection {
    pub power_weight: f64,
    pub soc_weight_active: f64,
    pub soc_ref: SocRefPolicy,
    pub bound_penalty: f64,
    pub mg2_policy: Mg2Policy,
    pub t_dem_norm: f64,
    pub update_cadence: UpdateCadence,
}

impl Default for RewardSection {
    fn default() -> Self {
        let t = crate::coordinator::TrainConfig::default();
        Self {
            power_weight: t.power_weight,
            soc_weight_active: t.soc_weight_active,
            soc_ref: t.soc_ref,
            bound_penalty: t.bound_penalty,
            mg2_policy: t.mg2_policy,
            t_dem_norm: t.t_dem_norm,
            update_cadence: t.update_cadence,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvSection {
    /// "terminate" or "clamp_and_continue".
    pub soc_bound_policy: String,
    pub fuel_density_g_per_l: f64,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            soc_bound_policy: "terminate".into(),
            fuel_density_g_per_l: crate::metrics::DEFAULT_FUEL_DENSITY_G_PER_L,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub plant: PlantSection,
    pub cycles: CyclesSection,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub reward: RewardSection,
    #[serde(default)]
    pub env: EnvSection,
    #[serde(default)]
    pub rule_based: Option<RuleBasedConfig>,
    #[serde(default)]
    pub ecms: Option<EcmsConfig>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, error: std::io::Error },
    Parse(String),
    Validation(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, error } => write!(f, "{}: {error}", path.display()),
            ConfigError::Parse(m) => write!(f, "config parse: {m}"),
            ConfigError::Validation(m) => write!(f, "config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A parsed config with all referenced resources loaded and validated.
#[derive(Debug, Clone)]
pub struct LoadedExperiment {
    pub config: ExperimentConfig,
    pub config_text: String,
    pub plant: PlantModel,
    pub phase_cycles: [DriveCycle; 4],
    pub eval_cycles: Vec<(String, EvalCycle)>,
}

#[derive(Debug, Clone)]
pub enum EvalCycle {
    /// Identity-order composite of the four phases.
    LearningComposite,
    Trace(DriveCycle),
}

impl LoadedExperiment {
    pub fn phases(&self) -> [PhaseSpec<'_>; 4] {
        let w = &self.config.cycles;
        [
            PhaseSpec::new(
                &self.phase_cycles[0],
                w.phase1.start,
                w.phase1.end,
                PhaseLabel::Phase1,
            )
            .expect("validated at load"),
            PhaseSpec::new(
                &self.phase_cycles[1],
                w.phase2.start,
                w.phase2.end,
                PhaseLabel::Phase2,
            )
            .expect("validated at load"),
            PhaseSpec::new(
                &self.phase_cycles[2],
                w.phase3.start,
                w.phase3.end,
                PhaseLabel::Phase3,
            )
            .expect("validated at load"),
            PhaseSpec::new(
                &self.phase_cycles[3],
                w.phase4.start,
                w.phase4.end,
                PhaseLabel::Phase4,
            )
            .expect("validated at load"),
        ]
    }

    pub fn env_config(&self) -> Result<EnvConfig, ConfigError> {
        let policy = match self.config.env.soc_bound_policy.as_str() {
            "terminate" => SocBoundPolicy::Terminate,
            "clamp_and_continue" => SocBoundPolicy::ClampAndContinue,
            other => {
                return Err(ConfigError::Validation(format!(
                    "unknown soc_bound_policy `{other}`"
                )))
            }
        };
        Ok(EnvConfig {
            soc_bound_policy: policy,
            fuel_density_g_per_l: self.config.env.fuel_density_g_per_l,
        })
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parses, resolves, and validates an experiment configuration file.
pub fn load_experiment(path: &Path) -> Result<LoadedExperiment, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|error| ConfigError::Io { path: path.to_path_buf(), error })?;
    let config: ExperimentConfig =
        toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    load_from_parts(config, text, &base)
}

/// Loads an already-parsed configuration with paths relative to `base`.
pub fn load_from_parts(
    config: ExperimentConfig,
    config_text: String,
    base: &Path,
) -> Result<LoadedExperiment, ConfigError> {
    // plant
    let params_path = resolve(base, &config.plant.params);
    let params = PlantParameters::load(&params_path)
        .map_err(|e| ConfigError::Validation(format!("{}: {e}", params_path.display())))?;
    let load_map = |p: &Path| -> Result<EfficiencyMap, ConfigError> {
        let full = resolve(base, p);
        EfficiencyMap::load(&full)
            .map_err(|e| ConfigError::Validation(format!("{}: {e}", full.display())))
    };
    let engine_map = load_map(&config.plant.engine_map)?;
    let mg1_map = load_map(&config.plant.mg1_map)?;
    let mg2_map = load_map(&config.plant.mg2_map)?;
    let schedule = match config.plant.series_speed_schedule.kind.as_str() {
        "bsfc_optimal" => EngineSpeedSchedule::bsfc_optimal(&engine_map),
        "fixed" => {
            let rpm = config.plant.series_speed_schedule.rpm.ok_or_else(|| {
                ConfigError::Validation("fixed schedule needs an rpm value".into())
            })?;
            EngineSpeedSchedule::Fixed(rpm)
        }
        other => {
            return Err(ConfigError::Validation(format!(
                "unknown series_speed_schedule kind `{other}`"
            )))
        }
    };
    let plant = PlantModel::new(params, engine_map, mg1_map, mg2_map, schedule)
        .map_err(|e| ConfigError::Validation(e.to_string()))?;

    // cycles
    if config.cycles.files.is_empty() {
        return Err(ConfigError::Validation("cycles.files must not be empty".into()));
    }
    let mut sources = Vec::new();
    for f in &config.cycles.files {
        let full = resolve(base, f);
        let cycle = DriveCycle::load(&full)
            .map_err(|e| ConfigError::Validation(format!("{}: {e}", full.display())))?;
        sources.push(cycle);
    }
    let window = |w: &PhaseWindow, label: &str| -> Result<DriveCycle, ConfigError> {
        let cycle = sources.get(w.file_index).ok_or_else(|| {
            ConfigError::Validation(format!("{label}: file_index {} out of range", w.file_index))
        })?;
        if w.start >= w.end || w.end > cycle.len() {
            return Err(ConfigError::Validation(format!(
                "{label}: window {}..{} invalid for {} samples",
                w.start,
                w.end,
                cycle.len()
            )));
        }
        Ok(cycle.clone())
    };
    let phase_cycles = [
        window(&config.cycles.phase1, "phase1")?,
        window(&config.cycles.phase2, "phase2")?,
        window(&config.cycles.phase3, "phase3")?,
        window(&config.cycles.phase4, "phase4")?,
    ];

    // experiment
    let e = &config.experiment;
    if e.seeds.is_empty() {
        return Err(ConfigError::Validation("experiment.seeds must not be empty".into()));
    }
    if e.initial_soc.is_empty() {
        return Err(ConfigError::Validation("experiment.initial_soc must not be empty".into()));
    }
    if e.controllers.is_empty() {
        return Err(ConfigError::Validation("experiment.controllers must not be empty".into()));
    }
    if !(0.0..=1.0).contains(&e.relevance_ratio) {
        return Err(ConfigError::Validation(format!(
            "relevance_ratio {} outside [0, 1]",
            e.relevance_ratio
        )));
    }
    config.agent.validate().map_err(|err| ConfigError::Validation(err.to_string()))?;

    let mut eval_cycles = Vec::new();
    for name in &e.eval_cycles {
        if name == "learning" {
            eval_cycles.push((name.clone(), EvalCycle::LearningComposite));
        } else {
            let full = resolve(base, Path::new(name));
            let cycle = DriveCycle::load(&full)
                .map_err(|err| ConfigError::Validation(format!("{}: {err}", full.display())))?;
            let label = cycle.name.clone();
            eval_cycles.push((label, EvalCycle::Trace(cycle)));
        }
    }
    if eval_cycles.is_empty() {
        return Err(ConfigError::Validation("experiment.eval_cycles must not be empty".into()));
    }

    Ok(LoadedExperiment { config, config_text, plant, phase_cycles, eval_cycles })
}
