//! Experiment orchestration: trains or loads the requested controllers,
//! evaluates every (cycle × initial SoC × method) cell with exploration off,
//! and writes comparison tables, learning curves, episode traces, sweep
//! reports, and a run manifest to the output directory.
//!
//! All outputs are deterministic functions of (config, seeds): no wall-clock
//! stamps outside sweep computation-time columns.

use crate::baselines::{EcmsController, RuleBasedConfig, RuleBasedController};
use crate::config::{ConfigError, ControllerKind, EvalCycle, LoadedExperiment};
use crate::coordinator::{
    evaluate, make_agents, train, ControlMode, Controller, GreedyPolicy, TrainConfig, TrainError,
};
use crate::cycles::{compose_learning_cycle, DriveCycle};
use crate::ddpg::{AgentError, DdpgAgent};
use crate::metrics;
use crate::report::{self, ComparisonRow, Manifest};
use crate::sensitivity::{
    default_groups, rank_dimensions, run_sweep, SweepDimension, SweepReport, SweepSetup,
};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigError),
    Train(TrainError),
    Agent(AgentError),
    Io { path: PathBuf, error: std::io::Error },
    Internal(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "{e}"),
            HarnessError::Train(e) => write!(f, "{e}"),
            HarnessError::Agent(e) => write!(f, "{e}"),
            HarnessError::Io { path, error } => write!(f, "{}: {error}", path.display()),
            HarnessError::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl HarnessError {
    /// Stable machine-readable class for CLI exit reporting.
    pub fn class(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "CONFIG",
            HarnessError::Train(_) => "TRAINING",
            HarnessError::Agent(_) => "TRAINING",
            HarnessError::Io { .. } => "IO",
            HarnessError::Internal(_) => "INTERNAL",
        }
    }
}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e)
    }
}

impl From<TrainError> for HarnessError {
    fn from(e: TrainError) -> Self {
        HarnessError::Train(e)
    }
}

impl From<AgentError> for HarnessError {
    fn from(e: AgentError) -> Self {
        HarnessError::Agent(e)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|error| HarnessError::Io { path: parent.to_path_buf(), error })?;
    }
    std::fs::write(path, contents)
        .map_err(|error| HarnessError::Io { path: path.to_path_buf(), error })
}

/// CLI-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub episodes: Option<u32>,
    pub relevance_ratio: Option<f64>,
    pub initial_soc: Option<Vec<f64>>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, exp: &mut LoadedExperiment) {
        let e = &mut exp.config.experiment;
        if let Some(s) = self.seed {
            e.seeds = vec![s];
        }
        if let Some(n) = self.episodes {
            e.episodes = n;
        }
        if let Some(r) = self.relevance_ratio {
            e.relevance_ratio = r;
        }
        if let Some(socs) = &self.initial_soc {
            e.initial_soc = socs.clone();
        }
        if let Some(o) = &self.out_dir {
            e.out_dir = o.clone();
        }
    }
}

#[derive(Debug, Clone)]
pub enum RunMode {
    /// Train learning controllers, then evaluate everything in the list.
    Train,
    /// Load learning controllers from checkpoints instead of training.
    Eval { checkpoint_dir: PathBuf },
    /// Evaluate only the non-learning controllers in the list.
    Baseline,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub rows: Vec<ComparisonRow>,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Builds the train configuration for a learning controller kind.
pub fn train_config_for(exp: &LoadedExperiment, mode: ControlMode) -> TrainConfig {
    let e = &exp.config.experiment;
    let r = &exp.config.reward;
    TrainConfig {
        mode,
        episodes: e.episodes,
        soc_initial: e.train_initial_soc,
        handshake: crate::coordinator::HandshakeConfig { relevance_ratio: e.relevance_ratio },
        power_weight: r.power_weight,
        soc_weight_active: r.soc_weight_active,
        soc_ref: r.soc_ref,
        mg2_policy: r.mg2_policy,
        t_dem_norm: r.t_dem_norm,
        bridge_s: exp.config.cycles.bridge_s,
        update_cadence: r.update_cadence,
        bound_penalty: r.bound_penalty,
        learn: true,
        explore: true,
    }
}

fn checkpoint_name(kind: ControllerKind, seed: u64, agent: usize) -> String {
    format!("{}_seed{}_agent{}.ckpt", kind.name(), seed, agent)
}

fn controller_for_baseline(
    exp: &LoadedExperiment,
    kind: ControllerKind,
) -> Option<Box<dyn Controller>> {
    match kind {
        ControllerKind::RuleBased => Some(Box::new(RuleBasedController::new(
            exp.config.rule_based.unwrap_or_else(default_rule_based),
        ))),
        ControllerKind::Ecms => Some(Box::new(EcmsController::new(
            exp.config.ecms.unwrap_or_default(),
        ))),
        _ => None,
    }
}

fn default_rule_based() -> RuleBasedConfig {
    RuleBasedConfig::default()
}

fn eval_cycle_instance(exp: &LoadedExperiment, cycle: &EvalCycle) -> DriveCycle {
    match cycle {
        EvalCycle::LearningComposite => {
            let phases = exp.phases();
            compose_learning_cycle(&phases, [0, 1, 2, 3], exp.config.cycles.bridge_s)
        }
        EvalCycle::Trace(c) => c.clone(),
    }
}

/// Runs the configured experiment end to end. Returns the comparison rows
/// (one per cycle × initial SoC × method, seed-averaged for learned
/// controllers) and the list of files written.
pub fn run_experiment(
    exp: &LoadedExperiment,
    mode: &RunMode,
    command: &str,
) -> Result<RunArtifacts, HarnessError> {
    let e = exp.config.experiment.clone();
    let env_config = exp.env_config()?;
    let out_dir = e.out_dir.clone();
    let mut files = Vec::new();

    let controllers: Vec<ControllerKind> = match mode {
        RunMode::Baseline => {
            e.controllers.iter().copied().filter(|k| !k.is_learning()).collect()
        }
        _ => e.controllers.clone(),
    };
    if controllers.is_empty() {
        return Err(HarnessError::Internal(
            "no controllers to run in this mode".to_string(),
        ));
    }

    // train or load the learning controllers, per seed
    let mut policies: BTreeMap<&'static str, Vec<GreedyPolicy>> = BTreeMap::new();
    for &kind in controllers.iter().filter(|k| k.is_learning()) {
        let control_mode = kind.mode().expect("learning kind has a mode");
        let train_config = train_config_for(exp, control_mode);
        let mut per_seed = Vec::new();
        for &seed in &e.seeds {
            let agents: Vec<DdpgAgent> = match mode {
                RunMode::Eval { checkpoint_dir } => {
                    let mut agents = Vec::new();
                    for j in 0..control_mode.agent_count() {
                        let path = checkpoint_dir.join(checkpoint_name(kind, seed, j));
                        let bytes = std::fs::read(&path)
                            .map_err(|error| HarnessError::Io { path: path.clone(), error })?;
                        agents.push(DdpgAgent::load(&mut bytes.as_slice())?);
                    }
                    agents
                }
                _ => {
                    let mut agents = make_agents(control_mode, &exp.config.agent, seed)?;
                    let phases = exp.phases();
                    let history =
                        train(&exp.plant, &phases, &env_config, &train_config, &mut agents, seed)?;
                    let curve_path =
                        out_dir.join(format!("learning_curve_{}_seed{}.tsv", kind.name(), seed));
                    write_file(&curve_path, &report::learning_curve_table(&history))?;
                    files.push(curve_path);
                    for (j, agent) in agents.iter().enumerate() {
                        let path = out_dir.join(checkpoint_name(kind, seed, j));
                        let mut buf = Vec::new();
                        agent.save(&mut buf)?;
                        std::fs::create_dir_all(&out_dir).map_err(|error| HarnessError::Io {
                            path: out_dir.clone(),
                            error,
                        })?;
                        std::fs::write(&path, &buf)
                            .map_err(|error| HarnessError::Io { path: path.clone(), error })?;
                        files.push(path);
                    }
                    agents
                }
            };
            per_seed.push(GreedyPolicy::from_agents(&agents, &train_config));
        }
        policies.insert(kind.name(), per_seed);
    }

    // evaluate every cell
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for (cycle_label, eval_cycle) in &exp.eval_cycles {
        let cycle = eval_cycle_instance(exp, eval_cycle);
        for &soc_initial in &e.initial_soc {
            let mut cell_rows: Vec<ComparisonRow> = Vec::new();
            for &kind in &controllers {
                let (end_soc, fuel) = if kind.is_learning() {
                    let per_seed = &policies[kind.name()];
                    let mut end_socs = Vec::new();
                    let mut fuels = Vec::new();
                    for (si, policy) in per_seed.iter().enumerate() {
                        let mut p = policy.clone();
                        let (metrics, trace) =
                            evaluate(&exp.plant, &env_config, cycle.clone(), soc_initial, &mut p)?;
                        end_socs.push(metrics.soc_end);
                        if let Some(f) = metrics.fuel_l_per_100km {
                            fuels.push(f);
                        }
                        if si == 0 {
                            let path = out_dir.join(format!(
                                "trace_{}_{}_soc{:.2}.tsv",
                                kind.name(),
                                cycle_label,
                                soc_initial
                            ));
                            write_file(&path, &report::trace_table(&trace))?;
                            files.push(path);
                        }
                    }
                    let mean_end = end_socs.iter().sum::<f64>() / end_socs.len() as f64;
                    let mean_fuel = if fuels.is_empty() {
                        None
                    } else {
                        Some(fuels.iter().sum::<f64>() / fuels.len() as f64)
                    };
                    (mean_end, mean_fuel)
                } else {
                    let mut controller = controller_for_baseline(exp, kind)
                        .ok_or_else(|| HarnessError::Internal("bad baseline kind".into()))?;
                    let (metrics, trace) = evaluate(
                        &exp.plant,
                        &env_config,
                        cycle.clone(),
                        soc_initial,
                        controller.as_mut(),
                    )?;
                    let path = out_dir.join(format!(
                        "trace_{}_{}_soc{:.2}.tsv",
                        kind.name(),
                        cycle_label,
                        soc_initial
                    ));
                    write_file(&path, &report::trace_table(&trace))?;
                    files.push(path);
                    (metrics.soc_end, metrics.fuel_l_per_100km)
                };
                let soc_error = metrics::soc_error_pct(soc_initial, end_soc)
                    .map_err(|e| HarnessError::Internal(e.to_string()))?;
                cell_rows.push(ComparisonRow {
                    cycle: cycle_label.clone(),
                    initial_soc: soc_initial,
                    method: kind.name().to_string(),
                    end_soc,
                    soc_error_pct: soc_error,
                    fuel_l_per_100km: fuel,
                    saving_pct: None,
                });
            }
            // saving against the configured baseline method within the cell
            let baseline_fuel = cell_rows
                .iter()
                .find(|r| r.method == e.saving_baseline.name())
                .and_then(|r| r.fuel_l_per_100km);
            if let Some(base) = baseline_fuel {
                for row in &mut cell_rows {
                    if row.method != e.saving_baseline.name() {
                        if let Some(f) = row.fuel_l_per_100km {
                            row.saving_pct = metrics::fuel_saving_pct(base, f).ok();
                        }
                    }
                }
            }
            rows.extend(cell_rows);
        }
    }

    let comparison_path = out_dir.join("comparison.tsv");
    write_file(&comparison_path, &report::comparison_table(&rows))?;
    files.push(comparison_path);

    let manifest = Manifest::new(command, &e.seeds, &exp.config_text);
    let manifest_path = out_dir.join("manifest.json");
    write_file(&manifest_path, &manifest.to_json())?;
    files.push(manifest_path);

    Ok(RunArtifacts { rows, out_dir, files })
}

/// Runs one sweep dimension with the config's agent/train settings and
/// persists both the machine-readable rows and the rendered table.
pub fn run_sweep_experiment(
    exp: &LoadedExperiment,
    dimension: SweepDimension,
    command: &str,
) -> Result<SweepReport, HarnessError> {
    let env_config = exp.env_config()?;
    let train_config = train_config_for(exp, ControlMode::Multi);
    let phases = exp.phases();
    let setup = SweepSetup {
        plant: &exp.plant,
        phases: &phases,
        env_config,
        train_config,
        agent_config: exp.config.agent.clone(),
        seeds: exp.config.experiment.seeds.clone(),
        convergence_window: 10,
    };
    let report = run_sweep(dimension, &default_groups(dimension), &setup);

    let out_dir = &exp.config.experiment.out_dir;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    write_file(&out_dir.join(format!("sweep_{}.json", dimension)), &json)?;
    write_file(
        &out_dir.join(format!("sweep_{}.txt", dimension)),
        &report::sweep_report_text(&report),
    )?;
    let manifest = Manifest::new(command, &exp.config.experiment.seeds, &exp.config_text);
    write_file(&out_dir.join("manifest.json"), &manifest.to_json())?;
    Ok(report)
}

/// Re-renders a sweep report from its persisted JSON rows; pure, so the
/// regenerated table is bit-identical to the original.
pub fn regenerate_sweep_report(json: &str) -> Result<String, HarnessError> {
    let report: SweepReport =
        serde_json::from_str(json).map_err(|e| HarnessError::Internal(e.to_string()))?;
    Ok(report::sweep_report_text(&report))
}

/// Runs all three sweep dimensions and writes the importance ranking.
pub fn run_sensitivity_experiment(
    exp: &LoadedExperiment,
    command: &str,
) -> Result<Vec<SweepReport>, HarnessError> {
    let dims =
        [SweepDimension::CriticDepth, SweepDimension::LearningRates, SweepDimension::PolicyNoise];
    let mut reports = Vec::new();
    for d in dims {
        reports.push(run_sweep_experiment(exp, d, command)?);
    }
    let ranked = rank_dimensions(&reports);
    let mut text = String::from("rank\tdimension\tmax_sensitivity_pct\n");
    for (i, (d, l)) in ranked.iter().enumerate() {
        let v = l.map(|x| format!("{x:.4}")).unwrap_or_else(|| "undefined".into());
        text.push_str(&format!("{}\t{}\t{}\n", i + 1, d, v));
    }
    write_file(&exp.config.experiment.out_dir.join("importance_ranking.tsv"), &text)?;
    Ok(reports)
}

/// Per-cycle statistics behind the `cycles inspect` subcommand.
pub fn inspect_cycle(cycle: &DriveCycle) -> String {
    let n = cycle.len();
    let vmax = cycle.max_velocity();
    let mean = cycle.samples_mps.iter().sum::<f64>() / n as f64;
    let mut amax = 0.0f64;
    let mut amin = 0.0f64;
    for i in 0..n - 1 {
        amax = amax.max(cycle.accel(i));
        amin = amin.min(cycle.accel(i));
    }
    format!(
        "name: {}\nsamples: {}\nduration_s: {}\ndistance_m: {:.1}\nv_max_mps: {:.3}\n\
         v_mean_mps: {:.3}\naccel_max_mps2: {:.3}\naccel_min_mps2: {:.3}\n",
        cycle.name,
        n,
        cycle.duration_s(),
        cycle.distance_m(),
        vmax,
        mean,
        amax,
        amin
    )
}
