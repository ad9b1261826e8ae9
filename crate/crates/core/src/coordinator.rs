//! Orchestration of the learning systems: reward construction for the
//! single-agent weighted-sum scheme and the two-agent hand-shaking scheme,
//! action assembly, the episode/training loop, and the shared evaluation
//! rollout used by every controller kind.
//!
//! The hand-shaking scheme blends a shared global reward (negative total
//! power loss) into each agent's local reward through a relevance ratio:
//! agent 1 locally tracks the SoC reference, agent 2 locally minimizes
//! engine loss.

use crate::cycles::{build_learning_cycle, DriveCycle, PhaseSpec};
use crate::ddpg::{AgentError, DdpgAgent, Transition};
use crate::env::{
    ControlInput, EmsEnv, EnvConfig, EnvError, EpisodeMetrics, Observation, StepOutcome,
};
use crate::nn::DenseNetwork;
use crate::plant::{DriveMode, PlantModel, PlantParameters, SaturationFlags};
use crate::rng;
use serde::{Deserialize, Serialize};
use std::fmt;

// --- rewards ----------------------------------------------------------------

/// Resolved reward weights for one episode. Power terms are expressed in kW
/// and scaled by `power_weight` (1.0 means "per kW").
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub power_weight: f64,
    /// The conditional SoC weight while SoC is below the reference.
    pub soc_weight_active: f64,
    pub soc_ref: f64,
}

impl RewardWeights {
    pub fn new(power_weight: f64, soc_weight_active: f64, soc_ref: f64) -> Self {
        Self { power_weight, soc_weight_active, soc_ref }
    }
}

/// Two-valued conditional weight: zero at or above the reference, the active
/// value below it.
pub fn conditional_soc_weight(soc: f64, weights: &RewardWeights) -> f64 {
    if soc >= weights.soc_ref {
        0.0
    } else {
        weights.soc_weight_active
    }
}

/// Weighted-sum reward of the single-agent system:
/// −α·P_loss − β·|SoC_ref − SoC|.
pub fn single_agent_reward(outcome: &StepOutcome, weights: &RewardWeights) -> f64 {
    let beta = conditional_soc_weight(outcome.soc, weights);
    -weights.power_weight * outcome.p_loss_w / 1000.0
        - beta * (weights.soc_ref - outcome.soc).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandshakeConfig {
    /// Coupling strength between the global reward and each local reward.
    pub relevance_ratio: f64,
}

impl Default for HandshakeConfig {
    fn default() -> Self {
        Self { relevance_ratio: 0.2 }
    }
}

impl HandshakeConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(0.0..=1.0).contains(&self.relevance_ratio) {
            return Err(TrainError::BadConfig(format!(
                "relevance ratio {} outside [0, 1]",
                self.relevance_ratio
            )));
        }
        Ok(())
    }
}

/// The global and local components behind the joint rewards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandshakeRewardParts {
    /// −P_loss (α-scaled kW).
    pub r_global: f64,
    /// −β·|SoC_ref − SoC| for the MG1 agent.
    pub r_local_1: f64,
    /// −α·Loss_eng for the MG2 agent.
    pub r_local_2: f64,
}

pub fn handshake_reward_parts(
    outcome: &StepOutcome,
    weights: &RewardWeights,
) -> HandshakeRewardParts {
    let beta = conditional_soc_weight(outcome.soc, weights);
    HandshakeRewardParts {
        r_global: -weights.power_weight * outcome.p_loss_w / 1000.0,
        r_local_1: -beta * (weights.soc_ref - outcome.soc).abs(),
        r_local_2: -weights.power_weight * outcome.loss_eng_w / 1000.0,
    }
}

/// Joint reward composition: r = R_rel·r_global + r_local.
pub fn compose_joint_reward(r_global: f64, r_local: f64, relevance_ratio: f64) -> f64 {
    relevance_ratio * r_global + r_local
}

/// Joint rewards for (agent 1, agent 2).
pub fn handshake_rewards(
    outcome: &StepOutcome,
    weights: &RewardWeights,
    config: &HandshakeConfig,
) -> (f64, f64) {
    let p = handshake_reward_parts(outcome, weights);
    (
        compose_joint_reward(p.r_global, p.r_local_1, config.relevance_ratio),
        compose_joint_reward(p.r_global, p.r_local_2, config.relevance_ratio),
    )
}

// --- action assembly ---------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    Single,
    Multi,
}

impl ControlMode {
    pub fn agent_count(self) -> usize {
        match self {
            ControlMode::Single => 1,
            ControlMode::Multi => 2,
        }
    }
}

/// The single-agent system's constant MG2 command channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mg2Policy {
    /// MG2 tracks the torque demand up to saturation.
    DemandFollowing,
    /// A fixed command value in [-1, 1].
    Fixed(f64),
}

impl Default for Mg2Policy {
    fn default() -> Self {
        Mg2Policy::DemandFollowing
    }
}

/// Affine map from a tanh actor output to the MG1 command range [0, 1].
pub fn map_mot1(raw: f64) -> f64 {
    (raw + 1.0) / 2.0
}

/// Resolves the single-agent MG2 command for the current observation.
pub fn resolve_mg2_constant(
    policy: &Mg2Policy,
    observation: &Observation,
    params: &PlantParameters,
) -> f64 {
    match policy {
        Mg2Policy::Fixed(c) => *c,
        Mg2Policy::DemandFollowing => (observation.t_dem_nm
            / (params.final_ratio_mg2 * params.t_mot2_max_nm))
            .clamp(-1.0, 1.0),
    }
}

/// Builds the plant action (u_mot1, u_mot2) from raw agent outputs.
/// Single mode: one agent drives MG1, MG2 takes the provided constant.
/// Multi mode: agent 1 drives MG1, agent 2 drives MG2.
pub fn assemble_action(
    mode: ControlMode,
    outputs: &[Vec<f64>],
    mg2_constant: f64,
) -> Result<[f64; 2], TrainError> {
    if outputs.len() != mode.agent_count() {
        return Err(TrainError::AgentCountMismatch {
            expected: mode.agent_count(),
            got: outputs.len(),
        });
    }
    match mode {
        ControlMode::Single => Ok([map_mot1(outputs[0][0]), mg2_constant]),
        ControlMode::Multi => Ok([map_mot1(outputs[0][0]), outputs[1][0]]),
    }
}

/// Normalized copy of an observation, in the order the networks consume.
pub fn normalize_observation(observation: &Observation, t_dem_norm: f64) -> Vec<f64> {
    vec![observation.t_dem_nm / t_dem_norm, observation.soc]
}

/// Default torque-demand normalization scale, Nm.
pub const DEFAULT_T_DEM_NORM: f64 = 2000.0;

// --- training loop -----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateCadence {
    /// One update per environment step once the warmup has elapsed (default).
    PerStep,
    /// Updates deferred to the episode boundary, one per step collected.
    PerEpisode,
}

/// How the SoC reference is chosen at episode start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocRefPolicy {
    /// Charge-sustaining: reference = the episode's initial SoC.
    InitialSoc,
    Fixed(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: ControlMode,
    pub episodes: u32,
    pub soc_initial: f64,
    pub handshake: HandshakeConfig,
    pub power_weight: f64,
    pub soc_weight_active: f64,
    pub soc_ref: SocRefPolicy,
    pub mg2_policy: Mg2Policy,
    pub t_dem_norm: f64,
    pub bridge_s: usize,
    pub update_cadence: UpdateCadence,
    /// Extra negative reward applied to the step that violates the SoC
    /// window or the battery power limit.
    pub bound_penalty: f64,
    pub learn: bool,
    pub explore: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: ControlMode::Multi,
            episodes: 100,
            soc_initial: 0.28,
            handshake: HandshakeConfig::default(),
            power_weight: 1.0,
            soc_weight_active: 2.0,
            soc_ref: SocRefPolicy::InitialSoc,
            mg2_policy: Mg2Policy::DemandFollowing,
            t_dem_norm: DEFAULT_T_DEM_NORM,
            bridge_s: crate::cycles::DEFAULT_BRIDGE_S,
            update_cadence: UpdateCadence::PerStep,
            bound_penalty: 50.0,
            learn: true,
            explore: true,
        }
    }
}

impl TrainConfig {
    pub fn resolved_weights(&self, soc_initial: f64) -> RewardWeights {
        let soc_ref = match self.soc_ref {
            SocRefPolicy::InitialSoc => soc_initial,
            SocRefPolicy::Fixed(r) => r,
        };
        RewardWeights::new(self.power_weight, self.soc_weight_active, soc_ref)
    }
}

#[derive(Debug)]
pub enum TrainError {
    AgentCountMismatch { expected: usize, got: usize },
    BadConfig(String),
    Env(EnvError),
    Agent(AgentError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::AgentCountMismatch { expected, got } => {
                write!(f, "mode expects {expected} agents, got {got}")
            }
            TrainError::BadConfig(m) => write!(f, "train config: {m}"),
            TrainError::Env(e) => write!(f, "{e}"),
            TrainError::Agent(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TrainError {}

impl From<EnvError> for TrainError {
    fn from(e: EnvError) -> Self {
        TrainError::Env(e)
    }
}

impl From<AgentError> for TrainError {
    fn from(e: AgentError) -> Self {
        TrainError::Agent(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u32,
    /// Episode reward sum, one entry per agent.
    pub rewards: Vec<f64>,
    pub end_soc: f64,
    pub fuel_l_per_100km: Option<f64>,
    pub steps: usize,
    pub terminated_early: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearningHistory {
    pub episodes: Vec<EpisodeRecord>,
}

impl LearningHistory {
    pub fn agent_count(&self) -> usize {
        self.episodes.first().map_or(0, |e| e.rewards.len())
    }

    /// Mean reward of one agent over an inclusive episode window.
    pub fn mean_reward(&self, agent: usize, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.episodes[range];
        slice.iter().map(|e| e.rewards[agent]).sum::<f64>() / slice.len() as f64
    }
}

/// Creates the agents for a control mode from a root seed. Both hand-shaking
/// agents share the minibatch stream (same sampled time indices) but get
/// their own network-init and noise streams.
pub fn make_agents(
    mode: ControlMode,
    config: &crate::ddpg::AgentConfig,
    root_seed: u64,
) -> Result<Vec<DdpgAgent>, AgentError> {
    let sample_seed = rng::sub_seed(root_seed, "minibatch");
    (0..mode.agent_count())
        .map(|i| {
            DdpgAgent::with_streams(
                config.clone(),
                rng::indexed_seed(root_seed, "agent-net-init", i as u64),
                rng::indexed_seed(root_seed, "agent-ou-noise", i as u64),
                sample_seed,
            )
        })
        .collect()
}

/// Runs the episode loop: each episode drives a freshly reshuffled learning
/// cycle, both agents observe the same state, and each trains on its own
/// joint reward. Returns the per-episode learning history.
pub fn train(
    plant: &PlantModel,
    phases: &[PhaseSpec<'_>; 4],
    env_config: &EnvConfig,
    config: &TrainConfig,
    agents: &mut [DdpgAgent],
    root_seed: u64,
) -> Result<LearningHistory, TrainError> {
    if agents.len() != config.mode.agent_count() {
        return Err(TrainError::AgentCountMismatch {
            expected: config.mode.agent_count(),
            got: agents.len(),
        });
    }
    config.handshake.validate()?;
    let mut history = LearningHistory::default();
    let mut env: Option<EmsEnv> = None;

    for episode in 0..config.episodes {
        let cycle = build_learning_cycle(
            phases,
            rng::indexed_seed(root_seed, "episode-shuffle", episode as u64),
            config.bridge_s,
        );
        let record = run_episode(plant, env_config, config, agents, &mut env, cycle, episode)?;
        history.episodes.push(record);
    }
    Ok(history)
}

fn run_episode(
    plant: &PlantModel,
    env_config: &EnvConfig,
    config: &TrainConfig,
    agents: &mut [DdpgAgent],
    env_slot: &mut Option<EmsEnv>,
    cycle: DriveCycle,
    episode: u32,
) -> Result<EpisodeRecord, TrainError> {
    let env = match env_slot {
        Some(env) => {
            env.reset(cycle, config.soc_initial, episode as u64)?;
            env
        }
        None => {
            *env_slot = Some(EmsEnv::new(
                plant.clone(),
                env_config.clone(),
                cycle,
                config.soc_initial,
                episode as u64,
            )?);
            env_slot.as_mut().unwrap()
        }
    };
    let weights = config.resolved_weights(config.soc_initial);
    for agent in agents.iter_mut() {
        agent.begin_episode(episode);
    }

    let mut obs_n = normalize_observation(&env.observation(), config.t_dem_norm);
    let mut rewards = vec![0.0; agents.len()];
    let mut steps_this_episode = 0usize;

    loop {
        let outputs: Vec<Vec<f64>> =
            agents.iter_mut().map(|agent| agent.act(&obs_n, config.explore)).collect();
        let mg2_constant =
            resolve_mg2_constant(&config.mg2_policy, &env.observation(), &plant.params);
        let action = assemble_action(config.mode, &outputs, mg2_constant)?;
        let outcome = env.step(action)?;
        steps_this_episode += 1;

        let mut step_rewards: Vec<f64> = match config.mode {
            ControlMode::Single => vec![single_agent_reward(&outcome, &weights)],
            ControlMode::Multi => {
                let (r1, r2) = handshake_rewards(&outcome, &weights, &config.handshake);
                vec![r1, r2]
            }
        };
        if outcome.soc_violation || outcome.power_infeasible {
            for r in &mut step_rewards {
                *r -= config.bound_penalty;
            }
        }

        let obs_next_n = normalize_observation(&outcome.observation, config.t_dem_norm);
        for (i, agent) in agents.iter_mut().enumerate() {
            rewards[i] += step_rewards[i];
            if config.learn {
                agent.remember(Transition {
                    state: obs_n.clone(),
                    action: outputs[i].clone(),
                    reward: step_rewards[i],
                    next_state: obs_next_n.clone(),
                    done: outcome.done,
                })?;
                if config.update_cadence == UpdateCadence::PerStep && agent.ready() {
                    agent.train_step()?;
                }
            }
        }
        obs_n = obs_next_n;
        if outcome.done {
            break;
        }
    }

    if config.learn && config.update_cadence == UpdateCadence::PerEpisode {
        for agent in agents.iter_mut() {
            for _ in 0..steps_this_episode {
                if agent.ready() {
                    agent.train_step()?;
                }
            }
        }
    }

    let metrics = env.finalize()?;
    Ok(EpisodeRecord {
        episode,
        rewards,
        end_soc: metrics.soc_end,
        fuel_l_per_100km: metrics.fuel_l_per_100km,
        steps: metrics.steps,
        terminated_early: metrics.terminated_early,
    })
}

// --- evaluation --------------------------------------------------------------

/// Anything that can drive the plant: learned policies, rule-based logic,
/// one-step optimizers. Stateful controllers keep memory between steps and
/// reset it between episodes.
pub trait Controller {
    fn act(&mut self, input: &ControlInput, plant: &PlantModel) -> [f64; 2];
    fn reset_episode(&mut self) {}
    fn name(&self) -> &'static str;
}

/// Frozen greedy policy over trained actor networks.
#[derive(Debug, Clone)]
pub struct GreedyPolicy {
    pub mode: ControlMode,
    pub actors: Vec<DenseNetwork>,
    pub mg2_policy: Mg2Policy,
    pub t_dem_norm: f64,
}

impl GreedyPolicy {
    pub fn from_agents(agents: &[DdpgAgent], config: &TrainConfig) -> Self {
        Self {
            mode: config.mode,
            actors: agents.iter().map(|a| a.policy().clone()).collect(),
            mg2_policy: config.mg2_policy,
            t_dem_norm: config.t_dem_norm,
        }
    }
}

impl Controller for GreedyPolicy {
    fn act(&mut self, input: &ControlInput, plant: &PlantModel) -> [f64; 2] {
        let observation = Observation { t_dem_nm: input.t_dem_nm, soc: input.soc };
        let obs_n = normalize_observation(&observation, self.t_dem_norm);
        let outputs: Vec<Vec<f64>> = self
            .actors
            .iter()
            .map(|actor| actor.forward(&obs_n).expect("observation matches actor input"))
            .collect();
        let mg2 = resolve_mg2_constant(&self.mg2_policy, &observation, &plant.params);
        assemble_action(self.mode, &outputs, mg2).expect("actor count matches mode")
    }

    fn name(&self) -> &'static str {
        match self.mode {
            ControlMode::Single => "single-agent",
            ControlMode::Multi => "multi-agent",
        }
    }
}

/// One row of an exported episode trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub time_s: usize,
    pub v_mps: f64,
    pub t_dem_nm: f64,
    pub mode: DriveMode,
    pub soc: f64,
    pub fuel_rate_g_per_s: f64,
    pub loss_eng_w: f64,
    pub loss_batt_w: f64,
    pub saturation: SaturationFlags,
}

/// Deterministic rollout of a controller over one cycle (no exploration, no
/// learning). Returns the episode metrics and the full trace.
pub fn evaluate(
    plant: &PlantModel,
    env_config: &EnvConfig,
    cycle: DriveCycle,
    soc_initial: f64,
    controller: &mut dyn Controller,
) -> Result<(EpisodeMetrics, Vec<TraceRow>), TrainError> {
    let mut env = EmsEnv::new(plant.clone(), env_config.clone(), cycle, soc_initial, 0)?;
    controller.reset_episode();
    let mut trace = Vec::new();
    while !env.is_done() {
        let input = env.control_input();
        let time_s = env.time_s();
        let action = controller.act(&input, plant);
        let outcome = env.step(action)?;
        trace.push(TraceRow {
            time_s,
            v_mps: input.v_mps,
            t_dem_nm: input.t_dem_nm,
            mode: outcome.mode,
            soc: outcome.soc,
            fuel_rate_g_per_s: outcome.fuel_rate_g_per_s,
            loss_eng_w: outcome.loss_eng_w,
            loss_batt_w: outcome.loss_batt_w,
            saturation: outcome.saturation,
        });
    }
    let metrics = env.finalize()?;
    Ok((metrics, trace))
}
