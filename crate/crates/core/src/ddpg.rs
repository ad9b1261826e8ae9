//! One deterministic policy-gradient learning agent: replay memory,
//! Ornstein-Uhlenbeck exploration, TD-target construction from the target
//! networks, critic/actor updates, and target maintenance.

use crate::nn::{
    apply_update, gradients, AdamState, DenseNetwork, LossSpec, NnError, OutputActivation,
};
use crate::rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};

/// One (state, action, reward, next-state) record in the replay memory.
/// States are normalized observations; actions are raw agent outputs in
/// [-1, 1] per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

impl Transition {
    pub fn is_finite(&self) -> bool {
        self.state.iter().all(|x| x.is_finite())
            && self.action.iter().all(|x| x.is_finite())
            && self.reward.is_finite()
            && self.next_state.iter().all(|x| x.is_finite())
    }
}

/// Ring buffer with FIFO eviction and uniform with-replacement sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    storage: Vec<Transition>,
    capacity: usize,
    next: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { storage: Vec::with_capacity(capacity.min(1 << 20)), capacity, next: 0, inserted: 0 }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total_inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(&mut self, t: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.next] = t;
            self.next = (self.next + 1) % self.capacity;
        }
        self.inserted += 1;
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.storage[i]
    }

    pub fn contains(&self, t: &Transition) -> bool {
        self.storage.iter().any(|s| s == t)
    }

    /// Uniform sampling with replacement across the stored window.
    pub fn sample_indices(
        &self,
        generator: &mut impl Rng,
        n: usize,
    ) -> Result<Vec<usize>, AgentError> {
        if self.storage.len() < n {
            return Err(AgentError::BufferTooSmall { have: self.storage.len(), need: n });
        }
        Ok((0..n).map(|_| generator.gen_range(0..self.storage.len())).collect())
    }
}

/// Ornstein-Uhlenbeck parameters: a' = a·(1 − decay·dt) + sigma·√dt·N(0,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuConfig {
    /// Decay rate (how strongly the process reverts), 1/s.
    pub decay: f64,
    /// Noise variation, action units per √s.
    pub sigma: f64,
    pub dt: f64,
}

impl Default for OuConfig {
    fn default() -> Self {
        Self { decay: 0.2, sigma: 0.1, dt: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct OuNoise {
    pub config: OuConfig,
    value: Vec<f64>,
}

impl OuNoise {
    pub fn new(config: OuConfig, dims: usize) -> Self {
        Self { config, value: vec![0.0; dims] }
    }

    pub fn reset(&mut self) {
        self.value.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn value(&self) -> &[f64] {
        &self.value
    }

    pub fn set_value(&mut self, v: &[f64]) {
        self.value.copy_from_slice(v);
    }

    /// Advances the process one step per dimension and returns the new value.
    pub fn step(&mut self, generator: &mut impl Rng) -> &[f64] {
        let c = self.config;
        let keep = 1.0 - c.decay * c.dt;
        let scale = c.sigma * c.dt.sqrt();
        for v in &mut self.value {
            let w: f64 = generator.sample(StandardNormal);
            *v = *v * keep + scale * w;
        }
        &self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub gamma: f64,
    pub batch_size: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// L2 regularization factor for both networks.
    pub l2: f64,
    pub tau: f64,
    pub actor_hidden_layers: usize,
    pub critic_hidden_layers: usize,
    pub hidden_width: usize,
    pub buffer_capacity: usize,
    /// Environment steps before updates begin.
    pub warmup_steps: u64,
    pub ou: OuConfig,
    /// Linear exploration anneal over this many episodes; off by default.
    pub noise_anneal_episodes: Option<u32>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            obs_dim: 2,
            action_dim: 1,
            gamma: 0.99,
            batch_size: 64,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            l2: 1e-4,
            tau: 0.005,
            actor_hidden_layers: 3,
            critic_hidden_layers: 3,
            hidden_width: 64,
            buffer_capacity: 100_000,
            warmup_steps: 1000,
            ou: OuConfig::default(),
            noise_anneal_episodes: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: String| Err(AgentError::BadConfig(m));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma {} outside [0, 1)", self.gamma));
        }
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return bad(format!(
                "batch size {} must be in 1..=capacity ({})",
                self.batch_size, self.buffer_capacity
            ));
        }
        if !(self.ou.decay > 0.0) || self.ou.sigma < 0.0 || !(self.ou.dt > 0.0) {
            return bad(format!("noise parameters decay={} sigma={}", self.ou.decay, self.ou.sigma));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau {} outside [0, 1]", self.tau));
        }
        if self.obs_dim == 0 || self.action_dim == 0 || self.hidden_width == 0 {
            return bad("zero dimension".into());
        }
        if self.actor_hidden_layers == 0 || self.critic_hidden_layers == 0 {
            return bad("networks need at least one hidden layer".into());
        }
        Ok(())
    }

    pub fn actor_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.obs_dim];
        s.extend(std::iter::repeat(self.hidden_width).take(self.actor_hidden_layers));
        s.push(self.action_dim);
        s
    }

    pub fn critic_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.obs_dim + self.action_dim];
        s.extend(std::iter::repeat(self.hidden_width).take(self.critic_hidden_layers));
        s.push(1);
        s
    }
}

#[derive(Debug)]
pub enum AgentError {
    BufferTooSmall { have: usize, need: usize },
    NonFiniteTransition,
    /// A training update produced a non-finite loss; carries a diagnostic
    /// dump of the offending batch.
    NonFiniteLoss { diagnostics: String },
    BadConfig(String),
    Nn(NnError),
}

impl fmt::Display for AgentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentError::BufferTooSmall { have, need } => {
                write!(f, "replay buffer holds {have} transitions, need {need}")
            }
            AgentError::NonFiniteTransition => write!(f, "transition has non-finite components"),
            AgentError::NonFiniteLoss { diagnostics } => {
                write!(f, "non-finite loss during update: {diagnostics}")
            }
            AgentError::BadConfig(m) => write!(f, "agent config: {m}"),
            AgentError::Nn(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AgentError {}

impl From<NnError> for AgentError {
    fn from(e: NnError) -> Self {
        AgentError::Nn(e)
    }
}

/// TD regression targets y = r + γ·Q′(s′, π′(s′)), masked to y = r on
/// terminal transitions. Takes the *target* networks by signature so the
/// online networks cannot leak into the target.
pub fn td_targets(
    critic_target: &DenseNetwork,
    actor_target: &DenseNetwork,
    rewards: &[f64],
    next_states: &[Vec<f64>],
    dones: &[bool],
    gamma: f64,
) -> Result<Vec<f64>, NnError> {
    let mut out = Vec::with_capacity(rewards.len());
    for i in 0..rewards.len() {
        if dones[i] {
            out.push(rewards[i]);
        } else {
            let a = actor_target.forward(&next_states[i])?;
            let mut joint = next_states[i].clone();
            joint.extend_from_slice(&a);
            let q = critic_target.forward(&joint)?[0];
            out.push(rewards[i] + gamma * q);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainDiagnostics {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub config: AgentConfig,
    actor: DenseNetwork,
    critic: DenseNetwork,
    actor_target: DenseNetwork,
    critic_target: DenseNetwork,
    actor_opt: AdamState,
    critic_opt: AdamState,
    buffer: ReplayBuffer,
    noise: OuNoise,
    noise_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    env_steps: u64,
    train_steps: u64,
    noise_scale: f64,
}

impl DdpgAgent {
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self, AgentError> {
        Self::with_streams(
            config,
            rng::sub_seed(seed, "net-init"),
            rng::sub_seed(seed, "ou-noise"),
            rng::sub_seed(seed, "minibatch"),
        )
    }

    /// Explicit control over the three random streams. The coordinator gives
    /// both hand-shaking agents the *same* minibatch seed so their updates
    /// draw the same sampled time indices.
    pub fn with_streams(
        config: AgentConfig,
        init_seed: u64,
        noise_seed: u64,
        sample_seed: u64,
    ) -> Result<Self, AgentError> {
        config.validate()?;
        let mut init_rng = rng::stream(init_seed, "net-init");
        let actor =
            DenseNetwork::new(&config.actor_sizes(), OutputActivation::Tanh, &mut init_rng);
        let critic =
            DenseNetwork::new(&config.critic_sizes(), OutputActivation::Linear, &mut init_rng);
        let actor_target = actor.clone();
        let critic_target = critic.clone();
        let actor_opt = AdamState::new(config.actor_lr, 0.0, &actor);
        let critic_opt = AdamState::new(config.critic_lr, 0.0, &critic);
        let buffer = ReplayBuffer::new(config.buffer_capacity);
        let noise = OuNoise::new(config.ou, config.action_dim);
        Ok(Self {
            noise_rng: rng::stream(noise_seed, "ou-noise"),
            sample_rng: rng::stream(sample_seed, "minibatch"),
            config,
            actor,
            critic,
            actor_target,
            critic_target,
            actor_opt,
            critic_opt,
            buffer,
            noise,
            env_steps: 0,
            train_steps: 0,
            noise_scale: 1.0,
        })
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn policy(&self) -> &DenseNetwork {
        &self.actor
    }

    pub fn critic(&self) -> &DenseNetwork {
        &self.critic
    }

    pub fn targets(&self) -> (&DenseNetwork, &DenseNetwork) {
        (&self.actor_target, &self.critic_target)
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    /// Resets the noise state at an episode boundary and applies the linear
    /// anneal schedule when configured.
    pub fn begin_episode(&mut self, episode: u32) {
        self.noise.reset();
        if let Some(n) = self.config.noise_anneal_episodes {
            self.noise_scale = (1.0 - episode as f64 / n as f64).max(0.0);
        }
    }

    /// Greedy policy output, plus an OU sample when exploring; clamped to the
    /// raw action range.
    pub fn act(&mut self, obs: &[f64], explore: bool) -> Vec<f64> {
        let mut a = self.actor.forward(obs).expect("observation matches actor input");
        if explore {
            let n = self.noise.step(&mut self.noise_rng);
            for (ai, ni) in a.iter_mut().zip(n) {
                *ai += self.noise_scale * ni;
            }
        }
        for ai in &mut a {
            *ai = ai.clamp(-1.0, 1.0);
        }
        a
    }

    pub fn remember(&mut self, t: Transition) -> Result<(), AgentError> {
        if !t.is_finite() {
            return Err(AgentError::NonFiniteTransition);
        }
        self.buffer.push(t);
        self.env_steps += 1;
        Ok(())
    }

    /// True once the warmup has elapsed and a minibatch can be drawn.
    pub fn ready(&self) -> bool {
        self.env_steps >= self.config.warmup_steps && self.buffer.len() >= self.config.batch_size
    }

    /// One critic update (mean squared TD error + L2), one actor update
    /// (ascending the critic), then soft-updates of both targets.
    pub fn train_step(&mut self) -> Result<TrainDiagnostics, AgentError> {
        let n = self.config.batch_size;
        let idx = self.buffer.sample_indices(&mut self.sample_rng, n)?;
        let mut states = Vec::with_capacity(n);
        let mut joint_inputs = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        let mut next_states = Vec::with_capacity(n);
        let mut dones = Vec::with_capacity(n);
        for &i in &idx {
            let t = self.buffer.get(i);
            states.push(t.state.clone());
            let mut joint = t.state.clone();
            joint.extend_from_slice(&t.action);
            joint_inputs.push(joint);
            rewards.push(t.reward);
            next_states.push(t.next_state.clone());
            dones.push(t.done);
        }

        let targets = td_targets(
            &self.critic_target,
            &self.actor_target,
            &rewards,
            &next_states,
            &dones,
            self.config.gamma,
        )?;

        let critic_spec =
            LossSpec::CriticTd { inputs: &joint_inputs, targets: &targets, l2: self.config.l2 };
        let (critic_grads, critic_loss) =
            gradients(&self.critic, &critic_spec).map_err(|e| self.dump_on_nonfinite(e, &rewards))?;
        apply_update(&mut self.critic, &mut self.critic_opt, &critic_grads);

        let actor_spec =
            LossSpec::ActorObjective { critic: &self.critic, states: &states, l2: self.config.l2 };
        let (actor_grads, actor_objective) =
            gradients(&self.actor, &actor_spec).map_err(|e| self.dump_on_nonfinite(e, &rewards))?;
        apply_update(&mut self.actor, &mut self.actor_opt, &actor_grads);

        self.actor_target.soft_update_from(&self.actor, self.config.tau)?;
        self.critic_target.soft_update_from(&self.critic, self.config.tau)?;
        self.train_steps += 1;
        Ok(TrainDiagnostics { critic_loss, actor_objective })
    }

    fn dump_on_nonfinite(&self, e: NnError, rewards: &[f64]) -> AgentError {
        match e {
            NnError::NonFiniteLoss { detail } => {
                let rmin = rewards.iter().cloned().fold(f64::INFINITY, f64::min);
                let rmax = rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                AgentError::NonFiniteLoss {
                    diagnostics: format!(
                        "{detail}; batch rewards in [{rmin}, {rmax}]; train_steps={}",
                        self.train_steps
                    ),
                }
            }
            other => AgentError::Nn(other),
        }
    }

    // --- checkpoint ---------------------------------------------------------
    // magic, JSON header (config, counters, RNG streams, buffer summary),
    // then actor/critic/targets and both optimizer moment blocks. Replay
    // contents are summarized, not serialized: a resumed run re-fills its
    // buffer (and re-applies warmup).

    const MAGIC: &'static [u8; 8] = b"EMSAGT1\0";

    pub fn save(&self, w: &mut impl Write) -> Result<(), AgentError> {
        #[derive(Serialize)]
        struct Header<'a> {
            config: &'a AgentConfig,
            env_steps: u64,
            train_steps: u64,
            noise_scale: f64,
            noise_value: &'a [f64],
            buffer_len: usize,
            buffer_capacity: usize,
            buffer_total_inserted: u64,
            noise_rng: RngState,
            sample_rng: RngState,
            actor_opt_step: u64,
            critic_opt_step: u64,
        }
        let header = Header {
            config: &self.config,
            env_steps: self.env_steps,
            train_steps: self.train_steps,
            noise_scale: self.noise_scale,
            noise_value: self.noise.value(),
            buffer_len: self.buffer.len(),
            buffer_capacity: self.buffer.capacity(),
            buffer_total_inserted: self.buffer.total_inserted(),
            noise_rng: RngState::of(&self.noise_rng),
            sample_rng: RngState::of(&self.sample_rng),
            actor_opt_step: self.actor_opt.step,
            critic_opt_step: self.critic_opt.step,
        };
        let json = serde_json::to_vec(&header)
            .map_err(|e| AgentError::Nn(NnError::Checkpoint(e.to_string())))?;
        w.write_all(Self::MAGIC).map_err(|e| AgentError::Nn(NnError::Io(e)))?;
        w.write_all(&(json.len() as u32).to_le_bytes())
            .map_err(|e| AgentError::Nn(NnError::Io(e)))?;
        w.write_all(&json).map_err(|e| AgentError::Nn(NnError::Io(e)))?;
        for net in [&self.actor, &self.critic, &self.actor_target, &self.critic_target] {
            net.write_to(w)?;
        }
        for opt in [&self.actor_opt, &self.critic_opt] {
            let (m, v) = opt.moments();
            write_grads(w, m)?;
            write_grads(w, v)?;
        }
        Ok(())
    }

    pub fn load(r: &mut impl Read) -> Result<Self, AgentError> {
        #[derive(Deserialize)]
        struct Header {
            config: AgentConfig,
            env_steps: u64,
            train_steps: u64,
            noise_scale: f64,
            noise_value: Vec<f64>,
            #[allow(dead_code)]
            buffer_len: usize,
            buffer_capacity: usize,
            #[allow(dead_code)]
            buffer_total_inserted: u64,
            noise_rng: RngState,
            sample_rng: RngState,
            actor_opt_step: u64,
            critic_opt_step: u64,
        }
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| AgentError::Nn(NnError::Io(e)))?;
        if &magic != Self::MAGIC {
            return Err(AgentError::Nn(NnError::Checkpoint("bad agent magic".into())));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(|e| AgentError::Nn(NnError::Io(e)))?;
        let len = u32::from_le_bytes(b4) as usize;
        let mut json = vec![0u8; len];
        r.read_exact(&mut json).map_err(|e| AgentError::Nn(NnError::Io(e)))?;
        let header: Header = serde_json::from_slice(&json)
            .map_err(|e| AgentError::Nn(NnError::Checkpoint(e.to_string())))?;

        let actor = DenseNetwork::read_from(r)?;
        let critic = DenseNetwork::read_from(r)?;
        let actor_target = DenseNetwork::read_from(r)?;
        let critic_target = DenseNetwork::read_from(r)?;
        let mut actor_opt = AdamState::new(header.config.actor_lr, 0.0, &actor);
        let mut critic_opt = AdamState::new(header.config.critic_lr, 0.0, &critic);
        {
            let (m, v) = actor_opt.moments_mut();
            read_grads(r, m)?;
            read_grads(r, v)?;
        }
        {
            let (m, v) = critic_opt.moments_mut();
            read_grads(r, m)?;
            read_grads(r, v)?;
        }
        actor_opt.step = header.actor_opt_step;
        critic_opt.step = header.critic_opt_step;

        let mut noise = OuNoise::new(header.config.ou, header.config.action_dim);
        noise.set_value(&header.noise_value);
        Ok(Self {
            buffer: ReplayBuffer::new(header.buffer_capacity),
            noise,
            noise_rng: header.noise_rng.restore(),
            sample_rng: header.sample_rng.restore(),
            config: header.config,
            actor,
            critic,
            actor_target,
            critic_target,
            actor_opt,
            critic_opt,
            env_steps: header.env_steps,
            train_steps: header.train_steps,
            noise_scale: header.noise_scale,
        })
    }
}

/// Serializable ChaCha stream position.
#[derive(Serialize, Deserialize)]
struct RngState {
    seed: [u8; 32],
    stream: u64,
    word_pos: u128,
}

impl RngState {
    fn of(r: &ChaCha8Rng) -> Self {
        Self { seed: r.get_seed(), stream: r.get_stream(), word_pos: r.get_word_pos() }
    }

    fn restore(&self) -> ChaCha8Rng {
        use rand_chacha::rand_core::SeedableRng;
        let mut r = ChaCha8Rng::from_seed(self.seed);
        r.set_stream(self.stream);
        r.set_word_pos(self.word_pos);
        r
    }
}

fn write_grads(w: &mut impl Write, g: &crate::nn::Grads) -> Result<(), AgentError> {
    for layer in g.weights.iter().chain(g.biases.iter()) {
        for v in layer {
            w.write_all(&v.to_bits().to_le_bytes()).map_err(|e| AgentError::Nn(NnError::Io(e)))?;
        }
    }
    Ok(())
}

fn read_grads(r: &mut impl Read, g: &mut crate::nn::Grads) -> Result<(), AgentError> {
    let mut b8 = [0u8; 8];
    for layer in g.weights.iter_mut().chain(g.biases.iter_mut()) {
        for v in layer.iter_mut() {
            r.read_exact(&mut b8).map_err(|e| AgentError::Nn(NnError::Io(e)))?;
            *v = f64::from_bits(u64::from_le_bytes(b8));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transition(r: f64) -> Transition {
        Transition {
            state: vec![0.1, 0.2],
            action: vec![0.3],
            reward: r,
            next_state: vec![0.2, 0.3],
            done: false,
        }
    }

    fn small_config() -> AgentConfig {
        AgentConfig {
            hidden_width: 8,
            batch_size: 4,
            buffer_capacity: 64,
            warmup_steps: 0,
            ..AgentConfig::default()
        }
    }

    #[test]
    fn fifo_eviction_drops_the_oldest() {
        let mut b = ReplayBuffer::new(3);
        for k in 0..4 {
            b.push(transition(k as f64));
        }
        assert_eq!(b.len(), 3);
        assert!(!b.contains(&transition(0.0)));
        assert!(b.contains(&transition(1.0)));
        assert!(b.contains(&transition(3.0)));
    }

    #[test]
    fn singleton_buffer_samples_its_element() {
        let mut b = ReplayBuffer::new(5);
        b.push(transition(7.0));
        let mut generator = rng::stream(0, "t");
        let idx = b.sample_indices(&mut generator, 1).unwrap();
        assert_eq!(idx, vec![0]);
        assert!(b.sample_indices(&mut generator, 2).is_err());
    }

    #[test]
    fn sampling_is_uniform_within_3_sigma() {
        // 10^5 draws from a 10-element buffer; per-element count is
        // Binomial(1e5, 0.1): mean 1e4, sigma ~94.9
        let mut b = ReplayBuffer::new(10);
        for k in 0..10 {
            b.push(transition(k as f64));
        }
        let mut generator = rng::stream(42, "uniformity");
        let mut counts = [0u32; 10];
        for _ in 0..10_000 {
            for i in b.sample_indices(&mut generator, 10).unwrap() {
                counts[i] += 1;
            }
        }
        let sigma = (100_000.0f64 * 0.1 * 0.9).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - 10_000.0).abs();
            assert!(dev < 3.0 * sigma, "index {i} count {c} deviates {dev}");
        }
    }

    #[test]
    fn ou_pure_decay_without_noise() {
        let mut n = OuNoise::new(OuConfig { decay: 0.2, sigma: 0.0, dt: 1.0 }, 1);
        n.set_value(&[1.0]);
        let mut generator = rng::stream(0, "ou");
        for k in 1..=10 {
            let v = n.step(&mut generator)[0];
            assert!((v - 0.8f64.powi(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_noise_chain_is_reproducible() {
        let config = OuConfig::default();
        let run = |seed| {
            let mut n = OuNoise::new(config, 2);
            let mut generator = rng::stream(seed, "ou-noise");
            (0..50).map(|_| n.step(&mut generator).to_vec()).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn greedy_policy_is_deterministic() {
        let mut agent = DdpgAgent::new(small_config(), 3).unwrap();
        let a = agent.act(&[0.3, 0.4], false);
        let b = agent.act(&[0.3, 0.4], false);
        assert_eq!(a, b);
        assert!(a[0] > -1.0 && a[0] < 1.0);
    }

    #[test]
    fn zero_sigma_exploration_decays_to_greedy() {
        let mut config = small_config();
        config.ou = OuConfig { decay: 0.5, sigma: 0.0, dt: 1.0 };
        let mut agent = DdpgAgent::new(config, 3).unwrap();
        let greedy = agent.act(&[0.1, 0.2], false);
        // noise state starts at zero, so even "exploring" actions are greedy
        let explored = agent.act(&[0.1, 0.2], true);
        assert_eq!(greedy, explored);
    }

    #[test]
    fn myopic_targets_equal_rewards() {
        let agent = DdpgAgent::new(small_config(), 1).unwrap();
        let (actor_t, critic_t) = (agent.targets().0, agent.targets().1);
        let rewards = [1.5, -2.0];
        let next = vec![vec![0.0, 0.0], vec![0.1, 0.1]];
        let dones = [false, false];
        let y = td_targets(critic_t, actor_t, &rewards, &next, &dones, 0.0).unwrap();
        assert_eq!(y, vec![1.5, -2.0]);
    }

    #[test]
    fn terminal_transitions_mask_the_bootstrap() {
        let agent = DdpgAgent::new(small_config(), 1).unwrap();
        let (actor_t, critic_t) = agent.targets();
        let y = td_targets(
            critic_t,
            actor_t,
            &[3.0],
            &[vec![0.5, 0.5]],
            &[true],
            0.99,
        )
        .unwrap();
        assert_eq!(y, vec![3.0]);
    }

    #[test]
    fn td_targets_use_target_networks_not_online() {
        // train a few steps so online and target networks diverge, then check
        // the targets are computed from the target pair exactly
        let mut agent = DdpgAgent::new(small_config(), 5).unwrap();
        let mut generator = rng::stream(1, "fill");
        for _ in 0..32 {
            let t = Transition {
                state: vec![generator.gen_range(-1.0..1.0), generator.gen_range(0.0..1.0)],
                action: vec![generator.gen_range(-1.0..1.0)],
                reward: generator.gen_range(-1.0..0.0),
                next_state: vec![generator.gen_range(-1.0..1.0), generator.gen_range(0.0..1.0)],
                done: false,
            };
            agent.remember(t).unwrap();
        }
        for _ in 0..20 {
            agent.train_step().unwrap();
        }
        let (actor_t, critic_t) = agent.targets();
        assert!(agent.policy().max_param_distance(actor_t) > 0.0);

        let next = vec![vec![0.25, 0.5]];
        let y = td_targets(critic_t, actor_t, &[1.0], &next, &[false], 0.9).unwrap();
        let a_t = actor_t.forward(&next[0]).unwrap();
        let mut joint = next[0].clone();
        joint.extend_from_slice(&a_t);
        let expected = 1.0 + 0.9 * critic_t.forward(&joint).unwrap()[0];
        assert_eq!(y[0], expected);

        // the online pair gives a different number once the nets diverged
        let a_on = agent.policy().forward(&next[0]).unwrap();
        let mut joint_on = next[0].clone();
        joint_on.extend_from_slice(&a_on);
        let online = 1.0 + 0.9 * agent.critic().forward(&joint_on).unwrap()[0];
        assert_ne!(y[0], online);
    }

    #[test]
    fn critic_loss_decreases_on_a_fixed_batch_with_small_lr() {
        let mut config = small_config();
        config.critic_lr = 1e-5;
        config.actor_lr = 0.0; // hold the actor still
        config.tau = 0.0; // hold the targets still
        let mut agent = DdpgAgent::new(config, 7).unwrap();
        for k in 0..4 {
            agent
                .remember(Transition {
                    state: vec![0.1 * k as f64, 0.5],
                    action: vec![0.2],
                    reward: -1.0,
                    next_state: vec![0.1 * k as f64 + 0.05, 0.5],
                    done: false,
                })
                .unwrap();
        }
        // batch = whole buffer of 4, so every step sees the same data
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            let d = agent.train_step().unwrap();
            assert!(d.critic_loss <= last + 1e-12, "loss rose: {} -> {}", last, d.critic_loss);
            last = d.critic_loss;
        }
    }

    #[test]
    fn non_finite_transition_is_rejected() {
        let mut agent = DdpgAgent::new(small_config(), 2).unwrap();
        let mut t = transition(0.0);
        t.reward = f64::NAN;
        assert!(matches!(agent.remember(t), Err(AgentError::NonFiniteTransition)));
    }

    #[test]
    fn checkpoint_restores_networks_and_rng_bitwise() {
        let mut agent = DdpgAgent::new(small_config(), 11).unwrap();
        let mut generator = rng::stream(4, "fill");
        for _ in 0..16 {
            agent
                .remember(Transition {
                    state: vec![generator.gen_range(-1.0..1.0), 0.3],
                    action: vec![generator.gen_range(-1.0..1.0)],
                    reward: -0.5,
                    next_state: vec![generator.gen_range(-1.0..1.0), 0.3],
                    done: false,
                })
                .unwrap();
        }
        for _ in 0..5 {
            agent.train_step().unwrap();
        }
        let mut buf = Vec::new();
        agent.save(&mut buf).unwrap();
        let mut restored = DdpgAgent::load(&mut buf.as_slice()).unwrap();
        assert_eq!(restored.policy(), agent.policy());
        assert_eq!(restored.critic(), agent.critic());
        assert_eq!(restored.targets().0, agent.targets().0);
        assert_eq!(restored.train_steps(), agent.train_steps());
        // identical exploration stream continues after restore
        let a = agent.act(&[0.2, 0.4], true);
        let b = restored.act(&[0.2, 0.4], true);
        assert_eq!(a, b);
    }

    #[test]
    fn ou_statistics_match_closed_forms() {
        // lag-1 autocorrelation = 1 - decay*dt, stationary variance =
        // sigma^2 dt / (1 - (1-decay*dt)^2), checked over a long chain
        let config = OuConfig { decay: 0.2, sigma: 0.1, dt: 1.0 };
        let mut n = OuNoise::new(config, 1);
        let mut generator = rng::stream(77, "ou-stats");
        let total = 1_000_000usize;
        let burn = 10_000usize;
        let mut xs = Vec::with_capacity(total);
        for _ in 0..burn {
            n.step(&mut generator);
        }
        for _ in 0..total {
            xs.push(n.step(&mut generator)[0]);
        }
        let mean = xs.iter().sum::<f64>() / total as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / total as f64;
        let mut lag = 0.0;
        for i in 1..total {
            lag += (xs[i] - mean) * (xs[i - 1] - mean);
        }
        lag /= (total - 1) as f64 * var;
        let phi = 1.0 - config.decay * config.dt;
        let expected_var = config.sigma * config.sigma * config.dt / (1.0 - phi * phi);
        assert!((lag - phi).abs() < 0.01, "lag-1 {lag} vs {phi}");
        assert!((var - expected_var).abs() / expected_var < 0.05, "var {var} vs {expected_var}");
    }
}
